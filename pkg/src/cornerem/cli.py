"""Command-line entry point.

Every subcommand builds a JSON report with a list of named checks.  Exit
status: 0 when every check passes, 2 when some check fails (the failing
names are listed under "failures"), 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .admissibility import classify_expansion, classify_taylor
from .cgo import (
    Grid,
    MediumProfile,
    NonContraction,
    contraction_threshold,
    decay_sweep,
    factorization_residual,
    helmholtz_zeta,
    neumann_cgo,
    z0_from_constants,
)
from .evidence import (
    CgoPair,
    CornerConfig,
    I0_scaling,
    contradiction_report,
    layered_pair,
    ortho_identity_check,
    plane_wave_pair,
    report_csv,
)
from .orthant_laplace import (
    divides_sigma,
    divisibility_by_pattern,
    laplace_exact,
    laplace_poly,
    laplace_via_I,
    orthant_quadrature,
    sample_cone,
)
from .polycore import ContractViolation, HomoPoly, parse_vec
from .wavefields import FieldExpansion, TaylorField, WaveParams

log = logging.getLogger("cornerem")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers


def pretty_poly(p: HomoPoly) -> str:
    """Human-readable form such as "x1^2*x3 - 2*x2^3"; "0" for the zero polynomial."""
    if p.is_zero():
        return "0"
    out = []
    for a, c in p.items():
        mono = "*".join(f"x{j + 1}" + (f"^{e}" if e > 1 else "") for j, e in enumerate(a) if e)
        if c.im == 0:
            coef = str(c.re)
        elif c.re == 0:
            coef = f"{c.im}i"
        else:
            coef = f"({c.re}{'+' if c.im > 0 else ''}{c.im}i)"
        if mono and coef in ("1", "-1"):
            term = ("-" if coef == "-1" else "") + mono
        else:
            term = coef + ("*" + mono if mono else "")
        out.append(term)
    s = " + ".join(out)
    return s.replace("+ -", "- ")


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1] if len(v) > 1 else 0.0)
    return complex(v)


def _read_json(path: str) -> Any:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc})") from exc


def _medium_from_json(data: dict, grid: Grid) -> MediumProfile:
    try:
        return MediumProfile.bump(
            grid,
            gamma_amp=_complex(data.get("gamma_amp", 0.5)),
            mu_amp=_complex(data.get("mu_amp", 0.3)),
            center=tuple(data.get("center", (0.0, 0.0, 0.0))),
            width=data.get("radius"),
            mu_center=tuple(data["mu_center"]) if "mu_center" in data else None,
            eps0=float(data.get("eps0", 1.0)),
            mu0=float(data.get("mu0", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad medium profile: {exc}") from exc


class Report:
    def __init__(self, command: str, seed: int | None):
        self.data: dict[str, Any] = {"command": command, "version": __version__, "seed": seed, "checks": []}

    def check(self, name: str, tag: str, passed: bool, value=None, threshold=None) -> None:
        self.data["checks"].append(
            {"name": name, "tag": tag, "passed": bool(passed), "value": value, "threshold": threshold}
        )

    @property
    def failures(self) -> list[str]:
        return [c["name"] for c in self.data["checks"] if not c["passed"]]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args, rep: Report) -> None:
    if args.taylor:
        data = _read_json(args.taylor)
        try:
            E = TaylorField.from_json(data["E"])
            H = TaylorField.from_json(data["H"]) if "H" in data else TaylorField(E.max_degree)
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(f"{args.taylor}: bad Taylor data ({exc})") from exc
        v = classify_taylor(E, H, args.tol)
        rep.data["route"] = "taylor"
    else:
        data = _read_json(args.expansion)
        try:
            F = FieldExpansion.from_json(data)
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(f"{args.expansion}: bad expansion ({exc})") from exc
        v = classify_expansion(F, WaveParams(args.omega))
        rep.data["route"] = "expansion"
    rep.data["verdict"] = v.to_json()
    if args.expect:
        rep.check("verdict-matches-expectation", "classification", v.status == args.expect, v.status, args.expect)
    print(f"verdict: {v.status}  N = {v.N}  S = {','.join(v.S)}")


def cmd_laplace(args, rep: Report) -> None:
    text = Path(args.poly).read_text() if Path(args.poly).is_file() else None
    if text is None:
        raise UsageError(f"file not found: {args.poly}")
    try:
        P = parse_vec(text)
    except ValueError as exc:
        raise UsageError(f"{args.poly}: {exc}") from exc
    try:
        q = laplace_poly(P)
    except ContractViolation as exc:
        raise UsageError(str(exc)) from exc
    ok, C = divides_sigma(q)
    rep.data.update(
        degree=P.degree,
        laplace=pretty_poly(q),
        divisible=ok,
        quotient=pretty_poly(C) if ok else None,
    )
    print(f"I[P] = {pretty_poly(q)}")
    print(f"divisible by sigma: {str(ok).lower()}" + (f"  quotient: {pretty_poly(C)}" if ok else ""))
    if P.degree >= 1:
        try:
            pred = divisibility_by_pattern(P)
        except ContractViolation as exc:
            rep.data["pattern"] = {"skipped": str(exc)}
        else:
            rep.data["pattern"] = {"predicted": pred}
            rep.check("pattern-agrees-with-exact", "divisibility-equivalence", pred == ok, pred, ok)
    if args.zeta_samples:
        rng = np.random.default_rng(rep.data["seed"])
        worst = 0.0
        for _ in range(args.zeta_samples):
            z = sample_cone(rng)
            E0 = z / np.linalg.norm(z)
            ex = laplace_exact(P, E0, z)
            via = laplace_via_I(P, z) / np.linalg.norm(z)
            X, W = orthant_quadrature(z, 300.0)
            vals = P.evaluate(X) @ E0
            num = complex(np.sum(W * vals))
            # absolute integrand sets the scale, since the exact value may vanish
            scale = float(np.sum(np.abs(W * vals)))
            worst = max(worst, abs(ex - via) / scale, abs(num - ex) / scale)
        rep.check("exact-vs-rho-form-vs-quadrature", "orthant-laplace", worst < 1e-8, worst, 1e-8)


def cmd_cgo_verify(args, rep: Report) -> None:
    grid = Grid(args.grid)
    medium = _medium_from_json(_read_json(args.medium), grid) if args.medium else MediumProfile.bump(grid)
    ratios = _read_json(args.zeta_sweep).get("ratios") if args.zeta_sweep else [8, 16, 32, 64]
    if not ratios:
        raise UsageError("zeta sweep needs a non-empty 'ratios' list")
    rng = np.random.default_rng(rep.data["seed"])
    fac = factorization_residual(medium, args.omega, trials=args.trials, rng=rng)
    rep.check("factorization-identities", "cgo-factorization", fac["max"] < 1e-8, fac["max"], 1e-8)
    thr = contraction_threshold(medium, args.omega, rng=rng)
    if min(ratios) < thr["ratio"]:
        log.warning("smallest sweep ratio %g is below the contraction threshold %g", min(ratios), thr["ratio"])
    sweep = decay_sweep(medium, args.omega, ratios, p=args.p)
    rows = sweep["rows"]
    rep.data.update(medium=medium.params, factorization=fac, contraction_threshold=thr, sweep=sweep)
    rep.check("side-conditions", "cgo-side-conditions", all(r["side_ok"] for r in rows), max(max(r["side_h"], r["side_e"]) for r in rows), 1e-8)
    r_max = max(max(r["maxwell_r1"], r["maxwell_r2"]) for r in rows)
    rep.check("conjugated-maxwell-residual", "cgo-maxwell", r_max < 1e-6, r_max, 1e-6)
    slope = sweep["fit"]["slope"]
    rep.check("remainder-decay-slope", "cgo-remainder-decay", slope <= -3.0 / args.p, slope, -3.0 / args.p)
    print(f"factorization residual {fac['max']:.2e}; remainder slope {slope:.3f} (bound {-3.0 / args.p:.3f})")


def cmd_ortho_check(args, rep: Report) -> None:
    params = WaveParams(args.omega)
    grid = Grid(args.grid)
    medium = _medium_from_json(_read_json(args.medium), grid) if args.medium else MediumProfile.bump(grid, 0.5 + 0.1j, 0.3, (0.2, 0.1, 0.0))
    bg = plane_wave_pair([1.0, 0.0, 0.0], [0.0, 1j / np.sqrt(2), 1 / np.sqrt(2)], params)
    k = params.k
    zeta = helmholtz_zeta(args.zeta_ratio * k, k)
    eta = np.cross([1.0, 1.0, 1.0], [1.0, -1.0, 0.0])
    sol = neumann_cgo(medium, args.omega, zeta, z0_from_constants(zeta, eta / np.linalg.norm(eta), k=k))
    results = {}
    for name, pair, lo, side in (
        ("layered", layered_pair(params), (-0.5, -0.5, 0.0), 1.0),
        ("cgo", CgoPair(sol), (-0.6, -0.6, -0.6), 1.2),
    ):
        res = ortho_identity_check(bg, pair, lo=lo, side=side, panels=3)
        results[name] = res
        rep.check(f"identity-{name}", "orthogonality-identity", res["discrepancy"] < 1e-6, res["discrepancy"], 1e-6)
    # mutation: replace H by a non-solution
    cg = CgoPair(sol)
    orig = cg.fields_tensor

    def mutated(xs, ys, zs):
        E, H = orig(xs, ys, zs)
        return E, 2.0 * H

    cg.fields_tensor = mutated  # type: ignore[method-assign]
    mut = ortho_identity_check(bg, cg, lo=(-0.6, -0.6, -0.6), side=1.2, panels=3, verify=False)
    results["mutation"] = mut
    rep.check("mutation-detected", "orthogonality-identity", mut["discrepancy"] > 1e-2, mut["discrepancy"], 1e-2)
    rep.data["results"] = results
    for name, res in results.items():
        print(f"{name:10s} discrepancy {res['discrepancy']:.3e}")


def cmd_decay_sweep(args, rep: Report) -> None:
    if not Path(args.poly).is_file():
        raise UsageError(f"file not found: {args.poly}")
    try:
        P = parse_vec(Path(args.poly).read_text())
    except ValueError as exc:
        raise UsageError(f"{args.poly}: {exc}") from exc
    rng = np.random.default_rng(rep.data["seed"])
    z = sample_cone(rng)
    res = I0_scaling(P, z, radii=args.radii)
    rep.data.update(zeta_star=z, I0=res)
    if not res["witness"]:
        print(res["message"])
        return
    slope = res["fit"]["slope"]
    rep.check("quadrature-slope", "I0-homogeneity", abs(slope - res["expected_slope"]) <= 0.05, slope, res["expected_slope"])
    d = abs(complex(*res["doubling_ratio"]) - 1)
    rep.check("doubling-identity", "I0-homogeneity", d < 1e-12, d, 1e-12)
    worst = max(row["quad_vs_exact"] - row["tail_bound"] - 1e-6 * row["abs_exact"] for row in res["rows"])
    rep.check("quadrature-vs-exact", "I0-homogeneity", worst <= 0, worst, 0)
    print(f"I0 slope {slope:.4f} (expected {res['expected_slope']})")


def cmd_contradiction(args, rep: Report) -> None:
    cfg_data = _read_json(args.config) if args.config else {}
    try:
        cfg = CornerConfig(**{k: tuple(v) if isinstance(v, list) else v for k, v in cfg_data.items()})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad corner configuration: {exc}") from exc
    res = contradiction_report(cfg, args.ratios)
    rep.data["report"] = res
    rep.data["csv"] = report_csv(res)
    rep.check("not-inconclusive", "contradiction-shadow", not res["inconclusive"], res["inconclusive"], False)
    rep.check("ratio-decreasing-last3", "contradiction-shadow", res["ratio_strictly_decreasing_last3"], [r["ratio"] for r in res["rows"]], None)
    print(res["statement"])
    for r in res["rows"]:
        print(f"|zeta| {r['zeta_norm']:7.2f}  |I0| {r['abs_I0']:.3e}  ratio {r['ratio']:.4f}")


COMMANDS: dict[str, Callable] = {
    "classify": cmd_classify,
    "laplace": cmd_laplace,
    "cgo-verify": cmd_cgo_verify,
    "ortho-check": cmd_ortho_check,
    "decay-sweep": cmd_decay_sweep,
    "contradiction-report": cmd_contradiction,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cornerem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output-dir", default=None, help="write report.json (and CSV data) here")
    common.add_argument("--json", action="store_true", help="print the JSON report on standard output")
    common.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("classify", parents=[common], help="admissibility verdict")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--taylor", help="JSON with Taylor data for E (and optionally H)")
    g.add_argument("--expansion", help="JSON wavefunction expansion")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--expect", choices=["Admissible", "Inadmissible", "Undetermined"])

    p = sub.add_parser("laplace", parents=[common], help="orthant Laplace transform of a polynomial")
    p.add_argument("--poly", required=True)
    p.add_argument("--exact", action="store_true", help="exact divisibility test (always performed)")
    p.add_argument("--zeta-samples", type=int, default=0, help="also compare exact and quadrature values")

    p = sub.add_parser("cgo-verify", parents=[common], help="CGO construction checks")
    p.add_argument("--medium", help="medium profile JSON")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--zeta-sweep", help='JSON {"ratios": [...]} of |zeta|/k values')
    p.add_argument("--p", type=float, default=8.0)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--trials", type=int, default=10)

    p = sub.add_parser("ortho-check", parents=[common], help="integration-by-parts identity")
    p.add_argument("--medium")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--zeta-ratio", type=float, default=8.0)

    p = sub.add_parser("decay-sweep", parents=[common], help="homogeneity of the orthant term")
    p.add_argument("--poly", required=True)
    p.add_argument("--radii", type=float, nargs="+", default=[32.0, 64.0, 128.0, 256.0])

    p = sub.add_parser("contradiction-report", parents=[common], help="I0..I3 sweep")
    p.add_argument("--config", help="CornerConfig JSON")
    p.add_argument("--ratios", type=float, nargs="+", default=[8.0, 16.0, 32.0, 64.0])

    p = sub.add_parser("run", parents=[common], help="run a subcommand from a config file")
    p.add_argument("--config", required=True)
    return parser


def _from_config(path: str, parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Config JSON: {"command": name, "args": {...}, "seed": n, "output_dir": path}."""
    cfg = _read_json(path)
    if not isinstance(cfg, dict) or cfg.get("command") not in COMMANDS:
        raise UsageError(f"{path}: 'command' must be one of {sorted(COMMANDS)}")
    argv = [cfg["command"]]
    for key, val in cfg.get("args", {}).items():
        flag = "--" + key.replace("_", "-")
        if val is True:
            argv.append(flag)
        elif isinstance(val, list):
            argv += [flag, *map(str, val)]
        elif val is not False and val is not None:
            argv += [flag, str(val)]
    for key in ("seed", "output_dir"):
        if key in cfg:
            argv += ["--" + key.replace("_", "-"), str(cfg[key])]
    for key, val in cfg.get("tolerances", {}).items():
        if not float(val) > 0:
            raise UsageError(f"tolerance {key} must be positive")
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.command == "run":
            args = _from_config(args.config, parser)
        logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
        rep = Report(args.command, args.seed)
        t0 = time.perf_counter()
        COMMANDS[args.command](args, rep)
        rep.data["elapsed_s"] = time.perf_counter() - t0
        rep.data["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    except NonContraction as exc:
        rep.check("neumann-contraction", "cgo-neumann", False, exc.rate, 1.0)
        rep.data["error"] = str(exc)
    except (UsageError, ValueError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep.data["failures"] = rep.failures
    out = json.dumps(_jsonable(rep.data), indent=2)
    if args.output_dir:
        d = Path(args.output_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(out + "\n")
        if "csv" in rep.data:
            (d / "report.csv").write_text(rep.data["csv"])
    if args.json:
        print(out)
    for c in rep.data["checks"]:
        print(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}")
    if rep.failures:
        print(json.dumps({"failures": rep.failures}), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
