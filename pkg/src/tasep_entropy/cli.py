"""Command-line entry point: ``tasep-entropy <command> [options]``.

Exit codes: 0 success, 1 invalid input, 2 a verification ran and failed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import acceptance
from . import closed_forms as cf
from . import matrix_product as mp
from . import simulator as sim
from . import variational as vo
from .params import DegenerateParameterError, DomainError, Params, ResourceError, parse_density
from .serialization import dumps_csv, dumps_json

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    """Bad command-line input; the message names the offending flag."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ parsing


def _density(text: str):
    try:
        value = parse_density(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"density must lie in (0,1), got {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _finite_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _axis(text: str) -> list[float]:
    try:
        vals = [float(parse_density(t)) for t in text.split(",") if t.strip()]
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if len(vals) < 2 or not all(0 < v < 1 for v in vals):
        raise argparse.ArgumentTypeError("need at least two comma-separated densities in (0,1)")
    return vals


def _common(p: argparse.ArgumentParser, params: bool = True) -> None:
    if params:
        p.add_argument("--dir", dest="direction", choices=["competitive", "cooperative"], default="competitive")
        p.add_argument("--rho-", dest="rho_minus", type=_density, required=True, metavar="RHO")
        p.add_argument("--rho+", dest="rho_plus", type=_density, required=True, metavar="RHO")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", default=None, help="file path; stdout when omitted")
    p.add_argument("--threads", type=_positive_int, default=None, help="worker processes (TASEP_THREADS overrides)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tasep-entropy", allow_abbrev=False, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_, **kw):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        _common(p, **kw)
        return p

    p = cmd("entropy", "S(E) on an energy grid")
    p.add_argument("--e-grid", type=_positive_int, default=200)
    p.add_argument("--e-min", type=_finite_float, default=None)
    p.add_argument("--e-max", type=_finite_float, default=None)

    p = cmd("pressure", "P(θ) on a θ grid")
    p.add_argument("--theta-grid", type=_positive_int, default=601)
    p.add_argument("--theta-min", type=_finite_float, default=-3.0)
    p.add_argument("--theta-max", type=_finite_float, default=3.0)

    cmd("band", "energy band [E-, E+]")
    cmd("phase", "phase, bulk density and reservoir constants")

    p = cmd("maximizer", "optimal profile family at energy E")
    p.add_argument("--E", dest="energy", type=_finite_float, required=True)

    p = cmd("oracle-entropy", "closed-form S against the variational oracle")
    p.add_argument("--e-grid", type=_positive_int, default=20)
    p.add_argument("--tol", type=_finite_float, default=None)

    p = cmd("oracle-band", "closed-form band against the reduced oracle")
    p.add_argument("--tol", type=_finite_float, default=1e-6)

    p = cmd("legendre-check", "numerical Legendre transform of S against P")
    p.add_argument("--e-grid", type=_positive_int, default=10_000)
    p.add_argument("--theta-grid", type=_positive_int, default=601)
    p.add_argument("--tol", type=_finite_float, default=1e-5)

    p = cmd("exact", "exact finite-L measure and observables")
    p.add_argument("--L", dest="L", type=_positive_int, required=True)
    p.add_argument("--what", choices=["measure", "spectrum", "pressure", "summary"], default="measure")
    p.add_argument("--mode", choices=["auto", "rational", "float"], default="auto")
    p.add_argument("--theta-grid", type=_positive_int, default=61)
    p.add_argument("--theta-min", type=_finite_float, default=-3.0)
    p.add_argument("--theta-max", type=_finite_float, default=3.0)

    p = cmd("lemma-check", "exhaustive exchange-sign check for L' = 2..L")
    p.add_argument("--L", dest="L", type=_positive_int, required=True)

    p = cmd("local-eq", "box local-equilibrium diagnostic")
    p.add_argument("--L", dest="L", type=_positive_int, required=True)
    p.add_argument("--K", dest="K", type=_positive_int, required=True)

    p = cmd("mc", "kinetic Monte Carlo profile")
    _mc_flags(p)

    p = cmd("phase-sweep", "bulk density over a grid of reservoir pairs", params=False)
    p.add_argument("--dir", dest="direction", choices=["competitive", "cooperative"], default="competitive")
    p.add_argument("--axis", type=_axis, default=list(acceptance.SWEEP_AXIS))
    p.add_argument("--tolerance", type=_finite_float, default=0.03)
    p.add_argument("--exclusion", type=_finite_float, default=0.05)
    p.add_argument("--min-agreement", type=_finite_float, default=0.9)
    _mc_flags(p, L_default=200)

    p = cmd("verify", "run the acceptance suite", params=False)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--verbose", action="store_true")
    return parser


def _mc_flags(p, L_default=None):
    p.add_argument("--L", dest="L", type=_positive_int, required=L_default is None, default=L_default)
    p.add_argument("--t-burnin", type=_finite_float, default=2000.0)
    p.add_argument("--t-measure", type=_finite_float, default=8000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicas", type=_positive_int, default=1)


def resolve_threads(flag: int | None) -> int:
    env = os.environ.get("TASEP_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"TASEP_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise UsageError(f"TASEP_THREADS must be a positive integer, got {env!r}")
        return n
    return flag if flag is not None else (os.cpu_count() or 1)


def _params(args, driven: bool = True) -> Params:
    if args.rho_minus > args.rho_plus:
        raise UsageError(f"--rho- ({args.rho_minus}) must not exceed --rho+ ({args.rho_plus})")
    if driven and args.rho_minus == args.rho_plus:
        raise UsageError(f"'{args.command}' needs --rho- < --rho+; the closed forms are undefined on the equilibrium line")
    return Params(args.rho_minus, args.rho_plus, args.direction)


def _grid(lo: float, hi: float, n: int, flag: str) -> np.ndarray:
    if n > 1 and not lo < hi:
        raise UsageError(f"{flag}: empty range [{lo}, {hi}]")
    return np.linspace(lo, hi, n)


# ----------------------------------------------------------------- commands


def _table(args, header, rows, summary=None):
    if args.format == "csv":
        return dumps_csv(header, rows)
    payload = dict(summary or {})
    payload["columns"] = list(header)
    payload["rows"] = [list(r) for r in rows]
    return dumps_json(payload)


def _record(args, record: dict):
    if args.format == "csv":
        return dumps_csv(list(record), [list(record.values())])
    return dumps_json(record)


def _param_record(p: Params) -> dict:
    return {"direction": p.direction.value, "rho_minus": p.rho_minus, "rho_plus": p.rho_plus}


def cmd_entropy(args):
    p = _params(args)
    band = cf.energy_band(p)
    pad = 0.05 * band.width
    lo = band.lo - pad if args.e_min is None else args.e_min
    hi = band.hi + pad if args.e_max is None else args.e_max
    E = _grid(lo, hi, args.e_grid, "--e-min/--e-max")
    name = "S+" if p.competitive else "S-"
    return _table(args, ["E", name], zip(E, np.atleast_1d(cf.entropy(p, E))), _param_record(p)), EXIT_OK


def cmd_pressure(args):
    p = _params(args)
    th = _grid(args.theta_min, args.theta_max, args.theta_grid, "--theta-min/--theta-max")
    name = "P+" if p.competitive else "P-"
    return _table(args, ["theta", name], zip(th, np.atleast_1d(cf.pressure(p, th))), _param_record(p)), EXIT_OK


def cmd_band(args):
    p = _params(args)
    b = cf.energy_band(p)
    return _record(args, {**_param_record(p), "E_bottom": b.lo, "E_top": b.hi, "width": b.width}), EXIT_OK


def cmd_phase(args):
    p = _params(args, driven=False)
    info = cf.classify(p)
    rb = info.rho_bar
    rec = {**_param_record(p), "phase": info.phase.value}
    if isinstance(rb, tuple):
        rec.update(rho_bar_left=rb[0], rho_bar_right=rb[1])
    else:
        rec["rho_bar"] = rb
    rec.update(phi_bar=info.phi_bar, phi0=info.phi0, rho0=info.rho0, vbar=info.vbar)
    rec["predicted_bulk_density"] = cf.predicted_bulk_density(p)
    if not p.is_equilibrium:
        rec["gibbs_shannon"] = cf.gibbs_shannon_of_stationary(p)
    return _record(args, rec), EXIT_OK


def cmd_maximizer(args):
    p = _params(args)
    fam = cf.maximizer(p, args.energy)
    rec = {**_param_record(p), "E": args.energy, "kind": fam.kind}
    if fam.kind == "constant":
        rec["u"] = fam.u
    else:
        rec.update(value_min=fam.value_range[0], value_max=fam.value_range[1], target_entropy=fam.target_entropy)
        rec["representative_u"] = float(fam.profile().values[0])
    return _record(args, rec), EXIT_OK


def cmd_oracle_entropy(args):
    p = _params(args)
    E = acceptance.interior_energies(p, args.e_grid)
    closed = np.atleast_1d(cf.entropy(p, E))
    oracle = np.atleast_1d(vo.oracle_entropy_plus(p, E) if p.competitive else vo.oracle_entropy_minus(p, E))
    err = np.abs(closed - oracle)
    tol = args.tol if args.tol is not None else (1e-3 if p.competitive else 5e-3)
    worst = float(err.max())
    summary = {**_param_record(p), "max_abs_error": worst, "tolerance": tol, "passed": worst <= tol}
    out = _table(args, ["E", "closed_form", "oracle", "abs_error"], zip(E, closed, oracle, err), summary)
    return out, EXIT_OK if worst <= tol else EXIT_FAILED


def cmd_oracle_band(args):
    p = _params(args)
    c, o = cf.energy_band(p), vo.oracle_energy_band(p)
    worst = max(abs(c.lo - o.lo), abs(c.hi - o.hi))
    rec = {
        **_param_record(p),
        "E_bottom": c.lo,
        "E_bottom_oracle": o.lo,
        "E_top": c.hi,
        "E_top_oracle": o.hi,
        "max_abs_error": worst,
        "tolerance": args.tol,
        "passed": worst <= args.tol,
    }
    return _record(args, rec), EXIT_OK if worst <= args.tol else EXIT_FAILED


def cmd_legendre_check(args):
    p = _params(args)
    E = cf.energy_grid(p, args.e_grid)
    curve = vo.Curve(E, cf.entropy(p, E))
    th = np.linspace(-3.0, 3.0, args.theta_grid)
    if not p.competitive:
        th = th[np.abs(th + 1.0) >= 0.05]
    numeric = vo.legendre(curve, th).y
    closed = cf.pressure(p, th)
    err = np.abs(numeric - closed)
    worst = float(err.max())
    summary = {**_param_record(p), "max_abs_error": worst, "tolerance": args.tol, "passed": worst <= args.tol}
    out = _table(args, ["theta", "legendre", "closed_form", "abs_error"], zip(th, numeric, closed, err), summary)
    return out, EXIT_OK if worst <= args.tol else EXIT_FAILED


def _measure(args, p):
    if args.L > mp.ENUMERATION_CAP:
        raise UsageError(f"--L {args.L} exceeds the enumeration cap {mp.ENUMERATION_CAP}")
    mode = getattr(args, "mode", "auto")
    if mode == "rational" and args.L > mp.RATIONAL_MAX_L:
        raise UsageError(f"--L {args.L} is above {mp.RATIONAL_MAX_L}, the limit for --mode rational")
    return mp.stationary_measure(args.L, p, mode=mode)


def cmd_exact(args):
    p = _params(args, driven=False)
    m = _measure(args, p)
    if args.what == "measure":
        if m.exact:
            header = ["config", "weight_num", "weight_den", "probability"]
            rows = []
            for i, w in enumerate(m.weights):
                w = Fraction(w)
                rows.append([m.config_string(i), w.numerator, w.denominator, w / m.Z])
        else:
            header = ["config", "weight", "probability"]
            rows = [[m.config_string(i), w, pr] for i, (w, pr) in enumerate(zip(m.weights, m.probabilities))]
        return _table(args, header, rows, {**_param_record(p), "L": m.L, "mode": m.mode}), EXIT_OK
    if args.what == "spectrum":
        ys = mp.y_spectrum(m)
        summary = {**_param_record(p), "L": m.L, "mean": ys.mean(), "variance": ys.variance()}
        return _table(args, ["Y", "probability", "multiplicity"], zip(ys.Y, ys.probability, ys.multiplicity), summary), EXIT_OK
    if args.what == "pressure":
        th = _grid(args.theta_min, args.theta_max, args.theta_grid, "--theta-min/--theta-max")
        rows = [[t, mp.finite_pressure(m, float(t))] for t in th]
        return _table(args, ["theta", "P_L"], rows, {**_param_record(p), "L": m.L}), EXIT_OK
    ys = mp.y_spectrum(m)
    rec = {
        **_param_record(p),
        "L": m.L,
        "mode": m.mode,
        "Z": m.Z,
        "gibbs_shannon": mp.gibbs_shannon_exact(m),
        "gibbs_shannon_per_site": mp.gibbs_shannon_exact(m) / m.L,
        "Y_mean": ys.mean(),
        "L_times_Y_variance": m.L * ys.variance(),
        "P_L_0": mp.finite_pressure(m, 0.0),
        "P_L_1": mp.finite_pressure(m, 1.0),
    }
    return _record(args, rec), EXIT_OK


def cmd_lemma_check(args):
    p = _params(args, driven=False)
    if args.L > 10:
        raise UsageError(f"--L {args.L}: the exhaustive check is limited to L <= 10")
    rows, ok = [], True
    for L in range(2, args.L + 1):
        r = mp.lemma_sign_check(L, p)
        ok &= r.passed
        rows.append([L, r.expected_sign, r.checked, len(r.violations), len(r.zeros), r.passed])
    header = ["L", "expected_sign", "exchanges", "violations", "ties", "passed"]
    return _table(args, header, rows, {**_param_record(p), "passed": ok}), EXIT_OK if ok else EXIT_FAILED


def cmd_local_eq(args):
    p = _params(args, driven=False)
    if args.L % args.K:
        raise UsageError(f"--K {args.K} must divide --L {args.L}")
    m = _measure(args, p)
    value = mp.local_eq_diagnostic(m, args.K)
    return _record(args, {**_param_record(p), "L": args.L, "K": args.K, "H": value, "H_per_site": value / args.L}), EXIT_OK


def _sim_config(args, p):
    try:
        return sim.SimConfig(args.L, p, args.t_burnin, args.t_measure, args.seed, args.replicas)
    except DomainError as exc:
        raise UsageError(f"--L/--t-burnin/--t-measure/--replicas: {exc}") from None


def cmd_mc(args):
    p = _params(args, driven=False)
    res = sim.simulate(_sim_config(args, p), resolve_threads(args.threads))
    if args.format == "csv":
        rows = [[x + 1, m, s] for x, (m, s) in enumerate(zip(res.profile, res.profile_stderr))]
        return dumps_csv(["site", "mean", "stderr"], rows), EXIT_OK
    info = cf.classify(p)
    rec = {
        **_param_record(p),
        "L": args.L,
        "seed": args.seed,
        "replicas": args.replicas,
        "t_burnin": args.t_burnin,
        "t_measure": args.t_measure,
        "events": res.events,
        "phase": info.phase.value,
        "predicted_bulk_density": cf.predicted_bulk_density(p),
        "bulk_density": res.bulk_density,
        "bulk_stderr": res.bulk_stderr,
        "current": res.current,
        "current_stderr": res.current_stderr,
        "profile": res.profile,
        "profile_stderr": res.profile_stderr,
    }
    return dumps_json(rec), EXIT_OK


def cmd_phase_sweep(args):
    template = _sim_config(args, Params(0.25, 0.75, args.direction))
    rows = sim.phase_sweep(
        sim.sweep_grid(args.axis),
        args.direction,
        template,
        tolerance=args.tolerance,
        exclusion=args.exclusion,
        threads=resolve_threads(args.threads),
    )
    frac = sim.sweep_agreement(rows)
    header = ["rho_minus", "rho_plus", "phase", "predicted", "measured", "stderr", "boundary_distance", "excluded", "agree"]
    table = [[getattr(r, h) for h in header] for r in rows]
    ok = not math.isnan(frac) and frac >= args.min_agreement
    summary = {"direction": args.direction, "L": args.L, "agreement": frac, "min_agreement": args.min_agreement, "passed": ok}
    return _table(args, header, table, summary), EXIT_OK if ok else EXIT_FAILED


def cmd_verify(args):
    lines: list[str] = []
    streaming = args.format == "csv" and not args.output

    def echo(line):
        lines.append(line)
        if streaming:
            print(line, flush=True)

    results = acceptance.run_all(quick=args.quick, threads=resolve_threads(args.threads), echo=echo, verbose=args.verbose)
    ok = all(r.passed for r in results)
    if args.format == "json":
        keys = ("number", "name", "measured", "tolerance", "passed", "seconds", "details")
        payload = {"quick": args.quick, "passed": ok, "criteria": [{k: getattr(r, k) for k in keys} for r in results]}
        return dumps_json(payload), EXIT_OK if ok else EXIT_FAILED
    footer = f"{sum(r.passed for r in results)}/{len(results)} criteria passed\n"
    text = footer if streaming else "\n".join(lines) + "\n" + footer
    return text, EXIT_OK if ok else EXIT_FAILED


COMMANDS = {
    "entropy": cmd_entropy,
    "pressure": cmd_pressure,
    "band": cmd_band,
    "phase": cmd_phase,
    "maximizer": cmd_maximizer,
    "oracle-entropy": cmd_oracle_entropy,
    "oracle-band": cmd_oracle_band,
    "legendre-check": cmd_legendre_check,
    "exact": cmd_exact,
    "lemma-check": cmd_lemma_check,
    "local-eq": cmd_local_eq,
    "mc": cmd_mc,
    "phase-sweep": cmd_phase_sweep,
    "verify": cmd_verify,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"tasep-entropy {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DomainError, DegenerateParameterError, ResourceError) as exc:
        print(f"tasep-entropy {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
