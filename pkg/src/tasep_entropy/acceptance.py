"""The acceptance suite: one function per criterion, each returning a verdict.

Tolerances and sizes are pinned here; ``quick=True`` shrinks sizes and times
but never loosens a tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import closed_forms as cf
from . import matrix_product as mp
from . import simulator as sim
from . import variational as vo
from .core import _s, mobility
from .params import Params

# one pair or more per case branch; the last two cover 1/2 ≤ ρ₋ < ρ₊
LEGENDRE_PAIRS = [(0.1, 0.7), (0.1, 0.3), (0.2, 0.6), (0.25, 0.4), (0.3, 0.8), (0.15, 0.95), (0.6, 0.85), (0.55, 0.9)]
BAND_PAIRS = LEGENDRE_PAIRS + [(0.3, 0.7), (0.05, 0.45), (0.45, 0.55), (0.4, 0.9)]
EXACT_PAIRS = [
    (Fraction(1, 10), Fraction(7, 10)),
    (Fraction(1, 10), Fraction(3, 10)),
    (Fraction(1, 5), Fraction(3, 5)),
    (Fraction(1, 4), Fraction(2, 5)),
    (Fraction(3, 10), Fraction(4, 5)),
    (Fraction(3, 5), Fraction(17, 20)),
]
DIRECTIONS = ("competitive", "cooperative")


@dataclass
class CriterionResult:
    number: int
    name: str
    measured: str
    tolerance: str
    passed: bool
    seconds: float = 0.0
    details: list = field(default_factory=list)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.number}. {self.name}: measured {self.measured}; tolerance {self.tolerance}; {self.seconds:.1f}s"


def _timed(fn):
    def wrapper(quick: bool = False, **kw) -> CriterionResult:
        t0 = time.perf_counter()
        res = fn(quick=quick, **kw)
        res.seconds = time.perf_counter() - t0
        budget = getattr(fn, "budget", None)
        if budget is not None and res.seconds > budget:
            res.passed = False
            res.details.append(f"runtime {res.seconds:.1f}s over budget {budget}s")
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _budget(seconds):
    def deco(fn):
        fn.budget = seconds
        return fn

    return deco


# ------------------------------------------------------------------- 1


def legendre_errors(params: Params, n_energy: int = 10_000, n_theta: int = 601) -> float:
    E = cf.energy_grid(params, n_energy)
    curve = vo.Curve(E, cf.entropy(params, E))
    theta = np.linspace(-3.0, 3.0, n_theta)
    if not params.competitive:
        theta = theta[np.abs(theta + 1.0) >= 0.05]
    numeric = vo.legendre(curve, theta).y
    return float(np.max(np.abs(numeric - cf.pressure(params, theta))))


@_timed
@_budget(10)
def criterion_1(quick: bool = False) -> CriterionResult:
    tol = 1e-5
    worst, details = 0.0, []
    for d in DIRECTIONS:
        for a, b in LEGENDRE_PAIRS:
            err = legendre_errors(Params(a, b, d))
            worst = max(worst, err)
            details.append(f"{d} ({a},{b}): {err:.2e}")
    return CriterionResult(1, "Legendre duality S -> P", f"max |P_num - P| = {worst:.2e}", f"{tol:g}", worst <= tol, details=details)


# ------------------------------------------------------------------- 2


def interior_energies(params: Params, n: int = 20) -> np.ndarray:
    band = cf.energy_band(params)
    return band.lo + band.width * (np.arange(n) + 0.5) / n


@_timed
@_budget(60)
def criterion_2(quick: bool = False) -> CriterionResult:
    tol_plus, tol_minus, tol_band = 1e-3, 5e-3, 1e-6
    pairs = LEGENDRE_PAIRS[:4] if quick else LEGENDRE_PAIRS
    n_e = 10 if quick else 20
    err_plus = err_minus = err_band = 0.0
    details = []
    for a, b in pairs:
        p = Params(a, b, "competitive")
        E = interior_energies(p, n_e)
        e = float(np.max(np.abs(vo.oracle_entropy_plus(p, E) - cf.entropy_plus(p, E))))
        err_plus = max(err_plus, e)
        q = Params(a, b, "cooperative")
        E = interior_energies(q, n_e)
        f = float(np.max(np.abs(vo.oracle_entropy_minus(q, E) - cf.entropy_minus(q, E))))
        err_minus = max(err_minus, f)
        details.append(f"({a},{b}): S+ {e:.2e}, S- {f:.2e}")
    for d in DIRECTIONS:
        for a, b in BAND_PAIRS:
            p = Params(a, b, d)
            ob, cb = vo.oracle_energy_band(p), cf.energy_band(p)
            err_band = max(err_band, abs(ob.lo - cb.lo), abs(ob.hi - cb.hi))
    ok = err_plus <= tol_plus and err_minus <= tol_minus and err_band <= tol_band
    return CriterionResult(
        2,
        "Oracle equivalence (domain D, domain K, band)",
        f"S+ {err_plus:.2e}, S- {err_minus:.2e}, band {err_band:.2e}",
        f"{tol_plus:g} / {tol_minus:g} / {tol_band:g}",
        ok,
        details=details,
    )


# ------------------------------------------------------------------- 3


def bernoulli_exact(L: int, rho) -> list:
    out = []
    for i in range(1 << L):
        k = bin(i).count("1")
        out.append(rho**k * (1 - rho) ** (L - k))
    return out


@_timed
@_budget(30)
def criterion_3(quick: bool = False) -> CriterionResult:
    tol = 1e-10
    worst, exact_ok, details = 0.0, True, []
    for d in DIRECTIONS:
        for a, b in EXACT_PAIRS:
            p = Params(a, b, d)
            for L in range(2, 9):
                m = mp.stationary_measure(L, p)
                dev = float(np.max(np.abs(m.probabilities - mp.master_equation_stationary(L, p))))
                worst = max(worst, dev)
                if L <= 6 and mp.balance_residual(m) != 0:
                    exact_ok = False
                    details.append(f"nonzero exact balance residual {d} ({a},{b}) L={L}")
    for rho in (Fraction(1, 10), Fraction(1, 2), Fraction(2, 3)):
        for d in DIRECTIONS:
            for L in range(1, 11):
                m = mp.stationary_measure(L, Params(rho, rho, d))
                if m.exact_probabilities() != bernoulli_exact(L, rho):
                    exact_ok = False
                    details.append(f"equilibrium mismatch rho={rho} L={L} {d}")
    return CriterionResult(
        3,
        "Matrix product vs master equation",
        f"max dev {worst:.2e}; exact balance and Bernoulli {'ok' if exact_ok else 'FAILED'}",
        f"{tol:g}",
        worst <= tol and exact_ok,
        details=details,
    )


# ------------------------------------------------------------------- 4


@_timed
@_budget(120)
def criterion_4(quick: bool = False) -> CriterionResult:
    L_max = 8 if quick else 10
    checked, bad, ties = 0, 0, 0
    for d in DIRECTIONS:
        for a, b in EXACT_PAIRS[:5]:
            for L in range(2, L_max + 1):
                r = mp.lemma_sign_check(L, Params(a, b, d))
                checked += r.checked
                bad += len(r.violations)
                ties += len(r.zeros)
    return CriterionResult(
        4,
        "Exchange-sign lemma, exhaustive and exact",
        f"{checked} exchanges, {bad} violations, {ties} exact ties",
        "0 violations",
        bad == 0,
    )


# ------------------------------------------------------------------- 5


@_timed
def criterion_5(quick: bool = False) -> CriterionResult:
    tol = 1e-14
    worst_p, worst_var, worst_h, details = 0.0, 0.0, 0.0, []
    Ls = range(2, 11) if quick else range(2, 15)
    for d in DIRECTIONS:
        for a, b in EXACT_PAIRS[:3]:
            for L in Ls:
                m = mp.stationary_measure(L, Params(a, b, d))
                worst_p = max(worst_p, abs(mp.finite_pressure(m, 1.0)), abs(mp.finite_pressure(m, 0.0) + math.log(2)))
                worst_h = max(worst_h, mp.local_eq_diagnostic(m, L))
    for rho in (Fraction(1, 10), Fraction(1, 3), Fraction(7, 10)):
        phi = math.log(rho / (1 - rho))
        target = mobility(float(rho)) * phi**2
        for L in range(2, 13):
            m = mp.stationary_measure(L, Params(rho, rho))
            worst_var = max(worst_var, abs(L * mp.y_spectrum(m).variance() - target) / target)
            for K in [k for k in range(1, L + 1) if L % k == 0]:
                worst_h = max(worst_h, mp.local_eq_diagnostic(m, K))
    ok = worst_p <= tol and worst_var <= 1e-12 and worst_h == 0.0
    return CriterionResult(
        5,
        "Exact finite-L identities",
        f"pressure {worst_p:.1e}, rel L*Var(Y) {worst_var:.1e}, (H) at K=L/equilibrium {worst_h:g}",
        f"{tol:g} / 1e-12 relative / exactly 0",
        ok,
        details=details,
    )


# ------------------------------------------------------------------- 6


def nonincreasing(seq, allowed_violations: int = 1) -> bool:
    steps = np.diff(np.asarray(seq, dtype=float))
    return int(np.sum(steps > 0)) <= allowed_violations


TREND_SIZES = (6, 8, 10, 12, 14)


def trend_table(sizes=TREND_SIZES) -> dict:
    """Finite-L gaps to the asymptotic values; keys name the series."""
    out: dict = {}
    pairs = {
        "entropy competitive (0.1,0.7)": Params(0.1, 0.7),
        "entropy cooperative (0.2,0.6)": Params(0.2, 0.6, "cooperative"),
    }
    for name, p in pairs.items():
        target = cf.gibbs_shannon_of_stationary(p)
        out[name] = [abs(mp.gibbs_shannon_exact(mp.stationary_measure(L, p, mode="float")) / L - target) for L in sizes]
    for p, label in ((Params(0.1, 0.3), "competitive (0.1,0.3)"), (Params(0.2, 0.6, "cooperative"), "cooperative (0.2,0.6)")):
        ms = [mp.stationary_measure(L, p, mode="float") for L in sizes]
        for theta in (0.5, 2.0):
            out[f"pressure theta={theta} {label}"] = [abs(mp.finite_pressure(m, theta) - cf.pressure(p, theta)) for m in ms]
    p = Params(0.1, 0.7)
    ms = [mp.stationary_measure(L, p, mode="float") for L in sizes]
    out["(H) K=2 competitive (0.1,0.7)"] = [mp.local_eq_diagnostic(m, 2) for m in ms]
    out["info: (H)/L K=2 competitive (0.1,0.7)"] = [mp.local_eq_diagnostic(m, 2) / m.L for m in ms]
    return out


@_timed
def criterion_6(quick: bool = False) -> CriterionResult:
    table = trend_table()
    details, failed = [], []
    for name, seq in table.items():
        informational = name.startswith("info:")
        ok = nonincreasing(seq)
        if not ok and not informational:
            failed.append(name)
        tag = "info" if informational else ("ok" if ok else "NOT nonincreasing")
        details.append(f"{name}: " + ", ".join(f"{v:.4g}" for v in seq) + f" [{tag}]")
    finals = "; ".join(f"{k} {v[-1]:.3g}" for k, v in table.items() if not k.startswith("info:"))
    return CriterionResult(
        6,
        "Finite-size trends over L=6..14",
        f"non-monotone series: {failed or 'none'}; final gaps {finals}",
        "nonincreasing, one upward step allowed",
        not failed,
        details=details,
    )


# ------------------------------------------------------------------- 7


def second_derivative_inverse(params: Params, h: float = 1e-4) -> float:
    g = cf.gibbs_shannon_of_stationary(params)
    J = lambda E: cf.rate_function(params, E)
    return h * h / (J(g + h) - 2 * J(g) + J(g - h))


@_timed
def criterion_7(quick: bool = False) -> CriterionResult:
    worst_rel, worst_aff, details = 0.0, 0.0, []
    for d in DIRECTIONS:
        for a, b in BAND_PAIRS:
            p = Params(a, b, d)
            sigma = cf.gaussian_variance(p)
            if sigma is None:
                # one-sided: E = log 2 is the bottom of the band
                E = np.linspace(math.log(2), float(_s(p.rho0)) + 2 * math.log(2), 200)
                err = float(np.max(np.abs(cf.rate_function(p, E) - (2 * E + cf.vbar(p)))))
                worst_aff = max(worst_aff, err)
                details.append(f"{d} ({a},{b}) MC: affine J error {err:.1e}")
            else:
                rel = abs(second_derivative_inverse(p) - sigma) / sigma
                worst_rel = max(worst_rel, rel)
    ok = worst_rel <= 1e-4 and worst_aff <= 1e-10
    return CriterionResult(
        7,
        "Fluctuation shape (Gaussian variance / affine MC rate)",
        f"rel variance error {worst_rel:.1e}, MC affine error {worst_aff:.1e}",
        "1e-4 relative / 1e-10",
        ok,
        details=details,
    )


# ------------------------------------------------------------------- 8

SWEEP_AXIS = (0.1, 0.3, 0.5, 0.7, 0.9)


@_timed
@_budget(600)
def criterion_8(quick: bool = False, threads: int = 1) -> CriterionResult:
    if quick:
        template = sim.SimConfig(200, Params(0.1, 0.2), t_burnin=5_000.0, t_measure=10_000.0, seed=20241014)
    else:
        template = sim.SimConfig(200, Params(0.1, 0.2), t_burnin=20_000.0, t_measure=100_000.0, seed=20241014)
    details, worst = [], 1.0
    for d in DIRECTIONS:
        rows = sim.phase_sweep(sim.sweep_grid(SWEEP_AXIS), d, template, threads=threads)
        frac = sim.sweep_agreement(rows)
        worst = min(worst, frac)
        kept = sum(not r.excluded for r in rows)
        details.append(f"{d}: {frac:.0%} of {kept} points agree")
        for r in rows:
            details.append(
                f"  ({r.rho_minus},{r.rho_plus}) {r.phase}: predicted {r.predicted:.3f} measured {r.measured:.4f}"
                f" +- {r.stderr:.4f}"
                + (" [excluded]" if r.excluded else ("" if r.agree else " [MISS]"))
            )
    return CriterionResult(8, "Phase diagram by simulation, L=200", f"worst agreement {worst:.0%}", ">= 90% within 0.03", worst >= 0.9, details=details)


# ------------------------------------------------------------------- 9


def one_sided_slopes(f, x: float, h: float = 1e-5) -> tuple[float, float]:
    """Second-order one-sided difference quotients (left, right)."""
    left = (3 * f(x) - 4 * f(x - h) + f(x - 2 * h)) / (2 * h)
    right = (-3 * f(x) + 4 * f(x + h) - f(x + 2 * h)) / (2 * h)
    return float(left), float(right)


def pressure_minus_jump_prediction(params: Params, delta: float = 1e-3) -> float:
    """Predicted slope jump of P⁻ at θ = −1 from the candidate f_θ selected on each side.

    d/dθ[−θ log f_θ(t)] at θ = −1 equals g(t) = −t/(1+e^t) − log(1+e^{−t}),
    so the jump is g(t_left) − g(t_right) for the selected candidates.
    """
    from .core import softplus

    pm, pp = params.phi_minus, params.phi_plus
    cands = [pm, pp] + ([0.0] if pm <= 0 <= pp else [])

    def pick(theta):
        vals = [float(softplus(theta * t) + theta * softplus(-t)) for t in cands]
        return cands[int(np.argmax(vals))]  # θ < 0 selects the max of θ log f_θ

    g = lambda t: -t / (1 + math.exp(t)) - float(softplus(-t))
    return g(pick(-1 + delta)) - g(pick(-1 - delta))


@_timed
def criterion_9(quick: bool = False) -> CriterionResult:
    details, failures = [], []
    worst_concave = -math.inf
    for d in DIRECTIONS:
        for a, b in BAND_PAIRS:
            p = Params(a, b, d)
            band = cf.energy_band(p)
            E = np.linspace(band.lo, band.hi, 20_001)[1:-1]
            S = cf.entropy(p, E)
            worst_concave = max(worst_concave, float(np.max(S[2:] - 2 * S[1:-1] + S[:-2])))
            S_fn = lambda x, p=p: cf.entropy(p, x)
            reg = cf.regime(p)
            if p.competitive:
                if reg is not cf.Regime.STRADDLE:
                    kink = cf.pair_constants(p).W - cf.vbar(p)
                    l, r = one_sided_slopes(S_fn, kink)
                    # the kink must be the largest slope change away from the
                    # square-root edges of the band
                    dS = np.diff(S) / np.diff(E)
                    jumps = np.abs(np.diff(dS))
                    inner = (E[1:-1] > band.lo + 0.01 * band.width) & (E[1:-1] < band.hi - 0.01 * band.width)
                    where = E[1:-1][inner][int(np.argmax(jumps[inner]))]
                    if abs(l - r) < 1e-3 or abs(where - kink) > 2 * (E[1] - E[0]):
                        failures.append(f"S+ kink misplaced {d} ({a},{b})")
                    details.append(f"S+ ({a},{b}) kink at {kink:.6f}: slopes {l:.5f} | {r:.5f}")
                # P⁺ is C¹: no slope jump anywhere on a grid including θ₀±
                pc = cf.pair_constants(p)
                P_fn = lambda t, p=p: cf.pressure_plus(p, t)
                worst_jump = 0.0
                for t in list(np.linspace(-3, 3, 61)) + [pc.theta0_minus, pc.theta0_plus]:
                    if abs(t) < 50:
                        l, r = one_sided_slopes(P_fn, t)
                        worst_jump = max(worst_jump, abs(l - r))
                if worst_jump > 1e-5:
                    failures.append(f"P+ slope jump {worst_jump:.1e} {d} ({a},{b})")
                # linear segment: slope equals the band top (straddle) or the chord
                if reg is cf.Regime.STRADDLE:
                    phi = cf._dominant_phi(p)
                    t_star = pc.theta0_minus if phi == p.phi_minus else pc.theta0_plus
                    t_mid, expected = t_star - 0.5, band.hi
                else:
                    t_hi, t_lo = (pc.theta0_minus, pc.theta0_plus) if reg is cf.Regime.BELOW else (pc.theta0_plus, pc.theta0_minus)
                    t_mid = 0.5 * (t_hi + t_lo)
                    expected = (P_fn(t_hi) - P_fn(t_lo)) / (t_hi - t_lo)
                h = 1e-3
                slope = (P_fn(t_mid + h) - P_fn(t_mid - h)) / (2 * h)
                curv = P_fn(t_mid + h) - 2 * P_fn(t_mid) + P_fn(t_mid - h)
                if abs(slope - expected) > 1e-6 or abs(curv) > 1e-10:
                    failures.append(f"P+ linear segment {d} ({a},{b}): slope {slope} vs {expected}")
            else:
                for x in cf.breakpoints(p):
                    l, r = one_sided_slopes(S_fn, x)
                    if abs(l - r) > 1e-6:
                        failures.append(f"S- slope jump {abs(l - r):.1e} at {x:.6f} ({a},{b})")
                    details.append(f"S- ({a},{b}) junction {x:.6f}: slopes {l:.8f} | {r:.8f}")
                P_fn = lambda t, p=p: cf.pressure_minus(p, t)
                l, r = one_sided_slopes(P_fn, -1.0)
                predicted = pressure_minus_jump_prediction(p)
                measured = r - l
                if abs(measured - predicted) > 1e-5 or (abs(predicted) > 1e-8) != (abs(measured) > 1e-5):
                    failures.append(f"P- jump at -1: measured {measured:.6f}, predicted {predicted:.6f} ({a},{b})")
                details.append(f"P- ({a},{b}) slope jump at -1: measured {measured:.6f}, predicted {predicted:.6f}")
    if worst_concave > 1e-8:
        failures.append(f"concavity violated: second difference {worst_concave:.2e}")
    details = failures + details
    return CriterionResult(
        9,
        "Structural properties (concavity, kinks, C1, linear pieces)",
        f"max second difference {worst_concave:.1e}; {len(failures)} failures",
        "second differences <= 1e-8; slopes within 1e-6",
        not failures,
        details=details,
    )


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


def run_all(quick: bool = False, threads: int = 1, echo=None, verbose: bool = False) -> list[CriterionResult]:
    results = []
    for fn in CRITERIA:
        kw = {"threads": threads} if fn is criterion_8 else {}
        res = fn(quick=quick, **kw)
        results.append(res)
        if echo is not None:
            echo(res.line())
            if verbose or not res.passed:
                for d in res.details:
                    echo(f"    {d}")
    return results
