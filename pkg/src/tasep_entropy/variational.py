"""Independent oracles: variational quasi-potentials, reduced optimisations and
numerical Legendre transforms.

Nothing here calls the closed forms of :mod:`closed_forms` except through the
constants V̄± and the pair constants, which are definitions rather than results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_forms import EnergyBand, gibbs_shannon, vbar
from .core import NEG_INF, _s, pair_constants, softplus
from .params import DomainError, Params, Profile

DEFAULT_CELLS = 400


# ---------------------------------------------------------------- functionals


def h_functional(profile: Profile, potential) -> float:
    """ℋ(ρ, φ) = (1/2) ∫ [(1−ρ)φ − log(1+e^φ)] dx for cellwise-constant ρ and φ."""
    phi = np.asarray(potential, dtype=float)
    if phi.shape != profile.values.shape:
        raise DomainError(
            f"potential has {phi.size} samples, profile has {profile.values.size} cells"
        )
    integrand = (1.0 - profile.values) * phi - softplus(phi)
    return float(0.5 * np.sum(profile.widths * integrand))


@dataclass(frozen=True)
class CumulativeH:
    """H_ρ(x) = ∫_{−1}^x (1−ρ) sampled at the profile breakpoints (exact, H is piecewise linear)."""

    x: np.ndarray
    H: np.ndarray

    @property
    def m_rho(self) -> float:
        return float(self.H[-1])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.H) / np.diff(self.x)

    def y_rho(self, xi0: float) -> float:
        """Smallest minimiser of y ξ₀ − H(y); attained at a node since H is piecewise linear."""
        return float(self.x[np.argmin(self.x * xi0 - self.H)])


def cumulative_h(profile: Profile) -> CumulativeH:
    H = np.concatenate([[0.0], np.cumsum(profile.widths * (1.0 - profile.values))])
    return CumulativeH(profile.breakpoints.copy(), H)


@dataclass(frozen=True)
class ConvexEnvelope:
    """Lower convex hull of a sampled graph, evaluated back on the sample nodes."""

    x: np.ndarray
    G: np.ndarray
    vertices: np.ndarray  # indices into x of the hull vertices

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.G) / np.diff(self.x)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_envelope(H: CumulativeH) -> ConvexEnvelope:
    """Andrew's monotone chain, lower half only; the x nodes are already sorted."""
    x, y = H.x, H.H
    if len(x) < 2:
        raise DomainError("need at least two samples for a convex envelope")
    hull: list[int] = []
    for i in range(len(x)):
        # pop while the turn is clockwise or straight, keeping only strict vertices
        while len(hull) >= 2 and _cross((x[hull[-2]], y[hull[-2]]), (x[hull[-1]], y[hull[-1]]), (x[i], y[i])) <= 0:
            hull.pop()
        hull.append(i)
    idx = np.asarray(hull)
    G = np.interp(x, x[idx], y[idx])
    return ConvexEnvelope(x.copy(), G, idx)


# ------------------------------------------------------------ quasi-potentials


def quasipotential_plus(params: Params, profile: Profile) -> float:
    """V⁺(ρ) = −𝕊(ρ) + inf_y ℋ(ρ, φ_y) − V̄⁺, inf taken exactly at the breakpoints."""
    pm, pp = params.phi_minus, params.phi_plus
    lm, lp = float(softplus(pm)), float(softplus(pp))
    ch = cumulative_h(profile)
    y, Hy = ch.x, ch.H
    # ℋ(ρ, φ_y) is affine in y between breakpoints of H
    h = 0.5 * (pm * Hy + pp * (ch.m_rho - Hy) - (y + 1) * lm - (1 - y) * lp)
    return -gibbs_shannon(profile) + float(h.min()) - vbar(params)


def quasipotential_minus(params: Params, profile: Profile) -> float:
    """V⁻(ρ) = −𝕊(ρ) + ℋ(ρ, φ_{G_ρ}) − V̄⁻ with G_ρ the convex envelope of H_ρ."""
    pm, pp = params.phi_minus, params.phi_plus
    env = convex_envelope(cumulative_h(profile))
    g = np.clip(env.slopes, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        logit_g = np.log(g) - np.log1p(-g)
    phi_g = np.clip(logit_g, pm, pp)
    dx = np.diff(env.x)
    h = 0.5 * float(np.sum(dx * (g * phi_g - softplus(phi_g))))
    return -gibbs_shannon(profile) + h - vbar(params)


def quasipotential(params: Params, profile: Profile) -> float:
    if params.competitive:
        return quasipotential_plus(params, profile)
    return quasipotential_minus(params, profile)


# ---------------------------------------------------------- grid maximisation


def _refine_2d(objective, lo, hi, n_coarse=200, rounds=3, n_local=21):
    """Coarse grid then ``rounds`` local ±h windows, each 10× finer.

    ``objective`` maps two broadcastable arrays in [0,1] coordinates to values
    (−inf where infeasible).  Ties resolve to the first index in C order,
    i.e. the lexicographically smallest point.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    a = np.linspace(lo[0], hi[0], n_coarse)
    b = np.linspace(lo[1], hi[1], n_coarse)
    A, B = np.meshgrid(a, b, indexing="ij")
    vals = objective(A, B)
    k = int(np.argmax(vals))
    best = (A.flat[k], B.flat[k], vals.flat[k])
    h = (hi - lo) / (n_coarse - 1)
    for _ in range(rounds):
        a = np.clip(np.linspace(best[0] - h[0], best[0] + h[0], n_local), lo[0], hi[0])
        b = np.clip(np.linspace(best[1] - h[1], best[1] + h[1], n_local), lo[1], hi[1])
        A, B = np.meshgrid(a, b, indexing="ij")
        vals = objective(A, B)
        k = int(np.argmax(vals))
        if vals.flat[k] > best[2]:
            best = (A.flat[k], B.flat[k], vals.flat[k])
        h = h / 10.0
    return best


@dataclass(frozen=True)
class DomainD:
    """The polygon D(E) ⊂ [−1,1]×[0,2], written as A·(y, m) ≤ b."""

    A: np.ndarray
    b: np.ndarray
    c1: float
    c0: float
    xi0: float

    def E_of_m(self, m):
        return self.c1 * np.asarray(m) + self.c0

    def contains(self, y, m, tol: float = 1e-12):
        pts = np.stack([np.asarray(y, dtype=float), np.asarray(m, dtype=float)], axis=-1)
        return np.all(pts @ self.A.T <= self.b + tol, axis=-1)

    def y_interval(self, m):
        """Feasible y range (from the y-dependent rows and [−1,1]) at fixed m."""
        m = np.asarray(m, dtype=float)
        E, xi = self.E_of_m(m), self.xi0
        lo = np.maximum.reduce([np.full_like(m, -1.0), -E / xi, (E - 1) / (1 - xi)])
        hi = np.minimum.reduce([np.full_like(m, 1.0), (m - E) / xi, (1 + E - m) / (1 - xi)])
        return lo, hi

    def m_feasible(self, m, tol: float = 1e-12):
        """The y-free rows: m ∈ [0,2] and the three E(m) bounds."""
        m = np.asarray(m, dtype=float)
        rows = self.A[:, 0] == 0
        return np.all(m[..., None] * self.A[rows, 1] <= self.b[rows] + tol, axis=-1)


def domain_d(params: Params, E: float) -> DomainD:
    pm, pp = params.phi_minus, params.phi_plus
    pc = pair_constants(params)
    xi = pc.xi0
    c1 = pp / (pp - pm)
    c0 = (-2 * vbar(params) - 2 * E) / (pp - pm) - pc.xihat0
    A = np.array(
        [
            [-1.0, 0.0],
            [1.0, 0.0],
            [0.0, -1.0],
            [0.0, 1.0],
            [0.0, -c1],  # E(m) ≥ ξ₀
            [0.0, 1 - c1],  # E(m) ≥ m − ξ₀
            [0.0, c1 - 1 + xi],  # E(m) ≤ m − (m−1)ξ₀
            [-xi, -c1],  # y ξ₀ + E(m) ≥ 0
            [xi - 1, c1],  # y ξ₀ + E(m) ≤ y + 1
            [xi, c1 - 1],  # m − (y ξ₀ + E(m)) ≥ 0
            [1 - xi, 1 - c1],  # m − (y ξ₀ + E(m)) ≤ 1 − y
        ]
    )
    b = np.array([1.0, 1.0, 0.0, 2.0, c0 - xi, xi + c0, xi - c0, c0, 1 - c0, -c0, 1 + c0])
    return DomainD(A, b, c1, c0, xi)


def _m_range(D: DomainD):
    """Extent of m over D via a linear programme, None when D is empty."""
    from scipy.optimize import linprog

    out = []
    for sign in (1.0, -1.0):
        res = linprog([0.0, sign], A_ub=D.A, b_ub=D.b + 1e-12, bounds=[(None, None)] * 2, method="highs")
        if res.status != 0:
            return None
        out.append(res.x[1])
    return out[0], out[1]


def d_objective(D: DomainD, y, m):
    """F(y, m) on D(E), −inf off D.  Boundary terms at y = ±1 vanish."""
    y = np.asarray(y, dtype=float)
    m = np.asarray(m, dtype=float)
    z = y * D.xi0 + D.E_of_m(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(y > -1, z / (y + 1), 0.0)
        v = np.where(y < 1, (m - z) / (1 - y), 0.0)
    left = (y + 1) * _s(np.clip(u, 0.0, 1.0))
    right = (1 - y) * _s(np.clip(v, 0.0, 1.0))
    F = -left - right
    return np.where(D.contains(y, m, tol=1e-10), F, NEG_INF)


def oracle_entropy_plus(params: Params, E, n_grid: int = 200, rounds: int = 3) -> "float | np.ndarray":
    """S⁺(E) = (1/2) sup_{D(E)} F, by grid search in (m, t) with y = lo(m) + t·(hi(m) − lo(m))."""
    if not params.competitive:
        raise DomainError("oracle_entropy_plus needs the competitive direction")
    if np.ndim(E) > 0:
        return np.array([oracle_entropy_plus(params, e, n_grid, rounds) for e in np.ravel(E)]).reshape(np.shape(E))
    D = domain_d(params, float(E))
    rng = _m_range(D)
    if rng is None:
        return NEG_INF
    m_lo, m_hi = rng

    def objective(m, t):
        lo, hi = D.y_interval(m)
        y = lo + t * np.maximum(hi - lo, 0.0)
        val = d_objective(D, y, m)
        return np.where((hi >= lo - 1e-12) & D.m_feasible(m, 1e-10), val, NEG_INF)

    best = _refine_2d(objective, (m_lo, 0.0), (m_hi, 1.0), n_coarse=n_grid, rounds=rounds)
    if not np.isfinite(best[2]):
        return NEG_INF
    return 0.5 * float(best[2])


def d_is_empty(params: Params, E: float) -> bool:
    return _m_range(domain_d(params, E)) is None


# ------------------------------------------------------------------- domain K


@dataclass(frozen=True)
class DomainK:
    """K(E) in the coordinates a = x₋+1, b = 1−x₊ for fixed (y₋, y₊) slices."""

    params: Params
    e: float  # E + V̄⁻
    neg_s_min: float  # min of −s over [ρ₋, ρ₊]
    neg_s_max: float  # max of −s over [ρ₋, ρ₊]

    def gammas(self, y_minus, y_plus):
        pm, pp = self.params.phi_minus, self.params.phi_plus
        return y_minus * pm - softplus(pm), y_plus * pp - softplus(pp)

    def F(self, a, b, y_minus, y_plus):
        gm, gp = self.gammas(y_minus, y_plus)
        return 0.5 * (a * (-_s(y_minus) + gm) + b * (-_s(y_plus) + gp))

    def contains(self, a, b, y_minus, y_plus, tol: float = 1e-10):
        gm, gp = self.gammas(y_minus, y_plus)
        lo, hi, e = self.neg_s_min, self.neg_s_max, self.e
        return (
            (a >= -tol)
            & (b >= -tol)
            & (a + b <= 2 + tol)
            & (0.5 * (a * (gm + lo) + b * (gp + lo)) >= e + lo - tol)
            & (0.5 * (a * (gm + hi) + b * (gp + hi)) <= e + hi + tol)
        )

    def slice_vertices(self, y_minus, y_plus):
        """Candidate vertices (a, b) of each (y₋, y₊) slice, shape (..., 10, 2).

        Pairwise intersections of a = 0, b = 0, a + b = 2, D_m and D_M; parallel
        pairs come back as NaN and are discarded by the feasibility mask.
        """
        gm, gp = self.gammas(y_minus, y_plus)
        lo, hi, e = self.neg_s_min, self.neg_s_max, self.e
        one, zero = np.ones_like(gm), np.zeros_like(gm)
        # each line: p·a + q·b = r
        lines = [
            (one, zero, zero),
            (zero, one, zero),
            (one, one, 2 * one),
            ((gm + lo) / 2, (gp + lo) / 2, (e + lo) * one),
            ((gm + hi) / 2, (gp + hi) / 2, (e + hi) * one),
        ]
        verts = []
        for i in range(5):
            for j in range(i + 1, 5):
                p1, q1, r1 = lines[i]
                p2, q2, r2 = lines[j]
                det = p1 * q2 - p2 * q1
                with np.errstate(divide="ignore", invalid="ignore"):
                    sing = np.abs(det) < 1e-14
                    a = np.where(sing, np.nan, (r1 * q2 - r2 * q1) / np.where(sing, 1.0, det))
                    b = np.where(sing, np.nan, (p1 * r2 - p2 * r1) / np.where(sing, 1.0, det))
                verts.append(np.stack([a, b], axis=-1))
        return np.stack(verts, axis=-2)

    def slice_max(self, y_minus, y_plus):
        """max of F over each (y₋, y₊) slice; −inf for empty slices."""
        y_minus = np.asarray(y_minus, dtype=float)
        y_plus = np.asarray(y_plus, dtype=float)
        V = self.slice_vertices(y_minus, y_plus)
        a, b = V[..., 0], V[..., 1]
        ym, yp = y_minus[..., None], y_plus[..., None]
        ok = np.isfinite(a) & np.isfinite(b)
        a0, b0 = np.where(ok, a, 0.0), np.where(ok, b, 0.0)
        ok &= self.contains(a0, b0, ym, yp)
        vals = np.where(ok, self.F(a0, b0, ym, yp), NEG_INF)
        return vals.max(axis=-1)


def _neg_s_range(params: Params) -> tuple[float, float]:
    a, b = params.rm, params.rp
    ends = -_s(np.array([a, b]))
    hi = math.log(2.0) if a <= 0.5 <= b else float(ends.max())
    return float(ends.min()), hi


def domain_k(params: Params, E: float) -> DomainK:
    lo, hi = _neg_s_range(params)
    return DomainK(params, E + vbar(params), lo, hi)


def oracle_entropy_minus(params: Params, E, n_grid: int = 200, rounds: int = 3) -> "float | np.ndarray":
    """S⁻(E) = sup_{K(E)} F − (E + V̄⁻), vertex enumeration per (y₋, y₊) slice plus grid refinement."""
    if params.competitive:
        raise DomainError("oracle_entropy_minus needs the cooperative direction")
    if np.ndim(E) > 0:
        return np.array([oracle_entropy_minus(params, e, n_grid, rounds) for e in np.ravel(E)]).reshape(np.shape(E))
    K = domain_k(params, float(E))
    best = _refine_2d(K.slice_max, (0.0, params.rp), (params.rm, 1.0), n_coarse=n_grid, rounds=rounds)
    if not np.isfinite(best[2]):
        return NEG_INF
    return float(best[2]) - K.e


# ------------------------------------------------------------- band oracles


def _u_of_m(m: float, xi0: float) -> float:
    """𝕌(m): best of the two-segment H with H(0) from the candidate table."""
    lo, hi = max(0.0, m - 1.0), min(1.0, m)
    best = -math.inf
    for h0 in (xi0, 0.0, 1.0, m - xi0):
        if lo - 1e-12 <= h0 <= hi + 1e-12:
            # y ξ₀ − H(y) is piecewise linear with kinks at −1, 0, 1
            best = max(best, min(-xi0, -h0, xi0 - m))
    return best


def oracle_energy_band(params: Params, n_grid: int = 2001) -> EnergyBand:
    """Band endpoints from the reduced finite-dimensional problems.

    Every reduced objective is piecewise linear, so the grids include the
    breakpoints and the extrema are exact at those nodes.
    """
    params.require_driven()
    pm, pp = params.phi_minus, params.phi_plus
    lm, lp = float(softplus(pm)), float(softplus(pp))
    vb = vbar(params)
    if params.competitive:
        y = np.linspace(-1.0, 1.0, n_grid)
        bottom = 0.5 * ((y + 1) * (min(pm, 0.0) - lm) + (1 - y) * (min(pp, 0.0) - lp))
        lo = float(bottom.min()) - vb
        pc = pair_constants(params)
        xi = pc.xi0
        nodes = [0.0, xi, 2 * xi, 1.0, 1.0 + xi, 2.0]
        m = np.unique(np.concatenate([np.linspace(0.0, 2.0, n_grid), [t for t in nodes if 0 <= t <= 2]]))
        inner = np.array([pp / (pp - pm) * mm - pc.xihat0 + _u_of_m(mm, xi) for mm in m])
        hi = 0.5 * (pp - pm) * float(inner.max()) - vb
        return EnergyBand(lo, hi)
    x = np.linspace(-1.0, 1.0, n_grid)
    c_minus, c_plus = max(pm, 0.0) - lm, max(pp, 0.0) - lp
    hi = float((0.5 * ((x + 1) * c_minus + (1 - x) * c_plus)).max()) - vb
    # bottom: linear in (a, b) on the simplex a, b ≥ 0, a + b ≤ 2 and linear in y±
    min_s = -_neg_s_range(params)[1]
    ym = np.linspace(0.0, params.rm, n_grid)
    yp = np.linspace(params.rp, 1.0, n_grid)
    g_minus = float((ym * pm - lm).min())
    g_plus = float((yp * pp - lp).min())
    corners = [min_s, g_minus, g_plus]  # (a, b) = (0,0), (2,0), (0,2)
    lo = min(corners) - vb
    return EnergyBand(lo, hi)


# ------------------------------------------------------------------ Legendre


@dataclass(frozen=True)
class Curve:
    """Sampled function; ``NEG_INF`` samples mean "undefined"."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise DomainError("curve needs matching 1-D x and y")
        if np.any(np.isnan(y)):
            raise DomainError("curve values must not be NaN; use NEG_INF")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.y)


def legendre(curve: Curve, theta_grid) -> Curve:
    """P(θ) = inf_E {θE − S(E)} over the finite samples."""
    ok = curve.finite
    if ok.sum() < 2:
        raise DomainError("Legendre transform needs at least two finite samples")
    E, S = curve.x[ok], curve.y[ok]
    theta = np.asarray(theta_grid, dtype=float)
    out = np.empty_like(theta)
    # chunk over θ to keep the outer product small
    for k in range(0, theta.size, 256):
        t = theta[k : k + 256]
        out[k : k + 256] = np.min(t[:, None] * E[None, :] - S[None, :], axis=1)
    return Curve(theta, out)


def random_profile(rng: np.random.Generator, cells: int = DEFAULT_CELLS, kind: str = "mixed") -> Profile:
    """Random piecewise-constant profiles for property tests and scans."""
    if kind == "mixed":
        kind = rng.choice(["constant", "step", "smooth", "noise"])
    if kind == "constant":
        return Profile.uniform(np.full(cells, rng.uniform()))
    if kind == "step":
        left, right = rng.uniform(size=2)
        cut = rng.integers(1, cells)
        return Profile.uniform(np.where(np.arange(cells) < cut, left, right))
    if kind == "smooth":
        x = np.linspace(-1, 1, cells)
        c = rng.normal(size=3)
        return Profile.uniform(1 / (1 + np.exp(-(c[0] + c[1] * x + c[2] * x**2))))
    return Profile.uniform(rng.uniform(size=cells))
