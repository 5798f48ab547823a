"""Closed-form entropy and pressure of the TASEP stationary state.

Competitive quantities carry a ``_plus`` suffix, cooperative ones ``_minus``.
Energy arguments may be scalars or numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    LOG2,
    NEG_INF,
    _equilibrium_entropy_phi,
    _s,
    equilibrium_pressure,
    mobility,
    pair_constants,
    softplus,
)
from .params import Direction, DomainError, Params, Profile


class Phase(str, enum.Enum):
    LD = "LD"
    HD = "HD"
    MC = "MC"
    SHOCK_LINE = "ShockLine"
    EQUILIBRIUM = "Equilibrium"


class Regime(enum.Enum):
    """Which case of the closed forms applies (the band/entropy case split)."""

    STRADDLE = "rho_minus <= 1/2 <= rho_plus"
    BELOW = "rho_minus < rho_plus <= 1/2"
    ABOVE = "1/2 <= rho_minus < rho_plus"


def regime(params: Params) -> Regime:
    if params.rm <= 0.5 <= params.rp:
        return Regime.STRADDLE
    if params.rp <= 0.5:
        return Regime.BELOW
    return Regime.ABOVE


def _on_shock_line(params: Params) -> bool:
    return math.isclose(params.rm + params.rp, 1.0, rel_tol=0.0, abs_tol=1e-12)


@dataclass(frozen=True)
class PhaseInfo:
    phase: Phase
    rho_bar: "float | tuple[float, float]"  # (left, right) on the shock line
    phi_bar: float
    phi0: float
    rho0: float
    vbar: float


def vbar(params: Params) -> float:
    """log min χ (competitive) or log max χ (cooperative) over [ρ₋, ρ₊]."""
    a, b = params.rm, params.rp
    if params.competitive:
        return math.log(min(mobility(a), mobility(b)))
    if a <= 0.5 <= b:
        return math.log(0.25)
    return math.log(max(mobility(a), mobility(b)))


def classify(params: Params) -> PhaseInfo:
    a, b = params.rm, params.rp
    if params.is_equilibrium:
        phi = params.phi_minus
        return PhaseInfo(Phase.EQUILIBRIUM, a, phi, abs(phi), params.rho0, math.log(mobility(a)))
    pm, pp = params.phi_minus, params.phi_plus
    vb = vbar(params)
    if params.competitive:
        phi_bar = max(pp, -pm)
        if _on_shock_line(params):
            phase, rho_bar = Phase.SHOCK_LINE, (a, b)
        elif b < 1 - a:
            phase, rho_bar = Phase.LD, a
        else:
            phase, rho_bar = Phase.HD, b
    else:
        if b <= 0.5:
            phase, rho_bar, phi_bar = Phase.LD, b, pp
        elif a >= 0.5:
            phase, rho_bar, phi_bar = Phase.HD, a, pm
        else:
            phase, rho_bar, phi_bar = Phase.MC, 0.5, 0.0
    return PhaseInfo(phase, rho_bar, phi_bar, params.phi0, params.rho0, vb)


def predicted_bulk_density(params: Params) -> float:
    """Bulk density of the stationary profile; the shock-line average is (ρ₋+ρ₊)/2."""
    rb = classify(params).rho_bar
    if isinstance(rb, tuple):
        return 0.5 * (rb[0] + rb[1])
    return float(rb)


def stationary_profile(params: Params) -> Profile:
    rb = classify(params).rho_bar
    if isinstance(rb, tuple):
        return Profile.step(rb[0], rb[1], 0.0)
    return Profile.constant(rb)


def gibbs_shannon(profile: Profile) -> float:
    """−(1/2) ∫ s(ρ(x)) dx, exact for piecewise-constant profiles."""
    return float(-0.5 * np.sum(profile.widths * _s(profile.values)))


@dataclass(frozen=True)
class EnergyBand:
    lo: float
    hi: float

    def contains(self, E, tol: float = 0.0):
        E = np.asarray(E)
        return (E >= self.lo - tol) & (E <= self.hi + tol)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def energy_band(params: Params) -> EnergyBand:
    params.require_driven()
    pm, pp = params.phi_minus, params.phi_plus
    vb = vbar(params)
    reg = regime(params)
    if params.competitive:
        lo = -vb - float(softplus(params.phi0))
        if reg is Regime.STRADDLE:
            hi = -vb + pair_constants(params).W
        elif reg is Regime.BELOW:
            hi = -vb - float(softplus(pp))
        else:
            hi = -vb - float(softplus(-pm))
    else:
        if reg is Regime.STRADDLE:
            lo = -vb - LOG2
        elif reg is Regime.BELOW:
            lo = -vb - float(softplus(-pp))
        else:
            lo = -vb - float(softplus(pm))
        hi = -vb - float(softplus(-params.phi0))
    return EnergyBand(lo, hi)


def breakpoints(params: Params) -> list[float]:
    """Energies inside the band where S(E) changes formula (kinks and junctions)."""
    band = energy_band(params)
    vb = vbar(params)
    reg = regime(params)
    if params.competitive:
        pts = [] if reg is Regime.STRADDLE else [pair_constants(params).W - vb]
    elif reg is Regime.STRADDLE:
        pts = [float(_s(params.rho0)) - vb]
    else:
        pts = [float(_s(params.rm)) - vb, float(_s(params.rp)) - vb]
    return sorted(e for e in pts if band.lo < e < band.hi)


def energy_grid(params: Params, n: int) -> np.ndarray:
    """``n`` energies spanning the band, with the band ends and breakpoints as nodes."""
    band = energy_band(params)
    extra = breakpoints(params)
    grid = np.linspace(band.lo, band.hi, n - len(extra))
    return np.unique(np.concatenate([grid, extra]))


def _restrict_to_band(params: Params, E, values):
    band = energy_band(params)
    E_a = np.asarray(E, dtype=float)
    out = np.where(band.contains(E_a, tol=1e-12), values, NEG_INF)
    return float(out) if np.ndim(E) == 0 else out


def _dominant_phi(params: Params) -> float:
    """The reservoir potential of largest modulus (φ₊ on ties)."""
    pm, pp = params.phi_minus, params.phi_plus
    return pp if pp >= -pm else pm


def entropy_plus(params: Params, E):
    """S⁺(E) for the competitive TASEP, ``NEG_INF`` outside the band."""
    if not params.competitive:
        raise DomainError("entropy_plus needs the competitive direction")
    params.require_driven()
    x = np.asarray(E, dtype=float) + vbar(params)
    pm, pp = params.phi_minus, params.phi_plus
    reg = regime(params)
    if reg is Regime.STRADDLE:
        val = _equilibrium_entropy_phi(_dominant_phi(params), -x)
    else:
        W = pair_constants(params).W
        left = _equilibrium_entropy_phi(pm, -x)
        right = _equilibrium_entropy_phi(pp, -x)
        if reg is Regime.BELOW:
            val = np.where(x <= W, left, right)
        else:
            val = np.where(x >= W, left, right)
    return _restrict_to_band(params, E, val)


def entropy_minus(params: Params, E):
    """S⁻(E) for the cooperative TASEP, including the linear piece −(E+V̄⁻)."""
    if params.competitive:
        raise DomainError("entropy_minus needs the cooperative direction")
    params.require_driven()
    e = np.asarray(E, dtype=float) + vbar(params)
    pm, pp = params.phi_minus, params.phi_plus
    sm, sp = float(_s(params.rm)), float(_s(params.rp))
    reg = regime(params)
    if reg is Regime.STRADDLE:
        s0 = float(_s(params.rho0))
        val = np.where(e <= s0, -e, _equilibrium_entropy_phi(_dominant_phi(params), -e))
    elif reg is Regime.BELOW:
        val = np.where(
            e < sp,
            _equilibrium_entropy_phi(pp, -e),
            np.where(e <= sm, -e, _equilibrium_entropy_phi(pm, -e)),
        )
    else:
        val = np.where(
            e < sm,
            _equilibrium_entropy_phi(pm, -e),
            np.where(e <= sp, -e, _equilibrium_entropy_phi(pp, -e)),
        )
    return _restrict_to_band(params, E, val)


def entropy(params: Params, E):
    return entropy_plus(params, E) if params.competitive else entropy_minus(params, E)


def _eq_branch(phi: float, vb: float, theta):
    return equilibrium_pressure(phi, -np.asarray(theta, dtype=float)) - np.asarray(theta) * vb


def pressure_plus(params: Params, theta):
    if not params.competitive:
        raise DomainError("pressure_plus needs the competitive direction")
    params.require_driven()
    th = np.asarray(theta, dtype=float)
    pm, pp = params.phi_minus, params.phi_plus
    vb = vbar(params)
    pc = pair_constants(params)
    reg = regime(params)
    if reg is Regime.STRADDLE:
        # below the slope of S⁺ at the band top the infimum sits at the top
        phi = _dominant_phi(params)
        t_star = pc.theta0_minus if phi == pm else pc.theta0_plus
        top = energy_band(params).hi
        p_star = _eq_branch(phi, vb, t_star)
        out = np.where(th >= t_star, _eq_branch(phi, vb, th), p_star + top * (th - t_star))
    else:
        if reg is Regime.BELOW:
            hi_phi, t_hi, lo_phi, t_lo = pm, pc.theta0_minus, pp, pc.theta0_plus
        else:
            hi_phi, t_hi, lo_phi, t_lo = pp, pc.theta0_plus, pm, pc.theta0_minus
        p_hi = _eq_branch(hi_phi, vb, t_hi)
        p_lo = _eq_branch(lo_phi, vb, t_lo)
        chord = p_lo + (p_hi - p_lo) / (t_hi - t_lo) * (th - t_lo)
        out = np.where(
            th >= t_hi,
            _eq_branch(hi_phi, vb, th),
            np.where(th <= t_lo, _eq_branch(lo_phi, vb, th), chord),
        )
    return float(out) if np.ndim(theta) == 0 else out


def _theta_log_m(params: Params, theta):
    """θ·log m(θ), continuous through θ = 0 where it equals log 2."""
    th = np.asarray(theta, dtype=float)
    pm, pp = params.phi_minus, params.phi_plus
    cands = [pm, pp] + ([0.0] if pm <= 0.0 <= pp else [])
    # θ log f_θ(t) = log(1+e^{θt}) + θ log(1+e^{−t})
    h = np.stack([softplus(th * t) + th * softplus(-t) for t in cands])
    return np.where(th > 0, h.min(axis=0), np.where(th < 0, h.max(axis=0), LOG2))


def pressure_minus(params: Params, theta):
    """P⁻(θ) = −θ(log m(θ) + V̄⁻), with P⁻(0) = −log 2 by continuity."""
    if params.competitive:
        raise DomainError("pressure_minus needs the cooperative direction")
    params.require_driven()
    th = np.asarray(theta, dtype=float)
    out = -_theta_log_m(params, th) - th * vbar(params)
    return float(out) if np.ndim(theta) == 0 else out


def pressure(params: Params, theta):
    return pressure_plus(params, theta) if params.competitive else pressure_minus(params, theta)


@dataclass(frozen=True)
class MaximizerFamily:
    """Optimal profiles at a given energy.

    ``kind == "constant"``: the unique maximiser is the constant ``u``.
    ``kind == "monotone"``: every non-increasing profile with values in
    ``value_range`` and Gibbs-Shannon entropy ``target_entropy``.
    """

    kind: str
    u: float | None = None
    value_range: tuple[float, float] | None = None
    target_entropy: float | None = None

    def profile(self) -> Profile:
        if self.kind == "constant":
            return Profile.constant(self.u)
        return monotone_representative(self)


def _u(rho: float, e: float) -> float:
    return (math.log(rho) - e) / (math.log(rho) - math.log1p(-rho))


def _dominant_rho(params: Params) -> float:
    return params.rp if _dominant_phi(params) == params.phi_plus else params.rm


def maximizer(params: Params, E: float) -> MaximizerFamily:
    params.require_driven()
    band = energy_band(params)
    if not band.lo - 1e-12 <= E <= band.hi + 1e-12:
        raise DomainError(f"E={E} outside the energy band [{band.lo}, {band.hi}]")
    e = E + vbar(params)
    a, b = params.rm, params.rp
    reg = regime(params)
    if params.competitive:
        if reg is Regime.STRADDLE:
            rho = _dominant_rho(params)
        else:
            W = pair_constants(params).W
            if reg is Regime.BELOW:
                rho = a if e <= W else b
            else:
                rho = a if e >= W else b
        return MaximizerFamily("constant", u=min(max(_u(rho, e), 0.0), 1.0))
    plateau = MaximizerFamily("monotone", value_range=(1 - b, 1 - a), target_entropy=-e)
    sa, sb = float(_s(a)), float(_s(b))
    if reg is Regime.STRADDLE:
        if e <= float(_s(params.rho0)):
            return plateau
        rho = _dominant_rho(params)
    elif reg is Regime.BELOW:
        if sb <= e <= sa:
            return plateau
        rho = b if e < sb else a
    else:
        if sa <= e <= sb:
            return plateau
        rho = a if e < sa else b
    return MaximizerFamily("constant", u=min(max(_u(rho, e), 0.0), 1.0))


def monotone_representative(family: MaximizerFamily) -> Profile:
    """A constant member of a monotone maximiser family.

    −s maps [lo, hi] onto exactly the admissible target range, so a constant c
    with −s(c) = target exists; it is found on a branch where −s is monotone.
    """
    from scipy.optimize import brentq

    lo, hi = family.value_range
    target = family.target_entropy
    peak = min(max(0.5, lo), hi)
    ends = [c for c in (lo, hi) if c != peak]
    f = lambda c: -float(_s(c)) - target
    if abs(f(peak)) <= 1e-14:
        return Profile.constant(peak)
    for end in ends:
        if f(end) * f(peak) <= 0:
            return Profile.constant(brentq(f, min(end, peak), max(end, peak), xtol=1e-15))
    raise DomainError(f"target entropy {target} outside the family's range")


def rate_function(params: Params, E):
    """J(E) = E − S(E); +inf outside the energy band."""
    S = np.asarray(entropy(params, E))
    out = np.where(np.isfinite(S), np.asarray(E, dtype=float) - S, math.inf)
    return float(out) if np.ndim(E) == 0 else out


def gaussian_variance(params: Params) -> float | None:
    """χ(ρ̄)φ̄² where Y_L has Gaussian fluctuations, None in the cooperative MC phase."""
    info = classify(params)
    if info.phase is Phase.MC:
        return None
    rb = info.rho_bar
    if isinstance(rb, tuple):
        rb = rb[0]
    return mobility(rb) * info.phi_bar ** 2


def gibbs_shannon_of_stationary(params: Params) -> float:
    return gibbs_shannon(stationary_profile(params))


__all__ = [
    "Direction",
    "EnergyBand",
    "MaximizerFamily",
    "Params",
    "Phase",
    "PhaseInfo",
    "Profile",
    "Regime",
    "breakpoints",
    "classify",
    "energy_grid",
    "energy_band",
    "entropy",
    "entropy_minus",
    "entropy_plus",
    "gaussian_variance",
    "gibbs_shannon",
    "gibbs_shannon_of_stationary",
    "maximizer",
    "predicted_bulk_density",
    "pressure",
    "pressure_minus",
    "pressure_plus",
    "rate_function",
    "stationary_profile",
    "vbar",
]
