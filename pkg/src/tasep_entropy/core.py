"""Scalar special functions: Bernoulli entropy, equilibrium entropy and
pressure, and the constants built from a pair of reservoir densities.

All logarithms are natural, energies are in nats per site.  Functions that
are used on energy grids accept numpy arrays and return arrays; scalars in
give floats out.  ``NEG_INF`` marks "entropy undefined" and is never NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DegenerateParameterError, DomainError, Params

NEG_INF = -math.inf
LOG2 = math.log(2.0)


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


def softplus(x):
    """log(1 + e^x), overflow safe."""
    return np.logaddexp(0.0, x)


def chemical_potential(rho: float) -> float:
    if not 0.0 < rho < 1.0:
        raise DomainError(f"density must lie in (0,1), got {rho}")
    return math.log(rho) - math.log1p(-rho)


def density_from_potential(phi: float) -> float:
    if not math.isfinite(phi):
        raise DomainError(f"potential must be finite, got {phi}")
    if phi >= 0:
        return 1.0 / (1.0 + math.exp(-phi))
    e = math.exp(phi)
    return e / (1.0 + e)


def mobility(rho):
    return rho * (1.0 - rho)


def _s(theta):
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(theta > 0, theta * np.log(np.where(theta > 0, theta, 1.0)), 0.0)
        b = np.where(theta < 1, (1 - theta) * np.log(np.where(theta < 1, 1 - theta, 1.0)), 0.0)
    return a + b


def bernoulli_entropy_s(theta):
    """s(θ) = θ log θ + (1−θ) log(1−θ) with s(0) = s(1) = 0."""
    t = np.asarray(theta, dtype=float)
    if np.any(~(t >= 0)) or np.any(t > 1):
        raise DomainError(f"theta must lie in [0,1], got {theta}")
    return _scalar_or_array(_s(t), theta)


def s_prime(theta):
    """Derivative log(θ/(1−θ)); ±inf at the endpoints."""
    t = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore"):
        return _scalar_or_array(np.log(t) - np.log1p(-t), theta)


def _equilibrium_entropy_phi(phi: float, E):
    """S_{ρ,ρ}(E) for φ ≠ 0, vectorised in E."""
    E = np.asarray(E, dtype=float)
    u = (softplus(phi) - E) / phi
    # the window edges are hit exactly by the band formulas; absorb rounding
    tol = 1e-12
    u_in = np.clip(u, 0.0, 1.0)
    inside = (u >= -tol) & (u <= 1.0 + tol)
    return np.where(inside, -_s(u_in), NEG_INF)


def is_degenerate_equilibrium(rho: float) -> bool:
    """True at ρ = 1/2, where the equilibrium entropy formula is 0/0."""
    return rho == 0.5


def degenerate_spectrum() -> list[tuple[float, float]]:
    """The uniform measure puts every configuration at Y = log 2 with entropy log 2."""
    return [(LOG2, LOG2)]


def equilibrium_entropy(rho: float, E):
    """Entropy function of the Bernoulli product measure of density ``rho``.

    Equals −s((−E + log(1+e^φ))/φ) where the argument is in [0,1] and
    ``NEG_INF`` elsewhere.  ρ = 1/2 is rejected, see
    :func:`degenerate_spectrum`.
    """
    if is_degenerate_equilibrium(rho):
        raise DegenerateParameterError("rho = 1/2: spectrum is the single point log 2")
    phi = chemical_potential(rho)
    return _scalar_or_array(_equilibrium_entropy_phi(phi, E), E)


def equilibrium_pressure(phi, theta):
    """P(φ, θ) = θ log(1+e^φ) − log(1+e^{φθ})."""
    phi_a = np.asarray(phi, dtype=float)
    theta_a = np.asarray(theta, dtype=float)
    if not (np.all(np.isfinite(phi_a)) and np.all(np.isfinite(theta_a))):
        raise DomainError("pressure needs finite phi and theta")
    out = theta_a * softplus(phi_a) - softplus(phi_a * theta_a)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PairConstants:
    xi0: float
    xihat0: float
    W: float
    theta0_minus: float
    theta0_plus: float


def _safe_div(num: float, den: float) -> float:
    if den == 0.0:
        return math.copysign(math.inf, num) if num != 0 else math.nan
    return num / den


def pair_constants(params: Params) -> PairConstants:
    params.require_driven()
    pm, pp = params.phi_minus, params.phi_plus
    lm, lp = float(softplus(pm)), float(softplus(pp))
    dphi = pp - pm
    xi0 = (lp - lm) / dphi
    xihat0 = (lp + lm) / dphi
    W = (pm * lp - pp * lm) / dphi
    ds = float(s_prime(xi0))
    return PairConstants(
        xi0=xi0,
        xihat0=xihat0,
        W=W,
        theta0_minus=_safe_div(-ds, pm),
        theta0_plus=_safe_div(-ds, pp),
    )


def w_from_densities(rho_minus: float, rho_plus: float) -> float:
    """The crossing abscissa W written with densities instead of potentials."""
    lr, l1r = math.log(rho_minus), math.log1p(-rho_minus)
    lR, l1R = math.log(rho_plus), math.log1p(-rho_plus)
    return (lR * l1r - lr * l1R) / math.log(rho_plus * (1 - rho_minus) / (rho_minus * (1 - rho_plus)))


def gamma_line(params: Params, side: str, y):
    """γ±(y) = y φ± − log(1+e^{φ±})."""
    if side in ("minus", "-"):
        phi = params.phi_minus
    elif side in ("plus", "+"):
        phi = params.phi_plus
    else:
        raise DomainError(f"side must be 'minus' or 'plus', got {side!r}")
    y_a = np.asarray(y, dtype=float)
    return _scalar_or_array(y_a * phi - softplus(phi), y)


def log_f_theta(theta: float, t):
    """log f_θ(t); at θ = 0 the convention t/2 + log(1+e^{−t}) is used (log(1+e^{θt})/θ diverges there)."""
    t_a = np.asarray(t, dtype=float)
    if theta == 0:
        out = t_a / 2.0 + softplus(-t_a)
    else:
        out = softplus(theta * t_a) / theta + softplus(-t_a)
    return _scalar_or_array(out, t)


def f_theta(theta: float, t):
    return _scalar_or_array(np.exp(log_f_theta(theta, t)), t)


def _m_candidates(params: Params) -> list[float]:
    pm, pp = params.phi_minus, params.phi_plus
    cands = [pm, pp]
    if pm <= 0.0 <= pp:
        cands.append(0.0)
    return cands


def m_of_theta(theta: float, params: Params) -> float:
    """inf of f_θ over [φ₋, φ₊], reduced to the endpoints and 0 by monotonicity."""
    return min(float(f_theta(theta, c)) for c in _m_candidates(params))


def tangent_energy_E0(rho: float) -> float:
    """E₀(ρ) = −ρ log(1−ρ) − (1−ρ) log ρ, where S_{ρ,ρ} has slope −1."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"density must lie in (0,1), got {rho}")
    return -rho * math.log1p(-rho) - (1 - rho) * math.log(rho)
