"""Exact finite-L stationary measure of the open TASEP from the algebra

    DE = D + E,   ⟨W|E = α⁻¹⟨W|,   D|V⟩ = β⁻¹|V⟩,   ⟨W|V⟩ = 1,

plus the quantities built on it: Y spectra, finite-size pressure, Gibbs-Shannon
entropy, the exchange-sign lemma and the box local-equilibrium diagnostic.

The measure is always computed in the rightward (p = 1) frame.  The cooperative
chain is the mirror image of the rightward chain with (α, β) = (ρ₊, 1−ρ₋), so
its weights are obtained by reversing the site order.

Configurations are integers; site x (1-indexed) is bit ``(i >> (L - x)) & 1``,
so the bitstring of ``i`` written with L digits reads sites 1..L left to right.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy.special import logsumexp

from .params import DomainError, Params, ResourceError

RATIONAL_MAX_L = 14
ENUMERATION_CAP = 20
MASTER_MAX_L = 12


def boundary_rates(params: Params):
    """(α, β, reflected) of the equivalent rightward chain.

    Exact :class:`Fraction` rates when both densities are rationals.
    """
    a, b = params.rho_minus, params.rho_plus
    if params.competitive:
        alpha, beta, reflected = a, 1 - b, False
    else:
        alpha, beta, reflected = b, 1 - a, True
    return alpha, beta, reflected


def _exact(x) -> bool:
    return isinstance(x, Rational)


# ------------------------------------------------------------- normal order


@dataclass(frozen=True)
class NormalForm:
    """A word in D, E written as Σ c_{n,m} EⁿDᵐ."""

    coeffs: dict
    word_len: int

    def evaluate(self, alpha, beta):
        """⟨W| · |V⟩ using ⟨W|EⁿDᵐ|V⟩ = α⁻ⁿ β⁻ᵐ."""
        return sum(c * (1 / alpha) ** n * (1 / beta) ** m for (n, m), c in self.coeffs.items())

    def __sub__(self, other: "NormalForm") -> "NormalForm":
        out = defaultdict(int, self.coeffs)
        for k, c in other.coeffs.items():
            out[k] -= c
        return NormalForm({k: c for k, c in out.items() if c != 0}, max(self.word_len, other.word_len))


def _letters(word) -> str:
    if isinstance(word, str):
        w = word.upper()
        if w and set(w) <= {"D", "E"}:
            return w
        if w and set(w) <= {"0", "1"}:
            return w.replace("1", "D").replace("0", "E")
    else:
        bits = list(word)
        if bits and set(bits) <= {0, 1}:
            return "".join("D" if b else "E" for b in bits)
    raise DomainError(f"cannot read {word!r} as a D/E word or occupation string")


def normal_order(word) -> NormalForm:
    """Reduce a D/E word (or 0/1 occupations, 1 ↦ D) with DᵐE = Σ_{k=1}^m Dᵏ + E."""
    letters = _letters(word)
    terms: dict = {(0, 0): 1}
    for ch in letters:
        new: dict = defaultdict(int)
        if ch == "D":
            for (n, m), c in terms.items():
                new[(n, m + 1)] += c
        else:
            for (n, m), c in terms.items():
                for k in range(1, m + 1):
                    new[(n, k)] += c
                new[(n + 1, 0)] += c
        terms = dict(new)
    return NormalForm(terms, len(letters))


def dehp_scalar(alpha, beta):
    """⟨W|(DE − ED)|V⟩ through the reduction, equal to 1/α + 1/β − 1/(αβ)."""
    return (normal_order("DE") - normal_order("ED")).evaluate(alpha, beta)


def weight(config, alpha, beta):
    """Unnormalised weight ω of an occupation word in the rightward frame."""
    _check_rates(alpha, beta)
    return normal_order(config).evaluate(alpha, beta)


def _check_rates(alpha, beta):
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise DomainError(f"boundary rates must lie in (0,1), got alpha={alpha}, beta={beta}")


# ----------------------------------------------------------- enumeration


def _dfs_weights(L: int, alpha, beta) -> list:
    """Exact weights of all 2^L words by depth-first traversal.

    The state is the collapsed row vector c with ⟨W|prefix = Σ_m c[m]⟨W|Dᵐ.
    Appending D shifts c; appending E maps c to (α⁻¹Σc, Σ_{m≥1}c, Σ_{m≥2}c, …).
    """
    inv_a, inv_b = 1 / alpha, 1 / beta
    pow_b = [inv_b**m for m in range(L + 1)]
    out = [None] * (1 << L)

    def rec(depth: int, index: int, c: list):
        if depth == L:
            out[index] = sum(ci * pb for ci, pb in zip(c, pow_b))
            return
        # E first keeps the output in increasing index order
        suffix = list(c)
        for k in range(len(suffix) - 2, -1, -1):
            suffix[k] = suffix[k] + suffix[k + 1]
        e_next = [inv_a * suffix[0]] + suffix[1:]
        rec(depth + 1, index << 1, e_next)
        rec(depth + 1, (index << 1) | 1, [0 * c[0]] + c)

    rec(0, 0, [Fraction(1) if _exact(alpha) else 1.0])
    return out


def _bfs_weights(L: int, alpha: float, beta: float) -> np.ndarray:
    """Float weights of all 2^L words, level by level with numpy.

    Row i of the level-k array is the collapsed vector of prefix i; the last
    level is folded into the weights directly to save memory.
    """
    inv_a, inv_b = 1.0 / alpha, 1.0 / beta
    states = np.zeros((1, L + 1))
    states[0, 0] = 1.0
    for depth in range(L - 1):
        n = states.shape[0]
        nxt = np.empty((2 * n, L + 1))
        suffix = np.cumsum(states[:, ::-1], axis=1)[:, ::-1]
        nxt[0::2, 0] = inv_a * suffix[:, 0]
        nxt[0::2, 1:] = suffix[:, 1:]
        nxt[1::2, 0] = 0.0
        nxt[1::2, 1:] = states[:, :-1]
        states = nxt
    pow_b = inv_b ** np.arange(L + 1)
    suffix = np.cumsum(states[:, ::-1], axis=1)[:, ::-1]
    w_e = inv_a * suffix[:, 0] + suffix[:, 1:] @ pow_b[1:]
    w_d = states[:, :-1] @ pow_b[1:]
    out = np.empty(2 * states.shape[0])
    out[0::2] = w_e
    out[1::2] = w_d
    return out


def partition_function(L: int, alpha, beta):
    """⟨W|(D+E)^L|V⟩ computed directly on the collapsed vector (not as a sum of weights)."""
    zero = Fraction(0) if _exact(alpha) and _exact(beta) else 0.0
    inv_a, inv_b = 1 / alpha, 1 / beta
    c = [zero + 1] + [zero] * L
    for _ in range(L):
        suffix = list(c)
        for k in range(L - 1, -1, -1):
            suffix[k] = suffix[k] + suffix[k + 1]
        e_part = [inv_a * suffix[0]] + suffix[1:]
        d_part = [zero] + c[:-1]
        c = [x + y for x, y in zip(e_part, d_part)]
    return sum(ci * inv_b**m for m, ci in enumerate(c))


def bit_reverse(i: int, L: int) -> int:
    return int(format(i, f"0{L}b")[::-1], 2)


def _reverse_permutation(L: int) -> np.ndarray:
    idx = np.arange(1 << L)
    rev = np.zeros_like(idx)
    for x in range(L):
        rev |= ((idx >> x) & 1) << (L - 1 - x)
    return rev


@dataclass
class ExactMeasure:
    """Stationary law on {0,1}^L, indexed in the physical frame."""

    L: int
    alpha: object
    beta: object
    weights: object  # list of Fraction (rational) or float ndarray
    Z: object
    mode: str
    params: Params
    reflected: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    def probability(self, i: int):
        return self.weights[i] / self.Z

    @property
    def probabilities(self) -> np.ndarray:
        if "p" not in self._cache:
            if self.exact:
                self._cache["p"] = np.array([float(w / self.Z) for w in self.weights])
            else:
                self._cache["p"] = np.asarray(self.weights) / float(self.Z)
        return self._cache["p"]

    @property
    def log_probabilities(self) -> np.ndarray:
        if "logp" not in self._cache:
            if self.exact:
                logZ = _log_fraction(self.Z)
                self._cache["logp"] = np.array([_log_fraction(w) - logZ for w in self.weights])
            else:
                self._cache["logp"] = np.log(np.asarray(self.weights)) - math.log(self.Z)
        return self._cache["logp"]

    def exact_probabilities(self) -> list:
        if not self.exact:
            raise DomainError("exact probabilities need rational mode")
        return [w / self.Z for w in self.weights]

    def occupations(self) -> np.ndarray:
        """(2^L, L) 0/1 array; column x−1 is site x."""
        idx = np.arange(1 << self.L)
        shifts = self.L - 1 - np.arange(self.L)
        return (idx[:, None] >> shifts[None, :]) & 1

    def marginals(self) -> np.ndarray:
        return self.probabilities @ self.occupations()

    def config_string(self, i: int) -> str:
        return format(i, f"0{self.L}b")


def _log_fraction(q: Fraction) -> float:
    """log of a positive rational without overflowing float conversion."""
    return math.log(q.numerator) - math.log(q.denominator)


def stationary_measure(L: int, params: Params, mode: str = "auto", cap: int = ENUMERATION_CAP) -> ExactMeasure:
    """Exact NESS on L sites.

    ``mode="auto"`` selects rational arithmetic when the densities are exact
    rationals and L ≤ 14, and floating point otherwise.
    """
    if L < 1:
        raise DomainError("need L >= 1")
    if L > cap:
        raise ResourceError(f"L={L} exceeds the enumeration cap {cap}")
    alpha, beta, reflected = boundary_rates(params)
    _check_rates(alpha, beta)
    exact_rates = _exact(alpha) and _exact(beta)
    if mode == "auto":
        mode = "rational" if exact_rates and L <= RATIONAL_MAX_L else "float"
    if mode == "rational":
        if not exact_rates:
            alpha, beta = Fraction(alpha), Fraction(beta)
        weights = _dfs_weights(L, alpha, beta)
        Z = sum(weights)
        if reflected:
            rev = _reverse_permutation(L)
            weights = [weights[j] for j in rev]
    elif mode == "float":
        alpha, beta = float(alpha), float(beta)
        weights = _bfs_weights(L, alpha, beta)
        Z = float(np.sum(weights))
        if reflected:
            weights = weights[_reverse_permutation(L)]
    else:
        raise DomainError(f"unknown mode {mode!r}")
    return ExactMeasure(L, alpha, beta, weights, Z, mode, params, reflected)


# ------------------------------------------------------ master equation


def physical_transitions(L: int, params: Params):
    """Yield (from, to, rate) for the physical chain on {0,1}^L.

    Rates use the same number type as the densities (Fractions stay exact).
    """
    a, b = params.rho_minus, params.rho_plus
    first, last = 1 << (L - 1), 1
    for i in range(1 << L):
        occ = [(i >> (L - x)) & 1 for x in range(1, L + 1)]
        if params.competitive:
            if not occ[0]:
                yield i, i | first, a
            if occ[-1]:
                yield i, i & ~last, 1 - b
            for x in range(L - 1):
                if occ[x] and not occ[x + 1]:
                    bx, by = 1 << (L - 1 - x), 1 << (L - 2 - x)
                    yield i, (i & ~bx) | by, 1
        else:
            if not occ[-1]:
                yield i, i | last, b
            if occ[0]:
                yield i, i & ~first, 1 - a
            for x in range(1, L):
                if occ[x] and not occ[x - 1]:
                    bx, by = 1 << (L - 1 - x), 1 << (L - x)
                    yield i, (i & ~bx) | by, 1


def generator_matrix(L: int, params: Params):
    """Sparse generator Q (rows sum to zero) of the physical chain."""
    from scipy.sparse import coo_matrix

    rows, cols, vals = [], [], []
    out_rate = np.zeros(1 << L)
    for i, j, r in physical_transitions(L, params):
        rows.append(i)
        cols.append(j)
        vals.append(float(r))
        out_rate[i] += float(r)
    n = 1 << L
    rows.extend(range(n))
    cols.extend(range(n))
    vals.extend(-out_rate)
    return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()


def master_equation_stationary(L: int, params: Params) -> np.ndarray:
    """Solve πQ = 0, Σπ = 1 by a sparse direct solve, one balance row replaced by normalisation."""
    from scipy.sparse import csc_matrix
    from scipy.sparse.linalg import spsolve

    if L > MASTER_MAX_L:
        raise ResourceError(f"master equation limited to L <= {MASTER_MAX_L}")
    n = 1 << L
    A = generator_matrix(L, params).T.tolil()
    A[0, :] = np.ones(n)
    rhs = np.zeros(n)
    rhs[0] = 1.0
    return spsolve(csc_matrix(A), rhs)


def balance_residual(measure: ExactMeasure):
    """max_η |(ωQ)(η)|/Z, exact (a Fraction) in rational mode."""
    exact = measure.exact and _exact(measure.params.rho_minus) and _exact(measure.params.rho_plus)
    zero = Fraction(0) if exact else 0.0
    flow = [zero] * (1 << measure.L)
    w = measure.weights
    for i, j, r in physical_transitions(measure.L, measure.params):
        rate = r if exact else float(r)
        f = w[i] * rate
        flow[i] -= f
        flow[j] += f
    return max(abs(x) for x in flow) / measure.Z


# ------------------------------------------------------------ exchange lemma


@dataclass(frozen=True)
class LemmaReport:
    L: int
    expected_sign: int
    checked: int
    violations: list  # (config, x, difference) with the wrong sign
    zeros: list  # exact ties, reported rather than failed

    @property
    def passed(self) -> bool:
        return not self.violations


def lemma_sign_check(L: int, params: Params) -> LemmaReport:
    """ω(η) − ω(σ^{x,x+1}η) for every '10' at (x, x+1), in the rightward frame.

    The expected sign is sign(ρ'₋ − ρ'₊) for the effective densities of that
    frame, which is sign(α + β − 1) = sign of the lemma's scalar 1/α + 1/β − 1/(αβ)
    up to the positive factor αβ.
    """
    if L > RATIONAL_MAX_L:
        raise ResourceError("lemma check runs in rational mode, L <= 14")
    alpha, beta, _ = boundary_rates(params)
    if not (_exact(alpha) and _exact(beta)):
        alpha, beta = Fraction(alpha), Fraction(beta)
    _check_rates(alpha, beta)
    w = _dfs_weights(L, alpha, beta)
    diff_sign = alpha + beta - 1
    expected = (diff_sign > 0) - (diff_sign < 0)
    violations, zeros, checked = [], [], 0
    for i in range(1 << L):
        for x in range(1, L):
            hi_bit, lo_bit = 1 << (L - x), 1 << (L - x - 1)
            if i & hi_bit and not i & lo_bit:
                j = (i & ~hi_bit) | lo_bit
                d = w[i] - w[j]
                checked += 1
                sgn = (d > 0) - (d < 0)
                if sgn == 0:
                    zeros.append((format(i, f"0{L}b"), x, d))
                elif sgn != expected:
                    violations.append((format(i, f"0{L}b"), x, d))
    return LemmaReport(L, expected, checked, violations, zeros)


# ------------------------------------------------------------- observables


@dataclass(frozen=True)
class YSpectrum:
    Y: np.ndarray  # −(1/L) log μ, ascending
    probability: np.ndarray  # total mass at each Y
    multiplicity: np.ndarray

    def mean(self) -> float:
        return float(np.sum(self.Y * self.probability))

    def variance(self) -> float:
        mu = self.mean()
        return float(np.sum(self.probability * (self.Y - mu) ** 2))


def y_spectrum(measure: ExactMeasure) -> YSpectrum:
    """Atoms of Y_L, merging configurations of equal probability (exactly, in rational mode)."""
    L = measure.L
    if measure.exact:
        groups: dict = defaultdict(int)
        for w in measure.weights:
            groups[w] += 1
        keys = sorted(groups, reverse=True)
        logZ = _log_fraction(measure.Z)
        Y = np.array([-(_log_fraction(k) - logZ) / L for k in keys])
        mult = np.array([groups[k] for k in keys])
        prob = np.array([float(groups[k] * k / measure.Z) for k in keys])
    else:
        w = np.asarray(measure.weights)
        vals, mult = np.unique(w, return_counts=True)
        vals, mult = vals[::-1], mult[::-1]
        Y = -(np.log(vals) - math.log(measure.Z)) / L
        prob = mult * vals / measure.Z
    return YSpectrum(Y, prob, mult)


def finite_pressure(measure: ExactMeasure, theta: float) -> float:
    """P_L(θ) = −(1/L) log Σ_η μ(η)^θ."""
    L = measure.L
    if measure.exact and float(theta).is_integer() and theta >= 0:
        k = int(theta)
        total = sum((w / measure.Z) ** k for w in measure.weights)
        return 0.0 - _log_fraction(Fraction(total)) / L
    return 0.0 - float(logsumexp(theta * measure.log_probabilities)) / L


def gibbs_shannon_exact(measure: ExactMeasure) -> float:
    """𝒮(μ) = −Σ μ log μ."""
    return float(-np.sum(measure.probabilities * measure.log_probabilities))


def box_occupancies(L: int, K: int) -> np.ndarray:
    """(2^L, K) particle counts per box of L/K consecutive sites."""
    if K < 1 or L % K:
        raise DomainError(f"K={K} must divide L={L}")
    size = L // K
    idx = np.arange(1 << L)
    counts = np.zeros((1 << L, K), dtype=np.int64)
    for box in range(K):
        for s in range(size):
            x = box * size + s  # 0-based site
            counts[:, box] += (idx >> (L - 1 - x)) & 1
    return counts


def local_eq_diagnostic(measure: ExactMeasure, K: int) -> float:
    """sup_M sup_{η ∈ Ω(M)} |log(Z(M) μ(η | M))| with Z(M) = |Ω(M)|."""
    L = measure.L
    counts = box_occupancies(L, K)
    size = L // K
    keys, inverse = np.unique(counts, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    card = np.array([math.prod(math.comb(size, int(c)) for c in row) for row in keys])
    if measure.exact:
        mass = [Fraction(0)] * len(keys)
        for w, g in zip(measure.weights, inverse):
            mass[g] += w
        worst = 0.0
        for w, g in zip(measure.weights, inverse):
            ratio = card[g] * w / mass[g]
            worst = max(worst, abs(_log_fraction(ratio)))
        return worst
    w = np.asarray(measure.weights)
    mass = np.bincount(inverse, weights=w)
    ratio = card[inverse] * w / mass[inverse]
    return float(np.max(np.abs(np.log(ratio))))
