"""Continuous-time kinetic Monte Carlo of the open TASEP.

The chain is always run in the rightward frame.  Cooperative parameters are
run as the mirrored rightward chain with (α, β) = (ρ₊, 1−ρ₋), and the profile
is flipped back and the current negated afterwards.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .closed_forms import Phase, classify, predicted_bulk_density
from .matrix_product import boundary_rates, stationary_measure
from .params import Direction, DomainError, Params


@dataclass(frozen=True)
class SimConfig:
    L: int
    params: Params
    t_burnin: float = 2000.0
    t_measure: float = 8000.0
    seed: int = 0
    n_replicas: int = 1
    n_batches: int = 20

    def __post_init__(self):
        if self.L < 2:
            raise DomainError("need L >= 2")
        if not (self.t_burnin > 0 and self.t_measure > 0):
            raise DomainError("burn-in and measurement times must be positive")
        if self.n_replicas < 1 or self.n_batches < 2:
            raise DomainError("need n_replicas >= 1 and n_batches >= 2")


@dataclass(frozen=True)
class SimResult:
    profile: np.ndarray
    profile_stderr: np.ndarray
    bulk_density: float
    bulk_stderr: float
    current: float  # positive = rightward
    current_stderr: float
    events: int
    config: SimConfig = field(repr=False)


@numba.njit(cache=True)
def _run_chain(L, alpha, beta, t_burnin, t_measure, n_batches, gen):
    """Gillespie dynamics; returns per-batch mean occupations, per-batch bond transfers, event count."""
    eta = np.zeros(L, dtype=np.int8)
    bonds = np.empty(max(L - 1, 1), dtype=np.int64)  # active bulk bonds (a '10' at b, b+1)
    where = -np.ones(max(L - 1, 1), dtype=np.int64)
    n_active = 0

    occ = np.zeros((n_batches, L))
    flux = np.zeros(n_batches)
    last = np.zeros(L)
    t = 0.0
    t_end = t_burnin + t_measure
    dt_batch = t_measure / n_batches
    batch = -1  # −1 during burn-in
    next_mark = t_burnin
    events = 0

    while True:
        rate = n_active + (alpha if eta[0] == 0 else 0.0) + (beta if eta[L - 1] == 1 else 0.0)
        t_new = t - math.log(1.0 - gen.random()) / rate
        # close every batch boundary passed before the next event
        while t_new >= next_mark:
            if batch >= 0:
                for x in range(L):
                    if eta[x] == 1:
                        occ[batch, x] += next_mark - last[x]
                    last[x] = next_mark
            else:
                for x in range(L):
                    last[x] = next_mark
            batch += 1
            if batch >= n_batches:
                for b in range(n_batches):
                    for x in range(L):
                        occ[b, x] /= dt_batch
                    flux[b] /= dt_batch * (L + 1)
                return occ, flux, events
            next_mark = t_burnin + (batch + 1) * dt_batch
        t = t_new
        events += 1
        u = gen.random() * rate
        if u < n_active:
            k = int(u)
            if k >= n_active:
                k = n_active - 1
            b = bonds[k]
            # sites b, b+1 change: integrate their occupation first
            if batch >= 0:
                occ[batch, b] += t - last[b]
                flux[batch] += 1.0
            last[b] = t
            last[b + 1] = t
            eta[b] = 0
            eta[b + 1] = 1
            # remove bond b
            j = where[b]
            n_active -= 1
            moved = bonds[n_active]
            bonds[j] = moved
            where[moved] = j
            where[b] = -1
            if b >= 1 and eta[b - 1] == 1:
                bonds[n_active] = b - 1
                where[b - 1] = n_active
                n_active += 1
            if b + 2 <= L - 1 and eta[b + 2] == 0:
                bonds[n_active] = b + 1
                where[b + 1] = n_active
                n_active += 1
        else:
            u -= n_active
            inject = eta[0] == 0 and (u < alpha or eta[L - 1] == 0)
            if inject:
                last[0] = t
                eta[0] = 1
                if batch >= 0:
                    flux[batch] += 1.0
                if L >= 2 and eta[1] == 0:
                    bonds[n_active] = 0
                    where[0] = n_active
                    n_active += 1
            else:
                if batch >= 0:
                    occ[batch, L - 1] += t - last[L - 1]
                    flux[batch] += 1.0
                last[L - 1] = t
                eta[L - 1] = 0
                if L >= 2 and eta[L - 2] == 1:
                    bonds[n_active] = L - 2
                    where[L - 2] = n_active
                    n_active += 1


def _replica(args):
    L, alpha, beta, t_burnin, t_measure, n_batches, seed_seq = args
    gen = np.random.Generator(np.random.PCG64(seed_seq))
    return _run_chain(L, alpha, beta, t_burnin, t_measure, n_batches, gen)


def default_threads() -> int:
    env = os.environ.get("TASEP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _middle_third(L: int) -> slice:
    return slice(L // 3, L - L // 3)


def _summarise(cfg: SimConfig, runs) -> SimResult:
    alpha, beta, reflected = boundary_rates(cfg.params)
    occ = np.concatenate([r[0] for r in runs])  # (batches, L)
    flux = np.concatenate([r[1] for r in runs])
    events = int(sum(r[2] for r in runs))
    if reflected:
        occ = occ[:, ::-1]
        flux = -flux
    nb = occ.shape[0]
    profile = occ.mean(axis=0)
    profile_se = occ.std(axis=0, ddof=1) / math.sqrt(nb)
    bulk_batches = occ[:, _middle_third(cfg.L)].mean(axis=1)
    return SimResult(
        profile=np.clip(profile, 0.0, 1.0),
        profile_stderr=profile_se,
        bulk_density=float(bulk_batches.mean()),
        bulk_stderr=float(bulk_batches.std(ddof=1) / math.sqrt(nb)),
        current=float(flux.mean()),
        current_stderr=float(flux.std(ddof=1) / math.sqrt(nb)),
        events=events,
        config=cfg,
    )


def _replica_args(cfg: SimConfig):
    alpha, beta, _ = boundary_rates(cfg.params)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_replicas)
    return [
        (cfg.L, float(alpha), float(beta), float(cfg.t_burnin), float(cfg.t_measure), cfg.n_batches, s)
        for s in seeds
    ]


def simulate(cfg: SimConfig, threads: int = 1) -> SimResult:
    """Run ``cfg.n_replicas`` independent chains; the result depends only on ``cfg``."""
    return _summarise(cfg, _map(_replica, _replica_args(cfg), threads))


# ------------------------------------------------------------- phase sweep


def boundary_distance(params: Params) -> float:
    """Euclidean distance in the (ρ₋, ρ₊) plane to the nearest phase boundary."""
    a, b = params.rm, params.rp
    if params.competitive:
        return abs(a + b - 1.0) / math.sqrt(2.0)
    return min(abs(a - 0.5), abs(b - 0.5))


@dataclass(frozen=True)
class SweepRow:
    rho_minus: float
    rho_plus: float
    phase: str
    predicted: float
    measured: float
    stderr: float
    boundary_distance: float
    excluded: bool
    agree: bool


def sweep_grid(axis) -> list[tuple[float, float]]:
    """All pairs ρ₋ ≤ ρ₊ from a 1-D axis, diagonal included."""
    axis = sorted(float(v) for v in axis)
    return [(a, b) for i, a in enumerate(axis) for b in axis[i:]]


def _sweep_point(args):
    cfg = args
    return _summarise(cfg, [_replica(a) for a in _replica_args(cfg)])


def phase_sweep(
    grid,
    direction,
    template: SimConfig,
    tolerance: float = 0.03,
    exclusion: float = 0.05,
    threads: int = 1,
) -> list[SweepRow]:
    direction = Direction.parse(direction)
    cfgs = []
    for k, (a, b) in enumerate(grid):
        p = Params(a, b, direction)
        cfgs.append(replace(template, params=p, seed=int(np.random.SeedSequence([template.seed, k]).generate_state(1)[0])))
    results = _map(_sweep_point, cfgs, threads)
    rows = []
    for cfg, res in zip(cfgs, results):
        p = cfg.params
        info = classify(p)
        pred = predicted_bulk_density(p)
        dist = boundary_distance(p)
        shock = info.phase is Phase.SHOCK_LINE
        excluded = shock or (dist <= exclusion and not p.is_equilibrium)
        rows.append(
            SweepRow(
                p.rm,
                p.rp,
                info.phase.value,
                pred,
                res.bulk_density,
                res.bulk_stderr,
                dist,
                excluded,
                abs(res.bulk_density - pred) <= tolerance,
            )
        )
    return rows


def sweep_agreement(rows: list[SweepRow]) -> float:
    kept = [r for r in rows if not r.excluded]
    return sum(r.agree for r in kept) / len(kept) if kept else float("nan")


# -------------------------------------------------------- exact cross-check


@dataclass(frozen=True)
class CrossCheckReport:
    exact: np.ndarray
    simulated: np.ndarray
    stderr: np.ndarray
    z_scores: np.ndarray
    passed: bool


def small_L_cross_check(cfg: SimConfig, n_sigma: float = 3.0, threads: int = 1) -> CrossCheckReport:
    if cfg.L > 8:
        raise DomainError("cross-check is for L <= 8")
    exact = stationary_measure(cfg.L, cfg.params, mode="float").marginals()
    res = simulate(cfg, threads)
    se = np.maximum(res.profile_stderr, 1e-12)
    z = (res.profile - exact) / se
    return CrossCheckReport(exact, res.profile, res.profile_stderr, z, bool(np.all(np.abs(z) <= n_sigma)))
