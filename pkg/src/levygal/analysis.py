"""Studies built on solver trajectories: time regularity, limit passages,
uniqueness, moments and truncation occupancy.

All ensemble reductions use ``math.fsum`` so that the reported statistics do
not depend on evaluation order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import noise as nz
from .operators import truncation_occupancy
from .properties import dual_x_norm, monotonicity, smagorinsky_strong_monotonicity, suite_operator
from .solver import (InitialCondition, Problem, SimulationAborted, SolverConfig, Trajectory,
                     energy_report, operator_of, simulate, with_)

THREADS_ENV = "LEVYGAL_THREADS"


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    w = _workers()
    if w == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# time regularity

def _path_norm(traj: Trajectory, diff: np.ndarray, norm: str) -> np.ndarray:
    if norm == "H":
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if norm == "dual":
        return np.sqrt(np.sum(diff * diff / traj.basis.eigenvalues, axis=-1))
    raise ValueError(f"unknown norm {norm!r}")


def gagliardo_seminorm(traj: Trajectory, alpha: float = 0.25, m: float = 2.0, norm: str = "H") -> float:
    """(int int |v(t)-v(s)|^m / |t-s|^(1+alpha m) ds dt)^(1/m) by a midpoint double sum.

    The trajectory is sampled at cell midpoints; diagonal cells are excluded.
    """
    if not 0 < alpha < 1 or not m > 1:
        raise ValueError("need 0 < alpha < 1 and m > 1")
    t = np.asarray(traj.times, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two time points")
    v = 0.5 * (traj.states[1:] + traj.states[:-1])
    tm = 0.5 * (t[1:] + t[:-1])
    w = np.diff(t)
    total = []
    for i in range(tm.size):
        lag = np.abs(tm[i] - tm)
        lag[i] = np.inf
        d = _path_norm(traj, v - v[i], norm)
        total.append(w[i] * float(np.sum(w * d ** m / lag ** (1.0 + alpha * m))))
    return math.fsum(total) ** (1.0 / m)


@dataclass
class IncrementReport:
    lags: np.ndarray
    means: np.ndarray
    std_errors: np.ndarray
    epsilon: float  # fitted exponent in C * lag^epsilon


def _dual_norm_VX(traj: Trajectory, diff: np.ndarray, p: float, k: int) -> np.ndarray:
    """V' norm plus the sampled X' estimate."""
    return (_path_norm(traj, diff, "dual") + dual_x_norm(traj.basis, diff, p, k))


def increment_statistics(trajectories: list[Trajectory], lags, samples: int = 20, seed: int = 0) -> IncrementReport:
    """Monte Carlo E|u(tau + delta) - u(tau)|_{V'+X'} at random grid times tau.

    ``lags`` are given in time units and must be multiples of dt.
    """
    if not trajectories:
        raise ValueError("empty ensemble")
    cfg = trajectories[0].config
    op = operator_of(cfg)
    p, k = (op.p, op.k) if op is not None else (cfg.p, 1)
    rng = np.random.default_rng(seed)
    lags = np.asarray(lags, dtype=float)
    means, ses = [], []
    for lag in lags:
        steps = round(lag / cfg.dt)
        if abs(steps * cfg.dt - lag) > 1e-9 * max(lag, cfg.dt):
            raise ValueError(f"lag {lag} is not a multiple of dt")
        vals = []
        for tr in trajectories:
            last = tr.states.shape[0] - 1 - steps
            if last < 0:
                raise ValueError("lag exceeds the horizon")
            idx = rng.integers(0, last + 1, samples)
            diff = tr.states[idx + steps] - tr.states[idx]
            vals.extend(_dual_norm_VX(tr, diff, p, k) if steps else np.zeros(samples))
        vals = np.asarray(vals)
        means.append(math.fsum(vals) / vals.size)
        ses.append(float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0)
    means = np.asarray(means)
    ok = (lags > 0) & (means > 0)
    eps = float(np.polyfit(np.log(lags[ok]), np.log(means[ok]), 1)[0]) if ok.sum() >= 2 else float("nan")
    return IncrementReport(lags, means, np.asarray(ses), eps)


# ---------------------------------------------------------------------------
# limit passages

AXES = ("n", "R", "R_tilde")


@dataclass
class ConvergenceReport:
    axis: str
    values: list
    distances: np.ndarray  # L2(0,T;H) between consecutive runs
    terminal_distances: np.ndarray
    monotone_cauchy: bool
    complete: bool = True
    max_gradient: list = field(default_factory=list)
    sup_H: list = field(default_factory=list)


def _pad(a: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(a.shape[:-1] + (n,))
    out[..., :a.shape[-1]] = a
    return out


def l2_time_distance(a: Trajectory, b: Trajectory) -> float:
    """Trapezoidal L2(0,T;H) distance; coefficient vectors zero-padded to a common n."""
    if a.states.shape[0] != b.states.shape[0]:
        raise ValueError("trajectories use different time grids")
    n = max(a.states.shape[1], b.states.shape[1])
    d2 = np.sum((_pad(a.states, n) - _pad(b.states, n)) ** 2, axis=1)
    return float(np.sqrt(np.trapezoid(d2, a.times)))


def max_gradient(traj: Trajectory) -> float:
    """Largest pointwise gauge of any integrand order along the trajectory."""
    op = operator_of(traj.config)
    if op is None:
        return 0.0
    from .spaces import derivatives
    return max(float(np.max(itg.gauge(derivatives(traj.basis, traj.states, itg.order))))
               for itg in op.integrands)


def _axis_config(base: SolverConfig, axis: str, value) -> SolverConfig:
    if axis == "n":
        return with_(base, n=int(value))
    if axis == "R":
        return with_(base, truncation=float(value))
    if axis == "R_tilde":
        return with_(base, cutoff=float(value))
    raise ValueError(f"axis must be one of {AXES}")


def _run(cfg):
    try:
        return simulate(cfg)
    except SimulationAborted as exc:
        return exc.trajectory


def convergence_study(base: SolverConfig, axis: str, values) -> ConvergenceReport:
    """Consecutive distances along one parameter axis on frozen noise.

    Frozen noise comes for free: every run reuses ``base.seed`` and the noise
    and initial streams are keyed per mode.
    """
    values = list(values)
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    if len(values) < 2 or any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("axis values must be nondecreasing with at least two entries")
    runs = _map(_run, [_axis_config(base, axis, v) for v in values])
    complete = all(r is not None and r.complete for r in runs)
    dist, term = [], []
    if complete:
        for a, b in zip(runs, runs[1:]):
            dist.append(l2_time_distance(a, b))
            n = max(a.states.shape[1], b.states.shape[1])
            term.append(float(np.linalg.norm(_pad(a.final, n) - _pad(b.final, n))))
    dist = np.asarray(dist)
    mono = complete and bool(np.all(np.diff(dist) <= 0))
    return ConvergenceReport(axis, values, dist, np.asarray(term), mono, complete,
                             [max_gradient(r) for r in runs if r is not None],
                             [float(np.sqrt(np.max(np.sum(r.states ** 2, axis=1)))) for r in runs if r is not None])


# ---------------------------------------------------------------------------
# monotonicity residuals

@dataclass
class MintyReport:
    operator: str
    minimum: float  # min pairing / scale
    passed: bool
    slope_vs_grad2: float | None = None
    c_p_vs_Xp: float | None = None


def minty_residual(op, pairs: int = 10_000, seed: int = 0, tol: float = 1e-10) -> MintyReport:
    op = suite_operator(op)
    chk = monotonicity(op, pairs=pairs, seed=seed, tol=tol)
    rep = MintyReport(op.name, chk.value, chk.passed)
    if op.name == "smagorinsky":
        _, fitted = smagorinsky_strong_monotonicity(op, pairs=pairs, seed=seed)
        rep.slope_vs_grad2 = fitted["slope_vs_grad2"]
        rep.c_p_vs_Xp = fitted["c_p_vs_Xp"]
    return rep


# ---------------------------------------------------------------------------
# uniqueness

@dataclass
class UniquenessReport:
    sup_distance: float
    identical: bool
    gronwall_weight: float  # int |u_1|_X^2 dt
    M: float | None
    tau_M: float | None  # first time int_0^t |u_1|_X^p ds exceeds M; None if never
    distances: np.ndarray = field(default_factory=lambda: np.zeros(0))


def uniqueness_experiment(config: SolverConfig, delta0: float = 0.0, M: float | None = None,
                          other: SolverConfig | None = None) -> UniquenessReport:
    """Two runs on one noise path, the second with u0 + delta0 * w_1."""
    if other is not None:
        if with_(other, initial=config.initial) != config:
            raise ValueError("configs differ in more than the initial condition")
    path = nz.sample_path(config.noise, config.T, config.dt, config.seed, modes=config.n)
    a = simulate(config, path)
    if other is None:
        u0 = config.initial.sample(config.n, config.seed)
        if delta0:
            u0 = u0.copy()
            u0[0] += delta0
            other = with_(config, initial=InitialCondition("coeffs", tuple(float(x) for x in u0)))
        else:
            other = config
    b = simulate(other, path)
    diff = np.sqrt(np.sum((a.states - b.states) ** 2, axis=1))
    xp = Problem.from_config(config).x_norm_p(a.states)
    weight = float(config.dt * np.sum(xp[:-1] ** (2.0 / operator_p(config))))
    tau = None
    if M is not None:
        cum = np.concatenate([[0.0], np.cumsum(config.dt * xp[:-1])])
        hit = np.nonzero(cum > M)[0]
        tau = float(a.times[hit[0]]) if hit.size else None
    return UniquenessReport(float(diff.max()), bool(np.array_equal(a.states, b.states)),
                            weight, M, tau, diff)


def operator_p(cfg: SolverConfig) -> float:
    op = operator_of(cfg)
    return op.p if op is not None else cfg.p


# ---------------------------------------------------------------------------
# moments

def jackknife(values) -> tuple[float, float]:
    """Mean and its jackknife standard error."""
    x = np.asarray(values, dtype=float)
    M = x.size
    if M < 2:
        raise ValueError("need at least two samples")
    total = math.fsum(x)
    mean = total / M
    loo = (total - x) / (M - 1)
    se = math.sqrt((M - 1) / M * math.fsum((loo - mean) ** 2))
    return mean, se


@dataclass
class MomentReport:
    paths: int
    estimates: dict  # name -> (mean, std_error)


MOMENT_KEYS = ("sup_H2", "int_V2", "int_Xp")


def _moments_one(cfg):
    return energy_report(simulate(cfg))


def moment_study(config: SolverConfig, paths: int, seed: int | None = None) -> MomentReport:
    """Independent paths seeded base, base+1, ...; jackknife standard errors."""
    if paths < 2:
        raise ValueError("need at least two paths")
    base = config.seed if seed is None else seed
    reps = _map(_moments_one, [with_(config, seed=base + i) for i in range(paths)])
    return MomentReport(paths, {k: jackknife([r[k] for r in reps]) for k in MOMENT_KEYS})


# ---------------------------------------------------------------------------
# truncation occupancy

@dataclass
class OccupancyReport:
    R: list
    occupancy: np.ndarray  # time average of the max-over-orders occupancy
    scaled: np.ndarray  # occupancy * R^p
    monotone: bool
    p: float


def trajectory_occupancy(traj: Trajectory, R: float) -> float:
    op = operator_of(traj.config)
    if op is None:
        return 0.0
    occ = truncation_occupancy(op, traj.states[:-1], R, traj.basis)
    return float(np.mean(np.max(np.stack(list(occ.values())), axis=0)))


def _occupancy_one(cfg):
    return trajectory_occupancy(simulate(cfg), cfg.truncation)


def occupancy_study(config: SolverConfig, R_values) -> OccupancyReport:
    """Time-averaged occupancy of the truncation set for the run truncated at each R."""
    R_values = [float(r) for r in R_values]
    if any(b <= a for a, b in zip(R_values, R_values[1:])):
        raise ValueError("R values must be increasing")
    occ = np.asarray(_map(_occupancy_one, [with_(config, truncation=R) for R in R_values]))
    p = operator_p(config)
    return OccupancyReport(R_values, occ, occ * np.asarray(R_values) ** p,
                           bool(np.all(np.diff(occ) <= 0)), p)
