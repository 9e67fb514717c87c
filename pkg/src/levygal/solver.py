"""Time stepping of the Galerkin system with a scheme-exact energy ledger.

One step of the semi-implicit Euler-Maruyama scheme reads, mode by mode,

    (1 + gamma dt lambda_j) u_j^{k+1} = u_j^k - dt [B_cut(u^k)]_j - dt [F^R(u^k)]_j + xi_j,

where xi collects the Wiener, compensated-jump and large-jump increments, all
evaluated at the left-limit state u^k.  With ``implicit_F`` the operator is
evaluated at u^{k+1} and the nonlinear system is solved by Newton's method
(or a damped fixed-point iteration).

Writing delta = u^{k+1} - u^k, the scheme satisfies exactly

    |u^{k+1}|^2 - |u^k|^2 + 2 gamma dt ||u^{k+1}||^2 + 2 dt <B, u^{k+1}> + 2 dt <F, u^{k+1}>
        = 2 <xi_W, u^k> + 2 <xi_J, u^k> + (2 <xi, delta> - |delta|^2),

a discrete counterpart of the Ito formula for |u|^2.  Each term is stored
in the ledger and the residual of the identity is reported per step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import noise as nz
from .convection import CutoffParams, assemble_B_cutoff_coeffs, assemble_B_coeffs
from .operators import (MonotoneOperatorSpec, TruncationParams, assemble, assemble_jacobian,
                        get_operator, truncated_jacobian_pointwise)
from .spaces import Domain, SpectralBasis, build_basis, derivatives, x_norm_p

log = logging.getLogger(__name__)

LEDGER_COLUMNS = ("dH2", "viscous", "convection", "F_pairing", "wiener_work", "jump_work",
                  "quadratic_variation", "residual")
GROWTH_LIMIT = 1e6


class SimulationAborted(RuntimeError):
    def __init__(self, message: str, step: int, trajectory: "Trajectory | None" = None):
        super().__init__(f"{message} (step {step})")
        self.step = step
        self.trajectory = trajectory


class FixedPointError(SimulationAborted):
    def __init__(self, step: int, history: list[float]):
        super().__init__(f"implicit solve did not converge; residual history {history[-5:]}", step)
        self.history = history


@dataclass(frozen=True)
class InitialCondition:
    """Deterministic coefficients, or Gaussian a_j ~ N(0, amplitude^2 j^(-2r))."""

    kind: str = "zero"  # zero | coeffs | random
    coeffs: tuple[float, ...] = ()
    r: float = 1.0
    amplitude: float = 1.0
    seed: int | None = None

    def sample(self, n: int, seed: int) -> np.ndarray:
        out = np.zeros(n)
        if self.kind == "zero":
            return out
        if self.kind == "coeffs":
            c = np.asarray(self.coeffs, dtype=float)
            m = min(n, c.size)
            out[:m] = c[:m]
            return out
        if self.kind == "random":
            s = seed if self.seed is None else self.seed
            for j in range(n):
                z = nz.stream(s, nz._STREAM_INITIAL, j).standard_normal()
                out[j] = self.amplitude * (j + 1) ** (-self.r) * z
            return out
        raise ValueError(f"unknown initial condition kind {self.kind!r}")

    def second_moment(self, n: int) -> float:
        """E|P_n u_0|^2 for the random sampler, |u_0|^2 otherwise."""
        if self.kind == "random":
            j = np.arange(1, n + 1, dtype=float)
            return float(self.amplitude ** 2 * np.sum(j ** (-2 * self.r)))
        return float(np.sum(self.sample(n, 0) ** 2))


@dataclass(frozen=True)
class SolverConfig:
    T: float
    dt: float
    n: int
    operator: str | None = None  # catalog name; None or "none" for F = 0
    p: float = 4.0
    coefficients: tuple[float, ...] | None = None
    with_laplacian: bool = False
    gamma: float = 1.0
    truncation: float | None = None  # R
    cutoff: float | None = None  # R tilde
    convection: bool = False
    noise: nz.NoiseDescriptor = field(default_factory=nz.NoiseDescriptor)
    initial: InitialCondition = field(default_factory=InitialCondition)
    implicit_F: bool = False
    implicit_method: str = "newton"  # newton | picard
    max_iter: int = 100
    tol: float = 1e-12
    seed: int = 0
    domain: Domain = field(default_factory=Domain)
    n_quad: int | None = None

    def __post_init__(self):
        if not (self.T > 0 and self.dt > 0 and self.n >= 1):
            raise ValueError("T, dt and n must be positive")
        nz.n_steps(self.T, self.dt)
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.gamma == 0 and self.convection:
            raise ValueError("gamma = 0 is only permitted without convection")
        if self.p <= 2:
            raise ValueError("p must exceed 2")
        if self.truncation is not None:
            TruncationParams(self.truncation)
        if self.cutoff is not None:
            CutoffParams(self.cutoff)
        if self.implicit_method not in ("newton", "picard"):
            raise ValueError("implicit_method must be newton or picard")
        if self.operator == "none":
            object.__setattr__(self, "operator", None)

    @property
    def steps(self) -> int:
        return nz.n_steps(self.T, self.dt)


@lru_cache(maxsize=32)
def _basis(domain: Domain, n: int, n_quad: int | None) -> SpectralBasis:
    return build_basis(domain, n, n_quad)


def operator_of(cfg: SolverConfig) -> MonotoneOperatorSpec | None:
    if cfg.operator is None:
        return None
    return get_operator(cfg.operator, cfg.p, cfg.coefficients, cfg.with_laplacian, cfg.domain.dim)


@dataclass(frozen=True, eq=False)
class Problem:
    """Everything one step needs, resolved once per run."""

    cfg: SolverConfig
    basis: SpectralBasis
    op: MonotoneOperatorSpec | None
    trunc: TruncationParams | None
    cut: CutoffParams | None
    denom: np.ndarray

    @classmethod
    def from_config(cls, cfg: SolverConfig) -> "Problem":
        basis = _basis(cfg.domain, cfg.n, cfg.n_quad)
        if cfg.convection and basis.dim != 1:
            raise ValueError("convection requires a 1-D domain")
        trunc = TruncationParams(cfg.truncation) if cfg.truncation is not None else None
        cut = CutoffParams(cfg.cutoff) if cfg.cutoff is not None else None
        denom = 1.0 + cfg.gamma * cfg.dt * basis.eigenvalues
        lam_n = basis.eigenvalues[-1]
        if cfg.dt > 0.5 / (lam_n * cfg.gamma + 1) and not cfg.implicit_F and cfg.operator:
            log.warning("dt=%g exceeds the stability heuristic 0.5/(lambda_n gamma + 1)=%g",
                        cfg.dt, 0.5 / (lam_n * cfg.gamma + 1))
        return cls(cfg, basis, operator_of(cfg), trunc, cut, denom)

    def F(self, u: np.ndarray) -> np.ndarray:
        return assemble(self.op, self.basis, u, self.trunc)

    def B(self, u: np.ndarray) -> np.ndarray:
        if not self.cfg.convection:
            return np.zeros_like(u)
        if self.cut is None:
            return assemble_B_coeffs(self.basis, u, u)
        return assemble_B_cutoff_coeffs(self.basis, u, self.cut)

    def x_norm_p(self, u: np.ndarray) -> np.ndarray:
        p = self.op.p if self.op is not None else self.cfg.p
        k = self.op.k if self.op is not None else 1
        return x_norm_p(self.basis, u, p, k)

    def local_lipschitz(self, u: np.ndarray) -> float:
        """Crude bound on the Lipschitz constant of the Galerkin F^R near u."""
        if self.op is None:
            return 0.0
        lam = self.basis.eigenvalues[-1]
        R = self.trunc.R if self.trunc is not None else None
        total = 0.0
        for itg in self.op.integrands:
            d = derivatives(self.basis, u, itg.order)
            jp = truncated_jacobian_pointwise(itg, d, R)
            total += float(np.max(np.linalg.norm(jp, ord=2, axis=(-2, -1)))) * lam ** itg.order
        return total


@dataclass
class StepParts:
    b: np.ndarray
    f: np.ndarray
    xi_w: np.ndarray
    xi_j: np.ndarray


def _solve_implicit(prob: Problem, rhs: np.ndarray, guess: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    cfg = prob.cfg
    dt, D = cfg.dt, prob.denom
    x = guess.copy()
    history: list[float] = []

    def G(z):
        fz = prob.F(z)
        return D * z + dt * fz - rhs, fz

    g, fx = G(x)
    scale = 1.0 + float(np.linalg.norm(rhs))
    for _ in range(cfg.max_iter):
        res = float(np.linalg.norm(g))
        history.append(res)
        if res <= cfg.tol * scale:
            return x, fx
        if cfg.implicit_method == "newton":
            jac = np.diag(D) + dt * assemble_jacobian(prob.op, prob.basis, x, prob.trunc)
            step = np.linalg.solve(jac, -g)
            t = 1.0
            while True:
                x_new = x + t * step
                g_new, f_new = G(x_new)
                if np.linalg.norm(g_new) < res or t < 1e-4:
                    break
                t *= 0.5
        else:
            kappa = dt * prob.local_lipschitz(x) / float(D.min())
            omega = 2.0 / (2.0 + kappa)
            x_new = x - omega * g / D
            g_new, f_new = G(x_new)
        if np.linalg.norm(x_new - x) <= 1e-15 * (1.0 + np.linalg.norm(x)):
            x, g, fx = x_new, g_new, f_new
            history.append(float(np.linalg.norm(g)))
            if history[-1] <= 1e3 * cfg.tol * scale:
                return x, fx
            break
        x, g, fx = x_new, g_new, f_new
    history.append(float(np.linalg.norm(g)))
    if history[-1] <= cfg.tol * scale:
        return x, fx
    raise FixedPointError(k, history)


def advance(prob: Problem, u: np.ndarray, dW: np.ndarray, small: np.ndarray, large: np.ndarray,
            k: int = 0) -> tuple[np.ndarray, StepParts]:
    """One scheme step from u^k, returning u^{k+1} and the pieces used by the ledger."""
    cfg = prob.cfg
    desc = cfg.noise
    dt = cfg.dt
    b = prob.B(u)
    xi_w = nz.wiener_term(desc, u, dW) if dW.size else np.zeros_like(u)
    xi_j = nz.compensated_jump_term(desc, u, small, dt) if desc.marks else np.zeros_like(u)
    if desc.large_jumps and len(large):
        xi_j = xi_j + nz.large_jump_term(desc, u, large)
    base = u - dt * b + xi_w + xi_j
    if cfg.implicit_F and prob.op is not None:
        f_u = prob.F(u)
        guess = (base - dt * f_u) / prob.denom
        u_new, f = _solve_implicit(prob, base, guess, k)
    else:
        f = prob.F(u)
        u_new = (base - dt * f) / prob.denom
    return u_new, StepParts(b, f, xi_w, xi_j)


def step(state: np.ndarray, config: SolverConfig, dW=None, small_marks=(), large_marks=()) -> np.ndarray:
    """u^{k+1} from u^k for one noise slice."""
    prob = Problem.from_config(config)
    u = np.asarray(state, dtype=float)
    dW = np.zeros(0) if dW is None else np.asarray(dW, dtype=float)
    return advance(prob, u, dW, np.asarray(small_marks, dtype=int), np.asarray(large_marks, dtype=int))[0]


def ledger_row(prob: Problem, u: np.ndarray, u_new: np.ndarray, parts: StepParts) -> np.ndarray:
    cfg = prob.cfg
    dt = cfg.dt
    delta = u_new - u
    xi = parts.xi_w + parts.xi_j
    dH2 = float(u_new @ u_new - u @ u)
    visc = 2.0 * cfg.gamma * dt * float(np.sum(prob.basis.eigenvalues * u_new * u_new))
    conv = 2.0 * dt * float(parts.b @ u_new)
    fpair = 2.0 * dt * float(parts.f @ u_new)
    ww = 2.0 * float(parts.xi_w @ u)
    jw = 2.0 * float(parts.xi_j @ u)
    qv = 2.0 * float(xi @ delta) - float(delta @ delta)
    resid = dH2 + visc + conv + fpair - ww - jw - qv
    return np.array([dH2, visc, conv, fpair, ww, jw, qv, resid])


@dataclass
class Trajectory:
    config: SolverConfig
    basis: SpectralBasis
    times: np.ndarray
    states: np.ndarray  # (M+1, n)
    ledger: np.ndarray  # (M, len(LEDGER_COLUMNS))
    jump_log: list = field(default_factory=list)  # (step, time, channel, mark)
    complete: bool = True

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def jump_flags(self) -> np.ndarray:
        """1 on the time index at which at least one jump was applied."""
        flags = np.zeros(self.times.size, dtype=int)
        for k, *_ in self.jump_log:
            flags[k + 1] = 1
        return flags

    def relative_residuals(self) -> np.ndarray:
        h2 = np.sum(self.states[:-1] ** 2, axis=1)
        return np.abs(self.ledger[:, -1]) / (1.0 + h2)


def simulate(config: SolverConfig, path: nz.LevyNoisePath | None = None) -> Trajectory:
    """Integrate on [0, T]; deterministic given (config, seed)."""
    prob = Problem.from_config(config)
    n, M = config.n, config.steps
    if path is None:
        path = nz.sample_path(config.noise, config.T, config.dt, config.seed, modes=n)
    if path.steps != M:
        raise ValueError("noise path does not match the time grid")
    small_idx, large_idx = path.step_event_index()
    states = np.zeros((M + 1, n))
    ledger = np.zeros((M, len(LEDGER_COLUMNS)))
    states[0] = config.initial.sample(n, config.seed)
    times = np.arange(M + 1) * config.dt
    times[-1] = config.T
    jump_log = [(int(np.ceil(t / config.dt - 1e-12)) - 1, float(t), "small", int(m))
                for t, m in zip(path.jump_times, path.jump_marks)]
    jump_log += [(int(np.ceil(t / config.dt - 1e-12)) - 1, float(t), "large", int(m))
                 for t, m in zip(path.large_times, path.large_marks)]
    jump_log.sort(key=lambda e: e[1])
    dW_all = path.wiener[:, :n]

    u = states[0]
    for k in range(M):
        try:
            u_new, parts = advance(prob, u, dW_all[k], small_idx[k], large_idx[k], k)
        except SimulationAborted as exc:
            exc.trajectory = _partial(config, prob, times, states, ledger, jump_log, k)
            raise
        if not np.all(np.isfinite(u_new)) or np.linalg.norm(u_new) > GROWTH_LIMIT:
            traj = _partial(config, prob, times, states, ledger, jump_log, k)
            raise SimulationAborted("non-finite or runaway state", k, traj)
        ledger[k] = ledger_row(prob, u, u_new, parts)
        states[k + 1] = u_new
        u = u_new
    return Trajectory(config, prob.basis, times, states, ledger, jump_log)


def _partial(config, prob, times, states, ledger, jump_log, k) -> Trajectory:
    return Trajectory(config, prob.basis, times[:k + 1].copy(), states[:k + 1].copy(),
                      ledger[:k].copy(), [e for e in jump_log if e[0] < k], complete=False)


def energy_report(traj: Trajectory) -> dict:
    """Left-endpoint quadratures of the energy functionals and the worst ledger residual."""
    prob = Problem.from_config(traj.config)
    dt = traj.config.dt
    s = traj.states
    h2 = np.sum(s * s, axis=1)
    v2 = np.sum(traj.basis.eigenvalues * s * s, axis=1)
    xp = prob.x_norm_p(s)
    return {
        "sup_H2": float(h2.max()),
        "int_V2": float(dt * np.sum(v2[:-1])),
        "int_Xp": float(dt * np.sum(xp[:-1])),
        "max_residual": float(traj.relative_residuals().max()) if traj.ledger.size else 0.0,
    }


def with_(cfg: SolverConfig, **changes) -> SolverConfig:
    """Copy of a config with some fields replaced."""
    return replace(cfg, **changes)
