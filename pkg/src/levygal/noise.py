"""Levy forcing: Q-Wiener increments, compensated Poisson jumps on E_0, large jumps.

The small-jump measure nu restricted to E_0 is a finite sum of atoms
lambda_m * delta_{xi_m}; the coefficient for mark m is the affine map
K(u, xi_m) = a_m + b_m u.  Every random stream is drawn from a Philox
generator keyed by (seed, stream tag, index) so that the Wiener increments of
mode j do not depend on how many other modes are simulated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ADDITIVE = "additive"
DIAGONAL_LINEAR = "diagonal_linear"

_STREAM_WIENER = 1
_STREAM_JUMPS = 2
_STREAM_LARGE = 3
_STREAM_BRIDGE = 4
_STREAM_INITIAL = 5


def stream(seed: int, tag: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator for one named stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(tag), int(index)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Mark:
    """Atom of the jump measure with affine coefficient a + b u."""

    intensity: float
    a: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        if not self.intensity > 0:
            raise ValueError("mark intensities must be positive")
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))

    def apply(self, u: np.ndarray) -> np.ndarray:
        n = u.shape[-1]
        a = np.zeros(n)
        m = min(n, self.a.size)
        a[:m] = self.a[:m]
        return a + self.b * u


@dataclass(frozen=True)
class NoiseDescriptor:
    q: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sigma: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g_kind: str = ADDITIVE
    marks: tuple[Mark, ...] = ()
    large_jumps: tuple[Mark, ...] = ()

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        sigma = np.asarray(self.sigma, dtype=float).ravel()
        if sigma.size == 1 and q.size > 1:
            sigma = np.full(q.size, sigma[0])
        if sigma.size == 0:
            sigma = np.ones(q.size)
        if sigma.size != q.size:
            raise ValueError("sigma must have one entry per noise mode")
        if np.any(q < 0) or not np.isfinite(q.sum()):
            raise ValueError("covariance weights must be nonnegative with finite trace")
        if self.g_kind not in (ADDITIVE, DIAGONAL_LINEAR):
            raise ValueError(f"unknown G kind {self.g_kind!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "marks", tuple(self.marks))
        object.__setattr__(self, "large_jumps", tuple(self.large_jumps))

    @classmethod
    def power_law(cls, q0: float, s: float, modes: int, sigma=1.0, g_kind: str = ADDITIVE,
                  marks: Sequence[Mark] = (), large_jumps: Sequence[Mark] = ()) -> "NoiseDescriptor":
        """q_j = q0 * j**(-2 s)."""
        j = np.arange(1, modes + 1, dtype=float)
        return cls(q0 * j ** (-2.0 * s), np.broadcast_to(np.asarray(sigma, float), (modes,)).copy()
                   if np.ndim(sigma) == 0 else sigma, g_kind, tuple(marks), tuple(large_jumps))

    @property
    def modes(self) -> int:
        return self.q.size

    @property
    def total_intensity(self) -> float:
        return float(sum(m.intensity for m in self.marks))

    @property
    def is_silent(self) -> bool:
        return not np.any(self.q * self.sigma ** 2 > 0) and not self.marks and not self.large_jumps

    @property
    def rho(self) -> float:
        """Constant in the growth and Lipschitz bounds for G and K."""
        qs = self.q * self.sigma ** 2
        if qs.size == 0:
            rho_g = 0.0
        elif self.g_kind == ADDITIVE:
            rho_g = float(qs.sum())
        else:
            rho_g = float(qs.max())
        rho_k = 2.0 * sum(m.intensity * (float(m.a @ m.a) + m.b ** 2) for m in self.marks)
        return 2.0 * max(rho_g, rho_k)

    # coefficient maps --------------------------------------------------

    def hs_norm_sq(self, u: np.ndarray) -> np.ndarray:
        """||G(u)||^2 in L_2(U_0, H) restricted to H_n."""
        n = u.shape[-1]
        m = min(n, self.modes)
        qs = self.q[:m] * self.sigma[:m] ** 2
        if self.g_kind == ADDITIVE:
            return np.full(u.shape[:-1], qs.sum())
        return np.sum(qs * u[..., :m] ** 2, axis=-1)

    def hs_diff_norm_sq(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.g_kind == ADDITIVE:
            return np.zeros(u.shape[:-1])
        return self.hs_norm_sq(u - v)

    def k_norm_sq(self, u: np.ndarray) -> np.ndarray:
        """sum_m lambda_m |K(u, xi_m)|^2."""
        return sum((m.intensity * np.sum(m.apply(u) ** 2, axis=-1) for m in self.marks),
                   np.zeros(u.shape[:-1]))


@dataclass
class LevyNoisePath:
    seed: int
    T: float
    dt: float
    wiener: np.ndarray  # (steps, modes), N(0, q_j dt) per entry
    jump_times: np.ndarray
    jump_marks: np.ndarray
    large_times: np.ndarray
    large_marks: np.ndarray
    q: np.ndarray  # variance rate of each simulated mode

    @property
    def steps(self) -> int:
        return self.wiener.shape[0]

    def step_event_index(self) -> tuple[list, list]:
        """Per-step arrays of small- and large-jump marks, events in (t_k, t_{k+1}]."""
        return [self._per_step(self.jump_times, self.jump_marks),
                self._per_step(self.large_times, self.large_marks)]

    def _per_step(self, times, marks):
        out = [marks[:0]] * self.steps
        if times.size == 0:
            return out
        idx = np.clip(np.ceil(times / self.dt - 1e-12).astype(int) - 1, 0, self.steps - 1)
        for s in np.unique(idx):
            out[s] = marks[idx == s]
        return out


def n_steps(T: float, dt: float) -> int:
    if not (T > 0 and dt > 0):
        raise ValueError("T and dt must be positive")
    m = round(T / dt)
    if m < 1 or abs(m * dt - T) > 1e-12 * max(1.0, T):
        raise ValueError(f"dt={dt} does not divide T={T}")
    return int(m)


def _poisson_events(rates: Sequence[float], T: float, rng: np.random.Generator):
    rates = np.asarray(rates, dtype=float)
    total = rates.sum()
    if rates.size == 0 or total <= 0:
        return np.zeros(0), np.zeros(0, dtype=int)
    count = rng.poisson(total * T)
    times = np.sort(T * (1.0 - rng.random(count)))  # uniform on (0, T]
    marks = rng.choice(rates.size, size=count, p=rates / total)
    if count > 1 and np.any(np.diff(times) <= 0):
        raise RuntimeError("coincident jump times")
    return times, marks


def sample_path(desc: NoiseDescriptor, T: float, dt: float, seed: int,
                modes: int | None = None) -> LevyNoisePath:
    """Wiener increments per mode plus Poisson event lists on (0, T]."""
    steps = n_steps(T, dt)
    m = desc.modes if modes is None else min(modes, desc.modes)
    wiener = np.zeros((steps, m))
    for j in range(m):
        if desc.q[j] > 0:
            wiener[:, j] = stream(seed, _STREAM_WIENER, j).standard_normal(steps) * np.sqrt(desc.q[j] * dt)
    jt, jm = _poisson_events([mk.intensity for mk in desc.marks], T, stream(seed, _STREAM_JUMPS))
    lt, lm = _poisson_events([mk.intensity for mk in desc.large_jumps], T, stream(seed, _STREAM_LARGE))
    return LevyNoisePath(int(seed), float(T), float(dt), wiener, jt, jm, lt, lm, desc.q[:m].copy())


def refine_path(path: LevyNoisePath, factor: int) -> LevyNoisePath:
    """Split each Wiener increment into ``factor`` pieces by Brownian-bridge sampling.

    The refined increments sum exactly (up to rounding) to the coarse ones;
    jump events are unchanged.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return path
    steps, m = path.wiener.shape
    fine = np.zeros((steps * factor, m))
    for j in range(m):
        coarse = path.wiener[:, j]
        if not np.any(coarse):
            continue
        z = stream(path.seed, _STREAM_BRIDGE, j).standard_normal((steps, factor))
        z *= np.sqrt(path.q[j] * path.dt / factor)
        z -= (z.sum(axis=1, keepdims=True) - coarse[:, None]) / factor
        fine[:, j] = z.ravel()
    return LevyNoisePath(path.seed, path.T, path.dt / factor, fine, path.jump_times,
                         path.jump_marks, path.large_times, path.large_marks, path.q)


# ---------------------------------------------------------------------------
# forcing terms

def wiener_term(desc: NoiseDescriptor, u: np.ndarray, increment: np.ndarray) -> np.ndarray:
    """P_n G(u) dW with the increment already carrying sqrt(q_j)."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    out = np.zeros_like(u)
    m = min(n, np.shape(increment)[-1], desc.modes)
    inc = np.asarray(increment, dtype=float)[..., :m]
    if desc.g_kind == ADDITIVE:
        out[..., :m] = desc.sigma[:m] * inc
    else:
        out[..., :m] = desc.sigma[:m] * u[..., :m] * inc
    return out


def compensator(desc: NoiseDescriptor, u: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(np.asarray(u, dtype=float))
    for mk in desc.marks:
        out = out + mk.intensity * mk.apply(u)
    return dt * out


def compensated_jump_term(desc: NoiseDescriptor, u: np.ndarray, marks: Sequence[int],
                          dt: float) -> np.ndarray:
    """sum over events of K(u, xi_m) minus dt * sum_m lambda_m K(u, xi_m)."""
    u = np.asarray(u, dtype=float)
    out = -compensator(desc, u, dt)
    for m in marks:
        out = out + desc.marks[int(m)].apply(u)
    return out


def large_jump_term(desc: NoiseDescriptor, u: np.ndarray, marks: Sequence[int]) -> np.ndarray:
    """Uncompensated sum of the large-jump maps over the step's events."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for m in marks:
        out = out + desc.large_jumps[int(m)].apply(u)
    return out
