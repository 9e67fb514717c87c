"""Randomized property suites for the operator, convection and noise layers.

Each suite returns a list of :class:`Check` rows carrying the observed value,
the threshold it was held to and any fitted constants.  The sampling
distributions are part of the contract: random directions with coefficient
decay j^-1, amplitudes log-uniform over several decades.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import noise as nz
from .convection import assemble_B_coeffs, assemble_B_cutoff_coeffs, theta
from .operators import (MonotoneOperatorSpec, assemble, eval_f, eval_fR, get_operator)
from .spaces import Domain, SpectralBasis, build_basis, derivatives, integrate, x_norm_p

R_GRID = (2.0, 4.0, 8.0, 16.0)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    constants: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = " ".join(f"{k}={v:.6g}" for k, v in self.constants.items())
        return f"[{status}] {self.name}: value={self.value:.6g} threshold={self.threshold:.6g} {extra}".rstrip()


# ---------------------------------------------------------------------------
# samplers

def sample_fields(basis: SpectralBasis, rng: np.random.Generator, count: int,
                  amp_range: tuple[float, float] = (1e-3, 1e1), norm: str = "V",
                  decay: float = 1.0) -> np.ndarray:
    """Random coefficient vectors with log-uniform amplitude in the chosen norm."""
    j = np.arange(1, basis.n + 1, dtype=float)
    c = rng.standard_normal((count, basis.n)) * j ** (-decay)
    weight = basis.eigenvalues if norm == "V" else np.ones(basis.n)
    c /= np.sqrt(np.sum(weight * c * c, axis=1, keepdims=True))
    lo, hi = np.log(amp_range[0]), np.log(amp_range[1])
    amp = np.exp(rng.uniform(lo, hi, count))
    return c * amp[:, None]


def sample_banded(n: int, rng: np.random.Generator, count: int, amp_range=(1e-1, 1e1)) -> np.ndarray:
    """Unit-H directions supported on the first K modes, K log-uniform in [1, n].

    Sup estimates over nested spaces then stay comparable as n grows, instead
    of drifting toward high-mode fields that never attain the supremum.
    """
    K = np.floor(np.exp(rng.uniform(0.0, np.log(n + 1), count))).astype(int).clip(1, n)
    c = rng.standard_normal((count, n))
    c[np.arange(n)[None, :] >= K[:, None]] = 0.0
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    return c * np.exp(rng.uniform(np.log(amp_range[0]), np.log(amp_range[1]), count))[:, None]


def default_basis(op: MonotoneOperatorSpec, n: int = 16) -> SpectralBasis:
    if op.dim == 2:
        m = max(2, int(np.ceil(np.sqrt(n))))
        return build_basis(Domain(2, (1.0, 1.0), "dirichlet_x1_only"), m * m)
    return build_basis(Domain(), n)


def suite_operator(op: MonotoneOperatorSpec) -> MonotoneOperatorSpec:
    """The form tested for monotonicity: the polynomial entry includes -Laplacian."""
    if op.name == "polynomial" and not op.params.get("with_laplacian"):
        return get_operator("polynomial", coefficients=op.params["coefficients"], with_laplacian=True)
    return op


def _x_norm(basis, c, op):
    return x_norm_p(basis, c, op.p, op.k) ** (1.0 / op.p)


def _chunks(total: int, size: int = 1000):
    for s in range(0, total, size):
        yield s, min(total, s + size)


# ---------------------------------------------------------------------------
# pointwise checks

def _tuple_dim(op: MonotoneOperatorSpec, i: int, d: int | None = None) -> int:
    d = op.dim or 1 if d is None else d
    return d ** i if i > 0 else 1


def _five_point(g, h):
    """Fourth-order central difference of t -> g(t) at t = 0."""
    t = np.ravel(h) if np.ndim(h) > 1 else h
    return (8 * (g(t) - g(-t)) - (g(2 * t) - g(-2 * t))) / (12 * h)


def gradient_consistency(op: MonotoneOperatorSpec, points: int = 200, seed: int = 0,
                         d: int | None = None, tol: float = 1e-6) -> Check:
    """Central differences of J_i against f_i, and of f_i against Hessian actions."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for itg in op.integrands:
        m = _tuple_dim(op, itg.order, d)
        x = rng.standard_normal((points, m))
        x *= np.exp(rng.uniform(np.log(0.1), np.log(10.0), points))[:, None] / np.linalg.norm(x, axis=1, keepdims=True)
        f = itg.grad(x)
        Jx = itg.J(x)
        h = 1e-3 * np.maximum(1.0, np.linalg.norm(x, axis=1))
        fd = np.empty_like(x)
        for a in range(m):
            e = np.zeros(m)
            e[a] = 1.0
            fd[:, a] = _five_point(lambda t: itg.J(x + t[:, None] * e), h)
        scale = np.maximum(np.linalg.norm(f, axis=1),
                           np.abs(Jx - itg.J(np.zeros((1, m)))) / np.linalg.norm(x, axis=1))
        worst = max(worst, float(np.max(np.linalg.norm(fd - f, axis=1) / scale)))

        v = rng.standard_normal((points, m))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        Hv = np.einsum("pij,pj->pi", np.broadcast_to(itg.hess(x), (points, m, m)), v)
        dfd = _five_point(lambda t: itg.grad(x + t[:, None] * v), h[:, None])
        scale = np.maximum(np.linalg.norm(Hv, axis=1), np.linalg.norm(f, axis=1) / np.linalg.norm(x, axis=1))
        worst = max(worst, float(np.max(np.linalg.norm(dfd - Hv, axis=1) / scale)))
    return Check(f"gradient_consistency[{op.name}]", worst <= tol, worst, tol)


def convexity_sampling(op: MonotoneOperatorSpec, points: int = 1000, seed: int = 0) -> Check:
    """Midpoint convexity of every J_i and the minimum at 0.

    The polynomial potential is not convex (only P + (-Laplacian) is monotone),
    so order-0 polynomial integrands are skipped.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for itg in op.integrands:
        if op.name == "polynomial" and itg.order == 0:
            continue
        m = _tuple_dim(op, itg.order)
        x = rng.standard_normal((points, m)) * 3
        y = rng.standard_normal((points, m)) * 3
        gap = 0.5 * (itg.J(x) + itg.J(y)) - itg.J(0.5 * (x + y))
        above = itg.J(x) - itg.J(np.zeros((1, m)))
        scale = 1.0 + np.abs(itg.J(x)) + np.abs(itg.J(y))
        worst = min(worst, float(np.min(gap / scale)), float(np.min(above / scale)))
    return Check(f"convexity[{op.name}]", worst >= -1e-12, worst, -1e-12)


def truncation_continuity(op: MonotoneOperatorSpec, R: float = 4.0, eps: float = 1e-6,
                          points: int = 200, seed: int = 0, tol: float = 1e-4) -> Check:
    """|f^R((R - eps) x) - f^R((R + eps) x)| for unit-gauge directions x."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for itg in op.integrands:
        m = _tuple_dim(op, itg.order)
        x = rng.standard_normal((points, m))
        g = itg.gauge(x)
        x = x[g > 1e-8] / g[g > 1e-8][:, None]
        lo = eval_fR(op, itg.order, (R - eps) * x, R)
        hi = eval_fR(op, itg.order, (R + eps) * x, R)
        rel = np.linalg.norm(hi - lo, axis=1) / np.maximum(np.linalg.norm(hi, axis=1), 1e-300)
        worst = max(worst, float(rel.max()))
    return Check(f"truncation_continuity[{op.name}]", worst <= tol, worst, tol)


def inside_ball_identity(op: MonotoneOperatorSpec, R: float = 4.0, points: int = 200, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for itg in op.integrands:
        m = _tuple_dim(op, itg.order)
        x = rng.standard_normal((points, m))
        g = itg.gauge(x)
        x = x / np.maximum(g, 1e-300)[:, None] * rng.uniform(0, R, points)[:, None]
        diff = np.abs(eval_fR(op, itg.order, x, R) - eval_f(op, itg.order, x))
        worst = max(worst, float(diff.max()))
    return Check(f"inside_ball_identity[{op.name}]", worst == 0.0, worst, 0.0)


# ---------------------------------------------------------------------------
# Galerkin-level checks

def monotonicity(op: MonotoneOperatorSpec, basis: SpectralBasis | None = None, pairs: int = 10_000,
                 R: float | None = None, seed: int = 0, amp_range=(1e-3, 1e2), tol: float = 1e-10) -> Check:
    """min over random pairs of <F(u)-F(v), u-v> / ((|u|_X + |v|_X)^(p-1) |u-v|_X)."""
    op = suite_operator(op)
    basis = basis or default_basis(op)
    rng = np.random.default_rng(seed)
    worst = np.inf
    for a, b in _chunks(pairs):
        u = sample_fields(basis, rng, b - a, amp_range)
        v = sample_fields(basis, rng, b - a, amp_range)
        pair = np.sum((assemble(op, basis, u, R) - assemble(op, basis, v, R)) * (u - v), axis=1)
        xu, xv, xd = _x_norm(basis, u, op), _x_norm(basis, v, op), _x_norm(basis, u - v, op)
        scale = (xu + xv) ** (op.p - 1) * xd
        worst = min(worst, float(np.min(pair / scale)))
    label = "monotone" if R is None else f"monotone_truncated(R={R:g})"
    return Check(f"{label}[{op.name}]", worst >= -tol, worst, -tol)


def smagorinsky_strong_monotonicity(op: MonotoneOperatorSpec, basis: SpectralBasis | None = None,
                                    pairs: int = 10_000, seed: int = 0, amp_range=(1e-3, 1e1),
                                    required_slope: float | None = None) -> tuple[Check, dict]:
    """Fitted slope of <F(u)-F(v), u-v> against |grad(u-v)|^2 and against |u-v|_X^p."""
    basis = basis or default_basis(op)
    rng = np.random.default_rng(seed)
    slope = np.inf
    cp = np.inf
    for a, b in _chunks(pairs):
        u = sample_fields(basis, rng, b - a, amp_range)
        v = sample_fields(basis, rng, b - a, amp_range)
        d = u - v
        pair = np.sum((assemble(op, basis, u) - assemble(op, basis, v)) * d, axis=1)
        grad2 = np.sum(basis.eigenvalues * d * d, axis=1)
        slope = min(slope, float(np.min(pair / grad2)))
        cp = min(cp, float(np.min(pair / x_norm_p(basis, d, op.p, op.k))))
    if required_slope is None:
        required_slope = 0.95 * (op.p - 1)
    fitted = {"slope_vs_grad2": slope, "c_p_vs_Xp": cp}
    return Check(f"strong_monotonicity[{op.name}]", slope >= required_slope, slope, required_slope,
                 fitted), fitted


def dual_x_norm(basis: SpectralBasis, z: np.ndarray, p: float, k: int, tests: int = 200,
                seed: int = 12345) -> np.ndarray:
    """Lower estimate of |z|_{X'} by the supremum over random unit-X test fields."""
    rng = np.random.default_rng(seed)
    phi = sample_fields(basis, rng, tests, (1.0, 1.0))
    phi /= (x_norm_p(basis, phi, p, k) ** (1.0 / p))[:, None]
    z = np.asarray(z, dtype=float)
    own = z / np.maximum(x_norm_p(basis, z, p, k) ** (1.0 / p), 1e-300)[..., None]
    best = np.max(np.abs(z @ phi.T), axis=-1)
    return np.maximum(best, np.abs(np.sum(z * own, axis=-1)))


def coercivity_boundedness(op: MonotoneOperatorSpec, basis: SpectralBasis | None = None,
                           samples: int = 1000, seed: int = 0, amp_range=(1e-2, 1e2)) -> list[Check]:
    """Coercivity lower ratio and growth upper ratio of F over random fields."""
    op = suite_operator(op)
    basis = basis or default_basis(op)
    rng = np.random.default_rng(seed)
    v = sample_fields(basis, rng, samples, amp_range)
    F = assemble(op, basis, v)
    xp = x_norm_p(basis, v, op.p, op.k)
    c1 = float(np.min(np.sum(F * v, axis=1) / xp))
    upper = float(np.max(dual_x_norm(basis, F, op.p, op.k) / (xp ** ((op.p - 1) / op.p) + 1.0)))
    return [Check(f"coercivity[{op.name}]", c1 > 0, c1, 0.0, {"c1": c1}),
            Check(f"growth_bound[{op.name}]", bool(np.isfinite(upper)), upper, np.inf, {"c4_ratio": upper})]


def _stable(values, factor: float = 2.0, atol: float = 1e-12) -> tuple[bool, float]:
    v = np.abs(np.asarray(values, dtype=float))
    if np.all(v <= atol * (1.0 + v.max())):
        return True, 1.0
    if np.any(v <= 0):
        return False, np.inf
    ratio = float(v.max() / v.min())
    return ratio <= factor, ratio


def equicoercivity(op: MonotoneOperatorSpec, basis: SpectralBasis | None = None, R_grid=R_GRID,
                   samples: int = 2000, seed: int = 0, amp_range=(1e-2, 1e3)) -> tuple[list[Check], dict]:
    """Fit (c1, c5) in <F^R v, v> >= c1 ||v||^2 - c5 and the truncated growth ratio on each R.

    c1 is the coercivity constant of F fitted on the same samples; c5(R) is the
    smallest constant making the lower bound hold on every sample.  The growth
    ratio is sup |F^R(v)|_{V'} / ((1 + R^(p-2)) ||v||); the constant term absorbs
    linear parts such as the Laplacian in the polynomial entry.
    """
    op = suite_operator(op)
    basis = basis or default_basis(op)
    rng = np.random.default_rng(seed)
    v = sample_fields(basis, rng, samples, amp_range)
    v2 = np.sum(basis.eigenvalues * v * v, axis=1)
    F = assemble(op, basis, v)
    c1 = float(np.min(np.sum(F * v, axis=1) / x_norm_p(basis, v, op.p, op.k)))
    c5, fr4 = [], []
    for R in R_grid:
        FR = assemble(op, basis, v, R)
        c5.append(max(0.0, float(np.max(c1 * v2 - np.sum(FR * v, axis=1)))))
        dual = np.sqrt(np.sum(FR * FR / basis.eigenvalues, axis=1))
        fr4.append(float(np.max(dual / ((1.0 + R ** (op.p - 2)) * np.sqrt(v2)))))
    ok5, r5 = _stable(c5)
    ok4, r4 = _stable(fr4)
    fitted = {"c1": c1, **{f"c5(R={R:g})": c for R, c in zip(R_grid, c5)},
              **{f"growth_ratio(R={R:g})": c for R, c in zip(R_grid, fr4)}}
    stable_from = next((R for i, R in enumerate(R_grid) if _stable(c5[i:])[0]), None)
    fitted["R0_estimate"] = float(stable_from) if stable_from is not None else np.nan
    return [Check(f"equicoercivity[{op.name}]", ok5, r5, 2.0, {"c1": c1, "c5_max": max(c5)}),
            Check(f"truncated_growth[{op.name}]", ok4, r4, 2.0, {"growth_ratio_max": max(fr4)})], fitted


# ---------------------------------------------------------------------------
# convection

def convection_cancellation(n: int = 32, samples: int = 1000, seed: int = 0, R_tilde: float = 1.0,
                            tol: float = 1e-10) -> Check:
    basis = build_basis(Domain(), n)
    rng = np.random.default_rng(seed)
    u = sample_fields(basis, rng, samples, (1e-2, 1e1), norm="H")
    b = assemble_B_cutoff_coeffs(basis, u, R_tilde)
    nb = assemble_B_coeffs(basis, u, u)
    V = np.sqrt(np.sum(basis.eigenvalues * u * u, axis=1))
    H2 = np.sum(u * u, axis=1)
    worst = max(float(np.max(np.abs(np.sum(b * u, axis=1)) / (V * H2))),
                float(np.max(np.abs(np.sum(nb * u, axis=1)) / (V * H2))))
    return Check(f"convection_cancellation[n={n}]", worst <= tol, worst, tol)


def convection_bounds(ns=(8, 16, 32, 64), samples: int = 1000, seed: int = 0, p: float = 4.0) -> tuple[list[Check], dict]:
    """Sup ratios for the three B bounds, checked for stability as n grows."""
    r0, r1, r2, r3 = [], [], [], []
    for n in ns:
        basis = build_basis(Domain(), n)
        rng = np.random.default_rng(seed)
        v = sample_banded(n, rng, samples)
        w = sample_banded(n, rng, samples)
        lam = basis.eigenvalues
        Hv = np.sqrt(np.sum(v * v, axis=1))
        Vv = np.sqrt(np.sum(lam * v * v, axis=1))
        Vw = np.sqrt(np.sum(lam * w * w, axis=1))
        bvw = assemble_B_coeffs(basis, v, w)
        bvv = assemble_B_coeffs(basis, v, v)
        Av = np.sqrt(np.sum(lam ** 2 * v * v, axis=1))
        Aw = np.sqrt(np.sum(lam ** 2 * w * w, axis=1))
        r0.append(float(np.max(np.sqrt(np.sum(bvw ** 2, axis=1)) / (Av * Aw))))
        r1.append(float(np.max(np.sqrt(np.sum(bvw ** 2 / lam ** 2, axis=1)) / (Hv * Vw))))
        r2.append(float(np.max(np.sqrt(np.sum(bvv ** 2 / lam, axis=1)) / (Hv ** 0.5 * Vv ** 1.5))))
        r3.append(float(np.max(dual_x_norm(basis, bvv, p, 1) / (Hv * Vv))))
    checks = []
    fitted = {}
    for name, r in (("B_bound_H_from_DA", r0), ("B_bound_DA_dual", r1), ("B_bound_Vdual", r2), ("B_bound_Xdual", r3)):
        ok, ratio = _stable(r)
        checks.append(Check(name, ok, ratio, 2.0, {f"n={n}": x for n, x in zip(ns, r)}))
        fitted[name] = r
    return checks, fitted


def theta_lipschitz(R_tilde: float = 1.0, samples: int = 10_000, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    s = rng.uniform(0, 4 * R_tilde, samples)
    t = rng.uniform(0, 4 * R_tilde, samples)
    ratio = np.abs(theta(R_tilde, s) - theta(R_tilde, t)) / np.maximum(np.abs(s - t), 1e-300)
    worst = float(ratio.max())
    return Check(f"theta_lipschitz[R~={R_tilde:g}]", worst <= 1.0 + 1e-12, worst, 1.0)


# ---------------------------------------------------------------------------
# noise

def default_noise(n: int = 8) -> nz.NoiseDescriptor:
    a1 = np.zeros(n)
    a1[0] = 0.5
    a2 = np.zeros(n)
    a2[2] = -0.3
    return nz.NoiseDescriptor.power_law(0.5, 1.0, n, sigma=0.8, g_kind=nz.DIAGONAL_LINEAR,
                                        marks=(nz.Mark(2.0, a1, 0.3), nz.Mark(1.5, a2, -0.4)))


def noise_growth_lipschitz(desc: nz.NoiseDescriptor, n: int = 8, samples: int = 1000,
                           seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((samples, n)) * np.exp(rng.uniform(-3, 3, samples))[:, None]
    w = rng.standard_normal((samples, n)) * np.exp(rng.uniform(-3, 3, samples))[:, None]
    rho = desc.rho
    growth = (desc.hs_norm_sq(v) + desc.k_norm_sq(v)) / (1.0 + np.sum(v * v, axis=1))
    kdiff = sum((m.intensity * np.sum((m.apply(v) - m.apply(w)) ** 2, axis=1) for m in desc.marks),
                np.zeros(samples))
    lip = (desc.hs_diff_norm_sq(v, w) + kdiff) / np.sum((v - w) ** 2, axis=1)
    return [Check("noise_growth", float(growth.max()) <= rho, float(growth.max()), rho, {"rho": rho}),
            Check("noise_lipschitz", float(lip.max()) <= rho, float(lip.max()), rho, {"rho": rho})]


def poisson_count_mean(rate: float = 4.0, T: float = 10.0, paths: int = 2000, seed: int = 0) -> Check:
    a = np.zeros(1)
    desc = nz.NoiseDescriptor(marks=(nz.Mark(rate / 2, a), nz.Mark(rate / 2, a)))
    counts = np.array([nz.sample_path(desc, T, T / 10, seed + s).jump_times.size for s in range(paths)])
    expected = rate * T
    se = np.sqrt(expected / paths)
    dev = abs(float(counts.mean()) - expected) / se
    return Check("poisson_count_mean", dev <= 3.0, dev, 3.0, {"mean": float(counts.mean()), "expected": expected})


def wiener_variance(q: float = 0.7, dt: float = 0.01, increments: int = 10_000, seed: int = 0) -> Check:
    desc = nz.NoiseDescriptor(q=[q, q / 4])
    path = nz.sample_path(desc, increments * dt, dt, seed)
    ratio = path.wiener.var(axis=0) / (desc.q * dt)
    worst = float(np.max(np.abs(ratio - 1.0)))
    return Check("wiener_variance", worst <= 0.1, worst, 0.1, {"ratio_1": ratio[0], "ratio_2": ratio[1]})


def compensated_martingale(desc: nz.NoiseDescriptor | None = None, n: int = 8, dt: float = 0.05,
                           paths: int = 10_000, seed: int = 0) -> list[Check]:
    """Mean of the compensated increment and the Ito isometry at a frozen state."""
    desc = desc or default_noise(n)
    u = np.linspace(1.0, 0.2, n)
    total = desc.total_intensity
    rates = np.array([m.intensity for m in desc.marks])
    rng = nz.stream(seed, 99)
    counts = rng.poisson(rates * dt, size=(paths, rates.size))
    K = np.stack([m.apply(u) for m in desc.marks])  # (marks, n)
    incr = counts @ K - dt * rates @ K
    mean = incr.mean(axis=0)
    se = incr.std(axis=0, ddof=1) / np.sqrt(paths)
    zmax = float(np.max(np.abs(mean) / np.where(se > 0, se, np.inf)))
    sq = np.sum(incr ** 2, axis=1)
    iso = dt * float(rates @ np.sum(K ** 2, axis=1))
    z_iso = abs(float(sq.mean()) - iso) / (sq.std(ddof=1) / np.sqrt(paths))
    _ = total
    return [Check("compensated_mean_zero", zmax <= 4.0, zmax, 4.0),
            Check("ito_isometry", z_iso <= 5.0, z_iso, 5.0, {"mc": float(sq.mean()), "exact": iso})]


def noise_determinism(desc: nz.NoiseDescriptor | None = None, seed: int = 7) -> Check:
    desc = desc or default_noise()
    a = nz.sample_path(desc, 1.0, 0.01, seed)
    b = nz.sample_path(desc, 1.0, 0.01, seed)
    same = (np.array_equal(a.wiener, b.wiener) and np.array_equal(a.jump_times, b.jump_times)
            and np.array_equal(a.jump_marks, b.jump_marks))
    return Check("noise_determinism", same, 0.0 if same else 1.0, 0.0)


# ---------------------------------------------------------------------------

def operator_suite(op: MonotoneOperatorSpec, pairs: int = 10_000, seed: int = 0) -> tuple[list[Check], dict]:
    """All operator-level checks for one catalog entry."""
    checks = [gradient_consistency(op, seed=seed), convexity_sampling(suite_operator(op), seed=seed),
              truncation_continuity(op, seed=seed), inside_ball_identity(op, seed=seed),
              monotonicity(op, pairs=pairs, seed=seed)]
    for R in R_GRID:
        checks.append(monotonicity(op, pairs=pairs, R=R, seed=seed))
    checks += coercivity_boundedness(op, seed=seed)
    eq, fitted = equicoercivity(op, seed=seed)
    checks += eq
    if op.name == "smagorinsky":
        c, f = smagorinsky_strong_monotonicity(op, pairs=pairs, seed=seed)
        checks.append(c)
        fitted.update(f)
    return checks, fitted


def full_suite(op: MonotoneOperatorSpec, pairs: int = 10_000, seed: int = 0) -> tuple[list[Check], dict]:
    checks, fitted = operator_suite(op, pairs, seed)
    desc = default_noise()
    checks.append(convection_cancellation(seed=seed))
    conv, cf = convection_bounds(seed=seed)
    checks += conv
    checks.append(theta_lipschitz(seed=seed))
    checks += noise_growth_lipschitz(desc, seed=seed)
    checks += compensated_martingale(desc, seed=seed)
    checks.append(poisson_count_mean(seed=seed))
    checks.append(wiener_variance(seed=seed))
    checks.append(noise_determinism(desc, seed=seed))
    fitted["rho"] = desc.rho
    for name, vals in cf.items():
        fitted[f"{name}_max"] = max(vals)
    return checks, fitted
