"""Spectral eigenbasis of the Dirichlet Laplacian, projections, quadrature and norms.

The Galerkin space H_n is spanned by the first n L2-orthonormal eigenfunctions
of A = -Laplacian on an interval or a rectangle.  All fields are stored as
coefficient vectors in that basis; pointwise values and derivatives are
obtained from closed-form tables sampled on a uniform midpoint grid.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DIRICHLET = "dirichlet"
DIRICHLET_X1_ONLY = "dirichlet_x1_only"
MAX_DERIVATIVE_ORDER = 2


@dataclass(frozen=True)
class Domain:
    dim: int = 1
    lengths: tuple[float, ...] = (1.0,)
    boundary_condition: str = DIRICHLET

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        lengths = tuple(float(x) for x in self.lengths)
        if len(lengths) == 1 and self.dim == 2:
            lengths = lengths * 2
        if len(lengths) != self.dim:
            raise ValueError("one length per axis is required")
        if any(not np.isfinite(x) or x <= 0 for x in lengths):
            raise ValueError("all lengths must be positive")
        object.__setattr__(self, "lengths", lengths)
        if self.boundary_condition not in (DIRICHLET, DIRICHLET_X1_ONLY):
            raise ValueError(f"unknown boundary condition {self.boundary_condition!r}")
        if self.boundary_condition == DIRICHLET_X1_ONLY and self.dim != 2:
            raise ValueError("dirichlet_x1_only requires dim = 2")

    @property
    def measure(self) -> float:
        return float(np.prod(self.lengths))


def _axis_tables(kind: str, k: int, length: float, x: np.ndarray) -> np.ndarray:
    """Values of the 1-D factor and its first two derivatives, shape (3, len(x))."""
    w = k * np.pi / length
    if kind == "sin":
        c = np.sqrt(2.0 / length)
        s, co = np.sin(w * x), np.cos(w * x)
        return np.stack([c * s, c * w * co, -c * w * w * s])
    if k == 0:
        c = np.sqrt(1.0 / length)
        return np.stack([np.full_like(x, c), np.zeros_like(x), np.zeros_like(x)])
    c = np.sqrt(2.0 / length)
    s, co = np.sin(w * x), np.cos(w * x)
    return np.stack([c * co, -c * w * s, -c * w * w * co])


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """First n eigenpairs of A with tabulated values on the quadrature grid.

    ``tables[i]`` has shape (n, d**i, n_points): the i-th derivative tuple of
    every basis function at every quadrature node (row-major Hessian for i=2).
    """

    domain: Domain
    n: int
    n_quad: int
    eigenvalues: np.ndarray
    mode_indices: np.ndarray
    quad_points: tuple[np.ndarray, ...]
    quad_weights: np.ndarray
    tables: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def n_points(self) -> int:
        return self.quad_weights.size

    def grid(self) -> np.ndarray:
        """Quadrature nodes as an array of shape (n_points, dim)."""
        mesh = np.meshgrid(*self.quad_points, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def eval_basis(self, points: np.ndarray) -> np.ndarray:
        """Basis function values at arbitrary points, shape (n, len(points))."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[-1] != self.dim and self.dim == 1:
            points = points.reshape(-1, 1)
        out = np.ones((self.n, points.shape[0]))
        for j, idx in enumerate(self.mode_indices):
            for a in range(self.dim):
                out[j] *= _axis_tables(_axis_kind(self.domain, a), int(idx[a]),
                                       self.domain.lengths[a], points[:, a])[0]
        return out


def _axis_kind(domain: Domain, axis: int) -> str:
    if domain.boundary_condition == DIRICHLET_X1_ONLY and axis == 1:
        return "cos"
    return "sin"


def _mode_list(domain: Domain, n: int) -> tuple[np.ndarray, np.ndarray]:
    lo = [0 if _axis_kind(domain, a) == "cos" else 1 for a in range(domain.dim)]
    ranges = [range(lo[a], lo[a] + n) for a in range(domain.dim)]
    cands = []
    for idx in itertools.product(*ranges):
        lam = sum((k * np.pi / L) ** 2 for k, L in zip(idx, domain.lengths))
        cands.append((lam, idx))
    cands.sort(key=lambda c: (c[0], c[1]))
    cands = cands[:n]
    lam = np.array([c[0] for c in cands])
    idx = np.array([c[1] for c in cands], dtype=int).reshape(n, domain.dim)
    return lam, idx


def build_basis(domain: Domain, n: int, n_quad: int | None = None) -> SpectralBasis:
    """Closed-form eigenbasis ordered by ascending eigenvalue.

    Ties are broken by the lexicographic order of the mode multi-index.  The
    quadrature is the composite midpoint rule with ``n_quad`` nodes per axis,
    which must be at least four times the largest mode index so that products
    of up to four basis functions are integrated without aliasing.
    """
    if n < 1:
        raise ValueError("n must be positive")
    lam, idx = _mode_list(domain, n)
    floor = 4 * max(int(idx.max()), 1)
    if n_quad is None:
        n_quad = floor
    if n_quad < floor:
        raise ValueError(f"n_quad={n_quad} is below the anti-aliasing floor {floor}")
    if lam.min() <= 0:
        raise ValueError("unsupported boundary condition: zero eigenvalue")

    pts = tuple((np.arange(n_quad) + 0.5) * (L / n_quad) for L in domain.lengths)
    w1 = [np.full(n_quad, L / n_quad) for L in domain.lengths]
    weights = w1[0] if domain.dim == 1 else np.outer(w1[0], w1[1]).ravel()

    d = domain.dim
    n_pts = n_quad ** d
    tables = [np.empty((n, d ** i, n_pts)) for i in range(MAX_DERIVATIVE_ORDER + 1)]
    for j in range(n):
        ax = [_axis_tables(_axis_kind(domain, a), int(idx[j, a]), domain.lengths[a], pts[a])
              for a in range(d)]
        if d == 1:
            tables[0][j, 0] = ax[0][0]
            tables[1][j, 0] = ax[0][1]
            tables[2][j, 0] = ax[0][2]
            continue
        X, Y = ax

        def prod(a, b):
            return np.outer(X[a], Y[b]).ravel()

        tables[0][j, 0] = prod(0, 0)
        tables[1][j, 0] = prod(1, 0)
        tables[1][j, 1] = prod(0, 1)
        tables[2][j, 0] = prod(2, 0)
        tables[2][j, 1] = prod(1, 1)
        tables[2][j, 2] = prod(1, 1)
        tables[2][j, 3] = prod(0, 2)
    for t in tables:
        t.setflags(write=False)
    for arr in (lam, idx, weights):
        arr.setflags(write=False)
    return SpectralBasis(domain, n, n_quad, lam, idx, pts, weights, tuple(tables))


@dataclass(frozen=True, eq=False)
class Field:
    """Element of H_n stored by its coefficients in the eigenbasis."""

    basis: SpectralBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.basis.n,):
            raise ValueError(f"expected {self.basis.n} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, basis: SpectralBasis) -> "Field":
        return cls(basis, np.zeros(basis.n))

    @classmethod
    def mode(cls, basis: SpectralBasis, k: int, amplitude: float = 1.0) -> "Field":
        """amplitude * w_k with 1-based k."""
        c = np.zeros(basis.n)
        c[k - 1] = amplitude
        return cls(basis, c)

    def __add__(self, other: "Field") -> "Field":
        return Field(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, s: float) -> "Field":
        return Field(self.basis, s * self.coeffs)

    __rmul__ = __mul__

    def values(self) -> np.ndarray:
        return synthesize(self.basis, self.coeffs)


def _coeffs(u) -> np.ndarray:
    return u.coeffs if isinstance(u, Field) else np.asarray(u, dtype=float)


def synthesize(basis: SpectralBasis, coeffs: np.ndarray) -> np.ndarray:
    """Pointwise values at the quadrature nodes (batched over leading axes)."""
    return np.asarray(coeffs) @ basis.tables[0][:, 0, :]


def project(samples: np.ndarray, basis: SpectralBasis) -> Field:
    """Quadrature approximation of P_n v from values at the quadrature nodes."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim > 1 and basis.dim == 2 and samples.shape == (basis.n_quad, basis.n_quad):
        samples = samples.ravel()
    if samples.shape != (basis.n_points,):
        raise ValueError(f"expected {basis.n_points} samples, got shape {samples.shape}")
    return Field(basis, basis.tables[0][:, 0, :] @ (basis.quad_weights * samples))


def derivatives(basis: SpectralBasis, coeffs: np.ndarray, order: int) -> np.ndarray:
    """D^i u at every node for batched coefficients: shape (..., n_points, d**i)."""
    if not 0 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order {order} not supported (max {MAX_DERIVATIVE_ORDER})")
    return np.einsum("...n,nmq->...qm", np.asarray(coeffs, dtype=float), basis.tables[order])


def evaluate_derivatives(field: Field, order: int) -> np.ndarray:
    """Closed-form D^i u at the quadrature nodes, shape (n_points, d**i)."""
    return derivatives(field.basis, field.coeffs, order)


def integrate(basis: SpectralBasis, values: np.ndarray) -> np.ndarray:
    """Quadrature over the last axis."""
    return np.asarray(values) @ basis.quad_weights


def x_norm_p(basis: SpectralBasis, coeffs, p: float, k: int) -> np.ndarray:
    """||u||_X^p = sum over i <= k of the integral of |D^i u|_{l^p}^p."""
    total = 0.0
    for i in range(k + 1):
        d = derivatives(basis, _coeffs(coeffs), i)
        total = total + integrate(basis, np.sum(np.abs(d) ** p, axis=-1))
    return total


def norm(u, which: str = "H", basis: SpectralBasis | None = None,
         p: float | None = None, k: int | None = None):
    """H, V, dual-V (``"Vp"``) or X(p, k) norm; batched over leading axes."""
    if isinstance(u, Field):
        basis = u.basis
    c = _coeffs(u)
    if which == "H":
        return np.sqrt(np.sum(c * c, axis=-1))
    if which == "V":
        return np.sqrt(np.sum(basis.eigenvalues * c * c, axis=-1))
    if which in ("Vp", "Dual_V", "V'"):
        return np.sqrt(np.sum(c * c / basis.eigenvalues, axis=-1))
    if which == "X":
        if p is None or k is None:
            raise ValueError("X norm requires p and k")
        if p <= 2 or k > MAX_DERIVATIVE_ORDER:
            raise ValueError("X norm requires p > 2 and k <= 2")
        return x_norm_p(basis, c, p, k) ** (1.0 / p)
    raise ValueError(f"unknown norm {which!r}")


def apply_A(u):
    """A u in coefficients: multiplication by the eigenvalues."""
    if isinstance(u, Field):
        return Field(u.basis, u.basis.eigenvalues * u.coeffs)
    raise TypeError("apply_A expects a Field")


def gram_matrix(basis: SpectralBasis) -> np.ndarray:
    t = basis.tables[0][:, 0, :]
    return (t * basis.quad_weights) @ t.T


def random_coeffs(basis: SpectralBasis, rng: np.random.Generator, size: int | Sequence[int] = (),
                  decay: float = 1.0) -> np.ndarray:
    """Gaussian coefficients with standard deviation j**-decay on mode j."""
    size = (size,) if isinstance(size, int) else tuple(size)
    j = np.arange(1, basis.n + 1, dtype=float)
    return rng.standard_normal(size + (basis.n,)) * j ** (-decay)
