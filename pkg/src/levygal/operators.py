"""Monotone operators given by convex integrands, their truncations, and Galerkin assembly.

An operator F is described by convex integrands J_i acting on the tuple of
i-th derivatives, so that

    <F(u), phi> = sum_i  integral of f_i(D^i u) . D^i phi,   f_i = grad J_i.

The truncated operator F^R replaces f_i outside the ball {gauge(x) < R} by its
first-order radial extension from the sphere of radius R, which keeps F^R
monotone with growth of order R^(p-2) |x|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .spaces import Field, SpectralBasis, derivatives, integrate

Array = np.ndarray


def lp_norm(x: Array, p: float) -> Array:
    return np.sum(np.abs(x) ** p, axis=-1) ** (1.0 / p)


@dataclass(frozen=True)
class Integrand:
    """A convex integrand J on R^m with its gradient, Hessian and truncation gauge.

    All callables act on arrays of shape (..., m).  ``hess`` returns
    (..., m, m).  ``gauge`` is the norm whose level sets delimit the
    truncation ball; by default the l^p norm of the tuple.
    """

    order: int
    J: Callable[[Array], Array]
    grad: Callable[[Array], Array]
    hess: Callable[[Array], Array]
    gauge: Callable[[Array], Array]


@dataclass(frozen=True)
class MonotoneOperatorSpec:
    name: str
    p: float
    k: int
    integrands: tuple[Integrand, ...]
    dim: int | None = None  # None: any dimension
    constants: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def integrand(self, order: int) -> Integrand:
        for itg in self.integrands:
            if itg.order == order:
                return itg
        raise ValueError(f"operator {self.name!r} has no integrand of order {order}")

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(itg.order for itg in self.integrands)


@dataclass(frozen=True)
class TruncationParams:
    R: float
    R0: float | None = None

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError(f"truncation radius must exceed 1, got {self.R}")


# ---------------------------------------------------------------------------
# closed-form integrands

def _eye_like(x: Array) -> Array:
    m = x.shape[-1]
    return np.broadcast_to(np.eye(m), x.shape[:-1] + (m, m))


def _power_radial(p: float, shift: float) -> tuple[Callable, Callable, Callable]:
    """J(x) = (shift + |x|^2)^(p/2) / p with Euclidean |x|."""

    def J(x):
        return (shift + np.sum(x * x, axis=-1)) ** (p / 2) / p

    def grad(x):
        s = shift + np.sum(x * x, axis=-1)
        return s[..., None] ** ((p - 2) / 2) * x

    def hess(x):
        s = shift + np.sum(x * x, axis=-1)[..., None, None]
        outer = x[..., :, None] * x[..., None, :]
        a = s ** ((p - 2) / 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            b = np.where(s > 0, (p - 2) * s ** ((p - 4) / 2), 0.0)
        return a * _eye_like(x) + b * outer

    return J, grad, hess


def _linear_functional_power(p: float, e: Array) -> tuple[Callable, Callable, Callable, Callable]:
    """J(x) = |x . e|^p / p, a convex function of one linear form."""
    e = np.asarray(e, dtype=float)
    ee = np.outer(e, e)

    def J(x):
        return np.abs(x @ e) ** p / p

    def grad(x):
        s = x @ e
        return (np.abs(s) ** (p - 2) * s)[..., None] * e

    def hess(x):
        s = x @ e
        return ((p - 1) * np.abs(s) ** (p - 2))[..., None, None] * ee

    def gauge(x):
        return np.abs(x @ e)

    return J, grad, hess, gauge


def smagorinsky(p: float = 4.0) -> MonotoneOperatorSpec:
    """-div((1 + |grad u|^2)^((p-2)/2) grad u)."""
    _check_p(p)
    J, g, h = _power_radial(p, 1.0)
    itg = Integrand(1, J, g, h, lambda x: lp_norm(x, p))
    return MonotoneOperatorSpec("smagorinsky", p, 1, (itg,), params={"p": p})


def p_laplacian(p: float = 4.0) -> MonotoneOperatorSpec:
    """-div(|grad u|^(p-2) grad u)."""
    _check_p(p)
    J, g, h = _power_radial(p, 0.0)
    itg = Integrand(1, J, g, h, lambda x: lp_norm(x, p))
    return MonotoneOperatorSpec("p_laplacian", p, 1, (itg,), params={"p": p})


def biharmonic(p: float = 4.0, dim: int = 1) -> MonotoneOperatorSpec:
    """Laplacian(|Laplacian u|^(p-2) Laplacian u); J_2 depends on the Hessian trace."""
    _check_p(p)
    e = np.eye(dim).ravel()
    J, g, h, gauge = _linear_functional_power(p, e)
    itg = Integrand(2, J, g, h, gauge)
    return MonotoneOperatorSpec("biharmonic", p, 2, (itg,), params={"p": p})


def anisotropic(p: float = 4.0) -> MonotoneOperatorSpec:
    """-d/dx1(|du/dx1|^(p-2) du/dx1) on a rectangle."""
    _check_p(p)
    J, g, h, gauge = _linear_functional_power(p, np.array([1.0, 0.0]))
    itg = Integrand(1, J, g, h, gauge)
    return MonotoneOperatorSpec("anisotropic", p, 1, (itg,), dim=2, params={"p": p})


def polynomial(coefficients: Sequence[float] = (0.0, -1.0, 0.0, 1.0),
               with_laplacian: bool = False) -> MonotoneOperatorSpec:
    """P(u) = sum_i a_i u^i of odd degree 2q+1 with a_{2q+1} > 0, optionally plus -Laplacian.

    The exponent is p = 2q + 2.  Only the combination -Laplacian + P is
    monotone in general; P alone need not be.
    """
    a = np.asarray(coefficients, dtype=float)
    a = np.trim_zeros(a, "b") if a.size and a[-1] == 0 else a
    deg = a.size - 1
    if deg < 1 or deg % 2 == 0:
        raise ValueError("polynomial must have odd degree 2q+1")
    if a[-1] <= 0:
        raise ValueError("leading coefficient a_{2q+1} must be positive")
    p = float(deg + 1)
    P = np.polynomial.Polynomial(a)
    anti = P.integ()
    dP = P.deriv()

    def J(x):
        return anti(x[..., 0])

    def grad(x):
        return P(x)

    def hess(x):
        return dP(x)[..., None]

    itg0 = Integrand(0, J, grad, hess, lambda x: np.abs(x[..., 0]))
    integrands = [itg0]
    if with_laplacian:
        integrands.append(Integrand(1, lambda x: 0.5 * np.sum(x * x, axis=-1), lambda x: x.copy(),
                                    _eye_like, lambda x: lp_norm(x, p)))
    return MonotoneOperatorSpec("polynomial", p, 1, tuple(integrands),
                                params={"coefficients": a.tolist(), "with_laplacian": with_laplacian})


def catalog(p: float = 4.0, coefficients: Sequence[float] = (0.0, -1.0, 0.0, 1.0),
            dim: int = 1) -> list[MonotoneOperatorSpec]:
    """The five example operators: smagorinsky, p_laplacian, biharmonic, polynomial, anisotropic."""
    return [smagorinsky(p), p_laplacian(p), biharmonic(p, dim), polynomial(coefficients),
            anisotropic(p)]


CATALOG_NAMES = ("smagorinsky", "p_laplacian", "biharmonic", "polynomial", "anisotropic")


def get_operator(name: str, p: float = 4.0, coefficients: Sequence[float] | None = None,
                 with_laplacian: bool = False, dim: int = 1) -> MonotoneOperatorSpec:
    if name == "smagorinsky":
        return smagorinsky(p)
    if name == "p_laplacian":
        return p_laplacian(p)
    if name == "biharmonic":
        return biharmonic(p, dim)
    if name == "anisotropic":
        return anisotropic(p)
    if name == "polynomial":
        return polynomial(coefficients if coefficients is not None else (0.0, -1.0, 0.0, 1.0),
                          with_laplacian)
    raise ValueError(f"unknown operator {name!r}; choose from {CATALOG_NAMES}")


def _check_p(p: float):
    if not p > 2:
        raise ValueError("p must exceed 2")


# ---------------------------------------------------------------------------
# pointwise maps

def eval_f(op: MonotoneOperatorSpec, i: int, x) -> Array:
    """f_i(x) = grad J_i(x) for x of shape (..., m)."""
    if i > op.k:
        raise ValueError(f"order {i} exceeds k={op.k} for {op.name}")
    return op.integrand(i).grad(np.asarray(x, dtype=float))


def truncated_grad(itg: Integrand, x: Array, R: float) -> Array:
    x = np.asarray(x, dtype=float)
    g = itg.gauge(x)
    out = itg.grad(x)
    outside = g > R
    if np.any(outside):
        xo = x[outside]
        go = g[outside][:, None]
        y = R * xo / go
        ext = itg.grad(y) + (1.0 - R / go) * np.einsum("...ij,...j->...i", itg.hess(y), xo)
        out = np.array(out, copy=True)
        out[outside] = ext
    return out


def eval_fR(op: MonotoneOperatorSpec, i: int, x, trunc: TruncationParams | float) -> Array:
    """Truncated integrand gradient; the sphere gauge(x) = R belongs to the inner branch."""
    if i > op.k:
        raise ValueError(f"order {i} exceeds k={op.k} for {op.name}")
    R = trunc.R if isinstance(trunc, TruncationParams) else float(trunc)
    return truncated_grad(op.integrand(i), x, R)


def _radius(trunc) -> float | None:
    if trunc is None:
        return None
    return trunc.R if isinstance(trunc, TruncationParams) else float(trunc)


def _assemble(op: MonotoneOperatorSpec, basis: SpectralBasis, coeffs, R: float | None) -> Array:
    c = np.asarray(coeffs, dtype=float)
    out = np.zeros(c.shape)
    for itg in op.integrands:
        if op.dim is not None and basis.dim != op.dim:
            raise ValueError(f"operator {op.name} requires a {op.dim}-D basis")
        if itg.order >= len(basis.tables):
            raise ValueError(f"basis does not support derivative order {itg.order}")
        d = derivatives(basis, c, itg.order)
        fx = itg.grad(d) if R is None else truncated_grad(itg, d, R)
        out += np.einsum("...qm,nmq,q->...n", fx, basis.tables[itg.order], basis.quad_weights)
    return out


def assemble_F(op: MonotoneOperatorSpec, u, basis: SpectralBasis | None = None) -> Array:
    """Galerkin vector (<F(u), w_j>)_j; batched when u is a coefficient array."""
    if isinstance(u, Field):
        return _assemble(op, u.basis, u.coeffs, None)
    return _assemble(op, basis, u, None)


def assemble_FR(op: MonotoneOperatorSpec, u, trunc, basis: SpectralBasis | None = None) -> Array:
    """Galerkin vector of the truncated operator F^R."""
    R = _radius(trunc)
    if isinstance(u, Field):
        return _assemble(op, u.basis, u.coeffs, R)
    return _assemble(op, basis, u, R)


def assemble(op: MonotoneOperatorSpec | None, basis: SpectralBasis, coeffs, trunc=None) -> Array:
    """F^R when a truncation is given, F otherwise; the zero operator for ``op=None``."""
    if op is None:
        return np.zeros(np.shape(coeffs))
    return _assemble(op, basis, coeffs, _radius(trunc))


def truncated_jacobian_pointwise(itg: Integrand, x: Array, R: float | None, h: float = 1e-6) -> Array:
    """Pointwise Jacobian of f or f^R, shape (..., m, m).

    Exact Hessian inside the ball; central differences of the radial extension
    outside it.
    """
    J = np.array(itg.hess(x), copy=True)
    if R is None:
        return J
    g = itg.gauge(x)
    outside = g > R
    if not np.any(outside):
        return J
    xo = x[outside]
    m = x.shape[-1]
    step = h * (1.0 + np.abs(xo))
    cols = []
    for a in range(m):
        e = np.zeros(m)
        e[a] = 1.0
        dp = truncated_grad(itg, xo + step[:, a:a + 1] * e, R)
        dm = truncated_grad(itg, xo - step[:, a:a + 1] * e, R)
        cols.append((dp - dm) / (2 * step[:, a:a + 1]))
    J[outside] = np.stack(cols, axis=-1)
    return J


def assemble_jacobian(op: MonotoneOperatorSpec | None, basis: SpectralBasis, coeffs, trunc=None) -> Array:
    """Galerkin Jacobian d<F^R(u), w_j>/du_l, shape (n, n)."""
    n = basis.n
    if op is None:
        return np.zeros((n, n))
    R = _radius(trunc)
    out = np.zeros((n, n))
    for itg in op.integrands:
        d = derivatives(basis, coeffs, itg.order)
        Jp = truncated_jacobian_pointwise(itg, d, R)
        T = basis.tables[itg.order]
        TJ = np.einsum("jaq,qab->jbq", T, Jp)
        out += np.einsum("jbq,lbq,q->jl", TJ, T, basis.quad_weights)
    return out


def energy(op: MonotoneOperatorSpec, basis: SpectralBasis, coeffs) -> Array:
    """J(u) = sum_i integral of J_i(D^i u)."""
    total = 0.0
    for itg in op.integrands:
        total = total + integrate(basis, itg.J(derivatives(basis, coeffs, itg.order)))
    return total


def truncation_occupancy(op: MonotoneOperatorSpec, u, trunc, basis: SpectralBasis | None = None) -> dict:
    """Normalized measure of {x : gauge(D^i u(x)) > R} for each integrand order."""
    if isinstance(u, Field):
        basis, c = u.basis, u.coeffs
    else:
        c = np.asarray(u, dtype=float)
    R = _radius(trunc)
    out = {}
    for itg in op.integrands:
        g = itg.gauge(derivatives(basis, c, itg.order))
        out[itg.order] = integrate(basis, (g > R).astype(float)) / basis.domain.measure
    return out
