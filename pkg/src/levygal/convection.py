"""Skew-symmetric 1-D convection B(v, w) = v w' + (1/2) v' w and its cutoff.

The skew form gives <B(v, w), w> = [v w^2 / 2] = 0 under Dirichlet
conditions, the property the energy estimates rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import Field, SpectralBasis, derivatives


@dataclass(frozen=True)
class CutoffParams:
    R_tilde: float

    def __post_init__(self):
        if not self.R_tilde >= 1:
            raise ValueError("cutoff level must be >= 1 for a Lipschitz-1 ramp")


def theta(cut: CutoffParams | float, s) -> np.ndarray:
    """1 on [0, R], 0 on [2R, inf), affine in between."""
    R = cut.R_tilde if isinstance(cut, CutoffParams) else float(cut)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("theta is defined on [0, inf)")
    return np.clip(2.0 - s / R, 0.0, 1.0)


def _check(basis: SpectralBasis):
    if basis.dim != 1:
        raise ValueError("convection surrogate is only defined on 1-D bases")


def assemble_B_coeffs(basis: SpectralBasis, v, w) -> np.ndarray:
    """Batched (<B(v, w), w_j>)_j from coefficient arrays."""
    _check(basis)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    v0, v1 = derivatives(basis, v, 0)[..., 0], derivatives(basis, v, 1)[..., 0]
    w0, w1 = derivatives(basis, w, 0)[..., 0], derivatives(basis, w, 1)[..., 0]
    integrand = v0 * w1 + 0.5 * v1 * w0
    return (integrand * basis.quad_weights) @ basis.tables[0][:, 0, :].T


def assemble_B(v: Field, w: Field) -> np.ndarray:
    return assemble_B_coeffs(v.basis, v.coeffs, w.coeffs)


def assemble_B_cutoff_coeffs(basis: SpectralBasis, u, cut) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    t = theta(cut, np.sqrt(np.sum(u * u, axis=-1)))
    if np.ndim(t) == 0:
        if t == 0.0:
            return np.zeros_like(u)
        return t * assemble_B_coeffs(basis, u, u)
    return t[..., None] * assemble_B_coeffs(basis, u, u)


def assemble_B_cutoff(u: Field, cut) -> np.ndarray:
    """theta(|u|) B(u, u) with |u| the H-norm."""
    return assemble_B_cutoff_coeffs(u.basis, u.coeffs, cut)
