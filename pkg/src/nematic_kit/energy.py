"""Elastic free energy of the director field and its partial derivatives.

The density is evaluated pointwise from a unit director ``d`` and a gradient
sample ``G`` with the convention ``G[i, j] = d_j d_i``.  Splay, twist, bend
and saddle-splay parts are kept separate so the weighted total can be audited
term by term:

    psi = k1*(div d)^2 + k2*(d . curl d)^2 + k3*|d x curl d|^2
          + (k2 + k4)*[tr(G^2) - (div d)^2]

The saddle-splay part is a null Lagrangian: its bulk Euler-Lagrange
contribution vanishes identically, so divergence-form quantities may be
computed from the reduced density

    psi_tilde = k1*(div d)^2 + k3*|curl d|^2 + (k2 - k3)*(d . curl d)^2

which agrees with the first three terms of ``psi`` whenever ``|d| = 1``.
The matrix derivative ``dpsi_dgradd`` is nevertheless assembled from the full
density (saddle-splay included) because the boundary operator needs the
complete matrix; the Ericksen operator uses the reduced route.  Keeping both
avoids silent sign errors between the interior and boundary assemblies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import FrankCoefficients
from .fields import DirectorField, cross, curl_array, divergence_tensor_array, dot, gradient_array

__all__ = [
    "EnergyDensityBreakdown",
    "psi",
    "psi_tilde",
    "dpsi_dgradd",
    "dpsi_dd",
    "null_lagrangian_residual",
    "skew_matrix",
    "UNIT_NORM_TOL",
]

# |d| tolerance for pointwise energy evaluation.
UNIT_NORM_TOL = 1e-8


@dataclass(frozen=True)
class EnergyDensityBreakdown:
    """Unweighted structural densities plus their k-weighted total."""

    splay: np.ndarray | float
    twist: np.ndarray | float
    bend: np.ndarray | float
    saddle_splay: np.ndarray | float
    total: np.ndarray | float


def _require_unit(d: np.ndarray, tol: float = UNIT_NORM_TOL) -> None:
    drift = np.max(np.abs(np.sum(d * d, axis=-1) - 1.0))
    if drift > tol:
        raise ValueError(f"director must be unit length (|d|^2 - 1 up to {drift:.3e})")


def _curl_from_grad(G: np.ndarray) -> np.ndarray:
    """curl d from a gradient sample, (curl d)_i = eps_ijk G[k, j]."""
    c = np.empty(G.shape[:-2] + (3,), dtype=G.dtype)
    c[..., 0] = G[..., 2, 1] - G[..., 1, 2]
    c[..., 1] = G[..., 0, 2] - G[..., 2, 0]
    c[..., 2] = G[..., 1, 0] - G[..., 0, 1]
    return c


def _div_from_grad(G: np.ndarray) -> np.ndarray:
    return G[..., 0, 0] + G[..., 1, 1] + G[..., 2, 2]


def skew_matrix(d: np.ndarray) -> np.ndarray:
    """Cross-product matrix of d: skew_matrix(d) @ v == d x v.

    This is also the matrix derivative of (d . curl d) with respect to the
    director gradient.
    """
    D = np.zeros(d.shape[:-1] + (3, 3), dtype=d.dtype)
    D[..., 0, 1] = -d[..., 2]
    D[..., 0, 2] = d[..., 1]
    D[..., 1, 0] = d[..., 2]
    D[..., 1, 2] = -d[..., 0]
    D[..., 2, 0] = -d[..., 1]
    D[..., 2, 1] = d[..., 0]
    return D


def psi(
    d: np.ndarray, G: np.ndarray, c: FrankCoefficients, norm_tol: float = UNIT_NORM_TOL
) -> EnergyDensityBreakdown:
    """Full energy density breakdown at one point (or a batch of points)."""
    d = np.asarray(d, dtype=float)
    G = np.asarray(G, dtype=float)
    _require_unit(d, norm_tol)
    div = _div_from_grad(G)
    cl = _curl_from_grad(G)
    d_dot_curl = dot(d, cl)
    d_cross_curl = cross(d, cl)
    tr_g2 = np.einsum("...ij,...ji->...", G, G)
    splay = div**2
    twist = d_dot_curl**2
    bend = dot(d_cross_curl, d_cross_curl)
    saddle = tr_g2 - div**2
    total = c.k1 * splay + c.k2 * twist + c.k3 * bend + (c.k2 + c.k4) * saddle
    return EnergyDensityBreakdown(splay=splay, twist=twist, bend=bend, saddle_splay=saddle, total=total)


def psi_tilde(
    d: np.ndarray, G: np.ndarray, c: FrankCoefficients, norm_tol: float = UNIT_NORM_TOL
) -> np.ndarray | float:
    """Reduced density k1*(div)^2 + k3*|curl|^2 + (k2-k3)*(d.curl)^2."""
    d = np.asarray(d, dtype=float)
    G = np.asarray(G, dtype=float)
    _require_unit(d, norm_tol)
    div = _div_from_grad(G)
    cl = _curl_from_grad(G)
    return c.k1 * div**2 + c.k3 * dot(cl, cl) + (c.k2 - c.k3) * dot(d, cl) ** 2


def dpsi_dgradd(
    d: np.ndarray, G: np.ndarray, c: FrankCoefficients, norm_tol: float = UNIT_NORM_TOL
) -> np.ndarray:
    """Matrix derivative of the full density with respect to the gradient.

    Exact algebraic assembly (no differencing):

        2*k1*div(d)*I + 2*k3*(G - G^T) + 2*(k2-k3)*(d.curl d)*skew(d)
        + 2*(k2+k4)*(G^T - div(d)*I)
    """
    d = np.asarray(d, dtype=float)
    G = np.asarray(G, dtype=float)
    _require_unit(d, norm_tol)
    div = _div_from_grad(G)[..., None, None]
    cl = _curl_from_grad(G)
    eye = np.eye(3)
    GT = np.swapaxes(G, -1, -2)
    out = 2.0 * c.k1 * div * eye
    out = out + 2.0 * c.k3 * (G - GT)
    out = out + 2.0 * (c.k2 - c.k3) * dot(d, cl)[..., None, None] * skew_matrix(d)
    out = out + 2.0 * (c.k2 + c.k4) * (GT - div * eye)
    return out


def dpsi_dd(
    d: np.ndarray, G: np.ndarray, c: FrankCoefficients, norm_tol: float = UNIT_NORM_TOL
) -> np.ndarray:
    """Director derivative of the reduced density at fixed gradient:
    2*(k2-k3)*(d.curl d)*curl d.

    The reduced form is valid only on the unit sphere, hence the hard unit
    precondition.
    """
    d = np.asarray(d, dtype=float)
    G = np.asarray(G, dtype=float)
    _require_unit(d, norm_tol)
    cl = _curl_from_grad(G)
    return 2.0 * (c.k2 - c.k3) * dot(d, cl)[..., None] * cl


def null_lagrangian_residual(d: DirectorField, grad: np.ndarray | None = None) -> float:
    """Max-norm of the discrete divergence of the saddle-splay stress
    ``2*G^T - 2*div(d)*I``.

    With ``grad`` omitted the gradient is the module's discrete operator; on
    a periodic grid centered stencils commute exactly, so the residual is
    pure roundoff (the discrete identity is *exact*, stronger than the
    O(h^2) contract).  Passing an analytically sampled gradient instead
    measures the truncation error of the outer discrete divergence against
    the continuum identity, which decays at second order under refinement.
    """
    grid = d.grid
    if any(t != "periodic" for t in grid.topology):
        raise ValueError("null-Lagrangian residual is defined on periodic grids")
    G = gradient_array(d.values, grid) if grad is None else np.asarray(grad, dtype=float)
    div = G[..., 0, 0] + G[..., 1, 1] + G[..., 2, 2]
    stress = 2.0 * np.swapaxes(G, -1, -2) - 2.0 * div[..., None, None] * np.eye(3)
    resid = divergence_tensor_array(stress, grid)
    return float(np.max(np.abs(resid)))


def total_energy(d: DirectorField, c: FrankCoefficients, norm_tol: float = UNIT_NORM_TOL) -> float:
    """Trapezoid-weighted integral of the full density over the grid."""
    grid = d.grid
    G = gradient_array(d.values, grid)
    density = np.asarray(psi(d.values, G, c, norm_tol=norm_tol).total)
    weights = np.ones(grid.extents)
    ax = grid.wall_axis
    if ax is not None:
        sl = [slice(None)] * 3
        for edge in (0, -1):
            s = list(sl)
            s[ax] = edge
            weights[tuple(s)] *= 0.5
    return float(np.sum(density * weights) * grid.cell_volume())


def curl_of(d: DirectorField) -> np.ndarray:
    return curl_array(d.values, d.grid)
