"""Kinematic tensors and the viscous/elastic stress assembly.

Both stress parameterizations coexist and are never converted into each
other: the mu-form feeds the simulator, the classical six-constant form
exists for cross-checks against the older literature.  (A one-to-one
correspondence between the two is known to exist when ``mu_V = gamma`` but
its explicit map is not part of this toolkit.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import ClassicalLeslieCoefficients, FrankCoefficients, LeslieCoefficients
from .energy import UNIT_NORM_TOL, dpsi_dgradd
from .fields import dot

__all__ = [
    "KinematicState",
    "StressBreakdown",
    "kinematics",
    "transport_g",
    "leslie_stress_classical",
    "stress_total_mu",
]

_SKEW_TOL = 1e-12


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


@dataclass(frozen=True)
class KinematicState:
    """Symmetric/skew split of the velocity gradient plus the co-rotational
    director rate N = D_t d - V d."""

    D: np.ndarray
    V: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        if np.max(np.abs(self.D - np.swapaxes(self.D, -1, -2))) > _SKEW_TOL:
            raise ValueError("D must be symmetric")
        if np.max(np.abs(self.V + np.swapaxes(self.V, -1, -2))) > _SKEW_TOL:
            raise ValueError("V must be skew")


def kinematics(grad_u: np.ndarray, d: np.ndarray, material_dt_d: np.ndarray) -> KinematicState:
    """Split grad u into stretch and spin and form the co-rotational rate.

    ``material_dt_d`` is the full Lagrangian derivative sample
    (time derivative plus advection); the spin correction is applied here.
    """
    grad_u = np.asarray(grad_u, dtype=float)
    d = np.asarray(d, dtype=float)
    material_dt_d = np.asarray(material_dt_d, dtype=float)
    gT = np.swapaxes(grad_u, -1, -2)
    D = 0.5 * (gT + grad_u)
    V = 0.5 * (grad_u - gT)
    N = material_dt_d - np.einsum("...ij,...j->...i", V, d)
    return KinematicState(D=D, V=V, N=N)


def transport_g(
    N: np.ndarray, D: np.ndarray, d: np.ndarray, lambda1: float, lambda2: float
) -> np.ndarray:
    """Kinematic transport lambda1*N + lambda2*D.d of the classical system."""
    Dd = np.einsum("...ij,...j->...i", np.asarray(D, dtype=float), np.asarray(d, dtype=float))
    return lambda1 * np.asarray(N, dtype=float) + lambda2 * Dd


def leslie_stress_classical(
    D: np.ndarray, N: np.ndarray, d: np.ndarray, a: ClassicalLeslieCoefficients
) -> np.ndarray:
    """Six-constant stress
    a1*(d.Dd)*d(x)d + a2*N(x)d + a3*d(x)N + a4*D + a5*(Dd)(x)d + a6*d(x)(Dd).
    """
    D = np.asarray(D, dtype=float)
    N = np.asarray(N, dtype=float)
    d = np.asarray(d, dtype=float)
    Dd = np.einsum("...ij,...j->...i", D, d)
    dDd = dot(d, Dd)[..., None, None]
    out = a.alpha1 * dDd * _outer(d, d)
    out = out + a.alpha2 * _outer(N, d) + a.alpha3 * _outer(d, N)
    out = out + a.alpha4 * D
    out = out + a.alpha5 * _outer(Dd, d) + a.alpha6 * _outer(d, Dd)
    return out


@dataclass(frozen=True)
class StressBreakdown:
    newtonian: np.ndarray
    ericksen: np.ndarray
    leslie_stretch: np.ndarray
    leslie_diss: np.ndarray

    @property
    def leslie(self) -> np.ndarray:
        return self.leslie_stretch + self.leslie_diss

    @property
    def total(self) -> np.ndarray:
        return self.newtonian + self.ericksen + self.leslie_stretch + self.leslie_diss


def stress_total_mu(
    grad_u: np.ndarray,
    d: np.ndarray,
    grad_d: np.ndarray,
    material_dt_d: np.ndarray,
    leslie: LeslieCoefficients,
    frank: FrankCoefficients,
    norm_tol: float = UNIT_NORM_TOL,
) -> StressBreakdown:
    """Assemble S = S_N + S_E + S_L in the mu-parameterization.

    S_N = 2*mu_s*D + mu_b*div(u)*I  (the bulk term is inert once div u = 0,
    it is kept so the constitutive display is reproduced verbatim)
    S_E = -rho * dpsi_dgradd(d, grad_d) . grad_d^T
    S_L = stretch part with weights (mu_D +- mu_V)/(2*gamma) on n(x)d and
          d(x)n, where n = mu_V*V.d + mu_D*P_d(D.d) - gamma*Dt(d), plus the
          dissipative part with the mu_P, mu_L and mu_0 weights.
    """
    grad_u = np.asarray(grad_u, dtype=float)
    d = np.asarray(d, dtype=float)
    grad_d = np.asarray(grad_d, dtype=float)
    # Inline symmetric/skew split: both are exact by construction here, so
    # the KinematicState invariant scan is skipped in this hot path.
    gT = np.swapaxes(grad_u, -1, -2)
    D = 0.5 * (gT + grad_u)
    V = grad_u - D

    div_u = grad_u[..., 0, 0] + grad_u[..., 1, 1] + grad_u[..., 2, 2]
    s_newton = 2.0 * leslie.mu_s * D + leslie.mu_b * div_u[..., None, None] * np.eye(3)

    dpsi = dpsi_dgradd(d, grad_d, frank, norm_tol=norm_tol)
    s_ericksen = -leslie.rho * np.matmul(dpsi, np.swapaxes(grad_d, -1, -2))

    dcol = d[..., :, None]
    Dd = np.matmul(D, dcol)[..., 0]
    Vd = np.matmul(V, dcol)[..., 0]
    PdDd = Dd - dot(d, Dd)[..., None] * d
    n = leslie.mu_V * Vd + leslie.mu_D * PdDd - leslie.gamma * np.asarray(material_dt_d, dtype=float)

    g = leslie.gamma
    s_stretch = ((leslie.mu_D + leslie.mu_V) / (2.0 * g)) * _outer(n, d) + (
        (leslie.mu_D - leslie.mu_V) / (2.0 * g)
    ) * _outer(d, n)

    w_sym = (g * leslie.mu_L + leslie.mu_P**2) / (2.0 * g)
    mix = (leslie.mu_P / g) * n + w_sym * PdDd
    s_diss = _outer(mix, d) + _outer(d, mix)
    s_diss = s_diss + leslie.mu_0 * dot(Dd, d)[..., None, None] * _outer(d, d)

    return StressBreakdown(
        newtonian=s_newton,
        ericksen=s_ericksen,
        leslie_stretch=s_stretch,
        leslie_diss=s_diss,
    )
