"""Laplace-Fourier symbol algebra of the linearized coupled system.

The director block symbol is

    m_d(xi) = 2*k3*|xi|^2 I + 2*(k1-k3) P_d (xi (x) xi)
              + 2*(k2-k3) (d x xi) (x) (d x xi)

whose symmetric part is positive definite for admissible elastic constants;
its spectrum has closed forms organised by z = (d|zeta), zeta = xi/|xi|:

 * d parallel to zeta: all three eigenvalues equal 2*k3,
 * transverse direction d x zeta: 2*k2*|d x zeta|^2 + 2*k3*(1 - |d x zeta|^2),
 * in-plane pair (k1 != k3, z != 0):
       lambda_pm = 2*k3 + (k1-k3)*(1 - z^2 +- sqrt(1 - z^2)),
   degenerating to 2*k3 (twice) when k1 == k3 or z^2 == 1, and to
   (2*k1, 2*k3) when z == 0.

The worst in-plane value for k1 > k3 is (9*k3 - k1)/4, attained at
z^2 = 3/4; this is where ellipticity is lost first.

The coupled velocity/director symbols (M_u, M_d, R0, R1, R_mu, R) accept a
*complex* frequency argument so the same assembly serves both the interior
accretivity estimate (real xi) and the half-line boundary analysis
(xi - i*nu*t).  All contractions are complex-bilinear: no conjugations, this
is symbol substitution, not an inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import FrankCoefficients, LeslieCoefficients

__all__ = [
    "SymbolPoint",
    "EigenReport",
    "EllipticityCertificate",
    "SphereSampler",
    "StokesSymbols",
    "DegeneratePointError",
    "symbol_m",
    "symbol_m_symmetric",
    "closed_form_eigenvalues",
    "symmetric_eigs",
    "min_eig_sym3",
    "certify_strong_ellipticity",
    "assemble_symbols",
    "stokes_symbols",
    "schur_complement",
    "accretivity_check",
    "accretivity_margin",
]

_EYE = np.eye(3)

# Branch-point guards for the closed forms: sqrt(1-z^2) loses relative
# accuracy as z^2 -> 1, and the in-plane pair is defined only for k1 != k3.
_Z_BRANCH_TOL = 1e-10
_K_BRANCH_TOL = 1e-12


class DegeneratePointError(RuntimeError):
    """Numerically degenerate symbol point (singular block or defective
    eigenbasis); carries the conditioning estimate."""

    def __init__(self, message: str, cond: float):
        super().__init__(f"{message} (cond {cond:.3e})")
        self.cond = cond


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def symbol_m(xi: np.ndarray, d: np.ndarray, c: FrankCoefficients) -> np.ndarray:
    """Director-block symbol; homogeneous of degree two in xi.

    Accepts real or complex ``xi`` (complex-bilinear assembly) and batches
    over leading axes.
    """
    xi = np.asarray(xi)
    d = np.asarray(d, dtype=float)
    P = _EYE - _outer(d, d)
    Pxi = np.einsum("...ij,...j->...i", P, xi)
    dxxi = _cross(d, xi)
    xi_sq = np.sum(xi * xi, axis=-1)[..., None, None]
    return (
        2.0 * c.k3 * xi_sq * _EYE
        + 2.0 * (c.k1 - c.k3) * _outer(Pxi, xi)
        + 2.0 * (c.k2 - c.k3) * _outer(dxxi, dxxi)
    )


def symbol_m_symmetric(xi: np.ndarray, d: np.ndarray, c: FrankCoefficients) -> np.ndarray:
    """Symmetric part of :func:`symbol_m` (real xi)."""
    m = symbol_m(xi, d, c)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def closed_form_eigenvalues(z: float, c: FrankCoefficients) -> tuple[float, float, float]:
    """(lambda_plus, lambda_minus, transverse) of the unit-frequency
    symmetric symbol as functions of z = (d|zeta) alone.

    Switches to the degenerate-case formulas near the branch points
    z^2 -> 1 and k1 -> k3 where the square root loses accuracy.
    """
    s2 = 1.0 - z * z
    transverse = 2.0 * c.k3 + 2.0 * (c.k2 - c.k3) * s2
    if abs(c.k1 - c.k3) < _K_BRANCH_TOL or abs(s2) < _Z_BRANCH_TOL:
        return (2.0 * c.k3, 2.0 * c.k3, transverse)
    if abs(z) < _Z_BRANCH_TOL:
        return (2.0 * c.k1, 2.0 * c.k3, transverse)
    s = np.sqrt(max(s2, 0.0))
    lam_plus = 2.0 * c.k3 + (c.k1 - c.k3) * (s2 + s)
    lam_minus = 2.0 * c.k3 + (c.k1 - c.k3) * (s2 - s)
    return (lam_plus, lam_minus, transverse)


@dataclass(frozen=True)
class EigenReport:
    """Spectrum report of the symmetric symbol at one (zeta, d) sample."""

    eigenvalues: tuple[complex, complex, complex]
    min_rayleigh: float
    closed_form: tuple[float, float, float] | None
    normally_elliptic: bool


def symmetric_eigs(xi: np.ndarray, d: np.ndarray, c: FrankCoefficients) -> EigenReport:
    """Numeric spectrum of the unit-frequency symmetric symbol, with the
    closed-form triple alongside.

    The ``normally_elliptic`` flag is a diagnostic only (spectrum of the
    non-symmetric symbol real and positive); no quantitative bound is
    attached to it.
    """
    xi = np.asarray(xi, dtype=float)
    norm = float(np.linalg.norm(xi))
    if norm == 0.0:
        raise ValueError("symmetric_eigs requires |xi| > 0")
    zeta = xi / norm
    d = np.asarray(d, dtype=float)
    msym = symbol_m_symmetric(zeta, d, c)
    evals = np.linalg.eigvalsh(msym)
    try:
        full = np.linalg.eigvals(symbol_m(zeta, d, c))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise DegeneratePointError("eigensolver failed on the full symbol", np.inf) from exc
    scale = max(1.0, float(np.max(np.abs(full))))
    normal = bool(np.all(np.abs(full.imag) < 1e-9 * scale) and np.all(full.real > 0.0))
    z = float(np.dot(d, zeta))
    return EigenReport(
        eigenvalues=tuple(complex(v) for v in np.sort(evals)),
        min_rayleigh=float(evals[0]),
        closed_form=closed_form_eigenvalues(z, c),
        normally_elliptic=normal,
    )


def min_eig_sym3(msym: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of a batch of symmetric 3x3 matrices.

    Analytic trigonometric solve (no LAPACK call per matrix); used by the
    ellipticity sweeps where millions of tiny problems are evaluated.
    """
    a00 = msym[..., 0, 0]
    a11 = msym[..., 1, 1]
    a22 = msym[..., 2, 2]
    a01 = msym[..., 0, 1]
    a02 = msym[..., 0, 2]
    a12 = msym[..., 1, 2]
    q = (a00 + a11 + a22) / 3.0
    b00, b11, b22 = a00 - q, a11 - q, a22 - q
    p2 = b00**2 + b11**2 + b22**2 + 2.0 * (a01**2 + a02**2 + a12**2)
    p = np.sqrt(np.maximum(p2 / 6.0, 0.0))
    safe = np.where(p > 0.0, p, 1.0)
    detb = (
        b00 * (b11 * b22 - a12**2)
        - a01 * (a01 * b22 - a12 * a02)
        + a02 * (a01 * a12 - b11 * a02)
    )
    r = np.clip(detb / (2.0 * safe**3), -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lam_min = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    return np.where(p > 0.0, lam_min, q)


@dataclass(frozen=True)
class SphereSampler:
    """Deterministic angular grid plus seeded random draws over (d, zeta)."""

    grid_theta: int = 64
    grid_phi: int = 64
    random_samples: int = 10_000
    seed: int = 42

    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        theta = np.linspace(0.0, np.pi, self.grid_theta)
        phi = np.linspace(0.0, 2.0 * np.pi, self.grid_phi, endpoint=False)
        T, P = np.meshgrid(theta, phi, indexing="ij")
        zeta = np.stack(
            [np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1
        ).reshape(-1, 3)
        d = np.broadcast_to(np.array([0.0, 0.0, 1.0]), zeta.shape)
        if self.random_samples:
            rng = np.random.default_rng(self.seed)
            rd = rng.standard_normal((self.random_samples, 3))
            rz = rng.standard_normal((self.random_samples, 3))
            rd /= np.linalg.norm(rd, axis=1, keepdims=True)
            rz /= np.linalg.norm(rz, axis=1, keepdims=True)
            d = np.concatenate([d, rd])
            zeta = np.concatenate([zeta, rz])
        return np.ascontiguousarray(d), np.ascontiguousarray(zeta)


@dataclass(frozen=True)
class EllipticityCertificate:
    c_min: float
    witness_d: np.ndarray
    witness_zeta: np.ndarray
    witness_z: float
    witness_theta: float
    passed: bool


def certify_strong_ellipticity(
    c: FrankCoefficients, sampler: SphereSampler | None = None
) -> EllipticityCertificate:
    """Sampled lower bound on the symbol quadratic form.

    ``c_min`` is the minimum over all sampled (d, zeta) pairs of the
    smallest eigenvalue of the unit-frequency symmetric symbol; the
    certificate passes iff it is strictly positive.  Runs regardless of
    whether the coefficients are admissible, which makes the failure
    witness available in diagnostic sweeps.
    """
    sampler = sampler or SphereSampler()
    d, zeta = sampler.samples()
    P = _EYE - _outer(d, d)
    Pz = np.einsum("nij,nj->ni", P, zeta)
    sym_cross = _outer(Pz, zeta)
    sym_cross = sym_cross + np.swapaxes(sym_cross, -1, -2)
    dxz = _cross(d, zeta)
    msym = (
        2.0 * c.k3 * _EYE
        + (c.k1 - c.k3) * sym_cross
        + 2.0 * (c.k2 - c.k3) * _outer(dxz, dxz)
    )
    lam = min_eig_sym3(msym)
    i = int(np.argmin(lam))
    z = float(np.sum(d[i] * zeta[i]))
    return EllipticityCertificate(
        c_min=float(lam[i]),
        witness_d=d[i].copy(),
        witness_zeta=zeta[i].copy(),
        witness_z=z,
        witness_theta=float(np.arccos(np.clip(z, -1.0, 1.0))),
        passed=bool(lam[i] > 0.0),
    )


# ---------------------------------------------------------------------------
# coupled symbols


@dataclass(frozen=True)
class SymbolPoint:
    """One Laplace-Fourier evaluation point of the coupled symbol."""

    lam: complex
    xi: np.ndarray
    d: np.ndarray
    frank: FrankCoefficients
    leslie: LeslieCoefficients
    check_admissible: bool = True

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))
        object.__setattr__(self, "lam", complex(self.lam))
        if abs(np.linalg.norm(self.d) - 1.0) > 1e-10:
            raise ValueError("symbol point requires a unit director")
        if self.check_admissible and self.lam.real < 0.0:
            raise ValueError("symbol point requires Re(lambda) >= 0")


@dataclass(frozen=True)
class StokesSymbols:
    M_u: np.ndarray
    M_d: np.ndarray
    R0: np.ndarray
    R1: np.ndarray
    R_mu: np.ndarray
    R: np.ndarray
    m_d: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]


def assemble_symbols(
    lam: complex,
    w: np.ndarray,
    d: np.ndarray,
    frank: FrankCoefficients,
    leslie: LeslieCoefficients,
) -> StokesSymbols:
    """Assemble all six coupled symbols at frequency ``w`` (may be complex).

    mu_pm = mu_D +- mu_V + mu_P and R1 = R_mu - R0 exactly as in the
    frozen-coefficient linearization.
    """
    w = np.asarray(w)
    d = np.asarray(d, dtype=float)
    P = _EYE - _outer(d, d)
    Pw = P @ w
    wd = np.sum(w * d, axis=-1)
    w_sq = np.sum(w * w, axis=-1)

    mu_plus = leslie.mu_D + leslie.mu_V + leslie.mu_P
    mu_minus = leslie.mu_D - leslie.mu_V + leslie.mu_P
    g = leslie.gamma

    R0 = 0.5 * (leslie.mu_D + leslie.mu_V) * _outer(Pw, d) + 0.5 * (
        leslie.mu_D - leslie.mu_V
    ) * wd * P
    R_mu = mu_plus * _outer(Pw, d) + mu_minus * wd * P
    R1 = R_mu - R0
    R = _outer(Pw, d) + wd * P

    m_d = symbol_m(w, d, frank)
    M_d = g * lam * _EYE + m_d

    m_u = leslie.rho * lam + leslie.mu_s * w_sq
    M_u = m_u * _EYE
    M_u = M_u + leslie.mu_0 * wd**2 * _outer(d, d)
    M_u = M_u + (leslie.mu_L / 4.0) * (R.T @ R)
    M_u = M_u + (1.0 / (4.0 * g)) * (R_mu.T @ R_mu)
    M_u = M_u + (leslie.mu_P * leslie.mu_V / (2.0 * g)) * wd * (R - R.T)

    return StokesSymbols(M_u=M_u, M_d=M_d, R0=R0, R1=R1, R_mu=R_mu, R=R, m_d=m_d)


def stokes_symbols(p: SymbolPoint) -> StokesSymbols:
    return assemble_symbols(p.lam, p.xi, p.d, p.frank, p.leslie)


def schur_complement(p: SymbolPoint, cond_limit: float = 1e12) -> np.ndarray:
    """Velocity-block symbol after eliminating the director block:
    M_u - lam * R1^T M_d^{-1} R0.

    Raises :class:`DegeneratePointError` when M_d is numerically singular
    (the admissible set excludes (lam, xi) = (0, 0) where invertibility
    genuinely fails).
    """
    s = stokes_symbols(p)
    cond = float(np.linalg.cond(s.M_d))
    if not np.isfinite(cond) or cond > cond_limit:
        raise DegeneratePointError("director symbol block numerically singular", cond)
    return s.M_u - p.lam * (s.R1.T @ np.linalg.solve(s.M_d, s.R0))


def _l0_apply(s: StokesSymbols, lam: complex, u: np.ndarray, dd: np.ndarray):
    row1 = s.M_u @ u + 1j * lam * (s.R1.T @ dd)
    row2 = -1j * (s.R0 @ u) + s.M_d @ dd
    return row1, row2


def accretivity_margin(p: SymbolPoint, u: np.ndarray, dd: np.ndarray) -> float:
    """Re (L0 v | J v) - (rho Re lam + mu_s |xi|^2) |u|^2 for one test vector
    v = (u, dd) with J(u, dd) = (u, lam*dd).

    The director amplitude ``dd`` is expected in the tangent plane of the
    frozen director (the linearized director increment lives there); for
    amplitudes with a component along d the quadratic form picks up an
    uncontrolled Im(lam)-term from the non-symmetric part of m_d and the
    lower bound genuinely fails.
    """
    s = stokes_symbols(p)
    row1, row2 = _l0_apply(s, p.lam, u, dd)
    value = np.vdot(u, row1) + np.vdot(p.lam * dd, row2)  # conjugates first arg
    bound = (p.leslie.rho * p.lam.real + p.leslie.mu_s * float(np.dot(p.xi, p.xi))) * float(
        np.vdot(u, u).real
    )
    return float(value.real - bound)


def accretivity_check(p: SymbolPoint, trials: int = 16, seed: int = 42) -> float:
    """Minimum accretivity margin over random tangential test vectors."""
    rng = np.random.default_rng(seed)
    P = _EYE - np.outer(p.d, p.d)
    worst = np.inf
    for _ in range(trials):
        u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        dd = P @ (rng.standard_normal(3) + 1j * rng.standard_normal(3))
        worst = min(worst, accretivity_margin(p, u, dd))
    return worst
