"""Half-line verification of the boundary-compatibility (Lopatinskii-Shapiro)
condition for the director problem and the coupled velocity/director system.

For a frozen director d, tangential frequency xi (xi . nu = 0), normal nu and
Laplace parameter lam with Re lam >= 0, the frozen-coefficient boundary value
problem on the half line y > 0 is

    gamma*lam*eta + m_d(xi - i*nu*d/dy) eta = 0,   y > 0,
    B_d(i*xi + nu*d/dy) eta = 0,                   y = 0,

where m_d is the interior symbol and B_d the boundary symbol.  Substituting
eta(y) = phi * exp(tau*y) turns the ODE into a quadratic matrix pencil

    C2*tau^2 + C1*tau + C0,
    C2 = -m_d(nu),  C1 = -2i*Q(xi, nu),  C0 = gamma*lam*I + m_d(xi),

(Q the symmetric bilinear form of m_d) whose spectrum splits into decaying
(Re tau < 0) and growing modes; strong ellipticity keeps the imaginary axis
free of eigenvalues away from (lam, xi) = (0, 0).  The condition holds iff
the boundary symbol restricted to the decaying subspace is injective, which
is reported quantitatively as |det| and the smallest singular value of the
3x3 (director) or 6x6 (coupled, with Dirichlet rows for the velocity)
boundary matrix built from unit-normalized decaying modes.

For repeated decay rates the mode basis inside each eigenvalue cluster is
orthonormalized, which makes |det| independent of the arbitrary basis choice
returned by the eigensolver.

In the isotropic case the director problem decouples into three identical
scalar problems with decay rate omega = sqrt(|xi|^2 + gamma*lam/(2*k3))
(principal branch) and boundary matrix -2*k3*omega*I, hence
|det| = (2*k3*|omega|)^3; this closed form anchors the numeric path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .coefficients import FrankCoefficients, LeslieCoefficients
from .symbols import DegeneratePointError, assemble_symbols, symbol_m

__all__ = [
    "HalfLineProblem",
    "LSReport",
    "StableDimensionError",
    "boundary_symbol_matrices",
    "director_ls_check",
    "coupled_ls_check",
    "isotropic_director_det",
    "CompliantTestFunction",
    "generate_compliant_test_function",
    "director_quadratic_form",
    "compact_test_set",
]

# Eigenvalues with |Re tau| below this are treated as a failure of the
# exponential dichotomy rather than silently classified.
_DICHOTOMY_TOL = 1e-10
_EIGBASIS_COND_LIMIT = 1e10
_CLUSTER_RTOL = 1e-8


def _cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty(3, dtype=np.result_type(a, b))
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


class StableDimensionError(RuntimeError):
    """Decaying subspace has unexpected dimension (ellipticity failure)."""

    def __init__(self, expected: int, actual: int):
        super().__init__(f"stable subspace has dimension {actual}, expected {expected}")
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class HalfLineProblem:
    """One frozen-coefficient half-line problem, parabolically normalized.

    Unless ``normalize=False`` the point is rescaled so |lam| + |xi|^2 = 1
    (lam -> lam/s^2, xi -> xi/s); the Lopatinskii determinant transforms by
    a fixed power of the scale, so normalization only fixes a representative.
    """

    lam: complex
    xi: np.ndarray
    nu: np.ndarray
    d: np.ndarray
    frank: FrankCoefficients
    leslie: LeslieCoefficients | None = None
    normalize: bool = True

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        d = np.asarray(self.d, dtype=float)
        lam = complex(self.lam)
        if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
            raise ValueError("nu must be a unit vector")
        if abs(np.linalg.norm(d) - 1.0) > 1e-10:
            raise ValueError("d must be a unit vector")
        if abs(float(np.dot(xi, nu))) > 1e-12 * max(1.0, float(np.linalg.norm(xi))):
            raise ValueError("xi must be orthogonal to nu")
        if lam.real < 0.0:
            raise ValueError("Re(lambda) must be nonnegative")
        weight = abs(lam) + float(np.dot(xi, xi))
        if weight == 0.0:
            raise ValueError("(lambda, xi) = (0, 0) is not an admissible point")
        if self.normalize:
            s2 = weight
            lam = lam / s2
            xi = xi / np.sqrt(s2)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "d", d)


@dataclass(frozen=True)
class LSReport:
    stable_dimension: int
    lopatinskii_det_modulus: float
    min_singular_value: float

    @property
    def passed(self) -> bool:
        return self.min_singular_value > 0.0


def boundary_symbol_matrices(
    xi: np.ndarray, nu: np.ndarray, d: np.ndarray, c: FrankCoefficients
) -> tuple[np.ndarray, np.ndarray]:
    """(N0, N1) with B(i*xi + tau*nu) phi = (N0 + tau*N1) phi.

    N1 coincides with the interior symbol at the conormal, m_d(nu).
    """
    d = np.asarray(d, dtype=float)
    nu = np.asarray(nu, dtype=float)
    P = np.eye(3) - np.outer(d, d)
    dxnu = _cross3(d, nu)
    eye = np.eye(3)

    def bmat(q: np.ndarray) -> np.ndarray:
        # B(q) = 2*k3*(q.nu)I + 2P(k1 nu(x)q - k3 q(x)nu)
        #        + 2(k2-k3)(d x nu)(x)(d x q) + 2(k2+k4)P(q(x)nu - nu(x)q)
        qnu = np.sum(q * nu)
        nu_q = np.outer(nu, q)
        q_nu = np.outer(q, nu)
        out = 2.0 * c.k3 * qnu * eye
        out = out + P @ (
            2.0 * c.k1 * nu_q - 2.0 * c.k3 * q_nu + 2.0 * (c.k2 + c.k4) * (q_nu - nu_q)
        )
        out = out + 2.0 * (c.k2 - c.k3) * np.outer(dxnu, _cross3(d, q))
        return out

    N0 = bmat(1j * np.asarray(xi, dtype=complex))
    N1 = bmat(nu.astype(complex))
    return N0, N1


def _quadratic_pencil_companion(S0: np.ndarray, S1: np.ndarray, Sm1: np.ndarray):
    """Companion matrix of S(tau) = Q2 tau^2 + Q1 tau + Q0 from evaluations
    at tau = 0, 1, -1 (exact for a quadratic pencil)."""
    Q0 = S0
    Q2 = 0.5 * (S1 + Sm1) - S0
    Q1 = 0.5 * (S1 - Sm1)
    n = S0.shape[0]
    Q2inv = np.linalg.inv(Q2)
    comp = np.zeros((2 * n, 2 * n), dtype=complex)
    comp[:n, n:] = np.eye(n)
    comp[n:, :n] = -Q2inv @ Q0
    comp[n:, n:] = -Q2inv @ Q1
    return comp


def _stable_modes(comp: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Decaying (tau, phi) pairs of the companion, cluster-orthonormalized.

    Raises :class:`DegeneratePointError` for eigenvalues hugging the
    imaginary axis or a defective eigenbasis.
    """
    taus, vecs = np.linalg.eig(comp)
    cond = float(np.linalg.cond(vecs))
    if not np.isfinite(cond) or cond > _EIGBASIS_COND_LIMIT:
        raise DegeneratePointError("defective companion eigenbasis", cond)
    if np.any(np.abs(taus.real) <= _DICHOTOMY_TOL):
        raise DegeneratePointError(
            "eigenvalue on the imaginary axis, exponential dichotomy fails",
            float(1.0 / max(np.min(np.abs(taus.real)), 1e-300)),
        )
    mask = taus.real < 0.0
    taus = taus[mask]
    phis = vecs[:n, mask]
    norms = np.linalg.norm(phis, axis=0)
    if np.any(norms < 1e-14):
        raise DegeneratePointError("stable mode with vanishing state part", np.inf)
    phis = phis / norms
    # Orthonormalize within eigenvalue clusters so |det| of the boundary
    # matrix does not depend on the arbitrary basis inside an eigenspace.
    order = np.lexsort((taus.imag, taus.real))
    taus = taus[order]
    phis = phis[:, order]
    start = 0
    while start < taus.size:
        end = start + 1
        while end < taus.size and abs(taus[end] - taus[start]) <= _CLUSTER_RTOL * max(
            1.0, abs(taus[start])
        ):
            end += 1
        if end - start > 1:
            q, _ = np.linalg.qr(phis[:, start:end])
            phis[:, start:end] = q
        start = end
    return taus, phis


def director_ls_check(p: HalfLineProblem) -> LSReport:
    """Boundary-compatibility check for the director half-line problem.

    Builds the quadratic pencil of gamma*lam*I + m_d(xi - i*nu*tau), splits
    off the decaying modes (which must number 3), applies the boundary
    symbol to each and reports |det| and the smallest singular value of the
    resulting 3x3 matrix.
    """
    gamma = p.leslie.gamma if p.leslie is not None else 1.0
    lamg = gamma * p.lam

    def S(t: float) -> np.ndarray:
        w = p.xi - 1j * t * p.nu
        return lamg * np.eye(3) + symbol_m(w, p.d, p.frank)

    comp = _quadratic_pencil_companion(S(0.0), S(1.0), S(-1.0))
    taus, phis = _stable_modes(comp, 3)
    if taus.size != 3:
        raise StableDimensionError(3, int(taus.size))
    N0, N1 = boundary_symbol_matrices(p.xi, p.nu, p.d, p.frank)
    bmat = N0 @ phis + N1 @ (phis * taus[None, :])
    svals = np.linalg.svd(bmat, compute_uv=False)
    return LSReport(
        stable_dimension=3,
        lopatinskii_det_modulus=float(np.abs(np.linalg.det(bmat))),
        min_singular_value=float(svals[-1]),
    )


def coupled_ls_check(p: HalfLineProblem) -> LSReport:
    """Boundary-compatibility check for the coupled half-line system.

    The 6-component second-order system stacks the velocity block (with its
    quadratic Leslie-coupling symbols) on the director block; boundary rows
    are the Dirichlet condition on the velocity part and the director
    boundary symbol on the director part.  The decaying subspace must have
    dimension 6.
    """
    if p.leslie is None:
        raise ValueError("coupled check needs viscosity coefficients")

    def S(t: float) -> np.ndarray:
        w = p.xi - 1j * t * p.nu
        s = assemble_symbols(p.lam, w.astype(complex), p.d, p.frank, p.leslie)
        out = np.zeros((6, 6), dtype=complex)
        out[:3, :3] = s.M_u
        out[:3, 3:] = 1j * p.lam * s.R1.T
        out[3:, :3] = -1j * s.R0
        out[3:, 3:] = s.M_d
        return out

    comp = _quadratic_pencil_companion(S(0.0), S(1.0), S(-1.0))
    taus, phis = _stable_modes(comp, 6)
    if taus.size != 6:
        raise StableDimensionError(6, int(taus.size))
    N0, N1 = boundary_symbol_matrices(p.xi, p.nu, p.d, p.frank)
    bmat = np.zeros((6, 6), dtype=complex)
    bmat[:3, :] = phis[:3, :]
    bmat[3:, :] = N0 @ phis[3:, :] + N1 @ (phis[3:, :] * taus[None, :])
    svals = np.linalg.svd(bmat, compute_uv=False)
    return LSReport(
        stable_dimension=6,
        lopatinskii_det_modulus=float(np.abs(np.linalg.det(bmat))),
        min_singular_value=float(svals[-1]),
    )


def isotropic_director_det(lam: complex, xi: np.ndarray, k3: float, gamma: float) -> float:
    """|det| of the isotropic director boundary matrix, (2*k3*|omega|)^3."""
    omega = np.sqrt(complex(np.dot(xi, xi)) + gamma * lam / (2.0 * k3))
    if omega.real < 0:
        omega = -omega
    return float((2.0 * k3 * abs(omega)) ** 3)


# ---------------------------------------------------------------------------
# quadratic form on the truncated half line


@dataclass(frozen=True)
class CompliantTestFunction:
    """Tangential H^2 test function on [0, Y] satisfying the boundary rows.

    Carries exact spline derivatives so the quadratic form sees only
    quadrature error, not differencing error.
    """

    y: np.ndarray
    eta: np.ndarray
    eta_y: np.ndarray
    eta_yy: np.ndarray
    tangency: float
    bc_residual: float


def _tangent_basis(d: np.ndarray) -> np.ndarray:
    ref = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = np.cross(d, ref)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(d, t1)
    return np.stack([t1, t2], axis=1)  # 3 x 2


def generate_compliant_test_function(
    p: HalfLineProblem,
    rng: np.random.Generator,
    y_max: float = 20.0,
    nodes: int = 400,
) -> CompliantTestFunction:
    """Random cubic spline, projected pointwise onto the tangent plane of d,
    with the two lowest control values corrected (least squares over their
    tangential components) to satisfy the boundary rows at y = 0.

    On tangential fields the boundary symbol has rank two, so the four
    available tangential degrees of freedom always suffice.
    """
    y = np.linspace(0.0, y_max, nodes)
    window = np.exp(-0.35 * y)
    ctrl = (rng.standard_normal((nodes, 3)) + 1j * rng.standard_normal((nodes, 3))) * window[:, None]
    ctrl[-3:] = 0.0
    P = np.eye(3) - np.outer(p.d, p.d)
    ctrl = ctrl @ P.T

    N0, N1 = boundary_symbol_matrices(p.xi, p.nu, p.d, p.frank)
    T = _tangent_basis(p.d)

    def bc_residual_of(control: np.ndarray) -> np.ndarray:
        spline = CubicSpline(y, control, axis=0)
        return N0 @ spline(0.0) + N1 @ spline(0.0, 1)

    base = bc_residual_of(ctrl)
    # Affine dependence on the two lowest control values: probe the four
    # tangential basis directions.
    cols = []
    for knot in (0, 1):
        for k in range(2):
            probe = ctrl.copy()
            probe[knot] = probe[knot] + T[:, k]
            cols.append(bc_residual_of(probe) - base)
    A = np.stack(cols, axis=1)  # 3 x 4 complex
    coef, *_ = np.linalg.lstsq(A, -base, rcond=None)
    ctrl[0] = ctrl[0] + T @ coef[0:2]
    ctrl[1] = ctrl[1] + T @ coef[2:4]

    spline = CubicSpline(y, ctrl, axis=0)
    eta = spline(y)
    eta_y = spline(y, 1)
    eta_yy = spline(y, 2)
    scale = max(float(np.max(np.abs(eta))), 1e-30)
    tangency = float(np.max(np.abs(eta @ p.d))) / scale
    bc_res = float(np.max(np.abs(N0 @ spline(0.0) + N1 @ spline(0.0, 1)))) / scale
    return CompliantTestFunction(
        y=y, eta=eta, eta_y=eta_y, eta_yy=eta_yy, tangency=tangency, bc_residual=bc_res
    )


def director_quadratic_form(
    p: HalfLineProblem,
    test: CompliantTestFunction,
    tangency_tol: float = 1e-8,
    bc_tol: float = 1e-8,
) -> float:
    """Re[-(A_d(i*xi + nu*d/dy) eta | eta)] - alpha*(|xi|^2 ||eta||^2 + ||eta'||^2)
    on [0, Y] by composite trapezoid quadrature.

    Nonnegative (up to quadrature error) for compliant tangential test
    functions; the margin is at least alpha times the gradient energy, so
    the sign is robust for any nondegenerate sample.
    """
    if test.tangency > tangency_tol:
        raise ValueError(f"test function not tangential (residual {test.tangency:.3e})")
    if test.bc_residual > bc_tol:
        raise ValueError(f"test function violates the boundary rows ({test.bc_residual:.3e})")

    xi = p.xi.astype(complex)
    nu = p.nu.astype(complex)
    d = p.d
    c = p.frank
    eta, eta_y, eta_yy = test.eta, test.eta_y, test.eta_yy
    xi_sq = float(np.dot(p.xi, p.xi))

    lap = eta_yy - xi_sq * eta
    div = eta @ (1j * xi) + eta_y @ nu
    div_y = eta_y @ (1j * xi) + eta_yy @ nu
    grad_div = 1j * np.outer(div, xi) + np.outer(div_y, nu)
    curl = 1j * np.cross(np.broadcast_to(xi, eta.shape), eta) + np.cross(
        np.broadcast_to(nu, eta.shape), eta_y
    )
    curl_y = 1j * np.cross(np.broadcast_to(xi, eta.shape), eta_y) + np.cross(
        np.broadcast_to(nu, eta.shape), eta_yy
    )
    s = curl @ d
    s_y = curl_y @ d
    cross_term = np.cross(np.broadcast_to(d.astype(complex), eta.shape), 1j * np.outer(s, xi) + np.outer(s_y, nu))

    P = np.eye(3) - np.outer(d, d)
    a_eta = 2.0 * c.k3 * lap
    a_eta = a_eta + 2.0 * (c.k1 - c.k3) * grad_div @ P.T
    a_eta = a_eta + 2.0 * (c.k2 - c.k3) * cross_term

    y = test.y
    pairing = -np.trapezoid(np.sum(a_eta * np.conj(eta), axis=1), y).real
    norm_sq = np.trapezoid(np.sum(np.abs(eta) ** 2, axis=1), y)
    grad_sq = np.trapezoid(np.sum(np.abs(eta_y) ** 2, axis=1), y)
    return float(pairing - c.alpha * (xi_sq * norm_sq + grad_sq))


# ---------------------------------------------------------------------------
# compact test set


def compact_test_set(
    nu: np.ndarray,
    n_lambda: int = 12,
    n_xi: int = 24,
    n_d: int = 24,
    seed: int = 42,
) -> list[tuple[complex, np.ndarray, np.ndarray]]:
    """(lam, xi, d) triples covering the admissible set at |lam| + |xi|^2 = 1.

    Laplace points combine three magnitude fractions with four phases
    including both boundary rays Re(lam) = 0; tangential frequencies sweep a
    uniform circle in the plane orthogonal to nu; directors are a seeded
    low-discrepancy sphere sample.  Size n_lambda * n_xi * n_d.
    """
    nu = np.asarray(nu, dtype=float)
    T = _tangent_basis(nu)  # columns orthogonal to nu
    fractions = (0.2, 0.5, 0.8)
    phases = (0.0, 1.0, np.pi / 2.0, -np.pi / 2.0)
    lams = []
    for f in fractions:
        for ph in phases:
            lams.append((f * np.exp(1j * ph), np.sqrt(1.0 - f)))
    lams = lams[:n_lambda]

    angles = 2.0 * np.pi * np.arange(n_xi) / n_xi
    xis = [np.cos(a) * T[:, 0] + np.sin(a) * T[:, 1] for a in angles]

    rng = np.random.default_rng(seed)
    ds = rng.standard_normal((n_d, 3))
    ds /= np.linalg.norm(ds, axis=1, keepdims=True)

    points = []
    for lam, xi_mag in lams:
        for xi_dir in xis:
            for d in ds:
                points.append((complex(lam), xi_mag * xi_dir, d.copy()))
    return points
