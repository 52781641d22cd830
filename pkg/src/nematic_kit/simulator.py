"""Semi-implicit time integration of the coupled director/velocity system.

One step performs, in order:

1. director update: the stiff leading diffusion ``(2*k3*rho/gamma)*lap`` is
   implicit (diagonal in transform space), every remaining term of the
   projected elastic operator plus the spin/stretch forcing and advection is
   explicit;
2. velocity update: implicit ``(mu_s/rho)*lap``, explicit advection and
   divergence of the elastic + viscous-coupling stress, then a Leray
   projection restores incompressibility and yields the pressure;
3. slab mode only: the fully nonlinear director boundary condition is
   enforced at the wall nodes by solving the boundary rows linearized at the
   previous director (one small linear solve per wall point, lagged
   tangential neighbors, a few sweeps).

The director norm is never corrected by default: its drift is the discrete
shadow of the unit-norm propagation property and is *reported*, not hidden.
``renormalize='every-step'`` exists for long exploratory runs.

The time-step bound ``dt <= 0.25 * h^2 * gamma / (rho * max(k1,k2,k3))`` is
a conservative heuristic for the explicitly-treated anisotropic terms and is
enforced at configuration time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np
from scipy.fft import dctn, dstn, fftn, idctn, idstn, ifftn

from .coefficients import FrankCoefficients, LeslieCoefficients
from .energy import dpsi_dd, total_energy
from .ericksen import (
    boundary_symbol_direction_matrices,
    compatibility_check,
    ericksen_apply_literal,
    wall_faces,
)
from .fields import (
    DirectorField,
    Grid,
    VectorField,
    VelocityField,
    curl_array,
    divergence_tensor_array,
    divergence_vector,
    dot,
    gradient_array,
    laplacian_array,
    leray_project,
    scalar_gradient,
    scalar_laplacian,
)
from .leslie import stress_total_mu

__all__ = [
    "SimulationConfig",
    "SimulationState",
    "PhiDiagnostics",
    "RunResult",
    "Stepper",
    "step",
    "run",
    "phi_diagnostic",
    "InitialDataError",
    "SimulationDivergenceError",
    "stability_bound",
]

BCMode = Literal["periodic", "slab-nonlinear"]
Evolution = Literal["coupled", "gradient-flow-only"]
Renormalize = Literal["off", "monitor-only", "every-step"]

_SIM_NORM_GATE = 1e-2  # blow-up guard, not an accuracy tolerance


class InitialDataError(ValueError):
    """Initial data violates a named hypothesis of the solvable setup."""

    def __init__(self, condition: str, detail: str):
        super().__init__(f"initial data rejected: {condition} ({detail})")
        self.condition = condition


class SimulationDivergenceError(RuntimeError):
    """Blow-up detected; carries the last finite state."""

    def __init__(self, message: str, last_state: "SimulationState"):
        super().__init__(message)
        self.last_state = last_state


def stability_bound(grid: Grid, frank: FrankCoefficients, leslie: LeslieCoefficients) -> float:
    h2 = min(grid.spacing) ** 2
    return 0.25 * h2 * leslie.gamma / (leslie.rho * frank.kmax)


@dataclass(frozen=True)
class SimulationConfig:
    grid: Grid
    frank: FrankCoefficients
    leslie: LeslieCoefficients
    dt: float
    t_end: float
    bc_mode: BCMode = "periodic"
    director_evolution: Evolution = "coupled"
    renormalize: Renormalize = "monitor-only"
    cadence: int = 10
    projection_tol: float = 1e-10
    compatibility_tol: float = 1e-6
    initial_norm_tol: float = 1e-8
    wall_sweeps: int = 30
    wall_sweep_tol: float = 1e-12

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        bound = stability_bound(self.grid, self.frank, self.leslie)
        if self.dt > bound * (1.0 + 1e-12):
            raise ValueError(
                f"dt = {self.dt:.3e} exceeds the stability bound {bound:.3e} "
                "(0.25*h^2*gamma/(rho*kmax))"
            )
        if self.bc_mode == "slab-nonlinear" and self.grid.wall_axis is None:
            raise ValueError("slab-nonlinear mode needs a wall axis")
        if self.bc_mode == "periodic" and self.grid.wall_axis is not None:
            raise ValueError("periodic mode on a slab grid; use bc_mode='slab-nonlinear'")
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")


@dataclass(frozen=True)
class SimulationState:
    u: VelocityField
    d: DirectorField
    pi: np.ndarray
    t: float
    step_index: int
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PhiDiagnostics:
    """Residual of the norm-drift evolution between two consecutive states."""

    phi: np.ndarray
    residual_interior: float
    residual_wall: float
    interior_residual_field: np.ndarray
    vanishing_terms: dict

    @property
    def max_residual(self) -> float:
        return max(self.residual_interior, self.residual_wall)


@dataclass(frozen=True)
class RunResult:
    states: list[SimulationState]
    diagnostics: list[dict]
    final_state: SimulationState


# ---------------------------------------------------------------------------
# implicit diffusion solves


def _compact_symbol_periodic(n: int, h: float) -> np.ndarray:
    theta = 2.0 * np.pi * np.fft.fftfreq(n)
    return -4.0 * np.sin(theta / 2.0) ** 2 / h**2


def _compact_symbol_wall(n: int, h: float) -> np.ndarray:
    theta = np.pi * np.arange(n) / (n - 1)
    return -4.0 * np.sin(theta / 2.0) ** 2 / h**2


class _ImplicitDiffusion:
    """(1 - a*lap)^{-1} with the compact 3-point symbol per axis.

    Periodic axes use the FFT; a wall axis uses cosine modes (mirror ghost,
    Neumann) for the director and sine modes (Dirichlet) for the velocity.
    """

    def __init__(self, grid: Grid, wall: Literal["neumann", "dirichlet", None]):
        self.grid = grid
        self.wall = wall
        self.ax = grid.wall_axis
        syms = []
        for axis in range(3):
            n, h = grid.extents[axis], grid.spacing[axis]
            if grid.topology[axis] == "periodic":
                syms.append(_compact_symbol_periodic(n, h))
            elif wall == "neumann":
                syms.append(_compact_symbol_wall(n, h))
            else:  # dirichlet: interior sine modes m = 1 .. n-2
                syms.append(_compact_symbol_wall(n, h)[1:-1])
        shape = [len(s) for s in syms]
        lap = np.zeros(shape)
        for axis, s in enumerate(syms):
            sl = [None, None, None]
            sl[axis] = slice(None)
            lap = lap + s[tuple(sl)]
        self.lap_symbol = lap

    def solve(self, values: np.ndarray, a: float) -> np.ndarray:
        from .fields import fft_workers

        w = fft_workers()
        mult = 1.0 / (1.0 - a * self.lap_symbol)
        if self.ax is None:
            vh = fftn(values, axes=(0, 1, 2), workers=w)
            vh *= mult[..., None]
            return np.real(ifftn(vh, axes=(0, 1, 2), workers=w))
        tang = tuple(axisq for axisq in range(3) if axisq != self.ax)
        if self.wall == "neumann":
            vh = fftn(values, axes=tang, workers=w)
            vh = dctn(vh, type=1, axes=(self.ax,))
            vh *= mult[..., None]
            vh = idctn(vh, type=1, axes=(self.ax,))
            return np.real(ifftn(vh, axes=tang, workers=w))
        sl = [slice(None)] * 4
        sl[self.ax] = slice(1, -1)
        interior = values[tuple(sl)]
        vh = fftn(interior, axes=tang, workers=w)
        vh = dstn(vh, type=1, axes=(self.ax,))
        vh *= mult[..., None]
        vh = idstn(vh, type=1, axes=(self.ax,))
        out = np.zeros_like(values)
        out[tuple(sl)] = np.real(ifftn(vh, axes=tang, workers=w))
        return out


# ---------------------------------------------------------------------------
# stepping


class Stepper:
    """Precomputes transform plans and wall matrices for repeated stepping."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        grid = config.grid
        slab = grid.wall_axis is not None
        self.solve_d = _ImplicitDiffusion(grid, "neumann" if slab else None)
        self.solve_u = _ImplicitDiffusion(grid, "dirichlet" if slab else None)
        self.a_d = config.dt * 2.0 * config.frank.k3 * config.leslie.rho / config.leslie.gamma
        self.a_u = config.dt * config.leslie.mu_s / config.leslie.rho

    # -- director right-hand side -------------------------------------------------
    def _director_rhs(
        self, u: np.ndarray | None, d: DirectorField, G: np.ndarray
    ) -> np.ndarray:
        cfg = self.config
        dv = d.values
        elastic = ericksen_apply_literal(d, cfg.frank, norm_tol=_SIM_NORM_GATE, grad=G)
        force_d = dpsi_dd(dv, G, cfg.frank, norm_tol=np.inf)
        force_d = force_d - dot(force_d, dv)[..., None] * dv  # P_d
        rhs = cfg.leslie.rho * (elastic - force_d)
        if u is not None:
            grad_u = gradient_array(u, cfg.grid)
            V = 0.5 * (grad_u - np.swapaxes(grad_u, -1, -2))
            D = 0.5 * (grad_u + np.swapaxes(grad_u, -1, -2))
            Vd = np.matmul(V, dv[..., None])[..., 0]
            Dd = np.matmul(D, dv[..., None])[..., 0]
            PdDd = Dd - dot(Dd, dv)[..., None] * dv
            adv = np.matmul(G, u[..., None])[..., 0]
            rhs = rhs + cfg.leslie.mu_V * Vd + cfg.leslie.mu_D * PdDd - cfg.leslie.gamma * adv
        return rhs / cfg.leslie.gamma

    def _advance_director(
        self, u: np.ndarray | None, d: DirectorField, G: np.ndarray
    ) -> np.ndarray:
        cfg = self.config
        rhs = self._director_rhs(u, d, G)
        explicit = rhs - (self.a_d / cfg.dt) * laplacian_array(d.values, cfg.grid)
        star = d.values + cfg.dt * explicit
        return self.solve_d.solve(star, self.a_d)

    # -- nonlinear wall condition --------------------------------------------------
    def _enforce_wall_condition(self, d_new: np.ndarray, d_old: DirectorField) -> np.ndarray:
        """Overwrite the wall-node director so the boundary rows, linearized
        at the previous director, vanish.

        Per wall point this is one 3x3 solve; tangential derivatives couple
        neighboring wall points and are lagged, so a few Jacobi sweeps are
        iterated.  In the isotropic case the rows reduce to the one-sided
        Neumann extrapolation and a single sweep converges exactly.
        """
        cfg = self.config
        grid = cfg.grid
        ax = grid.wall_axis
        h = grid.spacing[ax]
        tang_axes = [a for a in range(3) if a != ax]
        out = d_new.copy()
        for face_idx, nu in wall_faces(grid):
            ref = np.take(d_old.values, face_idx, axis=ax)
            A = boundary_symbol_direction_matrices(nu, ref, cfg.frank)
            A_n = A[..., ax, :, :]
            if face_idx == 0:
                coeff = -3.0 / (2.0 * h)
                known_z = (4.0 * np.take(out, 1, axis=ax) - np.take(out, 2, axis=ax)) / (2.0 * h)
            else:
                coeff = 3.0 / (2.0 * h)
                known_z = (-4.0 * np.take(out, -2, axis=ax) + np.take(out, -3, axis=ax)) / (
                    2.0 * h
                )
            Minv = np.linalg.inv(coeff * A_n)
            idx = [slice(None)] * 4
            idx[ax] = face_idx
            idx = tuple(idx)
            for _ in range(cfg.wall_sweeps):
                wall = out[idx]
                b = np.einsum("...ij,...j->...i", A_n, known_z)
                for plane_axis, orig_axis in enumerate(tang_axes):
                    deriv = (
                        np.roll(wall, -1, axis=plane_axis) - np.roll(wall, 1, axis=plane_axis)
                    ) / (2.0 * grid.spacing[orig_axis])
                    b = b + np.einsum("...ij,...j->...i", A[..., orig_axis, :, :], deriv)
                new_wall = -np.einsum("...ij,...j->...i", Minv, b)
                change = float(np.max(np.abs(new_wall - wall)))
                out[idx] = new_wall
                if change <= cfg.wall_sweep_tol * max(1.0, float(np.max(np.abs(new_wall)))):
                    break
        return out

    # -- velocity update -------------------------------------------------------
    def _advance_velocity(
        self, u: VelocityField, d_new: np.ndarray, d_old: np.ndarray, G_old: np.ndarray
    ) -> tuple[VelocityField, np.ndarray]:
        cfg = self.config
        grid = cfg.grid
        grad_u = gradient_array(u.values, grid)
        grad_d = gradient_array(d_new, grid)
        adv_d = np.matmul(G_old, u.values[..., None])[..., 0]
        dt_d = (d_new - d_old) / cfg.dt + adv_d
        stress = stress_total_mu(
            grad_u, d_new, grad_d, dt_d, cfg.leslie, cfg.frank, norm_tol=_SIM_NORM_GATE
        )
        forcing = stress.ericksen + stress.leslie_stretch + stress.leslie_diss
        div_s = divergence_tensor_array(forcing, grid)
        adv_u = np.matmul(grad_u, u.values[..., None])[..., 0]
        rhs = -adv_u + div_s / cfg.leslie.rho
        star = u.values + cfg.dt * rhs
        if grid.wall_axis is not None:
            ax = grid.wall_axis
            sl = [slice(None)] * 4
            for edge in (0, -1):
                s = list(sl)
                s[ax] = edge
                star[tuple(s)] = 0.0
        smooth = self.solve_u.solve(star, self.a_u)
        proj, phi = leray_project(VectorField(grid, smooth), tolerance=cfg.projection_tol)
        pi = cfg.leslie.rho * phi / cfg.dt
        return proj, pi

    # -- one full step -----------------------------------------------------------
    def step(self, state: SimulationState) -> SimulationState:
        cfg = self.config
        coupled = cfg.director_evolution == "coupled"
        u_arr = state.u.values if coupled else None

        G_old = gradient_array(state.d.values, cfg.grid)
        d_new = self._advance_director(u_arr, state.d, G_old)
        if cfg.bc_mode == "slab-nonlinear":
            d_new = self._enforce_wall_condition(d_new, state.d)
        if cfg.renormalize == "every-step":
            d_new = d_new / np.linalg.norm(d_new, axis=-1, keepdims=True)
        if not np.all(np.isfinite(d_new)):
            raise SimulationDivergenceError("director field blew up", state)

        if coupled:
            u_new, pi = self._advance_velocity(state.u, d_new, state.d.values, G_old)
            if not np.all(np.isfinite(u_new.values)):
                raise SimulationDivergenceError("velocity field blew up", state)
        else:
            u_new, pi = state.u, np.zeros(cfg.grid.extents)

        d_field = DirectorField(cfg.grid, d_new, norm_tol=None)
        drift = d_field.norm_drift()
        if drift > _SIM_NORM_GATE:
            raise SimulationDivergenceError(
                f"director norm drift {drift:.3e} beyond blow-up gate", state
            )
        # Diagnostics are attached by the driver at cadence points only.
        return SimulationState(
            u=u_new, d=d_field, pi=pi, t=state.t + cfg.dt, step_index=state.step_index + 1
        )

    def diagnostics(self, state: SimulationState, prev: SimulationState | None = None) -> dict:
        cfg = self.config
        diag = {
            "t": state.t,
            "energy": total_energy(state.d, cfg.frank, norm_tol=np.inf),
            "kinetic": 0.5
            * cfg.leslie.rho
            * float(np.sum(state.u.values**2))
            * cfg.grid.cell_volume(),
            "norm_drift": state.d.norm_drift(),
            "div_u_max": state.u.max_divergence(),
            "phi_residual": 0.0,
        }
        if prev is not None:
            diag["phi_residual"] = phi_diagnostic(prev, state, cfg).max_residual
        return diag


def step(state: SimulationState, config: SimulationConfig) -> SimulationState:
    """Single-shot step; builds a throwaway transform plan."""
    return Stepper(config).step(state)


# ---------------------------------------------------------------------------
# norm-drift evolution diagnostic


def phi_diagnostic(
    prev: SimulationState, state: SimulationState, config: SimulationConfig
) -> PhiDiagnostics:
    """Residual of the evolution satisfied by phi = |d|^2 - 1.

    The interior residual is gamma*d_t(phi) - 2*k3*lap(phi) - G1(phi) with
    the time derivative by backward difference between the two states; on a
    slab the wall residual k3*d_nu(phi) - G0(phi) is evaluated with one-sided
    stencils.  For exactly-unit directors every term vanishes; for simulated
    states this certifies that the recorded drift is consistent with its own
    evolution up to discretization error.
    """
    cfg = config
    grid = cfg.grid
    fr = cfg.frank
    le = cfg.leslie
    dv = state.d.values
    phi = np.sum(dv * dv, axis=-1) - 1.0
    phi_prev = np.sum(prev.d.values * prev.d.values, axis=-1) - 1.0
    dt = state.t - prev.t
    if dt <= 0.0:
        raise ValueError("states must be consecutive in time")

    G = gradient_array(dv, grid)
    grad_sq = np.einsum("...ij,...ij->...", G, G)
    cl = curl_array(dv, grid)
    div_d = divergence_vector(VectorField(grid, dv))
    grad_div = scalar_gradient(div_d, grid)
    force_d = dpsi_dd(dv, G, fr, norm_tol=np.inf)
    grad_phi = scalar_gradient(phi, grid)

    grad_u = gradient_array(state.u.values, grid)
    D = 0.5 * (grad_u + np.swapaxes(grad_u, -1, -2))
    Dd = np.einsum("...ij,...j->...i", D, dv)

    term_base = (
        2.0 * fr.k3 * grad_sq * phi
        + le.rho * dot(force_d, dv) * phi
        - le.mu_D * dot(Dd, dv) * phi
        - le.gamma * dot(state.u.values, grad_phi)
    )
    term_k1 = -2.0 * (fr.k1 - fr.k3) * dot(grad_div, dv) * phi
    term_k2 = 2.0 * (fr.k2 - fr.k3) * dot(dv, cl) * dot(cl, dv) * phi
    g1 = term_base + term_k1 + term_k2

    resid = le.gamma * (phi - phi_prev) / dt - 2.0 * fr.k3 * scalar_laplacian(phi, grid) - g1
    interior = grid.interior_slices()
    residual_interior = float(np.max(np.abs(resid[interior])))

    residual_wall = 0.0
    ax = grid.wall_axis
    if ax is not None:
        GT = np.swapaxes(G, -1, -2)
        for face_idx, nu in wall_faces(grid):
            phi_w = np.take(phi, face_idx, axis=ax)
            dphi = np.take(scalar_gradient(phi, grid), face_idx, axis=ax) @ nu
            GTnu_d = dot(
                np.einsum("...ij,...j->...i", np.take(GT, face_idx, axis=ax), nu),
                np.take(dv, face_idx, axis=ax),
            )
            div_w = np.take(div_d, face_idx, axis=ax)
            nu_d = np.take(dv, face_idx, axis=ax) @ nu
            g0 = (fr.k2 + fr.k4 - fr.k3) * GTnu_d * phi_w - (
                fr.k2 + fr.k4 - fr.k1
            ) * div_w * nu_d * phi_w
            residual_wall = max(residual_wall, float(np.max(np.abs(fr.k3 * dphi - g0))))

    return PhiDiagnostics(
        phi=phi,
        residual_interior=residual_interior,
        residual_wall=residual_wall,
        interior_residual_field=resid,
        vanishing_terms={"k1_minus_k3": term_k1, "k2_minus_k3": term_k2},
    )


# ---------------------------------------------------------------------------
# driver


def _initial_state(
    config: SimulationConfig, u0: np.ndarray, d0: np.ndarray
) -> SimulationState:
    grid = config.grid
    d_field = DirectorField(grid, np.asarray(d0, dtype=float), norm_tol=None)
    drift = d_field.norm_drift()
    if drift > config.initial_norm_tol:
        raise InitialDataError("unit_norm", f"|d0|^2 - 1 up to {drift:.3e}")
    u_arr = np.asarray(u0, dtype=float)
    ax = grid.wall_axis
    if ax is not None:
        lo = np.take(u_arr, 0, axis=ax)
        hi = np.take(u_arr, -1, axis=ax)
        worst = max(float(np.max(np.abs(lo))), float(np.max(np.abs(hi))))
        if worst > 1e-12:
            raise InitialDataError("no_slip", f"u0 on wall faces up to {worst:.3e}")
    proj, _ = leray_project(VectorField(grid, u_arr), tolerance=config.projection_tol)
    if config.bc_mode == "slab-nonlinear":
        residual, ok = compatibility_check(
            DirectorField(grid, d_field.values, norm_tol=None),
            config.frank,
            config.compatibility_tol,
        )
        if not ok:
            raise InitialDataError(
                "compatibility(B)",
                f"wall residual {residual:.3e} > {config.compatibility_tol:.1e}",
            )
    return SimulationState(u=proj, d=d_field, pi=np.zeros(grid.extents), t=0.0, step_index=0)


def run(
    config: SimulationConfig,
    u0: np.ndarray,
    d0: np.ndarray,
    on_cadence: Callable[[SimulationState], None] | None = None,
) -> RunResult:
    """Integrate to t_end, recording diagnostics every ``cadence`` steps.

    Initial data must be unit-norm, divergence-free after projection, zero
    on walls, and (in slab mode) compatible with the nonlinear boundary
    condition; violations raise :class:`InitialDataError` naming the failed
    hypothesis.
    """
    stepper = Stepper(config)
    state = _initial_state(config, u0, d0)
    state = replace(state, diagnostics=stepper.diagnostics(state))
    n_steps = int(round(config.t_end / config.dt))
    states = [state]
    diag_log: list[dict] = []
    prev = state
    for k in range(1, n_steps + 1):
        new = stepper.step(prev)
        if k % config.cadence == 0 or k == n_steps:
            new = replace(new, diagnostics=stepper.diagnostics(new, prev))
            diag_log.append(new.diagnostics)
            states.append(new)
            if on_cadence is not None:
                on_cadence(new)
        prev = new
    return RunResult(states=states, diagnostics=diag_log, final_state=prev)
