"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its elapsed time (run with -s to see them).

Every tolerance is pinned here; nothing is deferred to later calibration.
Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import time

import numpy as np
import pytest

from conftest import angle_director, tilted_smooth_director
from test_simulator import loop_stencil_phi_residual

from nematic_kit.coefficients import FrankCoefficients, LeslieCoefficients, validate_frank
from nematic_kit.energy import dpsi_dd, dpsi_dgradd, null_lagrangian_residual, psi, psi_tilde
from nematic_kit.ericksen import boundary_apply_point
from nematic_kit.fields import DirectorField, Grid, VelocityField
from nematic_kit import lopatinskii as LS
from nematic_kit.sampling import random_frank, random_leslie, tangent_gradient, unit_vector
from nematic_kit import simulator as sim
from nematic_kit import symbols as S

NU = np.array([0.0, 0.0, 1.0])


class _Criterion:
    """Context manager printing the per-criterion verdict line."""

    def __init__(self, index: int, label: str, budget_s: float):
        self.index = index
        self.label = label
        self.budget = budget_s

    def __enter__(self):
        self.t0 = time.time()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.time() - self.t0
        verdict = "PASS" if exc_type is None else "FAIL"
        print(f"\nACCEPTANCE {self.index}: {verdict} - {self.label} "
              f"({elapsed:.1f}s / budget {self.budget:.0f}s)")
        if exc_type is None:
            assert elapsed < self.budget, (
                f"criterion {self.index} exceeded its runtime budget: "
                f"{elapsed:.1f}s >= {self.budget}s"
            )
        return False


def test_criterion_1_eigenvalue_oracle():
    with _Criterion(1, "closed-form symbol eigenvalues match numeric to 1e-10", 10):
        rng = np.random.default_rng(101)
        per_draw = 500
        for _ in range(20):
            c = random_frank(rng)
            # stratified z including the branch anchors
            zs = np.concatenate([
                np.linspace(-1.0, 1.0, per_draw - 4),
                [-1.0, 0.0, 1.0, np.sqrt(0.75)],
            ])
            for z in zs:
                d = unit_vector(rng)
                t = unit_vector(rng)
                t -= np.dot(t, d) * d
                norm = np.linalg.norm(t)
                if norm < 1e-12:
                    continue
                t /= norm
                zeta = z * d + np.sqrt(max(1.0 - z * z, 0.0)) * t
                report = S.symmetric_eigs(zeta, d, c)
                closed = np.sort(np.asarray(report.closed_form))
                numeric = np.sort(np.array([v.real for v in report.eigenvalues]))
                scale = max(np.max(np.abs(numeric)), 1e-30)
                assert np.max(np.abs(closed - numeric)) < 1e-10 * scale

        # worst-case in-plane value (9 k3 - k1)/4 attained at z^2 = 3/4
        c = FrankCoefficients(k1=4.0, k2=1.0, k3=1.0, alpha=0.5)
        z = np.sqrt(0.75)
        zeta = np.array([np.sqrt(1.0 - z * z), 0.0, z])
        report = S.symmetric_eigs(zeta, np.array([0.0, 0.0, 1.0]), c)
        assert abs(report.min_rayleigh - 1.25) < 1e-10
        assert abs(min(report.closed_form) - (9.0 * c.k3 - c.k1) / 4.0) < 1e-10


def test_criterion_2_ellipticity_region_map():
    with _Criterion(2, "certificates pass iff the elastic admissibility holds", 60):
        rng = np.random.default_rng(102)
        sampler = S.SphereSampler()  # 64 x 64 grid plus 1e4 seeded draws
        for _ in range(1000):
            cert = S.certify_strong_ellipticity(random_frank(rng), sampler)
            assert cert.passed, f"admissible draw failed with c_min {cert.c_min}"

        bad = S.certify_strong_ellipticity(
            FrankCoefficients(k1=10.0, k2=1.0, k3=1.0, alpha=1.0), sampler
        )
        assert not bad.passed and bad.c_min < 0.0
        assert abs(bad.witness_z**2 - 0.75) < 0.01

        # scan boundary agrees with direct clause evaluation at every k1
        for k1 in np.linspace(0.52, 11.98, 24):
            c = FrankCoefficients(k1=k1, k2=1.0, k3=1.0, alpha=0.5)
            cert = S.certify_strong_ellipticity(c, sampler)
            assert cert.passed == validate_frank(c).passed


def test_criterion_3_gradient_oracle():
    with _Criterion(3, "energy derivatives match finite differences to 1e-6", 5):
        rng = np.random.default_rng(103)
        h = 1e-6
        for _ in range(1000):
            c = random_frank(rng)
            d = unit_vector(rng)
            G = rng.standard_normal((3, 3))
            exact = dpsi_dgradd(d, G, c)
            scale = max(np.max(np.abs(exact)), 1.0)
            for i in range(3):
                for j in range(3):
                    Gp, Gm = G.copy(), G.copy()
                    Gp[i, j] += h
                    Gm[i, j] -= h
                    fd = (float(psi(d, Gp, c).total) - float(psi(d, Gm, c).total)) / (2 * h)
                    assert abs(exact[i, j] - fd) < max(1e-6 * scale, 1e-9)

            # director derivative against psi_tilde with tangential probes
            exact_d = dpsi_dd(d, G, c)
            P = np.eye(3) - np.outer(d, d)
            ref = np.array([1.0, 0, 0]) if abs(d[0]) < 0.9 else np.array([0.0, 1, 0])
            t1 = np.cross(d, ref)
            t1 /= np.linalg.norm(t1)
            t2 = np.cross(d, t1)
            scale_d = max(np.max(np.abs(exact_d)), 1.0)
            for t in (t1, t2):
                fd = (float(psi_tilde(d + h * t, G, c)) -
                      float(psi_tilde(d - h * t, G, c))) / (2 * h)
                assert abs(np.dot(P @ exact_d, t) - fd) < max(1e-6 * scale_d, 1e-9)


def test_criterion_4_boundary_identity():
    with _Criterion(4, "boundary traction equals P_d dpsi/dgrad . nu to 1e-12", 5):
        rng = np.random.default_rng(104)
        iso = FrankCoefficients.isotropic()
        for _ in range(1000):
            c = random_frank(rng)
            d = unit_vector(rng)
            G = tangent_gradient(rng, d)
            nu = unit_vector(rng)
            traction = boundary_apply_point(d, G, nu, c)
            P = np.eye(3) - np.outer(d, d)
            oracle = P @ (dpsi_dgradd(d, G, c) @ nu)
            scale = max(np.max(np.abs(oracle)), 1.0)
            assert np.max(np.abs(traction - oracle)) < 1e-12 * scale
            # isotropic collapse to the Neumann traction, exact cancellation
            iso_traction = boundary_apply_point(d, G, nu, iso)
            assert np.max(np.abs(iso_traction - 2.0 * G @ nu)) < 1e-15 * scale


def test_criterion_5_null_lagrangian():
    with _Criterion(5, "saddle-splay divergence refines at >= 3.5x per halving", 30):
        residuals = []
        for n in (16, 32, 64):
            g = Grid.periodic(n)
            d, grad = angle_director(g)
            field = DirectorField(g, d)
            residuals.append(null_lagrangian_residual(field, grad=grad))
            # all-discrete route: exact identity, pure roundoff
            assert null_lagrangian_residual(field) < 1e-10
        assert residuals[0] / residuals[1] >= 3.5
        assert residuals[1] / residuals[2] >= 3.5


def test_criterion_6_accretivity():
    with _Criterion(6, "coupled-symbol accretivity and Schur bound at -1e-10 slack", 20):
        rng = np.random.default_rng(106)
        for _ in range(10_000):
            c = random_frank(rng)
            le = random_leslie(rng)
            lam = complex(abs(rng.standard_normal()), rng.standard_normal())
            xi = rng.standard_normal(3)
            d = unit_vector(rng)
            p = S.SymbolPoint(lam, xi, d, c, le)
            P = np.eye(3) - np.outer(d, d)
            u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            dd = P @ (rng.standard_normal(3) + 1j * rng.standard_normal(3))
            margin = S.accretivity_margin(p, u, dd)
            scale = max(1.0, float(np.vdot(u, u).real + np.vdot(dd, dd).real))
            assert margin >= -1e-10 * scale

            M = S.schur_complement(p)
            bound = le.rho * lam.real + le.mu_s * float(np.dot(xi, xi))
            value = np.vdot(u, M @ u).real
            assert value - bound * np.vdot(u, u).real >= -1e-10 * max(1.0, abs(value))


def test_criterion_7_lopatinskii_shapiro():
    with _Criterion(7, "LS stable dims 3/6 and positive min singular value", 300):
        rng = np.random.default_rng(107)
        points = LS.compact_test_set(NU, n_lambda=12, n_xi=24, n_d=24, seed=42)
        assert len(points) == 6912
        for draw in range(20):
            fr = random_frank(rng)
            le = random_leslie(rng)
            for lam, xi, d in points:
                p = LS.HalfLineProblem(lam, xi, NU, d, fr, le)
                rep_d = LS.director_ls_check(p)
                assert rep_d.stable_dimension == 3
                assert rep_d.min_singular_value > 0.0
                rep_c = LS.coupled_ls_check(p)
                assert rep_c.stable_dimension == 6
                assert rep_c.min_singular_value > 0.0

        # isotropic determinant against the closed form
        iso = FrankCoefficients.isotropic()
        le = LeslieCoefficients(mu_s=1.0, gamma=1.4)
        for _ in range(100):
            lam = complex(abs(rng.standard_normal()), rng.standard_normal())
            a = rng.uniform(0.0, 2.0 * np.pi)
            xi = rng.uniform(0.05, 1.5) * np.array([np.cos(a), np.sin(a), 0.0])
            p = LS.HalfLineProblem(lam, xi, NU, unit_vector(rng), iso, le)
            rep = LS.director_ls_check(p)
            expected = LS.isotropic_director_det(p.lam, p.xi, iso.k3, le.gamma)
            assert abs(rep.lopatinskii_det_modulus - expected) < 1e-8 * expected


def _drift_fields(n, eps=0.015):
    grid = Grid.periodic(n)
    d0 = tilted_smooth_director(grid, eps=eps)
    return grid, np.zeros(grid.extents + (3,)), d0


def test_criterion_8_norm_propagation():
    with _Criterion(8, "norm drift <= 1e-6 over 1e3 steps; refinement >= 3x", 300):
        fr = FrankCoefficients(k1=1.3, k2=0.9, k3=1.0, alpha=0.7)
        le = LeslieCoefficients(mu_s=1.0, gamma=1.5, mu_V=0.3, mu_D=0.2, mu_P=0.1,
                                mu_L=0.1, mu_0=0.05)
        g32, u32, d32 = _drift_fields(32)
        dt = 0.2 * sim.stability_bound(g32, fr, le)

        peak = 0.0

        def track(state):
            nonlocal peak
            peak = max(peak, state.d.norm_drift())

        cfg = sim.SimulationConfig(grid=g32, frank=fr, leslie=le, dt=dt,
                                   t_end=1000 * dt, cadence=25)
        result = sim.run(cfg, u32, d32, on_cadence=track)
        assert result.final_state.step_index == 1000
        assert peak <= 1e-6, f"norm drift peaked at {peak:.3e}"

        # Refinement clause: drift production per step over a matched physical
        # window, 64^3 at half the time step versus the 32^3 baseline.
        window = 60
        cfg_w = sim.SimulationConfig(grid=g32, frank=fr, leslie=le, dt=dt,
                                     t_end=window * dt, cadence=window)
        drift32 = sim.run(cfg_w, u32, d32).final_state.d.norm_drift()
        g64, u64, d64 = _drift_fields(64)
        cfg64 = sim.SimulationConfig(grid=g64, frank=fr, leslie=le, dt=dt / 2.0,
                                     t_end=window * dt, cadence=2 * window)
        drift64 = sim.run(cfg64, u64, d64).final_state.d.norm_drift()
        slope32 = drift32 / window
        slope64 = drift64 / (2 * window)
        assert slope32 / slope64 >= 3.0, (
            f"drift slope improved only {slope32 / slope64:.2f}x"
        )


def test_criterion_9_energy_monotonicity():
    with _Criterion(9, "gradient-flow energy non-increasing over 500 steps", 120):
        fr = FrankCoefficients(k1=1.4, k2=0.9, k3=1.0, alpha=0.7)
        le = LeslieCoefficients(mu_s=1.0, gamma=1.5)
        assert validate_frank(fr).passed
        grid = Grid.periodic(32)
        d0 = tilted_smooth_director(grid, eps=0.15)
        dt = 0.4 * sim.stability_bound(grid, fr, le)
        cfg = sim.SimulationConfig(grid=grid, frank=fr, leslie=le, dt=dt,
                                   t_end=500 * dt, cadence=1,
                                   director_evolution="gradient-flow-only")
        result = sim.run(cfg, np.zeros(grid.extents + (3,)), d0)
        energies = [row["energy"] for row in result.diagnostics]
        assert len(energies) == 500
        scale = max(energies)
        for a, b in zip(energies, energies[1:]):
            assert b - a <= 1e-12 * scale, f"energy increased by {b - a:.3e}"


def test_criterion_10_phi_equation_consistency():
    with _Criterion(10, "drift-evolution residual matches independent stencil", 30):
        fr = FrankCoefficients(k1=1.6, k2=0.8, k3=1.1, alpha=0.6)
        le = LeslieCoefficients(mu_s=1.0, gamma=1.2, mu_D=0.3)
        grid = Grid.periodic(8)
        cfg = sim.SimulationConfig(grid=grid, frank=fr, leslie=le,
                                   dt=0.5 * sim.stability_bound(grid, fr, le),
                                   t_end=1.0)
        X, Y, Z = grid.meshgrid()
        bump = np.sin(X) * np.cos(Y) + 0.5 * np.cos(Z)
        base = tilted_smooth_director(grid, eps=0.1)
        u = VelocityField(grid, np.zeros(grid.extents + (3,)))
        states = []
        for m, t in ((1.0, 0.0), (1.25, cfg.dt)):
            scale = np.sqrt(1.0 + 1e-3 * m * bump)
            d = DirectorField(grid, base * scale[..., None], norm_tol=None)
            states.append(sim.SimulationState(u=u, d=d, pi=np.zeros(grid.extents),
                                              t=t, step_index=int(t > 0)))
        diag = sim.phi_diagnostic(states[0], states[1], cfg)
        oracle = loop_stencil_phi_residual(states[0], states[1], cfg)
        assert abs(diag.residual_interior - oracle) <= 1e-10 * max(oracle, 1e-30)

        # isotropic coefficients: anisotropy contributions exactly zero
        iso_cfg = sim.SimulationConfig(
            grid=grid, frank=FrankCoefficients.isotropic(), leslie=le,
            dt=cfg.dt, t_end=1.0,
        )
        diag_iso = sim.phi_diagnostic(states[0], states[1], iso_cfg)
        assert np.max(np.abs(diag_iso.vanishing_terms["k1_minus_k3"])) == 0.0
        assert np.max(np.abs(diag_iso.vanishing_terms["k2_minus_k3"])) == 0.0
