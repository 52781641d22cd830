import math

import numpy as np
import pytest

from nematic_kit.coefficients import (
    ClassicalLeslieCoefficients,
    FrankCoefficients,
    LeslieCoefficients,
    frank_from_mapping,
    leslie_from_mapping,
    validate_consistency,
    validate_ericksen_inequalities,
    validate_frank,
)


class TestFrankConstruction:
    def test_k4_derived_from_alpha(self):
        c = FrankCoefficients(k1=2.0, k2=1.0, k3=1.0, alpha=0.5)
        assert c.k4 == pytest.approx(-0.5, abs=0.0)

    def test_explicit_consistent_k4_accepted(self):
        c = FrankCoefficients(k1=1.0, k2=1.0, k3=1.0, alpha=1.0, k4=0.0)
        assert c.k4 == 0.0

    def test_mismatched_k4_rejected(self):
        with pytest.raises(ValueError, match="inconsistent"):
            FrankCoefficients(k1=1.0, k2=1.0, k3=1.0, alpha=1.0, k4=0.1)

    def test_from_k4_roundtrip(self):
        c = FrankCoefficients.from_k4(0.4, 1.0, 1.0, 0.1)
        assert c.alpha == pytest.approx(1.1)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            FrankCoefficients(k1=math.nan, k2=1.0, k3=1.0, alpha=1.0)


class TestValidateFrank:
    def test_isotropic_passes(self):
        report = validate_frank(FrankCoefficients(k1=1, k2=1, k3=1, alpha=1))
        assert report.passed

    def test_both_disjuncts_fail(self):
        # 9*k3 = 9 <= k1 = 10 and 2|k1-k3| = 18 >= 1
        report = validate_frank(FrankCoefficients(k1=10, k2=1, k3=1, alpha=1))
        assert not report.passed
        assert not report.clause("anisotropy_disjunction").passed

    def test_first_disjunct_carries(self):
        report = validate_frank(FrankCoefficients(k1=2, k2=1, k3=1, alpha=0.5))
        assert report.passed  # 9*1 > 2

    def test_nonpositive_k_rejected(self):
        for bad in ("k1", "k2", "k3"):
            kwargs = {"k1": 1.0, "k2": 1.0, "k3": 1.0, "alpha": 1e-3}
            kwargs[bad] = -0.5
            report = validate_frank(FrankCoefficients(**kwargs))
            assert not report.passed
            assert not report.clause(f"{bad}_positive").passed

    def test_alpha_above_kmin_fails(self):
        report = validate_frank(FrankCoefficients(k1=1, k2=1, k3=1, alpha=2.0))
        assert not report.clause("alpha_window").passed


class TestEricksenInequalities:
    def test_reference_pass(self):
        c = FrankCoefficients.from_k4(1, 1, 1, 0)
        assert validate_ericksen_inequalities(c).passed

    def test_k4_magnitude_violation(self):
        c = FrankCoefficients.from_k4(1, 1, 1, 2)
        report = validate_ericksen_inequalities(c)
        assert not report.passed
        assert not report.clause("k2_dominates_k4").passed

    def test_splay_window_violation(self):
        # 2*k1 = 0.8 < k2 + k4 = 1.1
        c = FrankCoefficients.from_k4(0.4, 1, 1, 0.1)
        report = validate_ericksen_inequalities(c)
        assert not report.passed
        assert not report.clause("splay_window").passed

    def test_checks_are_inequivalent(self):
        # The two validations are distinct checks, but under the k4 = alpha - k2
        # construction rule the margin window makes the coercivity inequalities
        # a consequence of the first check: alpha in (0, min k] forces
        # |k4| < k2 and k2 + k4 = alpha <= k1 < 2 k1.  A randomized sweep must
        # therefore find inputs passing the coercivity check while failing the
        # admissibility check, and never the reverse.
        rng = np.random.default_rng(1234)
        f_only = e_only = 0
        for _ in range(3000):
            k1, k2, k3 = rng.uniform(0.1, 5.0, size=3)
            alpha = rng.uniform(0.05, 2.5)
            c = FrankCoefficients(k1=k1, k2=k2, k3=k3, alpha=alpha)
            f = validate_frank(c).passed
            e = validate_ericksen_inequalities(c).passed
            f_only += f and not e
            e_only += e and not f
        assert e_only > 0
        assert f_only == 0


class TestConsistency:
    def test_reference_pass(self):
        c = LeslieCoefficients(mu_s=1.0, mu_b=0.0, mu_0=0.0, mu_L=0.0, gamma=1.0)
        assert validate_consistency(c).passed

    def test_gamma_strictness(self):
        c = LeslieCoefficients(mu_s=1.0, gamma=0.0)
        report = validate_consistency(c)
        assert not report.passed
        assert not report.clause("gamma_positive").passed

    def test_bulk_combination(self):
        c = LeslieCoefficients(mu_s=1.0, mu_b=-1.0, gamma=1.0)
        report = validate_consistency(c, n=3)
        assert not report.clause("bulk_combination").passed  # 2 - 3 < 0

    def test_dimension_dependence(self):
        c = LeslieCoefficients(mu_s=1.0, mu_b=-0.9, gamma=1.0)
        assert validate_consistency(c, n=2).passed
        assert not validate_consistency(c, n=3).passed


class TestMappings:
    def test_frank_roundtrip(self):
        section = {"k1": 2.0, "k2": 1.0, "k3": 1.5, "alpha": 0.75}
        c = frank_from_mapping(section)
        assert (c.k1, c.k2, c.k3, c.alpha) == (2.0, 1.0, 1.5, 0.75)

    def test_leslie_defaults(self):
        c = leslie_from_mapping({"mu_s": 2.0, "gamma": 0.5})
        assert c.mu_s == 2.0 and c.gamma == 0.5 and c.mu_V == 0.0

    def test_missing_keys(self):
        with pytest.raises(KeyError):
            frank_from_mapping({"k1": 1.0, "k2": 1.0})
        with pytest.raises(KeyError):
            leslie_from_mapping({"gamma": 1.0})

    def test_classical_has_no_constraints(self):
        a = ClassicalLeslieCoefficients(alpha1=-3.0, alpha4=2.0, lambda1=-1.0)
        assert a.alpha1 == -3.0
