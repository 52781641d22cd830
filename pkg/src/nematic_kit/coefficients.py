"""Model parameters and admissibility validation.

Three coefficient families live here: the elastic (Frank) constants of the
director energy, the viscosity set used by the coupled flow model in its
mu-parameterization, and the classical six-constant Leslie set kept for
cross-checks against the older literature.  Validation is deliberately
separate from construction: constructors only enforce structural rules
(finiteness, the ``k4 = alpha - k2`` bookkeeping), while the ``validate_*``
functions report admissibility clause by clause so callers can see exactly
which condition failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dc_fields
from typing import Mapping

__all__ = [
    "FrankCoefficients",
    "LeslieCoefficients",
    "ClassicalLeslieCoefficients",
    "ValidationClause",
    "ValidationReport",
    "validate_frank",
    "validate_ericksen_inequalities",
    "validate_consistency",
    "validate_positivity",
]

# Relative tolerance for the k4 = alpha - k2 construction rule.
_K4_RULE_RTOL = 1e-12


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"coefficient {name!r} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ValidationClause:
    name: str
    passed: bool
    detail: str

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class ValidationReport:
    """Per-clause outcome of one admissibility check."""

    check: str
    clauses: tuple[ValidationClause, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failed_clauses(self) -> tuple[ValidationClause, ...]:
        return tuple(c for c in self.clauses if not c.passed)

    def clause(self, name: str) -> ValidationClause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "clauses": [c.as_dict() for c in self.clauses],
        }


@dataclass(frozen=True)
class FrankCoefficients:
    """Elastic constants ``k1..k4`` plus the positivity margin ``alpha``.

    ``alpha`` is stored explicitly rather than inferred: several margins can
    certify the same ``k4``, so the constructor recomputes ``k4`` from
    ``(alpha, k2)`` and rejects mismatches beyond 1e-12 relative tolerance.
    Admissibility (positivity, the disjunct pair, the Ericksen inequalities)
    is *not* enforced here; see :func:`validate_frank`.
    """

    k1: float
    k2: float
    k3: float
    alpha: float
    k4: float = field(default=math.nan)

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "alpha"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        derived = self.alpha - self.k2
        if math.isnan(self.k4):
            object.__setattr__(self, "k4", derived)
        else:
            k4 = _require_finite("k4", self.k4)
            scale = max(1.0, abs(self.k2), abs(self.alpha))
            if abs(k4 - derived) > _K4_RULE_RTOL * scale:
                raise ValueError(
                    f"k4={k4!r} inconsistent with alpha - k2 = {derived!r} "
                    f"(beyond {_K4_RULE_RTOL} relative)"
                )
            object.__setattr__(self, "k4", k4)

    @classmethod
    def from_k4(cls, k1: float, k2: float, k3: float, k4: float) -> "FrankCoefficients":
        """Build from an explicit saddle-splay constant; alpha = k2 + k4."""
        return cls(k1=k1, k2=k2, k3=k3, alpha=float(k2) + float(k4), k4=k4)

    @classmethod
    def isotropic(cls) -> "FrankCoefficients":
        return cls(k1=1.0, k2=1.0, k3=1.0, alpha=1.0)

    @property
    def kmax(self) -> float:
        return max(self.k1, self.k2, self.k3)

    @property
    def kmin(self) -> float:
        return min(self.k1, self.k2, self.k3)


@dataclass(frozen=True)
class LeslieCoefficients:
    """Viscosity set of the mu-parameterized stress, plus density.

    ``mu_b`` is retained so the full constitutive stress can be reproduced
    verbatim; with an incompressible velocity field (div u = 0) its
    contribution is identically annihilated, so it is inert in the solver.
    """

    mu_s: float
    mu_V: float = 0.0
    mu_D: float = 0.0
    mu_P: float = 0.0
    mu_L: float = 0.0
    mu_0: float = 0.0
    mu_b: float = 0.0
    gamma: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        for f in dc_fields(self):
            object.__setattr__(self, f.name, _require_finite(f.name, getattr(self, f.name)))

    @classmethod
    def newtonian(cls, mu_s: float = 1.0, gamma: float = 1.0, rho: float = 1.0) -> "LeslieCoefficients":
        return cls(mu_s=mu_s, gamma=gamma, rho=rho)


@dataclass(frozen=True)
class ClassicalLeslieCoefficients:
    """The six classical Leslie viscosities and the two kinematic transport
    constants.  No admissibility constraints are imposed on this form."""

    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha4: float = 0.0
    alpha5: float = 0.0
    alpha6: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        for f in dc_fields(self):
            object.__setattr__(self, f.name, _require_finite(f.name, getattr(self, f.name)))


def _clause(name: str, passed: bool, detail: str) -> ValidationClause:
    return ValidationClause(name=name, passed=bool(passed), detail=detail)


def validate_frank(c: FrankCoefficients) -> ValidationReport:
    """Check the elastic admissibility conditions clause by clause.

    Clauses: strict positivity of k1, k2, k3; the margin window
    0 < alpha <= min(k1,k2,k3) (with k4 = alpha - k2 holding by
    construction); and the disjunction ``9*k3 > k1`` or
    ``2*|k1-k3| < min(k2,k3)``.  Inequalities are evaluated exactly, with
    no epsilon slack; callers wanting margins apply them beforehand.
    """
    kmin = c.kmin
    disj1 = 9.0 * c.k3 > c.k1
    disj2 = 2.0 * abs(c.k1 - c.k3) < min(c.k2, c.k3)
    clauses = (
        _clause("k1_positive", c.k1 > 0.0, f"k1 = {c.k1}"),
        _clause("k2_positive", c.k2 > 0.0, f"k2 = {c.k2}"),
        _clause("k3_positive", c.k3 > 0.0, f"k3 = {c.k3}"),
        _clause(
            "alpha_window",
            0.0 < c.alpha <= kmin,
            f"alpha = {c.alpha}, min(k1,k2,k3) = {kmin}",
        ),
        _clause(
            "anisotropy_disjunction",
            disj1 or disj2,
            f"9*k3 = {9.0 * c.k3} vs k1 = {c.k1}; "
            f"2*|k1-k3| = {2.0 * abs(c.k1 - c.k3)} vs min(k2,k3) = {min(c.k2, c.k3)}",
        ),
    )
    return ValidationReport(check="frank", clauses=clauses)


def validate_ericksen_inequalities(c: FrankCoefficients) -> ValidationReport:
    """Check the classical coercivity inequalities on (k1..k4).

    These are independent of :func:`validate_frank`: either check can pass
    while the other fails.
    """
    clauses = (
        _clause("k1_positive", c.k1 > 0.0, f"k1 = {c.k1}"),
        _clause("k2_positive", c.k2 > 0.0, f"k2 = {c.k2}"),
        _clause("k3_positive", c.k3 > 0.0, f"k3 = {c.k3}"),
        _clause("k2_dominates_k4", c.k2 > abs(c.k4), f"k2 = {c.k2}, |k4| = {abs(c.k4)}"),
        _clause(
            "splay_window",
            2.0 * c.k1 > c.k2 + c.k4,
            f"2*k1 = {2.0 * c.k1}, k2 + k4 = {c.k2 + c.k4}",
        ),
    )
    return ValidationReport(check="ericksen_inequalities", clauses=clauses)


def validate_consistency(c: LeslieCoefficients, n: int = 3) -> ValidationReport:
    """Thermodynamic-consistency conditions on the viscosity set.

    The heat-flux clauses of the non-isothermal model are out of scope; the
    remaining conditions are checked for spatial dimension ``n``.
    """
    clauses = (
        _clause("mu_s_nonnegative", c.mu_s >= 0.0, f"mu_s = {c.mu_s}"),
        _clause(
            "bulk_combination",
            2.0 * c.mu_s + n * c.mu_b >= 0.0,
            f"2*mu_s + {n}*mu_b = {2.0 * c.mu_s + n * c.mu_b}",
        ),
        _clause("mu_0_nonnegative", c.mu_0 >= 0.0, f"mu_0 = {c.mu_0}"),
        _clause("mu_L_nonnegative", c.mu_L >= 0.0, f"mu_L = {c.mu_L}"),
        _clause("gamma_positive", c.gamma > 0.0, f"gamma = {c.gamma}"),
    )
    return ValidationReport(check="consistency", clauses=clauses)


def validate_positivity(c: LeslieCoefficients) -> ValidationReport:
    """Strict positivity set used as precondition by the symbol and
    simulation modules: mu_s > 0, gamma > 0, mu_0 >= 0, mu_L >= 0."""
    clauses = (
        _clause("mu_s_positive", c.mu_s > 0.0, f"mu_s = {c.mu_s}"),
        _clause("gamma_positive", c.gamma > 0.0, f"gamma = {c.gamma}"),
        _clause("mu_0_nonnegative", c.mu_0 >= 0.0, f"mu_0 = {c.mu_0}"),
        _clause("mu_L_nonnegative", c.mu_L >= 0.0, f"mu_L = {c.mu_L}"),
    )
    return ValidationReport(check="positivity", clauses=clauses)


# Keys of the flat coefficient section of the toolkit config file.
FRANK_KEYS = ("k1", "k2", "k3", "alpha")
LESLIE_KEYS = ("mu_s", "mu_V", "mu_D", "mu_P", "mu_L", "mu_0", "mu_b", "gamma", "rho")


def frank_from_mapping(section: Mapping[str, float]) -> FrankCoefficients:
    missing = [k for k in ("k1", "k2", "k3") if k not in section]
    if missing:
        raise KeyError(f"coefficient section missing keys: {missing}")
    if "alpha" in section:
        return FrankCoefficients(
            k1=section["k1"], k2=section["k2"], k3=section["k3"],
            alpha=section["alpha"], k4=section.get("k4", math.nan),
        )
    if "k4" in section:
        return FrankCoefficients.from_k4(section["k1"], section["k2"], section["k3"], section["k4"])
    raise KeyError("coefficient section needs 'alpha' or 'k4'")


def leslie_from_mapping(section: Mapping[str, float]) -> LeslieCoefficients:
    kwargs = {k: float(section[k]) for k in LESLIE_KEYS if k in section}
    if "mu_s" not in kwargs:
        raise KeyError("coefficient section missing key 'mu_s'")
    return LeslieCoefficients(**kwargs)
