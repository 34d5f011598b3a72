"""Finite discrete measures: probability and signed measures on a fixed support.

A measure is a mass vector over ``support_size`` points; the dominating
measure is the counting measure on those points.  Divergence values returned
elsewhere in the package are plain floats, with ``math.inf`` standing for the
extended value +infinity.

Mass arrays are frozen at construction and every operation is a pure
function, so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, DominationError, PreconditionError

PROBABILITY_TOL = 1e-12


def _as_mass(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise PreconditionError("mass must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("mass entries must be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative finite measure on a finite support."""

    mass: np.ndarray

    def __post_init__(self):
        arr = _as_mass(self.mass)
        if np.any(arr < 0):
            raise PreconditionError("measure mass must be nonnegative")
        object.__setattr__(self, "mass", arr)

    @property
    def support_size(self) -> int:
        return self.mass.size

    @property
    def total(self) -> float:
        return math.fsum(self.mass)

    @property
    def is_probability(self) -> bool:
        return abs(self.total - 1.0) <= PROBABILITY_TOL

    @classmethod
    def uniform(cls, n: int) -> "DiscreteMeasure":
        return cls(np.full(n, 1.0 / n))

    def to_json_dict(self) -> dict:
        return {"support": self.support_size, "mass": [float(x) for x in self.mass]}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DiscreteMeasure":
        m = cls(doc["mass"])
        if "support" in doc and int(doc["support"]) != m.support_size:
            raise PreconditionError("declared support size does not match mass length")
        return m


@dataclass(frozen=True)
class SignedMeasure:
    """Finite signed measure on a finite support."""

    mass: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mass", _as_mass(self.mass))

    @property
    def support_size(self) -> int:
        return self.mass.size

    @property
    def total(self) -> float:
        return math.fsum(self.mass)

    def to_json_dict(self) -> dict:
        return {"support": self.support_size, "mass": [float(x) for x in self.mass]}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SignedMeasure":
        m = cls(doc["mass"])
        if "support" in doc and int(doc["support"]) != m.support_size:
            raise PreconditionError("declared support size does not match mass length")
        return m


@dataclass(frozen=True)
class DensityRatio:
    """Pointwise ratio d(mu)/d(p0); ``dominated`` is False iff mu puts mass on a p0-null point."""

    values: np.ndarray
    dominated: bool


class JordanDecomposition(NamedTuple):
    alpha_plus: float
    mu_plus: DiscreteMeasure
    alpha_minus: float
    mu_minus: DiscreteMeasure


def check_same_support(*measures) -> int:
    sizes = {m.support_size for m in measures}
    if len(sizes) != 1:
        raise DimensionMismatchError(f"support sizes differ: {sorted(sizes)}")
    return sizes.pop()


def check_probability(*measures) -> None:
    for m in measures:
        if not m.is_probability:
            raise PreconditionError(f"measure with total {m.total!r} is not a probability measure")


def dominated_by(mu, p0: DiscreteMeasure) -> bool:
    """True iff mu puts zero mass on every p0-null support point."""
    check_same_support(mu, p0)
    null = p0.mass == 0
    return bool(np.all(mu.mass[null] == 0))


def density_ratio(mu, p0: DiscreteMeasure) -> DensityRatio:
    """Ratio of mu to p0 on each point; p0-null points with mu-mass 0 get ratio 0."""
    check_same_support(mu, p0)
    pos = p0.mass > 0
    values = np.zeros(p0.support_size)
    values[pos] = mu.mass[pos] / p0.mass[pos]
    # Points violating domination are flagged and carry a signed infinity.
    bad = ~pos & (mu.mass != 0)
    values[bad] = np.sign(mu.mass[bad]) * np.inf
    values.flags.writeable = False
    return DensityRatio(values=values, dominated=not bool(np.any(bad)))


def jordan_decompose(mu: SignedMeasure) -> JordanDecomposition:
    """Split mu into alpha_plus*mu_plus - alpha_minus*mu_minus with orthogonal probability parts.

    When a part has zero total mass its alpha is 0 and the returned measure is
    a uniform dummy; callers must branch on alpha, never on the dummy.
    """
    pos = np.where(mu.mass > 0, mu.mass, 0.0)
    neg = np.where(mu.mass < 0, -mu.mass, 0.0)
    alpha_plus = math.fsum(pos)
    alpha_minus = math.fsum(neg)
    n = mu.support_size
    mu_plus = DiscreteMeasure(pos / alpha_plus) if alpha_plus > 0 else DiscreteMeasure.uniform(n)
    mu_minus = DiscreteMeasure(neg / alpha_minus) if alpha_minus > 0 else DiscreteMeasure.uniform(n)
    return JordanDecomposition(alpha_plus, mu_plus, alpha_minus, mu_minus)


def ess_sup_ratio(mu: SignedMeasure, p0: DiscreteMeasure) -> float:
    """Essential supremum of |d(mu)/d(p0)| for a zero-mass direction mu dominated by p0."""
    check_same_support(mu, p0)
    if abs(mu.total) > PROBABILITY_TOL:
        raise PreconditionError(f"mu must have zero total mass, got {mu.total!r}")
    if not dominated_by(mu, p0):
        raise DominationError("mu is not dominated by p0")
    pos = p0.mass > 0
    if not np.any(pos):
        return 0.0
    return float(np.max(np.abs(mu.mass[pos]) / p0.mass[pos]))


def validity_radius(mu: SignedMeasure, p0: DiscreteMeasure) -> float:
    """Largest a such that p0 + t*mu is a probability measure for all |t| <= a.

    Equals the reciprocal of ess_sup_ratio, with 1/0 = +inf.
    """
    sup = ess_sup_ratio(mu, p0)
    return math.inf if sup == 0 else 1.0 / sup


def is_valid_perturbation(p0: DiscreteMeasure, mu: SignedMeasure, t: float,
                          tol: float = PROBABILITY_TOL) -> bool:
    """Check that p0 + t*mu is a probability measure up to tolerance ``tol``."""
    check_same_support(mu, p0)
    mass = p0.mass + t * mu.mass
    if np.any(mass < -tol):
        return False
    return abs(math.fsum(mass) - 1.0) <= tol


def perturb(p0: DiscreteMeasure, mu: SignedMeasure, t: float) -> DiscreteMeasure:
    """Return p0 + t*mu as a measure, clamping only floating dust in [-1e-12, 0)."""
    check_same_support(mu, p0)
    mass = p0.mass + t * mu.mass
    dust = (mass < 0) & (mass >= -PROBABILITY_TOL)
    if np.any(mass < -PROBABILITY_TOL):
        raise PreconditionError(f"p0 + {t!r}*mu has negative mass; outside the validity radius")
    mass[dust] = 0.0
    return DiscreteMeasure(mass)
