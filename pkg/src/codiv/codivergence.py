"""Covariance- and correlation-type codivergences on finite discrete measures.

All evaluations are exact finite sums accumulated with ``math.fsum``.  The
return value is a float, with ``math.inf`` encoding the extended value that a
codivergence takes on non-dominated triples (or a vanishing Hellinger
affinity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegeneratePhiError, PreconditionError
from .measures import DiscreteMeasure, check_probability, check_same_support, dominated_by

_PHI_PROBE_POINTS = (0.0, 0.25, 0.5, 1.0, 2.0, 10.0)


@dataclass(frozen=True)
class PhiFunction:
    """A nonnegative link function normalized to phi(1) = 1.

    The first two derivatives at 1 are supplied analytically because the
    local expansion machinery needs them exactly.
    """

    fn: Callable[[float], float]
    dphi_at_one: float
    d2phi_at_one: float
    name: str = "phi"

    def __post_init__(self):
        if abs(self.fn(1.0) - 1.0) > 1e-14:
            raise PreconditionError(f"phi(1) must equal 1, got {self.fn(1.0)!r}")
        for x in _PHI_PROBE_POINTS:
            if self.fn(x) < 0:
                raise PreconditionError(f"phi must be nonnegative, phi({x}) < 0")

    def apply(self, ratios: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(self.fn(ratios), dtype=float)
            if out.shape == ratios.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([self.fn(float(x)) for x in ratios])


def phi_alpha(alpha: float) -> PhiFunction:
    """The power link x -> x**alpha, alpha > 0."""
    if not alpha > 0:
        raise PreconditionError("alpha must be positive")
    return PhiFunction(
        fn=lambda x: x ** alpha,
        dphi_at_one=alpha,
        d2phi_at_one=alpha * (alpha - 1.0),
        name=f"alpha:{alpha:g}",
    )


PHI_IDENTITY = phi_alpha(1.0)
PHI_SQRT = phi_alpha(0.5)


def _phi_integrals(p0, p1, p2, phi):
    """(cross, m1, m2) of phi(r1)phi(r2) and phi(rj) against p0, on supp(p0)."""
    pos = p0.mass > 0
    w = p0.mass[pos]
    f1 = phi.apply(p1.mass[pos] / w)
    f2 = phi.apply(p2.mass[pos] / w)
    cross = math.fsum(f1 * f2 * w)
    m1 = math.fsum(f1 * w)
    m2 = math.fsum(f2 * w)
    return cross, m1, m2


def v_phi(p0: DiscreteMeasure, p1: DiscreteMeasure, p2: DiscreteMeasure,
          phi: PhiFunction) -> float:
    """Covariance-type codivergence of (p1, p2) around p0; +inf unless p1, p2 << p0."""
    check_same_support(p0, p1, p2)
    check_probability(p0, p1, p2)
    if not (dominated_by(p1, p0) and dominated_by(p2, p0)):
        return math.inf
    cross, m1, m2 = _phi_integrals(p0, p1, p2, phi)
    return cross - m1 * m2


def r_phi(p0: DiscreteMeasure, p1: DiscreteMeasure, p2: DiscreteMeasure,
          phi: PhiFunction) -> float:
    """Correlation-type codivergence: v_phi normalized by both marginal integrals."""
    check_same_support(p0, p1, p2)
    check_probability(p0, p1, p2)
    if not (dominated_by(p1, p0) and dominated_by(p2, p0)):
        return math.inf
    cross, m1, m2 = _phi_integrals(p0, p1, p2, phi)
    if m1 <= 0 or m2 <= 0:
        raise DegeneratePhiError("a normalizing integral of phi vanished")
    return cross / (m1 * m2) - 1.0


def chi2_codiv(p0: DiscreteMeasure, p1: DiscreteMeasure, p2: DiscreteMeasure) -> float:
    """Chi-square codivergence: integral of (dP1/dP0) dP2 minus 1; +inf unless dominated."""
    check_same_support(p0, p1, p2)
    if not (dominated_by(p1, p0) and dominated_by(p2, p0)):
        return math.inf
    pos = p0.mass > 0
    return math.fsum(p1.mass[pos] * p2.mass[pos] / p0.mass[pos]) - 1.0


def hellinger_affinity(p: DiscreteMeasure, q: DiscreteMeasure) -> float:
    """Hellinger affinity: the integral of sqrt(p*q) over the whole support."""
    check_same_support(p, q)
    return math.fsum(np.sqrt(p.mass * q.mass))


def hellinger_codiv(p0: DiscreteMeasure, p1: DiscreteMeasure, p2: DiscreteMeasure) -> float:
    """Hellinger codivergence via affinities; finite whenever both denominators are positive.

    Does not require domination: mass of p1/p2 outside supp(p0) is fine as
    long as the affinities with p0 stay positive.
    """
    check_same_support(p0, p1, p2)
    d1 = hellinger_affinity(p0, p1)
    d2 = hellinger_affinity(p0, p2)
    if d1 <= 0 or d2 <= 0:
        return math.inf
    return hellinger_affinity(p1, p2) / (d1 * d2) - 1.0


def r_alpha(p0: DiscreteMeasure, p1: DiscreteMeasure, p2: DiscreteMeasure,
            alpha: float) -> float:
    """Correlation-type codivergence with the power link x**alpha."""
    return r_phi(p0, p1, p2, phi_alpha(alpha))


def v_alpha(p0: DiscreteMeasure, p1: DiscreteMeasure, p2: DiscreteMeasure,
            alpha: float) -> float:
    """Covariance-type codivergence with the power link x**alpha."""
    return v_phi(p0, p1, p2, phi_alpha(alpha))


def chi2_divergence(p: DiscreteMeasure, q: DiscreteMeasure) -> float:
    """Classical chi-square divergence of p from q; equals chi2_codiv(q | p, p)."""
    check_same_support(p, q)
    if not dominated_by(p, q):
        return math.inf
    pos = q.mass > 0
    d = p.mass[pos] - q.mass[pos]
    return math.fsum(d * d / q.mass[pos])
