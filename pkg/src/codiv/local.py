"""Local bilinear structure of codivergences around a reference measure.

Around p0, every smooth-link codivergence behaves like
t*s * phi'(1)^2 * <mu, mu_tilde>_{p0}, where the inner product is the
nonparametric Fisher information metric.  This module computes that metric,
verifies the bilinear expansion on shrinking step grids, and fits the
two-scale expansion of the Hellinger codivergence when the perturbations
carry mass outside the support of p0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .codivergence import PhiFunction, hellinger_codiv, r_phi, v_phi
from .errors import DominationError, PreconditionError
from .measures import (PROBABILITY_TOL, DiscreteMeasure, SignedMeasure,
                       check_same_support, dominated_by, perturb, validity_radius)


@dataclass(frozen=True)
class PerturbationPair:
    """Two zero-mass signed directions dominated by a common reference measure."""

    reference: DiscreteMeasure
    mu: SignedMeasure
    mu_tilde: SignedMeasure

    def __post_init__(self):
        check_same_support(self.reference, self.mu, self.mu_tilde)
        for m in (self.mu, self.mu_tilde):
            if abs(m.total) > PROBABILITY_TOL:
                raise PreconditionError("perturbations must have zero total mass")
            if not dominated_by(m, self.reference):
                raise DominationError("perturbations must be dominated by the reference")


def _inner(p0: DiscreteMeasure, mu: SignedMeasure, mu_tilde: SignedMeasure) -> float:
    pos = p0.mass > 0
    return math.fsum(mu.mass[pos] * mu_tilde.mass[pos] / p0.mass[pos])


def fisher_inner(pair: PerturbationPair) -> float:
    """Nonparametric Fisher information inner product of the pair's directions."""
    return _inner(pair.reference, pair.mu, pair.mu_tilde)


def fisher_gram(p0: DiscreteMeasure, mus: Sequence[SignedMeasure]) -> np.ndarray:
    """Gram matrix of the Fisher inner product over the given directions."""
    for m in mus:
        PerturbationPair(p0, m, m)  # validates the direction
    n = len(mus)
    g = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            val = _inner(p0, mus[i], mus[j])
            g[i, j] = val
            g[j, i] = val
    return g


@dataclass(frozen=True)
class ExpansionLevel:
    t: float
    s: float
    v_value: float
    r_value: float
    v_residual: float
    r_residual: float
    v_ratio: float  # residual / (t^2 + s^2)
    r_ratio: float


@dataclass(frozen=True)
class ExpansionReport:
    phi_name: str
    inner: float
    coefficient: float  # phi'(1)^2 * inner
    levels: tuple[ExpansionLevel, ...]
    leading_coeff_v: float  # v_value/(t*s) at the finest level
    leading_coeff_r: float
    grid_shifts: int = 0  # halvings applied to reach the asymptotic window

    def to_json_dict(self) -> dict:
        return {
            "phi": self.phi_name,
            "fisher_inner": self.inner,
            "coefficient": self.coefficient,
            "leading_coeff_v": self.leading_coeff_v,
            "leading_coeff_r": self.leading_coeff_r,
            "grid_shifts": self.grid_shifts,
            "levels": [
                {"t": lv.t, "s": lv.s, "v_residual_ratio": lv.v_ratio,
                 "r_residual_ratio": lv.r_ratio, "v_residual": lv.v_residual,
                 "r_residual": lv.r_residual}
                for lv in self.levels
            ],
        }

    def decay_ok(self, factor: float = 0.6, noise_floor: float = 1e-14) -> bool:
        return (geometric_decay_ok([lv.v_residual for lv in self.levels],
                                   [lv.v_ratio for lv in self.levels], factor, noise_floor)
                and geometric_decay_ok([lv.r_residual for lv in self.levels],
                                       [lv.r_ratio for lv in self.levels], factor, noise_floor))


def geometric_decay_ok(residuals: Sequence[float], ratios: Sequence[float],
                       factor: float = 0.6, noise_floor: float = 1e-14) -> bool:
    """True when each halving shrinks the residual ratio by ``factor`` or the
    residual itself is already at the noise floor."""
    for k in range(1, len(ratios)):
        if residuals[k] <= noise_floor:
            continue
        if ratios[k] > factor * ratios[k - 1]:
            return False
    return True


def _run_levels(p0, mu, mu_tilde, phi, coeff, steps, radius_t, radius_s):
    out = []
    for t, s in steps:
        if abs(t) > radius_t or abs(s) > radius_s:
            raise PreconditionError(f"step ({t!r}, {s!r}) lies outside the validity radius")
        p1 = perturb(p0, mu, t)
        p2 = perturb(p0, mu_tilde, s)
        v_val = v_phi(p0, p1, p2, phi)
        r_val = r_phi(p0, p1, p2, phi)
        predicted = t * s * coeff
        denom = t * t + s * s
        v_res = abs(v_val - predicted)
        r_res = abs(r_val - predicted)
        out.append(ExpansionLevel(t=t, s=s, v_value=v_val, r_value=r_val,
                                  v_residual=v_res, r_residual=r_res,
                                  v_ratio=v_res / denom if denom > 0 else 0.0,
                                  r_ratio=r_res / denom if denom > 0 else 0.0))
    return out


def expansion_check(p0: DiscreteMeasure, mu: SignedMeasure, mu_tilde: SignedMeasure,
                    phi: PhiFunction, steps: Sequence[tuple[float, float]] | None = None,
                    levels: int = 5, base_factor: float = 0.1, shrink: float = 0.5,
                    max_shifts: int = 8) -> ExpansionReport:
    """Evaluate both codivergence types on a shrinking (t, s) grid against the
    predicted bilinear term t*s*phi'(1)^2*<mu, mu_tilde>.

    The default grid starts at 10% of each direction's validity radius and
    halves per level.  A coarse grid can straddle the crossover between the
    third- and fourth-order remainder terms, where consecutive residual
    ratios do not yet contract; in that case the whole grid is shifted down
    (up to ``max_shifts`` halvings) until the asymptotic decay is visible.
    Explicit ``steps`` disable the search and are validated against the radii.
    """
    pair = PerturbationPair(p0, mu, mu_tilde)
    inner = fisher_inner(pair)
    coeff = phi.dphi_at_one ** 2 * inner
    radius_t = validity_radius(mu, p0)
    radius_s = validity_radius(mu_tilde, p0)

    def build(levels_list, shifts):
        t_f, s_f = levels_list[-1].t, levels_list[-1].s
        ts = t_f * s_f
        return ExpansionReport(
            phi_name=phi.name, inner=inner, coefficient=coeff, levels=tuple(levels_list),
            leading_coeff_v=levels_list[-1].v_value / ts if ts != 0 else 0.0,
            leading_coeff_r=levels_list[-1].r_value / ts if ts != 0 else 0.0,
            grid_shifts=shifts,
        )

    if steps is not None:
        return build(_run_levels(p0, mu, mu_tilde, phi, coeff, steps, radius_t, radius_s), 0)

    report = None
    for shift in range(max_shifts + 1):
        t0 = base_factor * min(radius_t, 1.0) * shrink ** shift
        s0 = base_factor * min(radius_s, 1.0) * shrink ** shift
        grid = [(t0 * shrink ** k, s0 * shrink ** k) for k in range(levels)]
        report = build(_run_levels(p0, mu, mu_tilde, phi, coeff, grid, radius_t, radius_s),
                       shift)
        if report.decay_ok():
            return report
    return report


@dataclass(frozen=True)
class OffSupportReport:
    """Fitted and expected coefficients of the two-scale Hellinger expansion.

    The model fitted over the (t, s) grid is
        a*sqrt(ts) + b*ts + c1*t*sqrt(ts) + c2*s*sqrt(ts);
    a is the off-support affinity integral of sqrt(h1*h2); b is the exact
    second-order coefficient (inner_supp - m1*m2)/4 built from the on-support
    Fisher-type integral and the on-support masses m_i; the c terms are the
    mixed corrections -C*m_i/2 that a pure two-term model would alias onto b.
    """

    fitted_sqrt: float
    fitted_bilinear: float
    fitted_cross_t: float
    fitted_cross_s: float
    expected_sqrt: float
    expected_bilinear: float
    expected_cross_t: float
    expected_cross_s: float
    grid_scale: float
    grid: tuple[tuple[float, float], ...] = field(repr=False)

    @staticmethod
    def _rel_err(fitted: float, expected: float) -> float:
        return abs(fitted - expected) / max(abs(expected), 1e-300)

    @property
    def sqrt_rel_error(self) -> float:
        return self._rel_err(self.fitted_sqrt, self.expected_sqrt)

    @property
    def bilinear_rel_error(self) -> float:
        return self._rel_err(self.fitted_bilinear, self.expected_bilinear)

    def to_json_dict(self) -> dict:
        return {
            "grid_scale": self.grid_scale,
            "fitted": {"sqrt_ts": self.fitted_sqrt, "ts": self.fitted_bilinear,
                       "t_sqrt_ts": self.fitted_cross_t, "s_sqrt_ts": self.fitted_cross_s},
            "expected": {"sqrt_ts": self.expected_sqrt, "ts": self.expected_bilinear,
                         "t_sqrt_ts": self.expected_cross_t, "s_sqrt_ts": self.expected_cross_s},
            "relative_errors": {"sqrt_ts": self.sqrt_rel_error, "ts": self.bilinear_rel_error},
        }


def hellinger_off_support_check(p0: DiscreteMeasure, mu1: SignedMeasure, mu2: SignedMeasure,
                                grid_scale: float = 1e-3, grid_n: int = 4) -> OffSupportReport:
    """Fit the Hellinger expansion for perturbations with mass off supp(p0).

    Requires zero-total-mass directions whose densities are nonnegative
    outside supp(p0) and that overlap supp(p0); the grid must stay inside the
    positivity region of p0 + t*mu_i.
    """
    check_same_support(p0, mu1, mu2)
    supp = p0.mass > 0
    for name, mu in (("mu1", mu1), ("mu2", mu2)):
        if abs(mu.total) > PROBABILITY_TOL:
            raise PreconditionError(f"{name} must have zero total mass")
        if np.any(mu.mass[~supp] < 0):
            raise PreconditionError(f"{name} must be nonnegative outside supp(p0)")
        if not np.any(supp & (mu.mass != 0)):
            raise PreconditionError(f"{name} must overlap supp(p0)")
    for name, mu in (("mu1", mu1), ("mu2", mu2)):
        neg = supp & (mu.mass < 0)
        t_max = float(np.min(p0.mass[neg] / -mu.mass[neg])) if np.any(neg) else math.inf
        if grid_scale > 0.5 * t_max:
            raise PreconditionError(f"grid scale {grid_scale!r} exceeds half the positivity "
                                    f"radius {t_max!r} of {name}")

    grid = [(grid_scale * i / grid_n, grid_scale * j / grid_n)
            for i in range(1, grid_n + 1) for j in range(1, grid_n + 1)]
    design = []
    values = []
    for t, s in grid:
        root = math.sqrt(t * s)
        design.append([root, t * s, t * root, s * root])
        values.append(hellinger_codiv(p0, perturb(p0, mu1, t), perturb(p0, mu2, s)))
    coef, *_ = np.linalg.lstsq(np.asarray(design), np.asarray(values), rcond=None)

    off = ~supp
    c_sqrt = math.fsum(np.sqrt(np.maximum(mu1.mass[off], 0.0) * np.maximum(mu2.mass[off], 0.0)))
    inner_supp = math.fsum(mu1.mass[supp] * mu2.mass[supp] / p0.mass[supp])
    m1 = math.fsum(mu1.mass[supp])
    m2 = math.fsum(mu2.mass[supp])
    return OffSupportReport(
        fitted_sqrt=float(coef[0]), fitted_bilinear=float(coef[1]),
        fitted_cross_t=float(coef[2]), fitted_cross_s=float(coef[3]),
        expected_sqrt=c_sqrt,
        expected_bilinear=(inner_supp - m1 * m2) / 4.0,
        expected_cross_t=-c_sqrt * m1 / 2.0,
        expected_cross_s=-c_sqrt * m2 / 2.0,
        grid_scale=grid_scale, grid=tuple(grid),
    )
