"""Independent numerical evaluation of R_alpha for the parametric families.

These routines integrate the defining ratio of integrals directly (truncated
series for Poisson, exact two-point sums for Bernoulli, adaptive
Gauss-Legendre quadrature for Gaussian/Exponential/Gamma) and exist to
validate the closed forms in :mod:`codiv.families`.  They deliberately avoid
every closed-form shortcut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DegeneratePhiError, OracleFailureError, PreconditionError
from .families import (BernoulliProd, ExponentialProd, GammaProd, GaussianIso,
                       ParamFamily, PoissonProd, check_family_triple, r_alpha_product)
from .measures import check_probability, check_same_support

# Exponent drop (in nats) defining the integration window relative to the
# integrand's peak; e^-46 < 1e-19.
_TAIL_DROP = 46.0


@dataclass(frozen=True)
class OracleConfig:
    rel_tol: float = 1e-9
    poisson_truncation: int | None = None  # None = adaptive tail bound
    quad_panels: int = 8
    quad_order: int = 32
    max_panels: int = 2 ** 16
    gaussian_sigma_pad: float = 12.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise PreconditionError("rel_tol must be positive")
        if self.quad_order < 2:
            raise PreconditionError("quad_order must be at least 2")


DEFAULT_CONFIG = OracleConfig()


@lru_cache(maxsize=None)
def _gl_nodes(order: int):
    nodes, weights = leggauss(order)
    return nodes, weights


def adaptive_gauss_legendre(f, lo: float, hi: float, cfg: OracleConfig = DEFAULT_CONFIG) -> float:
    """Integrate a vectorized integrand by panel bisection until two successive
    uniform refinements agree to rel_tol/4."""
    if not hi > lo:
        raise PreconditionError("empty integration interval")
    nodes, weights = _gl_nodes(cfg.quad_order)
    panels = max(1, cfg.quad_panels)
    prev = None
    while panels <= cfg.max_panels:
        edges = np.linspace(lo, hi, panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halfs = 0.5 * (edges[1:] - edges[:-1])
        xs = mids[:, None] + halfs[:, None] * nodes[None, :]
        vals = f(xs.ravel()).reshape(panels, -1)
        est = math.fsum((halfs[:, None] * (weights[None, :] * vals)).ravel())
        if prev is not None:
            scale = max(abs(est), abs(prev), 1e-300)
            if abs(est - prev) <= 0.25 * cfg.rel_tol * scale:
                return est
        prev = est
        panels *= 2
    raise OracleFailureError(f"quadrature did not converge within {cfg.max_panels} panels")


def _log_window(log_g, y_star: float) -> tuple[float, float]:
    """Bracket [y_lo, y_hi] where log_g has dropped _TAIL_DROP below its peak."""
    target = log_g(y_star) - _TAIL_DROP
    step = 1.0
    y_lo = y_star - step
    while log_g(y_lo) > target:
        step *= 1.5
        y_lo = y_star - step
    step = 1.0
    y_hi = y_star + step
    while log_g(y_hi) > target:
        step *= 1.5
        y_hi = y_star + step
    return y_lo, y_hi


def _gaussian_power_integral(means, sigma: float, powers, cfg: OracleConfig) -> float:
    """Integral of prod_j N(mean_j, sigma^2)(x)**power_j dx; powers sum to 1."""
    means = np.asarray(means, dtype=float)
    powers = np.asarray(powers, dtype=float)
    log_norm = -math.log(sigma * math.sqrt(2.0 * math.pi))  # total, since sum(powers) == 1
    inv2s2 = 1.0 / (2.0 * sigma * sigma)

    def f(x):
        le = np.full_like(x, log_norm)
        for m, c in zip(means, powers):
            if c != 0.0:
                le -= c * inv2s2 * (x - m) ** 2
        return np.exp(le)

    lo = float(np.min(means)) - cfg.gaussian_sigma_pad * sigma
    hi = float(np.max(means)) + cfg.gaussian_sigma_pad * sigma
    return adaptive_gauss_legendre(f, lo, hi, cfg)


def _gamma_power_integral(shapes, rates, powers, cfg: OracleConfig) -> float | None:
    """Integral of prod_j Gamma(shape_j, rate_j)(x)**power_j dx, or None if divergent.

    Substituting x = e^y turns the integrand into exp(S*y - R*e^y + const)
    with S = sum(power_j * shape_j) and R = sum(power_j * rate_j): smooth on
    the whole line and exponentially small in both tails, so plain
    Gauss-Legendre converges fast even for shapes below 1.  The integral
    exists iff S > 0 and R > 0.
    """
    shapes = np.asarray(shapes, dtype=float)
    rates = np.asarray(rates, dtype=float)
    powers = np.asarray(powers, dtype=float)
    S = float(np.dot(powers, shapes))
    R = float(np.dot(powers, rates))
    if S <= 0 or R <= 0:
        return None
    const = float(np.dot(powers, shapes * np.log(rates)))
    const -= math.fsum(c * math.lgamma(a) for c, a in zip(powers, shapes) if c != 0.0)

    def log_g(y):
        return const + S * y - R * math.exp(y)

    def f(y):
        return np.exp(const + S * y - R * np.exp(y))

    y_star = math.log(S / R)
    y_lo, y_hi = _log_window(log_g, y_star)
    return adaptive_gauss_legendre(f, y_lo, y_hi, cfg)


def _poisson_power_sum(lams, powers, cfg: OracleConfig) -> float:
    """Sum over k of prod_j Pois(lam_j)(k)**power_j, truncated by a tail bound."""
    lams = np.asarray(lams, dtype=float)
    powers = np.asarray(powers, dtype=float)
    B = float(np.dot(powers, lams))
    L = float(np.dot(powers, np.log(lams)))
    growth = math.exp(L)  # term ratio is growth/(k+1)
    terms = []
    k = 0
    while True:
        term = math.exp(-B + k * L - math.lgamma(k + 1))
        terms.append(term)
        k += 1
        if cfg.poisson_truncation is not None:
            if k >= cfg.poisson_truncation:
                break
            continue
        # Past 2*growth the terms at least halve each step, so the full tail
        # is bounded by twice the next term.
        if k > 2.0 * growth + 10.0 and term < 1e-18 * math.fsum(terms):
            break
        if k > 10_000_000:
            raise OracleFailureError("poisson series did not meet its tail bound")
    return math.fsum(terms)


def _bernoulli_power_sum(thetas, powers) -> float:
    """Exact two-point sum of prod_j Ber(theta_j)(x)**power_j over x in {0, 1}."""
    thetas = np.asarray(thetas, dtype=float)
    powers = np.asarray(powers, dtype=float)
    at_one = math.exp(float(np.dot(powers, np.log(thetas))))
    at_zero = math.exp(float(np.dot(powers, np.log1p(-thetas))))
    return at_one + at_zero


def _component_r_alpha(kind: str, p0, p1, p2, alpha: float, cfg: OracleConfig) -> float:
    """R_alpha of one scalar coordinate; p* are kind-specific parameter tuples."""
    c12 = (1.0 - 2.0 * alpha, alpha, alpha)
    c1 = (1.0 - alpha, alpha, 0.0)
    c2 = (1.0 - alpha, 0.0, alpha)
    if kind == "gaussian":
        means, sigma = (p0[0], p1[0], p2[0]), p0[1]
        i12 = _gaussian_power_integral(means, sigma, c12, cfg)
        i1 = _gaussian_power_integral(means, sigma, c1, cfg)
        i2 = _gaussian_power_integral(means, sigma, c2, cfg)
    elif kind == "gamma":
        shapes = (p0[0], p1[0], p2[0])
        rates = (p0[1], p1[1], p2[1])
        i12 = _gamma_power_integral(shapes, rates, c12, cfg)
        if i12 is None:
            return math.inf
        i1 = _gamma_power_integral(shapes, rates, c1, cfg)
        i2 = _gamma_power_integral(shapes, rates, c2, cfg)
        if i1 is None or i2 is None:
            return math.inf
    elif kind == "poisson":
        lams = (p0[0], p1[0], p2[0])
        i12 = _poisson_power_sum(lams, c12, cfg)
        i1 = _poisson_power_sum(lams, c1, cfg)
        i2 = _poisson_power_sum(lams, c2, cfg)
    elif kind == "bernoulli":
        ths = (p0[0], p1[0], p2[0])
        i12 = _bernoulli_power_sum(ths, c12)
        i1 = _bernoulli_power_sum(ths, c1)
        i2 = _bernoulli_power_sum(ths, c2)
    else:
        raise PreconditionError(f"no oracle for kind {kind!r}")
    if i1 <= 0 or i2 <= 0:
        return math.inf
    return i12 / (i1 * i2) - 1.0


def oracle_r_alpha(f0: ParamFamily, f1: ParamFamily, f2: ParamFamily, alpha: float,
                   cfg: OracleConfig = DEFAULT_CONFIG) -> float:
    """Numerical R_alpha for a same-kind family triple, one coordinate at a time.

    Product families are composed with the product rule; the per-coordinate
    integrals are evaluated to cfg.rel_tol.
    """
    if not alpha > 0:
        raise PreconditionError("alpha must be positive")
    check_family_triple(f0, f1, f2)
    if isinstance(f0, GaussianIso):
        comps = [_component_r_alpha("gaussian", (f0.mean[l], f0.sigma),
                                    (f1.mean[l], f0.sigma), (f2.mean[l], f0.sigma), alpha, cfg)
                 for l in range(f0.dim)]
    elif isinstance(f0, PoissonProd):
        comps = [_component_r_alpha("poisson", (f0.rates[l],), (f1.rates[l],),
                                    (f2.rates[l],), alpha, cfg)
                 for l in range(f0.dim)]
    elif isinstance(f0, BernoulliProd):
        comps = [_component_r_alpha("bernoulli", (f0.thetas[l],), (f1.thetas[l],),
                                    (f2.thetas[l],), alpha, cfg)
                 for l in range(f0.dim)]
    elif isinstance(f0, ExponentialProd):
        comps = [_component_r_alpha("gamma", (1.0, f0.rates[l]), (1.0, f1.rates[l]),
                                    (1.0, f2.rates[l]), alpha, cfg)
                 for l in range(f0.dim)]
    elif isinstance(f0, GammaProd):
        comps = [_component_r_alpha("gamma", (f0.shapes[l], f0.rates[l]),
                                    (f1.shapes[l], f1.rates[l]),
                                    (f2.shapes[l], f2.rates[l]), alpha, cfg)
                 for l in range(f0.dim)]
    else:
        raise PreconditionError("the oracle needs a density; generic families are not supported")
    return r_alpha_product(comps)


def oracle_discrete_bruteforce(p0, p1, p2, phi) -> float:
    """Reference r_phi on small discrete supports: naive loops, no compensation."""
    check_same_support(p0, p1, p2)
    check_probability(p0, p1, p2)
    if p0.support_size > 10_000:
        raise PreconditionError("brute-force oracle is limited to supports of at most 1e4 points")
    cross = 0.0
    m1 = 0.0
    m2 = 0.0
    for w0, w1, w2 in zip(p0.mass, p1.mass, p2.mass):
        if w0 == 0.0:
            if w1 != 0.0 or w2 != 0.0:
                return math.inf
            continue
        f1 = phi.fn(w1 / w0)
        f2 = phi.fn(w2 / w0)
        cross += f1 * f2 * w0
        m1 += f1 * w0
        m2 += f2 * w0
    if m1 <= 0 or m2 <= 0:
        raise DegeneratePhiError("a normalizing integral of phi vanished")
    return cross / (m1 * m2) - 1.0
