"""Closed-form correlation-type codivergences for common parametric families.

Every formula is evaluated in log space and exponentiated at the very end
with ``expm1``; the Gamma family goes through log-Gamma differences so that
ratios of Gamma functions never overflow.  Parameter combinations outside an
exponential family's natural domain yield +inf rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError, KindMismatchError, PreconditionError


def _param_vector(values, name: str, positive: bool = False,
                  open_unit: bool = False) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise PreconditionError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"{name} must be finite")
    if positive and not np.all(arr > 0):
        raise PreconditionError(f"{name} must be strictly positive")
    if open_unit and not np.all((arr > 0) & (arr < 1)):
        raise PreconditionError(f"{name} must lie in the open interval (0, 1)")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GaussianIso:
    """Multivariate normal with mean vector and isotropic variance sigma^2."""

    mean: np.ndarray
    sigma: float
    kind = "gaussian_iso"

    def __post_init__(self):
        object.__setattr__(self, "mean", _param_vector(self.mean, "mean"))
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise PreconditionError("sigma must be strictly positive")

    @property
    def dim(self) -> int:
        return self.mean.size

    def to_json_dict(self) -> dict:
        return {"kind": self.kind,
                "params": {"mean": [float(x) for x in self.mean], "sigma": float(self.sigma)}}


@dataclass(frozen=True)
class PoissonProd:
    """Product of Poisson distributions with intensity vector."""

    rates: np.ndarray
    kind = "poisson_product"

    def __post_init__(self):
        object.__setattr__(self, "rates", _param_vector(self.rates, "lambda", positive=True))

    @property
    def dim(self) -> int:
        return self.rates.size

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "params": {"lambda": [float(x) for x in self.rates]}}


@dataclass(frozen=True)
class BernoulliProd:
    """Product of Bernoulli distributions with success probabilities in (0, 1)."""

    thetas: np.ndarray
    kind = "bernoulli_product"

    def __post_init__(self):
        object.__setattr__(self, "thetas", _param_vector(self.thetas, "theta", open_unit=True))

    @property
    def dim(self) -> int:
        return self.thetas.size

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "params": {"theta": [float(x) for x in self.thetas]}}


@dataclass(frozen=True)
class ExponentialProd:
    """Product of exponential distributions with rate vector."""

    rates: np.ndarray
    kind = "exponential_product"

    def __post_init__(self):
        object.__setattr__(self, "rates", _param_vector(self.rates, "beta", positive=True))

    @property
    def dim(self) -> int:
        return self.rates.size

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "params": {"beta": [float(x) for x in self.rates]}}


@dataclass(frozen=True)
class GammaProd:
    """Product of Gamma distributions with shape and rate vectors."""

    shapes: np.ndarray
    rates: np.ndarray
    kind = "gamma_product"

    def __post_init__(self):
        object.__setattr__(self, "shapes", _param_vector(self.shapes, "shape", positive=True))
        object.__setattr__(self, "rates", _param_vector(self.rates, "rate", positive=True))
        if self.shapes.size != self.rates.size:
            raise DimensionMismatchError("shape and rate vectors differ in length")

    @property
    def dim(self) -> int:
        return self.rates.size

    def to_json_dict(self) -> dict:
        return {"kind": self.kind,
                "params": {"shape": [float(x) for x in self.shapes],
                           "rate": [float(x) for x in self.rates]}}


@dataclass(frozen=True)
class GenericExpFam:
    """Exponential family given by natural parameter, log-partition A and domain test.

    ``log_partition`` and ``in_domain`` must be pure functions of the natural
    parameter (a float or a vector).
    """

    theta: np.ndarray
    log_partition: Callable[[np.ndarray], float]
    in_domain: Callable[[np.ndarray], bool]
    kind = "generic_exponential_family"

    def __post_init__(self):
        object.__setattr__(self, "theta", _param_vector(self.theta, "theta"))

    @property
    def dim(self) -> int:
        return self.theta.size


ParamFamily = Union[GaussianIso, PoissonProd, BernoulliProd, ExponentialProd,
                    GammaProd, GenericExpFam]


def check_family_triple(f0: ParamFamily, f1: ParamFamily, f2: ParamFamily) -> None:
    if not (f0.kind == f1.kind == f2.kind):
        raise KindMismatchError(f"mixed family kinds: {f0.kind}, {f1.kind}, {f2.kind}")
    if not (f0.dim == f1.dim == f2.dim):
        raise DimensionMismatchError("family dimensions differ")
    if isinstance(f0, GaussianIso) and not (f0.sigma == f1.sigma == f2.sigma):
        raise DimensionMismatchError("isotropic Gaussian triples must share sigma")


def _gamma_component_log1p(a0, b0, a1, b1, a2, b2, alpha) -> float:
    """log(R_alpha + 1) for one Gamma coordinate, or +inf on a domain violation.

    The rate part is accumulated through log1p of relative rate shifts, which
    is exact up to rounding when the three rates are close (the regime the
    first-order approximation cares about).  Writing d = beta_j - beta_0:

        a01*log(b01) + a02*log(b02) - a0*log(b0) - abar*log(bbar)
          = a01*log1p(x1) + a02*log1p(x2) - abar*log1p(x12)

    because a01 + a02 - a0 - abar = 0, with xj = alpha*dj/b0.
    """
    abar = a0 + alpha * (a1 + a2 - 2.0 * a0)
    a01 = a0 + alpha * (a1 - a0)
    a02 = a0 + alpha * (a2 - a0)
    x1 = alpha * (b1 - b0) / b0
    x2 = alpha * (b2 - b0) / b0
    x12 = alpha * (b1 + b2 - 2.0 * b0) / b0
    if min(abar, a01, a02) <= 0 or min(1.0 + x1, 1.0 + x2, 1.0 + x12) <= 0:
        return math.inf
    log_gamma_part = (math.lgamma(a0) + math.lgamma(abar)
                      - math.lgamma(a01) - math.lgamma(a02))
    log_rate_part = (a01 * math.log1p(x1) + a02 * math.log1p(x2)
                     - abar * math.log1p(x12))
    return log_gamma_part + log_rate_part


def r_alpha_closed_log1p(f0: ParamFamily, f1: ParamFamily, f2: ParamFamily,
                         alpha: float) -> float:
    """log(R_alpha + 1) in closed form; +inf when a domain constraint fails."""
    if not alpha > 0:
        raise PreconditionError("alpha must be positive")
    check_family_triple(f0, f1, f2)

    if isinstance(f0, GaussianIso):
        d1 = f1.mean - f0.mean
        d2 = f2.mean - f0.mean
        return alpha * alpha * math.fsum(d1 * d2) / (f0.sigma * f0.sigma)

    if isinstance(f0, PoissonProd):
        l0, l1, l2 = f0.rates, f1.rates, f2.rates
        terms = l0 ** (1.0 - 2.0 * alpha) * (l1 ** alpha - l0 ** alpha) * (l2 ** alpha - l0 ** alpha)
        return math.fsum(terms)

    if isinstance(f0, BernoulliProd):
        total = 0.0
        for t0, t1, t2 in zip(f0.thetas, f1.thetas, f2.thetas):
            num = (t0 ** (1 - 2 * alpha) * t1 ** alpha * t2 ** alpha
                   + (1 - t0) ** (1 - 2 * alpha) * (1 - t1) ** alpha * (1 - t2) ** alpha)
            r1 = t0 ** (1 - alpha) * t1 ** alpha + (1 - t0) ** (1 - alpha) * (1 - t1) ** alpha
            r2 = t0 ** (1 - alpha) * t2 ** alpha + (1 - t0) ** (1 - alpha) * (1 - t2) ** alpha
            total += math.log(num) - math.log(r1) - math.log(r2)
        return total

    if isinstance(f0, ExponentialProd):
        # Exponential(beta) is Gamma(1, beta); all log-Gamma terms cancel.
        total = 0.0
        for b0, b1, b2 in zip(f0.rates, f1.rates, f2.rates):
            term = _gamma_component_log1p(1.0, b0, 1.0, b1, 1.0, b2, alpha)
            if math.isinf(term):
                return math.inf
            total += term
        return total

    if isinstance(f0, GammaProd):
        total = 0.0
        for a0, b0, a1, b1, a2, b2 in zip(f0.shapes, f0.rates, f1.shapes, f1.rates,
                                          f2.shapes, f2.rates):
            term = _gamma_component_log1p(a0, b0, a1, b1, a2, b2, alpha)
            if math.isinf(term):
                return math.inf
            total += term
        return total

    if isinstance(f0, GenericExpFam):
        t0, t1, t2 = f0.theta, f1.theta, f2.theta
        tbar = t0 + alpha * (t1 + t2 - 2.0 * t0)
        t01 = t0 + alpha * (t1 - t0)
        t02 = t0 + alpha * (t2 - t0)
        for t in (tbar, t01, t02):
            if not f0.in_domain(t):
                return math.inf
        A = f0.log_partition
        return float(A(tbar) - A(t01) - A(t02) + A(t0))

    raise KindMismatchError(f"unsupported family kind {f0.kind!r}")


def r_alpha_closed(f0: ParamFamily, f1: ParamFamily, f2: ParamFamily,
                   alpha: float) -> float:
    """Closed-form R_alpha codivergence for a same-kind family triple."""
    log1p_value = r_alpha_closed_log1p(f0, f1, f2, alpha)
    return math.inf if math.isinf(log1p_value) else math.expm1(log1p_value)


def r_alpha_product(componentwise: Sequence[float]) -> float:
    """Combine per-coordinate R_alpha values: product of (value + 1) minus 1; +inf absorbs."""
    if any(math.isinf(v) for v in componentwise):
        return math.inf
    product = 1.0
    for v in componentwise:
        product *= 1.0 + v
    return product - 1.0


def gamma_first_order(f0: GammaProd, f1: GammaProd, f2: GammaProd, alpha: float) -> float:
    """First-order approximation of the Gamma R_alpha for shared shapes.

    Returns expm1 of the weighted rate-shift inner product
    alpha^2 * sum_l shape_l * (b1l-b0l)*(b2l-b0l)/b0l^2.
    """
    check_family_triple(f0, f1, f2)
    if not isinstance(f0, GammaProd):
        raise KindMismatchError("gamma_first_order requires GammaProd families")
    if not (np.array_equal(f0.shapes, f1.shapes) and np.array_equal(f0.shapes, f2.shapes)):
        raise DimensionMismatchError("the three families must share their shape vector")
    d1 = f1.rates - f0.rates
    d2 = f2.rates - f0.rates
    quad = math.fsum(f0.shapes * d1 * d2 / (f0.rates * f0.rates))
    return math.expm1(alpha * alpha * quad)


# Natural-parameter views used to cross-check the specialized formulas above
# against the generic exponential-family identity.

def as_generic(f: ParamFamily) -> GenericExpFam:
    """Natural-parameter representation with its log-partition and domain test."""
    if isinstance(f, GaussianIso):
        sigma2 = f.sigma * f.sigma
        return GenericExpFam(
            theta=f.mean,
            log_partition=lambda th: float(np.dot(th, th)) / (2.0 * sigma2),
            in_domain=lambda th: True,
        )
    if isinstance(f, PoissonProd):
        return GenericExpFam(
            theta=np.log(f.rates),
            log_partition=lambda th: float(np.sum(np.exp(th))),
            in_domain=lambda th: True,
        )
    if isinstance(f, BernoulliProd):
        return GenericExpFam(
            theta=np.log(f.thetas / (1.0 - f.thetas)),
            log_partition=lambda th: float(np.sum(np.logaddexp(0.0, th))),
            in_domain=lambda th: True,
        )
    if isinstance(f, ExponentialProd):
        return GenericExpFam(
            theta=-f.rates,
            log_partition=lambda th: float(-np.sum(np.log(-th))),
            in_domain=lambda th: bool(np.all(th < 0)),
        )
    if isinstance(f, GammaProd):
        # theta = (shape - 1, -rate) per coordinate, flattened.
        theta = np.concatenate([f.shapes - 1.0, -f.rates])

        def log_partition(th):
            d = th.size // 2
            a = th[:d] + 1.0
            return float(math.fsum(math.lgamma(x) for x in a) - np.sum(a * np.log(-th[d:])))

        def in_domain(th):
            d = th.size // 2
            return bool(np.all(th[:d] > -1.0) and np.all(th[d:] < 0))

        return GenericExpFam(theta=theta, log_partition=log_partition, in_domain=in_domain)
    raise KindMismatchError(f"no natural-parameter view for kind {f.kind!r}")


def family_from_json_dict(doc: dict) -> ParamFamily:
    kind = doc.get("kind")
    params = doc.get("params", {})
    if kind == "gaussian_iso":
        return GaussianIso(mean=params["mean"], sigma=params["sigma"])
    if kind == "poisson_product":
        return PoissonProd(rates=params["lambda"])
    if kind == "bernoulli_product":
        return BernoulliProd(thetas=params["theta"])
    if kind == "exponential_product":
        return ExponentialProd(rates=params["beta"])
    if kind == "gamma_product":
        return GammaProd(shapes=params["shape"], rates=params["rate"])
    raise PreconditionError(f"unknown or unsupported family kind {kind!r}")
