import math

import numpy as np
import pytest

from codiv import (BernoulliProd, DimensionMismatchError, ExponentialProd, GammaProd,
                   GaussianIso, KindMismatchError, PoissonProd, PreconditionError,
                   as_generic, family_from_json_dict, gamma_first_order,
                   r_alpha_closed, r_alpha_product)


class TestGaussian:
    def test_orthogonal_mean_shifts_vanish(self):
        f0 = GaussianIso([0.0, 0.0], 1.0)
        f1 = GaussianIso([1.0, 0.0], 1.0)
        f2 = GaussianIso([0.0, 1.0], 1.0)
        for alpha in (0.25, 0.5, 1.0, 1.5):
            assert r_alpha_closed(f0, f1, f2, alpha) == 0.0

    def test_inner_product_formula(self):
        f0 = GaussianIso([0.5, -1.0], 2.0)
        f1 = GaussianIso([1.5, 0.0], 2.0)
        f2 = GaussianIso([-0.5, 1.0], 2.0)
        alpha = 0.5
        expected = math.expm1(alpha ** 2 * (1.0 * -1.0 + 1.0 * 2.0) / 4.0)
        assert r_alpha_closed(f0, f1, f2, alpha) == pytest.approx(expected, rel=1e-15)

    def test_sigma_mismatch_rejected(self):
        with pytest.raises(DimensionMismatchError):
            r_alpha_closed(GaussianIso([0.0], 1.0), GaussianIso([1.0], 2.0),
                           GaussianIso([0.0], 1.0), 1.0)


class TestPoisson:
    def test_chi2_value(self):
        value = r_alpha_closed(PoissonProd([1.0]), PoissonProd([2.0]), PoissonProd([3.0]), 1.0)
        assert value == pytest.approx(math.exp(2.0) - 1.0, rel=1e-14)

    def test_chi2_display(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            l0, l1, l2 = rng.uniform(0.3, 5.0, (3, 3))
            value = r_alpha_closed(PoissonProd(l0), PoissonProd(l1), PoissonProd(l2), 1.0)
            display = math.expm1(np.sum((l1 - l0) * (l2 - l0) / l0))
            assert value == pytest.approx(display, rel=1e-12, abs=1e-14)

    def test_hellinger_display(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            l0, l1, l2 = rng.uniform(0.3, 5.0, (3, 3))
            value = r_alpha_closed(PoissonProd(l0), PoissonProd(l1), PoissonProd(l2), 0.5)
            display = math.expm1(np.sum((np.sqrt(l1) - np.sqrt(l0)) * (np.sqrt(l2) - np.sqrt(l0))))
            assert value == pytest.approx(display, rel=1e-12, abs=1e-14)


class TestBernoulli:
    def test_chi2_value(self):
        value = r_alpha_closed(BernoulliProd([0.5]), BernoulliProd([0.75]),
                               BernoulliProd([0.25]), 1.0)
        assert value == pytest.approx(-0.25, abs=1e-14)

    def test_chi2_display(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            t0, t1, t2 = rng.uniform(0.05, 0.95, (3, 2))
            value = r_alpha_closed(BernoulliProd(t0), BernoulliProd(t1), BernoulliProd(t2), 1.0)
            display = np.prod((t1 - t0) * (t2 - t0) / (t0 * (1 - t0)) + 1.0) - 1.0
            assert value == pytest.approx(display, rel=1e-12, abs=1e-14)

    def test_hellinger_display(self):
        def affinity(a, b):
            return np.sqrt(a * b) + np.sqrt((1 - a) * (1 - b))

        rng = np.random.default_rng(8)
        for _ in range(25):
            t0, t1, t2 = rng.uniform(0.05, 0.95, (3, 2))
            value = r_alpha_closed(BernoulliProd(t0), BernoulliProd(t1), BernoulliProd(t2), 0.5)
            display = np.prod(affinity(t1, t2) / (affinity(t1, t0) * affinity(t2, t0))) - 1.0
            assert value == pytest.approx(display, rel=1e-12, abs=1e-14)

    def test_open_interval_enforced(self):
        with pytest.raises(PreconditionError):
            BernoulliProd([1.0])
        with pytest.raises(PreconditionError):
            BernoulliProd([0.0, 0.5])


class TestExponentialAndGamma:
    def test_exponential_table_row(self):
        value = r_alpha_closed(ExponentialProd([1.0]), ExponentialProd([2.0]),
                               ExponentialProd([2.0]), 1.0)
        assert value == pytest.approx(1.0 / 3.0, rel=1e-14)

    def test_exponential_ratio_formula(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            b0, b1, b2 = rng.uniform(0.5, 4.0, (3, 2))
            alpha = rng.choice([0.25, 0.5, 1.0])
            num = (b0 + alpha * (b1 - b0)) * (b0 + alpha * (b2 - b0))
            den = b0 * (b0 + alpha * (b1 + b2 - 2 * b0))
            if np.all(num > 0) and np.all(den > 0):
                value = r_alpha_closed(ExponentialProd(b0), ExponentialProd(b1),
                                       ExponentialProd(b2), alpha)
                assert value == pytest.approx(np.prod(num / den) - 1.0, rel=1e-12, abs=1e-14)

    def test_gamma_domain_violation_is_infinite(self):
        f0 = GammaProd([1.0], [5.0])
        f1 = GammaProd([1.0], [1.0])
        f2 = GammaProd([1.0], [1.0])
        # mixed rate 5 + (1 + 1 - 10) = -3 <= 0
        assert r_alpha_closed(f0, f1, f2, 1.0) == math.inf
        # marginal rate beta0 + alpha*(beta1 - beta0) <= 0 with alpha > 1
        assert r_alpha_closed(GammaProd([1.0], [1.0]), GammaProd([1.0], [0.2]),
                              GammaProd([1.0], [1.0]), 2.0) == math.inf

    def test_gamma_shape_domain_violation(self):
        f0 = GammaProd([3.0], [1.0])
        f1 = GammaProd([1.0], [1.0])
        f2 = GammaProd([1.0], [1.0])
        # mixed shape 3 + 2*(1 + 1 - 6) = -5 <= 0
        assert r_alpha_closed(f0, f1, f2, 2.0) == math.inf

    def test_exponential_is_gamma_with_unit_shape(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            b0, b1, b2 = rng.uniform(0.5, 4.0, (3, 3))
            alpha = rng.choice([0.25, 0.5, 1.0])
            ve = r_alpha_closed(ExponentialProd(b0), ExponentialProd(b1),
                                ExponentialProd(b2), alpha)
            vg = r_alpha_closed(GammaProd(np.ones(3), b0), GammaProd(np.ones(3), b1),
                                GammaProd(np.ones(3), b2), alpha)
            if math.isinf(ve):
                assert math.isinf(vg)
            else:
                assert ve == pytest.approx(vg, rel=1e-13, abs=1e-15)


class TestProductRule:
    def test_basics(self):
        assert r_alpha_product([0.0, 0.0, 0.0]) == 0.0
        e = math.e - 1.0
        assert r_alpha_product([e, e]) == pytest.approx(math.e ** 2 - 1.0, rel=1e-15)
        assert r_alpha_product([0.5, math.inf]) == math.inf

    def test_matches_multivariate_closed_forms(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            d = int(rng.integers(2, 5))
            alpha = rng.choice([0.25, 0.5, 1.0])
            kind = rng.choice(["gauss", "pois", "bern", "exp", "gamma"])
            if kind == "gauss":
                sigma = rng.uniform(0.5, 2.0)
                m0, m1, m2 = rng.uniform(-2, 2, (3, d))
                fams = [GaussianIso(m, sigma) for m in (m0, m1, m2)]
                comps = [r_alpha_closed(GaussianIso([m0[l]], sigma), GaussianIso([m1[l]], sigma),
                                        GaussianIso([m2[l]], sigma), alpha) for l in range(d)]
            elif kind == "pois":
                l0, l1, l2 = rng.uniform(0.3, 5.0, (3, d))
                fams = [PoissonProd(v) for v in (l0, l1, l2)]
                comps = [r_alpha_closed(PoissonProd([l0[l]]), PoissonProd([l1[l]]),
                                        PoissonProd([l2[l]]), alpha) for l in range(d)]
            elif kind == "bern":
                t0, t1, t2 = rng.uniform(0.05, 0.95, (3, d))
                fams = [BernoulliProd(v) for v in (t0, t1, t2)]
                comps = [r_alpha_closed(BernoulliProd([t0[l]]), BernoulliProd([t1[l]]),
                                        BernoulliProd([t2[l]]), alpha) for l in range(d)]
            elif kind == "exp":
                b0, b1, b2 = rng.uniform(0.5, 4.0, (3, d))
                fams = [ExponentialProd(v) for v in (b0, b1, b2)]
                comps = [r_alpha_closed(ExponentialProd([b0[l]]), ExponentialProd([b1[l]]),
                                        ExponentialProd([b2[l]]), alpha) for l in range(d)]
            else:
                a0, a1, a2 = rng.uniform(0.5, 3.0, (3, d))
                b0, b1, b2 = rng.uniform(0.5, 4.0, (3, d))
                fams = [GammaProd(a, b) for a, b in ((a0, b0), (a1, b1), (a2, b2))]
                comps = [r_alpha_closed(GammaProd([a0[l]], [b0[l]]), GammaProd([a1[l]], [b1[l]]),
                                        GammaProd([a2[l]], [b2[l]]), alpha) for l in range(d)]
            whole = r_alpha_closed(*fams, alpha)
            combined = r_alpha_product(comps)
            if math.isinf(whole):
                assert math.isinf(combined)
            else:
                assert whole == pytest.approx(combined, rel=1e-10, abs=1e-13)


class TestGenericSpecialization:
    def test_all_families_match_their_natural_parameterization(self):
        rng = np.random.default_rng(16)
        triples = []
        for _ in range(10):
            d = int(rng.integers(1, 4))
            sigma = rng.uniform(0.5, 2.0)
            triples.append([GaussianIso(rng.uniform(-2, 2, d), sigma) for _ in range(3)])
            triples.append([PoissonProd(rng.uniform(0.3, 5.0, d)) for _ in range(3)])
            triples.append([BernoulliProd(rng.uniform(0.05, 0.95, d)) for _ in range(3)])
            triples.append([ExponentialProd(rng.uniform(0.5, 4.0, d)) for _ in range(3)])
            triples.append([GammaProd(rng.uniform(0.5, 3.0, d), rng.uniform(0.5, 4.0, d))
                            for _ in range(3)])
        for f0, f1, f2 in triples:
            for alpha in (0.25, 0.5, 1.0):
                direct = r_alpha_closed(f0, f1, f2, alpha)
                generic = r_alpha_closed(as_generic(f0), as_generic(f1), as_generic(f2), alpha)
                if math.isinf(direct):
                    assert math.isinf(generic)
                else:
                    assert direct == pytest.approx(generic, rel=1e-10, abs=1e-12)


class TestGammaFirstOrder:
    def test_zero_shift_is_zero(self):
        f = GammaProd([1.5, 2.0], [1.0, 2.0])
        assert gamma_first_order(f, f, f, 0.7) == 0.0

    def test_orthogonal_coordinate_shifts(self):
        f0 = GammaProd([1.0, 2.0], [1.0, 1.0])
        f1 = GammaProd([1.0, 2.0], [1.1, 1.0])
        f2 = GammaProd([1.0, 2.0], [1.0, 1.1])
        assert gamma_first_order(f0, f1, f2, 0.5) == 0.0

    def test_antisymmetric_shift_accuracy(self):
        for eps in (1e-2, 1e-3):
            f0 = GammaProd([1.0], [1.0])
            f1 = GammaProd([1.0], [1.0 + eps])
            f2 = GammaProd([1.0], [1.0 - eps])
            approx = gamma_first_order(f0, f1, f2, 1.0)
            assert approx == pytest.approx(math.expm1(-eps * eps), rel=1e-12)
            exact = r_alpha_closed(f0, f1, f2, 1.0)
            # discrepancy is o(eps^2): the ratio shrinks quadratically here
            assert abs(exact - approx) / eps ** 2 <= eps ** 2 * 10.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionMismatchError):
            gamma_first_order(GammaProd([1.0], [1.0]), GammaProd([2.0], [1.0]),
                              GammaProd([1.0], [1.0]), 0.5)


def test_kind_and_dimension_mismatch():
    with pytest.raises(KindMismatchError):
        r_alpha_closed(PoissonProd([1.0]), ExponentialProd([1.0]), PoissonProd([1.0]), 1.0)
    with pytest.raises(DimensionMismatchError):
        r_alpha_closed(PoissonProd([1.0]), PoissonProd([1.0, 2.0]), PoissonProd([1.0]), 1.0)


def test_family_json_round_trip():
    fams = [GaussianIso([0.0, 1.0], 2.0), PoissonProd([1.5]), BernoulliProd([0.25]),
            ExponentialProd([2.0]), GammaProd([1.5], [2.5])]
    for f in fams:
        doc = f.to_json_dict()
        g = family_from_json_dict(doc)
        assert g.to_json_dict() == doc
    with pytest.raises(PreconditionError):
        family_from_json_dict({"kind": "cauchy", "params": {}})
