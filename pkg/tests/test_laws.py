import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from feprob import constants, laws
from feprob.errors import DomainError

positive = st.floats(1e-3, 1e3)
E = constants.EllipticityData()
SQUARE = constants.DomainData.unit_square()
SINE = constants.ModelSineProvider()


class TestStepLaw:
    def test_examples(self):
        assert laws.step_law(0.5, 1.0) == 1
        assert laws.step_law(2.0, 1.0) == 0
        assert laws.step_law(1.0, 1.0) == 0.5

    @pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, -1.0), (-2.0, 1.0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            laws.step_law(*args)


class TestSigmoidLaw:
    def test_examples(self):
        for q in (1, 2, 7, 50):
            assert laws.sigmoid_law(1.3, 1.3, q) == 0.5
        assert laws.sigmoid_law(0.5, 1.0, 1) == 0.75
        assert laws.sigmoid_law(2.0, 1.0, 3) == 1 / 16

    @given(positive, positive, st.integers(1, 30))
    def test_range_and_scaling(self, h, hs, q):
        p = laws.sigmoid_law(h, hs, q)
        assert 0 <= p <= 1
        assert laws.sigmoid_law(3.7 * h, 3.7 * hs, q) == pytest.approx(p, rel=1e-12, abs=1e-300)

    @given(positive, st.floats(1.001, 10), st.integers(1, 30))
    def test_decreasing(self, h, factor, q):
        assert laws.sigmoid_law(h * factor, 1.0, q) <= laws.sigmoid_law(h, 1.0, q)

    def test_limits_and_continuity(self):
        assert laws.sigmoid_law(1e-8, 1.0, 2) == pytest.approx(1.0)
        assert laws.sigmoid_law(1e8, 1.0, 2) == pytest.approx(0.0, abs=1e-15)
        eps = 1e-12
        assert laws.sigmoid_law(1 - eps, 1.0, 4) == pytest.approx(laws.sigmoid_law(1 + eps, 1.0, 4), abs=1e-10)

    def test_step_limit(self):
        for h in (0.5, 0.9, 1.1, 2.0):
            assert abs(laws.sigmoid_law(h, 1.0, 500) - laws.step_law(h, 1.0)) < 1e-3

    def test_domain(self):
        with pytest.raises(DomainError):
            laws.sigmoid_law(1.0, 1.0, 0)


class TestAnalytic:
    def test_examples(self):
        assert laws.analytic_uniform_prob(2.0, 2.0) == 0.5
        assert laws.analytic_uniform_prob(1.0, 0.5) == 0.75
        assert laws.analytic_uniform_prob(1.0, 4.0) == 1 / 8

    def test_against_geometry(self):
        # P(Y <= X) = E[min(X, b) / b], integrated numerically over X ~ U[0, a]
        for a, b in [(1.0, 0.3), (0.4, 1.7), (2.0, 2.0)]:
            mean, _ = integrate.quad(lambda x: min(x, b) / b, 0.0, a, points=[min(a, b)])
            assert laws.analytic_uniform_prob(a, b) == pytest.approx(mean / a, abs=1e-12)

    def test_sigmoid_equivalence(self):
        params = laws.LawParameters(2, 5, 3.0, 0.7)
        for h in np.geomspace(1e-3, 1e3, 1000):
            a, b = params.supports(float(h))
            assert laws.sigmoid_law(float(h), params.h_star, params.q) == pytest.approx(
                laws.analytic_uniform_prob(a, b), abs=1e-12
            )

    def test_parameters(self):
        params = laws.LawParameters(1, 3, 4.0, 1.0)
        assert params.q == 2
        assert params.h_star == constants.h_star(4.0, 1.0, 1, 3) == 2.0
        with pytest.raises(DomainError):
            laws.LawParameters(3, 3, 1.0, 1.0)
        with pytest.raises(DomainError):
            laws.LawParameters(1, 2, 0.0, 1.0)


class TestMonteCarlo:
    @pytest.mark.parametrize("a,b,p", [(1.0, 1.0, 0.5), (1.0, 0.5, 0.75), (1.0, 4.0, 0.125)])
    def test_examples(self, a, b, p):
        res = laws.monte_carlo_prob(a, b, 1_000_000, seed=7)
        assert abs(res.estimate - p) <= 3 * res.stderr
        assert res.stderr == math.sqrt(res.estimate * (1 - res.estimate) / res.samples)
        assert res.hits == round(res.estimate * res.samples)

    @pytest.mark.parametrize("a,b", [(1.0, 1.0), (1.0, 0.5), (1.0, 4.0)])
    def test_coverage_over_seeds(self, a, b):
        p = laws.analytic_uniform_prob(a, b)
        outside = sum(
            abs((r := laws.monte_carlo_prob(a, b, 100_000, seed)).estimate - p) > 3 * r.stderr for seed in range(100)
        )
        assert outside <= 1

    def test_determinism_and_chunking(self):
        base = laws.monte_carlo_prob(1.0, 0.8, 300_001, seed=5, stream=3)
        again = laws.monte_carlo_prob(1.0, 0.8, 300_001, seed=5, stream=3)
        chunked = laws.monte_carlo_prob(1.0, 0.8, 300_001, seed=5, stream=3, chunk_size=7919, workers=4)
        assert base == again == chunked
        assert chunked.chunk_plan != base.chunk_plan
        assert laws.monte_carlo_prob(1.0, 0.8, 300_001, seed=6, stream=3).hits != base.hits
        assert laws.monte_carlo_prob(1.0, 0.8, 300_001, seed=5, stream=4).hits != base.hits

    def test_chunk_plan(self):
        assert laws.chunk_plan(10, 4) == ((0, 4), (4, 4), (8, 2))
        with pytest.raises(DomainError):
            laws.chunk_plan(10, 0)

    def test_sample_count(self):
        with pytest.raises(DomainError):
            laws.monte_carlo_prob(1.0, 1.0, 99, seed=0)


class TestSequence:
    def test_half_at_critical_size(self):
        for q in (1, 5, 40):
            hs = constants.h_star_q(2, q, E, SQUARE, SINE)
            assert laws.law_sequence_eval(2, q, hs, E, SQUARE, SINE) == pytest.approx(0.5, abs=1e-12)

    def test_q1_is_sigmoid(self):
        c2 = constants.ck_star(2, E, SQUARE) * SINE(3)
        c3 = constants.ck_star(3, E, SQUARE) * SINE(4)
        hs = constants.h_star(c2, c3, 2, 3)
        assert laws.law_sequence_eval(2, 1, 0.07, E, SQUARE, SINE) == pytest.approx(laws.sigmoid_law(0.07, hs, 1), rel=1e-12)

    def test_monotone_convergence_at_fixed_h(self):
        values = [laws.law_sequence_eval(2, q, 0.1, E, SQUARE, SINE) for q in range(1, 200)]
        assert values[-1] == pytest.approx(1.0, abs=1e-12)
        q0 = 50
        assert all(b >= a for a, b in zip(values[q0:], values[q0 + 1:]))

    def test_pointwise_limit(self):
        assert laws.pointwise_limit(1e6) == 1
        assert laws.pointwise_limit(laws.INFINITY) == 0.5
        with pytest.raises(DomainError):
            laws.pointwise_limit(math.inf)
        with pytest.raises(DomainError):
            laws.pointwise_limit(0.0)

    def test_convergence_order(self):
        for h in (0.01, 1.0, 100.0):
            q = laws.convergence_order(h, 2, E, SQUARE, SINE)
            assert q is not None
            assert abs(laws.law_sequence_eval(2, q, h, E, SQUARE, SINE) - 1) < 1e-3
            if q > 1:
                assert abs(laws.law_sequence_eval(2, q - 1, h, E, SQUARE, SINE) - 1) >= 1e-3
        assert laws.convergence_order(100.0, 2, E, SQUARE, SINE, q_max=10) is None


class TestCurves:
    def test_csv_round_trip(self):
        params = laws.LawParameters(1, 3, 2.0, 0.5)
        hs = list(np.geomspace(0.1, 10, 9))
        curve = laws.law_curve(hs, params.h_star, params.q, params, mc_samples=1000, seed=3)
        text = laws.curve_to_csv(curve)
        assert "\r" not in text
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["h", "p_step", "p_sigmoid", "p_montecarlo", "stderr"]
        for row in rows[1:]:
            h, step, sig, mc, err = map(float, row)
            assert step == laws.step_law(h, params.h_star)
            assert sig == laws.sigmoid_law(h, params.h_star, params.q)
            assert err == math.sqrt(mc * (1 - mc) / 1000)

    def test_curve_requires_params_for_mc(self):
        with pytest.raises(DomainError):
            laws.law_curve([1.0], 1.0, 2, mc_samples=1000)

    def test_format_float(self):
        assert laws.format_float(0.1) == "0.10000000000000001"
        assert laws.format_float(math.inf) == "inf"
        assert float(laws.format_float(1 / 3)) == 1 / 3
