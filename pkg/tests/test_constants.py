import json
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from feprob import constants
from feprob.errors import DomainError, HypothesisError, ProviderError

E = constants.EllipticityData()
SQUARE = constants.DomainData.unit_square()
SINE = constants.ModelSineProvider()


def domain(n, diam=1.0, sigma=1.0, lam=1.0):
    return constants.DomainData(diam, sigma, lam, n)


def exact_ck_star(k, n, M, alpha, C):
    """Rational re-derivation of M C / alpha (k+n)^n k^(n+2) / ((k-1)! (k - n/2))."""
    ratio = Fraction((k + n) ** n * k ** (n + 2)) / (math.factorial(k - 1) * (Fraction(k) - Fraction(n, 2)))
    return M * C / alpha * float(ratio)


class TestDomainConstant:
    def test_examples(self):
        assert constants.domain_constant(domain(1)) == 5
        assert constants.domain_constant(SQUARE) == pytest.approx(1 + 2 * math.sqrt(2) + 6)

    def test_validation(self):
        with pytest.raises(DomainError):
            constants.DomainData(1.0, 0.5, 1.0, 2)
        with pytest.raises(DomainError):
            constants.EllipticityData(0.5, 1.0)


class TestCkStar:
    def test_example(self):
        assert constants.ck_star(1, E, domain(1)) == 20

    @given(st.integers(1, 3), st.integers(1, 40), st.floats(1, 10), st.floats(0.1, 1))
    def test_against_rational_oracle(self, n, k, M, alpha):
        if 2 * k <= n:
            return
        e = constants.EllipticityData(M, alpha)
        d = domain(n, 2.0, 1.5, 3.0)
        expected = exact_ck_star(k, n, M, alpha, constants.domain_constant(d))
        assert constants.ck_star(k, e, d) == pytest.approx(expected, rel=1e-13)
        assert constants.log_ck_star(k, e, d) == pytest.approx(math.log(expected), rel=1e-13, abs=1e-13)

    def test_hypothesis_error(self):
        with pytest.raises(HypothesisError, match="k > n/2"):
            constants.ck_star(1, E, domain(2))
        with pytest.raises(HypothesisError):
            constants.log_ck_star(1, E, domain(3))


class TestInterpolationBounds:
    def test_zero_mesh(self):
        assert constants.interpolation_bound_l2(2, 2, 0.0, 1.0) == 0
        assert constants.interpolation_bound_h1(2, 2, 0.0, 1.0, 1.0, 1.0) == 0

    def test_plugin_example(self):
        k, n, h = 2, 2, 0.1
        # bracket re-derived by hand: 1 + 6 * 4^2 * 2^4 = 1537, divided by 1! * (2 - 1) = 1
        assert constants.interpolation_bound_h1(k, n, h, 1.0, 1.0, 1.0) == pytest.approx(1537 * 0.01, rel=1e-14)
        # L2: (1 + 4^2 * 2^3) / (2! * (3 - 1)) = 129 / 4
        assert constants.interpolation_bound_l2(k, n, h, 1.0) == pytest.approx(129 / 4 * 0.001, rel=1e-14)

    def test_linear_in_seminorm(self):
        a = constants.interpolation_bound_h1(3, 2, 0.3, 2.0, 1.5, 1.0)
        b = constants.interpolation_bound_h1(3, 2, 0.3, 2.0, 1.5, 7.0)
        assert b == pytest.approx(7 * a)


class TestHStar:
    def test_examples(self):
        assert constants.h_star(1.0, 1.0, 1, 4) == 1
        assert constants.h_star(4.0, 1.0, 1, 3) == 2

    @pytest.mark.parametrize("args", [(1.0, 1.0, 2, 2), (1.0, 1.0, 3, 2), (0.0, 1.0, 1, 2), (1.0, -1.0, 1, 2)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            constants.h_star(*args)

    def test_unit_ratio_provider(self):
        # choose |u|_{r+1} = 1 / C*_r so every C_r is 1 and h*_q = 1
        d = domain(2)
        provider = constants.FunctionProvider(lambda r: 1.0 / constants.ck_star(r - 1, E, d), "unit")
        for q in (1, 3, 10):
            assert constants.h_star_q(2, q, E, d, provider) == pytest.approx(1.0, rel=1e-12)

    @given(st.integers(2, 8), st.integers(1, 20), st.floats(0.01, 100))
    def test_homogeneity(self, k, q, scale):
        plain = constants.GeometricProvider(1.0, 3.0)
        scaled = constants.GeometricProvider(scale, 3.0)
        a = constants.log_h_star_q(k, q, E, SQUARE, plain)
        b = constants.log_h_star_q(k, q, E, SQUARE, scaled)
        assert a == pytest.approx(b, abs=1e-12)

    @given(st.floats(1, 10), st.floats(0.1, 1), st.integers(2, 6), st.integers(1, 10))
    def test_M_alpha_cancel(self, M, alpha, k, q):
        e = constants.EllipticityData(M, alpha)
        assert constants.log_h_star_q(k, q, e, SQUARE, SINE) == pytest.approx(
            constants.log_h_star_q(k, q, E, SQUARE, SINE), abs=1e-12
        )

    def test_log_matches_direct(self):
        for k in range(2, 10):
            for q in range(1, 31 - k):
                direct = constants.h_star_q_direct(k, q, E, SQUARE, SINE)
                assert constants.h_star_q(k, q, E, SQUARE, SINE) == pytest.approx(direct, rel=1e-10)

    def test_divergence(self):
        values = [constants.h_star_q(2, q, E, SQUARE, SINE) for q in range(1, 1001)]
        assert max(values) > 10
        assert all(b > a for a, b in zip(values[100:], values[101:]))

    def test_large_q_no_overflow(self):
        assert math.isfinite(constants.log_h_star_q(2, 100_000, E, SQUARE, SINE))

    def test_table_exhausted(self):
        table = constants.TableProvider((1.0, 2.0, 4.0, 8.0))
        with pytest.raises(ProviderError, match="order 5") as info:
            constants.h_star_q(2, 2, E, SQUARE, table)
        assert info.value.order == 5


class TestAsymptotics:
    def test_asymptote_example(self):
        assert constants.h_star_q_asymptote(1, 1.0) == pytest.approx(1 / math.e)
        with pytest.raises(DomainError):
            constants.h_star_q_asymptote(3, 0.0)

    def test_stirling_against_mpmath(self):
        k, n = 2, 2
        previous = math.inf
        for q in (50, 100, 200, 500, 1000, 2000):
            mpmath.mp.dps = 40
            exact = float(
                mpmath.log(mpmath.mpf((k + n) ** n * k ** (n + 2)) / (mpmath.factorial(k - 1) * (k - mpmath.mpf(n) / 2)))
                - mpmath.log(
                    mpmath.mpf(k + q + n) ** n * mpmath.mpf(k + q) ** (n + 2)
                    / (mpmath.factorial(k + q - 1) * (k + q - mpmath.mpf(n) / 2))
                )
            )
            assert constants.log_constant_ratio(k, n, q) == pytest.approx(exact, rel=1e-12)
            gap = abs(exact - constants.stirling_factor(k, n, q))
            assert gap < previous
            previous = gap
        assert previous < 0.01

    def test_stirling_theta(self):
        assert constants.stirling_theta(2, 2) == pytest.approx(math.sqrt(2 * math.pi) * 16 * 16 / 1, rel=1e-14)

    def test_model_seminorm_examples(self):
        assert constants.model_seminorm(0) == pytest.approx(0.5, rel=1e-15)
        assert constants.model_seminorm(1) == pytest.approx(math.pi / math.sqrt(2), rel=1e-15)
        assert constants.model_seminorm(2) == pytest.approx(math.pi**2, rel=1e-15)
        assert constants.model_seminorm(10_000) == math.inf
        assert math.isfinite(constants.model_seminorm_log(10_000))

    def test_ratio_sequences(self):
        assert all(r == pytest.approx(math.sqrt(2) * math.pi, rel=1e-12) for r in constants.seminorm_ratio_sequence(SINE, 2, 50))
        geo = constants.GeometricProvider(3.0, 1.7)
        assert all(r == pytest.approx(1.7, rel=1e-12) for r in constants.seminorm_ratio_sequence(geo, 1, 20))

    def test_stolz_cesaro(self):
        # ratio |u|_{r+1}/|u|_r = l (r+2)/(r+1) tends to l, so (1/q) log |u|_{k+q+1} -> log l
        class Slow(constants.SeminormProvider):
            def log_value(self, r):
                return r * math.log(20.0) + math.log(r + 1)

        q, k = 1000, 2
        assert Slow().log_value(k + q + 1) / q == pytest.approx(math.log(20.0), rel=0.01)
        assert SINE.log_value(k + q + 1) / q == pytest.approx(math.log(SINE.ratio_limit), rel=0.01)

    def test_asymptotic_model(self):
        model = constants.asymptotic_model(2, [10, 100, 1000], E, SQUARE, SINE)
        assert model.ratio_limit == pytest.approx(math.sqrt(2) * math.pi)
        assert len(model.q_values) == len(model.log_hstar_q) == len(model.asymptote) == 3
        assert abs(model.ratio[-1] - 1) < abs(model.ratio[0] - 1)
        with pytest.raises(DomainError):
            constants.asymptotic_model(2, [1], E, SQUARE, constants.FunctionProvider(lambda r: 1.0))


class TestProviders:
    def test_from_json(self, tmp_path):
        geo = constants.provider_from_json({"type": "geometric", "c": 2, "rho": 3})
        assert geo(2) == pytest.approx(18)
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"type": "table", "values": [1, 2, 3]}))
        table = constants.provider_from_json(str(path))
        assert table(2) == pytest.approx(3)
        assert table.ratio_limit == pytest.approx(1.5)
        with pytest.raises(DomainError):
            constants.provider_from_json({"type": "spline"})

    def test_table_validation(self):
        with pytest.raises(DomainError):
            constants.TableProvider((1.0, -2.0))
