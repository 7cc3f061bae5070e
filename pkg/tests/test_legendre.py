import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brillouin.legendre import (
    DomainMargin,
    gauss_nodes,
    legendre_asym,
    legendre_eval,
)

# 50-digit reference values of P_n(cos 1.0), precomputed with an
# independent high-precision evaluator and frozen here.
REFERENCE_AT_COS1 = {
    10: -0.25760278454285594144883108184772292238142642244354,
    100: 0.059371252671883937992757422866259214559823690558708,
    1000: 0.021242206721226789901498345207032450089521013556671,
}


def test_low_order_values():
    assert legendre_eval(0, 0.77) == 1.0
    assert legendre_eval(1, 0.3) == pytest.approx(0.3, abs=0)
    assert legendre_eval(2, 0.5) == pytest.approx(-0.125, abs=1e-16)


def test_endpoint_values_up_to_5000():
    # running recurrence at x = +-1 checks every order in one pass
    for x, expected in ((1.0, lambda n: 1.0), (-1.0, lambda n: (-1.0) ** n)):
        p_prev, p = 1.0, x
        for n in range(2, 5001):
            p, p_prev = ((2 * n - 1) * x * p - (n - 1) * p_prev) / n, p
            assert abs(p - expected(n)) < 1e-12
    assert legendre_eval(5000, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert legendre_eval(4999, -1.0) == pytest.approx(-1.0, abs=1e-12)


def test_reference_values_at_cos1():
    x = math.cos(1.0)
    for n, ref in REFERENCE_AT_COS1.items():
        assert legendre_eval(n, x) == pytest.approx(ref, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(min_value=0, max_value=300),
       x=st.floats(min_value=-1.0, max_value=1.0))
def test_bounded_on_interval(n, x):
    assert abs(legendre_eval(n, x)) <= 1.0 + 1e-12


def test_vectorized_matches_scalar():
    xs = np.linspace(-1, 1, 7)
    vec = legendre_eval(17, xs)
    assert vec == pytest.approx([legendre_eval(17, float(x)) for x in xs], rel=1e-14)


class TestAsymptoticForm:
    def test_formula_spot_value(self):
        n = 100
        want = 2.0 / math.sqrt(2 * math.pi * n) * math.cos(100.5 * math.pi / 2 - math.pi / 4)
        assert legendre_asym(n, math.pi / 2) == pytest.approx(want, rel=1e-15)

    def test_margin_rejected(self):
        with pytest.raises(DomainMargin):
            legendre_asym(100, 0.01)

    def test_error_decays_like_n_to_minus_three_halves(self):
        # octave-envelope regression of |exact - asym| at theta = 1.0
        theta = 1.0
        x = math.cos(theta)
        ns = np.unique(np.geomspace(100, 3200, 60).astype(int))
        errs = np.array([abs(legendre_eval(int(n), x) - legendre_asym(int(n), theta))
                         for n in ns])
        centers, peaks = [], []
        lo = 100
        while lo * 2 <= 3200:
            m = (ns >= lo) & (ns < 2 * lo)
            centers.append(math.sqrt(lo * 2 * lo))
            peaks.append(errs[m].max())
            lo *= 2
        slope = np.polyfit(np.log(centers), np.log(peaks), 1)[0]
        assert slope <= -1.4

    def test_sign_pattern_near_equator(self):
        # side lobes around theta = pi/2 at moderate order
        for theta in (math.pi / 2 - 0.45, math.pi / 2 - 0.2, math.pi / 2 + 0.3):
            exact = legendre_eval(10, math.cos(theta))
            asym = legendre_asym(10, theta)
            assert math.copysign(1, exact) == math.copysign(1, asym)


class TestGaussRules:
    def test_one_point(self):
        rule = gauss_nodes(1)
        assert rule.nodes.tolist() == [0.0]
        assert rule.weights.tolist() == [2.0]

    def test_two_point_closed_form(self):
        rule = gauss_nodes(2)
        assert rule.nodes == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], rel=1e-15)
        assert rule.weights == pytest.approx([1.0, 1.0], rel=1e-15)

    def test_three_point_exact_on_quartic(self):
        rule = gauss_nodes(3)
        val = np.sum(rule.weights * rule.nodes**4)
        assert val == pytest.approx(0.4, abs=1e-15)

    @pytest.mark.parametrize("m", [4, 8, 16, 64])
    def test_rule_invariants(self, m):
        rule = gauss_nodes(m)
        assert np.sum(rule.weights) == pytest.approx(2.0, abs=1e-14)
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights > 0)
        # exactness through degree 2m-1, spot-checked on the top monomials
        for deg in (2 * m - 2, 2 * m - 1):
            want = 0.0 if deg % 2 else 2.0 / (deg + 1)
            assert np.sum(rule.weights * rule.nodes**deg) == pytest.approx(want, abs=1e-13)

    def test_against_numpy(self):
        rule = gauss_nodes(37)
        x_ref, w_ref = np.polynomial.legendre.leggauss(37)
        assert rule.nodes == pytest.approx(x_ref, abs=1e-14)
        assert rule.weights == pytest.approx(w_ref, abs=1e-14)

    def test_no_convergence_when_starved(self):
        from brillouin.legendre import NoConvergence
        with pytest.raises(NoConvergence):
            gauss_nodes(16, max_iter=1)
