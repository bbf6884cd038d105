import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boundcond.convergence import (
    binomial_width,
    class_boundaries,
    fit_decay,
    homogeneous_network,
    worst_case_width,
)
from boundcond.cutset import find_loop_cutset


def test_worst_case_examples():
    assert worst_case_width(3, 0) == 1.0
    assert worst_case_width(3, 8) == 0.0
    assert worst_case_width(15, 16384) == 0.5
    assert worst_case_width(4, 10, k_time=5.0) == pytest.approx(1 - 2 / 16)
    with pytest.raises(ValueError):
        worst_case_width(3, 9)


def test_binomial_examples():
    assert binomial_width(5, 0.3, 5) == 0.0
    assert binomial_width(3, 0.75, 1) == pytest.approx(0.15625, abs=1e-15)


def test_binomial_enumeration_n3():
    weights = sorted((math.prod(0.75 if b else 0.25 for b in bits) for bits in itertools.product((1, 0), repeat=3)),
                     reverse=True)
    assert 1 - sum(weights[:4]) == pytest.approx(binomial_width(3, 0.75, 1), abs=1e-15)


@given(n=st.integers(1, 12), p=st.floats(0, 1))
def test_binomial_non_increasing(n, p):
    widths = [binomial_width(n, p, m) for m in range(n + 1)]
    assert all(a >= b - 1e-15 for a, b in zip(widths, widths[1:]))
    assert all(0.0 <= w <= 1.0 for w in widths)


@given(n=st.integers(1, 12))
def test_binomial_half_is_worst_case(n):
    for m, solved in enumerate(class_boundaries(n)):
        assert binomial_width(n, 0.5, m) == pytest.approx(worst_case_width(n, solved), abs=1e-12)


def test_class_boundaries():
    assert class_boundaries(3) == [1, 4, 7, 8]


def test_fit_recovers_synthetic():
    fit = fit_decay([(t, math.exp(-0.2 * (t + 1))) for t in range(21)])
    assert fit.k == pytest.approx(0.2, abs=1e-6) and fit.residual < 1e-12 and fit.points == 21


def test_fit_constant_one():
    assert fit_decay([(t, 1.0) for t in range(5)]).k == 0.0


def test_fit_drops_zero_widths():
    fit = fit_decay([(0, math.exp(-1)), (1, math.exp(-2)), (2, 0.0)])
    assert fit.points == 2 and fit.k == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_decay([(0, 0.0), (1, 0.0)])
    with pytest.raises(ValueError):
        fit_decay([(0, 0.5)])


def test_homogeneous_network_cutset_is_the_roots():
    net = homogeneous_network(4, 0.75)
    cs = find_loop_cutset(net)
    assert cs.members == ("C00", "C01", "C02", "C03")
    assert np.allclose(net.cpt("C02"), [0.75, 0.25])
