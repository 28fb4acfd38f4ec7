import math
import warnings

import numpy as np
import pytest

from ncwishart.quadrature import QuadratureWarning, quad_gk, quad_gk_seminf


def test_polynomial_exact():
    res = quad_gk(lambda x: x**2, 0.0, 1.0)
    assert res.value == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert res.error <= 1e-12


def test_gaussian_half_line():
    res = quad_gk(lambda x: np.exp(-x * x), 0.0, 30.0, rtol=1e-12)
    assert res.value == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-12)


def test_seminf_matches_finite():
    ref = quad_gk(lambda x: np.exp(-0.5 * x) * np.cos(x), 0.0, 200.0, rtol=1e-12).value
    res = quad_gk_seminf(lambda x: np.exp(-0.5 * x) * np.cos(x), 0.0, rtol=1e-11)
    assert res.value == pytest.approx(ref, rel=1e-9)
    # closed form: Re 1/(1/2 - i) = 0.5/(0.25+1)
    assert res.value == pytest.approx(0.5 / 1.25, rel=1e-9)


def test_vector_valued_integrand():
    res = quad_gk(lambda x: np.stack([x, x * x], axis=-1), 0.0, 2.0)
    assert np.allclose(res.value, [2.0, 8.0 / 3.0], rtol=1e-13)


def test_nonconvergence_warns():
    # |x - pi/4|^{-0.95} is integrable but saturates the panel budget at
    # tight tolerance
    def f(x):
        return np.abs(x - 0.7853981) ** -0.95

    with pytest.warns(QuadratureWarning):
        quad_gk(f, 0.0, 1.0, rtol=1e-13, max_intervals=8)


def test_tight_tolerance_no_spurious_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        quad_gk(lambda x: np.sin(3 * x) * np.exp(-x), 0.0, 10.0, rtol=1e-12)


def test_interval_orientation_error():
    with pytest.raises(ValueError):
        quad_gk(lambda x: x, 1.0, 0.0)
