import json
import math

import numpy as np
import pytest

from mirrorfield import (
    BumpTestFunction,
    Region,
    TestFunction,
    ValidationError,
    apply_P,
    eta_map,
    n_map,
    unit_bump,
)
from mirrorfield import bump1d, propagators, testfields
from mirrorfield.verify import pairing_with_P


def bump(center, hw, amp=1.0):
    return TestFunction.bump(center, hw, amp)


def test_profile_value_at_zero():
    assert float(bump1d.bump_deriv(np.array([0.0]), 0)[0]) == pytest.approx(math.exp(-1), rel=1e-15)


def test_bump_value_at_center():
    b = BumpTestFunction((0, 0, 0, 0), (1, 1, 1, 1), 1.0)
    assert testfields.evaluate(b, (0, 0, 0, 0)) == pytest.approx(math.exp(-1) ** 4, rel=1e-14)


def test_outside_support_is_zero():
    f = bump((0, 0, 0, 0), (0.5, 0.5, 0.5, 0.5))
    assert float(f((0.6, 0, 0, 0))) == 0.0
    assert float(f((0, 0, 0, -0.5))) == 0.0


def test_eta_oddness_example():
    f = bump((0.1, 0, 0, 1.5), (0.3, 0.4, 0.4, 0.4))
    e = eta_map(f)
    x = np.array([0.05, 0.1, -0.2, -1.5])
    assert float(e(x)) == pytest.approx(-float(f(x * [1, 1, 1, -1])) / math.sqrt(2), rel=1e-14)


def test_eta_of_odd_and_even():
    g = bump((0, 0, 0, 1.5), (0.3, 0.3, 0.3, 0.4))
    odd = g - g.reflected()
    even = g + g.reflected()
    rng = np.random.default_rng(1)
    pts = rng.uniform([-0.3, -0.3, -0.3, -2], [0.3, 0.3, 0.3, 2], size=(100, 4))
    assert np.allclose(eta_map(odd)(pts), math.sqrt(2) * odd(pts), rtol=1e-14, atol=0)
    assert np.max(np.abs(eta_map(even)(pts))) == 0.0


def test_eta_support():
    f = bump((0, 0, 0, 1.5), (0.3, 0.3, 0.3, 0.5))
    e = eta_map(f)
    z = np.linspace(-3, 3, 601)
    pts = np.stack([np.zeros_like(z)] * 3 + [z], axis=1)
    vals = e(pts)
    assert np.all(vals[np.abs(np.abs(z) - 1.5) >= 0.5] == 0)
    assert np.allclose(e(pts[::-1]), -vals)


def test_n_map_examples():
    d = 1.0
    f = bump((0, 0, 0, 0.5), (0.3, 0.3, 0.3, 0.2))
    N = n_map(f, d)
    c = (0, 0, 0, 0.5)
    assert float(N(c)) == pytest.approx(float(f(c)), rel=1e-15)
    rng = np.random.default_rng(2)
    pts = rng.uniform([-0.3, -0.3, -0.3, -3], [0.3, 0.3, 0.3, 3], size=(100, 4))
    assert np.allclose(N(pts + [0, 0, 0, 2 * d]), N(pts), rtol=0, atol=1e-15)
    walls = pts.copy()
    walls[:, 3] = d
    assert np.max(np.abs(N(walls))) <= 1e-15


def test_n_map_rejects_bad_width():
    with pytest.raises(ValidationError):
        n_map(bump((0, 0, 0, 0.5), (0.3,) * 4), -1.0)


def test_apply_P_zero():
    assert float(apply_P(TestFunction.zero())((0, 0, 0, 0))) == 0.0


def test_P_formally_self_adjoint():
    rng = np.random.default_rng(5)
    for _ in range(3):
        f = TestFunction((testfields.random_bump(rng, (-0.3,) * 4, (0.3,) * 4, unit=False),))
        g = TestFunction((testfields.random_bump(rng, (-0.3,) * 4, (0.3,) * 4, unit=False),))
        lhs, rhs = pairing_with_P(f, g, True), pairing_with_P(f, g, False)
        assert abs(lhs - rhs) <= 1e-6 * abs(lhs)


def test_P_matches_finite_differences():
    f = bump((0.1, -0.1, 0.2, 0.0), (0.5, 0.6, 0.4, 0.5))
    c = np.array([0.1, -0.1, 0.2, 0.0])
    fd = propagators.finite_difference_P(f, c, 1e-3)
    assert abs(fd - float(apply_P(f)(c))) <= 1e-4


def test_json_roundtrip():
    f = bump((0, 0, 0, 1), (0.3, 0.4, 0.4, 0.4), 2.5) + bump((1, 0, 0, 1), (0.2, 0.2, 0.2, 0.2))
    g = TestFunction.from_json(f.to_json())
    assert g == f
    assert json.loads(f.to_json())["terms"][0]["amplitude"] == 2.5


@pytest.mark.parametrize("payload", ['{"terms": [{"center": [0, 0, 0], "halfwidths": [1, 1, 1, 1]}]}',
                                     '{"terms": [{"center": [0, 0, 0, 0], "halfwidths": [1, -1, 1, 1]}]}',
                                     'not json'])
def test_json_validation(payload):
    with pytest.raises(ValidationError):
        TestFunction.from_json(payload)


def test_unit_bump_has_unit_mass():
    b = unit_bump((0, 0, 0, 0), (0.3, 0.5, 0.2, 0.4))
    assert b.integral == pytest.approx(1.0, rel=1e-12)
