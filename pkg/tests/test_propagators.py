from dataclasses import dataclass

import numpy as np
import pytest

from mirrorfield import Region, TestFunction, ValidationError, eta_map, n_map, unit_bump
from mirrorfield import geometry, propagators
from mirrorfield.testfields import random_bump
from mirrorfield.verify import FD_BUMP, fd_order_check

# position backend, recorded once; both backends agree with it
REFERENCE_PAIR_E = -4.5501672462960625e-04


def tf(b):
    return TestFunction((b,))


@pytest.fixture(scope="module")
def reference_pair():
    return tf(unit_bump((0, 0, 0, 0), (0.5,) * 4)), tf(unit_bump((1.5, 0, 0, 0), (0.5,) * 4))


def test_zero_source_fields():
    z = TestFunction.zero()
    pts = np.random.default_rng(0).normal(size=(5, 4))
    for make in (propagators.retarded, propagators.advanced, propagators.causal_field):
        assert np.all(make(z)(pts) == 0.0)


def test_support_axioms():
    f = tf(FD_BUMP)
    rng = np.random.default_rng(1)
    before = rng.uniform([-4, -1, -1, -1], [-0.51, 1, 1, 1], size=(10, 4))
    assert np.all(propagators.retarded(f)(before) == 0.0)
    assert np.all(propagators.advanced(f)(before * [-1, 1, 1, 1]) == 0.0)


def test_advanced_is_time_reversed_retarded():
    rng = np.random.default_rng(2)
    g = tf(random_bump(rng, (-0.2,) * 4, (0.2,) * 4))
    q = rng.uniform([-1.5, -0.5, -0.5, -0.5], [-0.5, 0.5, 0.5, 0.5], size=(3, 4))
    adv = propagators.advanced(g)(q)
    ret = propagators.retarded(g.time_reversed())(q * [-1, 1, 1, 1])
    assert np.max(np.abs(adv - ret)) <= 1e-8 * np.max(np.abs(adv))


def test_finite_difference_far_probe():
    f = tf(unit_bump((0, 0, 0, 0), (0.2,) * 4))
    p = np.array([3.0, 0, 0, 0])
    val = propagators.finite_difference_P(propagators.retarded(f), p, 0.02)
    assert abs(val - float(f(p))) <= 1e-3


def test_finite_difference_second_order():
    e1, e2, ratio = fd_order_check(3, np.random.default_rng(3))
    assert e2 <= 1e-3
    assert 3.0 <= ratio <= 5.0


def test_pair_E_antisymmetry_and_diagonal(reference_pair):
    f, g = reference_pair
    a = propagators.pair_E(f, g)
    b = propagators.pair_E(g, f)
    assert abs(a + b) <= 2 * propagators.DEFAULT_CONFIG.tolerance(abs(a))
    assert abs(propagators.pair_E(f, f)) <= 1e-8


def test_pair_E_reference_constant(reference_pair):
    f, g = reference_pair
    pos = propagators.pair_E(f, g, "position")
    mom = propagators.pair_E(f, g, "momentum")
    assert abs(pos - mom) <= 1e-5 * abs(pos)
    assert pos == pytest.approx(REFERENCE_PAIR_E, rel=1e-8)


def test_pair_E_causally_disjoint():
    f = tf(unit_bump((0, 0, 0, 0), (0.3,) * 4))
    g = tf(unit_bump((0, 3.0, 0, 0), (0.3,) * 4))
    assert geometry.causally_disjoint_boxes(f.box, g.box)
    assert abs(propagators.pair_E(f, g)) <= 1e-6


def test_pair_E_backend_validation(reference_pair):
    f, g = reference_pair
    with pytest.raises(ValidationError):
        propagators.pair_E(f, g, "lattice")


def test_pair_E_boundary_antisymmetric():
    f = tf(unit_bump((0, 0, 0, 1.0), (0.3, 0.4, 0.4, 0.4)))
    assert abs(propagators.pair_E_boundary(Region.halfspace(), f, f)) <= 1e-8


def test_pair_E_boundary_far_from_wall():
    hs = Region.halfspace()
    f = tf(unit_bump((0, 0, 0, 4.0), (0.3, 0.4, 0.4, 0.4)))
    g = tf(unit_bump((0.8, 0.2, 0, 4.1), (0.3, 0.4, 0.4, 0.4)))
    assert geometry.reflected_causally_disjoint(hs, f.box, g.box, include_direct=False)
    bulk = propagators.pair_E(f, g) / np.sqrt(2)
    assert abs(propagators.pair_E_boundary(hs, f, g) - bulk) <= 1e-6


def test_dirichlet_vanishing_halfspace():
    alpha = eta_map(tf(unit_bump((0, 0, 0, 0.7), (0.3, 0.3, 0.3, 0.3))))
    field = propagators.causal_field(alpha)
    pts = np.random.default_rng(4).uniform([0.6, -0.5, -0.5, 0], [1.4, 0.5, 0.5, 0], size=(4, 4))
    assert np.max(np.abs(field(pts))) <= 1e-6


def test_dirichlet_vanishing_slab():
    d = 1.5
    g = tf(unit_bump((0, 0, 0, 0.75), (0.3, 0.3, 0.3, 0.4)))
    field = propagators.causal_field(n_map(g, d))
    pts = np.random.default_rng(5).uniform([0.6, -0.5, -0.5, 0], [1.4, 0.5, 0.5, 0], size=(4, 4))
    pts[2:, 3] = d
    assert np.max(np.abs(field(pts))) <= 1e-6


def test_time_slice_representative_support():
    cut = propagators.SmoothCutoff(-1.1, -0.6)
    f = tf(unit_bump((0, 0, 0, 1.2), (0.3,) * 4))
    rep = propagators.time_slice_representative(Region.minkowski(), f, cut)
    rng = np.random.default_rng(6)
    out = rng.uniform([-3, -1, -1, 0], [3, 1, 1, 2], size=(50, 4))
    out[:, 0] = np.where(out[:, 0] > -0.85, out[:, 0] + 0.25, out[:, 0] - 0.25)
    assert np.all(rep(out) == 0.0)


@dataclass(frozen=True)
class ConstantCutoff:
    t0: float = -1.0
    t1: float = 0.0

    def value(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def d1(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def d2(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


def test_constant_cutoff_rejected():
    f = tf(unit_bump((0, 0, 0, 1.2), (0.3,) * 4))
    with pytest.raises(ValidationError):
        propagators.time_slice_representative(Region.minkowski(), f, ConstantCutoff())
    with pytest.raises(ValidationError):
        propagators.SmoothCutoff(1.0, 1.0)


def test_cutoff_is_a_step():
    cut = propagators.SmoothCutoff(-1.0, 1.0)
    assert float(cut.value(-1.0)) == 0.0
    assert float(cut.value(1.0)) == 1.0
    assert float(cut.value(0.0)) == pytest.approx(0.5, abs=1e-14)
