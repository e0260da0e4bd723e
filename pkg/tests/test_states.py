import math

import numpy as np
import pytest

from mirrorfield import BumpTestFunction, Region, SupportError, TestFunction, ValidationError, unit_bump
from mirrorfield import propagators, states
from mirrorfield.verify import ccr_defect, random_family


def tf(b):
    return TestFunction((b,))


def test_vacuum_diagonal_real_nonnegative():
    f = tf(unit_bump((0, 0, 0, 0), (0.4, 0.5, 0.5, 0.5)))
    w = states.vacuum_two_point(f, f)
    assert w.real > 0
    assert w.imag == 0.0


@pytest.mark.parametrize("region", [Region.minkowski(), Region.halfspace(), Region.slab(2.0)],
                         ids=lambda r: r.describe())
def test_ccr_oracle(region):
    rng = np.random.default_rng(11)
    f, g = random_family(rng, region, 2)
    assert ccr_defect(region, f, g) <= 1e-5


def test_vacuum_real_for_causally_disjoint():
    f = tf(unit_bump((0, 0, 0, 0), (0.3,) * 4))
    g = tf(unit_bump((0, 3.0, 0, 0), (0.3,) * 4))
    assert abs(states.vacuum_two_point(f, g).imag) <= 1e-6


def test_far_from_wall_matches_vacuum():
    hs = Region.halfspace()
    f = tf(BumpTestFunction((0, 0, 0, 10), (0.05, 0.4, 0.4, 0.4), 1.0))
    img = states.image_two_point(hs, f, f)
    vac = states.TwoPointPairing(hs).normalization * states.vacuum_two_point(f, f)
    assert abs(img - vac) <= 1e-5


@pytest.mark.parametrize("region", [Region.halfspace(), Region.slab(2.0)], ids=lambda r: r.describe())
def test_gram_positive(region):
    rng = np.random.default_rng(12)
    M = states.TwoPointPairing(region).gram(random_family(rng, region, 4))
    assert np.max(np.abs(M - M.conj().T)) <= 1e-8
    assert np.linalg.eigvalsh((M + M.conj().T) / 2).min() >= -1e-8


def test_slab_boundary_support_rejected():
    f = tf(unit_bump((0, 0, 0, 0.3), (0.3, 0.4, 0.4, 0.4)))
    with pytest.raises(SupportError):
        states.image_two_point(Region.slab(2.0), f, f)


def test_subtracted_kernel_halfspace():
    W = states.subtracted_kernel(Region.halfspace(), (0, 0, 0, 1), (0, 0, 0, 1))
    assert W == pytest.approx(-1 / (16 * math.pi**2), abs=1e-12)
    assert W == pytest.approx(-6.3326e-3, abs=1e-7)


def test_subtracted_kernel_slab_mid():
    W = states.subtracted_kernel(Region.slab(1.0), (0, 0, 0, 0.5), (0, 0, 0, 0.5))
    assert W == pytest.approx(-1 / 24, abs=1e-10)


def test_subtracted_kernel_large_slab_limit():
    W = states.subtracted_kernel(Region.slab(50.0), (0, 0, 0, 1), (0, 0, 0, 1))
    ref = -1 / (16 * math.pi**2)
    assert abs(W / ref - 1) <= 1e-3


def test_subtracted_kernel_symmetric():
    W = states.SubtractedKernel(Region.slab(1.3))
    x, y = (0.1, 0.2, 0, 0.4), (0.3, -0.1, 0.2, 0.9)
    assert W(x, y) == pytest.approx(W(y, x), rel=1e-13)


def test_subtracted_kernel_rejects_null_image():
    with pytest.raises(ValidationError):
        states.subtracted_kernel(Region.halfspace(), (0, 0, 0, 1), (2, 0, 0, 1))


def test_probe_examples():
    x = (0.0, 0.0, 0.0, 1.0)
    path = lambda dl: (2.0 - dl, 0.0, 0.0, 1.0)
    assert states.singularity_probe(Region.halfspace(), x, path).exponent == pytest.approx(1.0, abs=0.05)
    assert states.singularity_probe(Region.minkowski(), x, path).exponent == pytest.approx(0.0, abs=0.05)
    xs = (0.0, 0.0, 0.0, 0.5)
    spath = lambda dl: (1.0 - dl, 0.0, 0.0, 0.5)
    assert states.singularity_probe(Region.slab(1.0), xs, spath).exponent == pytest.approx(1.0, abs=0.05)


def test_probe_rejects_direct_cone():
    x = (0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        states.singularity_probe(Region.halfspace(), x, lambda dl: (dl - 0.005, 0.0, 0.0, 1.0))


def test_image_term_bound_positive():
    hs = Region.halfspace()
    f = tf(unit_bump((0, 0, 0, 3), (0.3, 0.4, 0.4, 0.4)))
    assert states.image_term_bound(hs, f, f) > 0
