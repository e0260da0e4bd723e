import math

import numpy as np
import pytest

from mirrorfield import Box, Region, SpacetimePoint, ValidationError, interval
from mirrorfield import geometry


def test_interval_examples():
    a = SpacetimePoint(0, 0, 0, 0)
    assert interval(a, a) == 0.0
    assert interval(a, SpacetimePoint(1, 0, 0, 1)) == 0.0
    assert interval(a, SpacetimePoint(1, 0, 0, 2)) == -3.0


def test_point_rejects_nonfinite():
    with pytest.raises(ValidationError):
        SpacetimePoint(0, 0, math.nan, 0)


def test_halfspace_images():
    imgs = geometry.images(Region.halfspace(), SpacetimePoint(0, 0, 0, 1))
    assert [(s, p.z) for s, p in imgs] == [(1, 1.0), (-1, -1.0)]


def test_slab_images_window():
    imgs = geometry.images(Region.slab(1.0), SpacetimePoint(0, 0, 0, 0.25), (-2.5, 2.5))
    got = {(s, round(p.z, 12)) for s, p in imgs}
    assert got == {(1, 0.25), (-1, -0.25), (1, 2.25), (-1, 1.75), (1, -1.75), (-1, -2.25)}


def test_slab_wall_point_images_cancel():
    imgs = geometry.images(Region.slab(1.0), SpacetimePoint(0, 0, 0, 0.0), (-4.5, 4.5))
    plus = sorted(round(p.z, 12) for s, p in imgs if s > 0)
    minus = sorted(round(p.z, 12) for s, p in imgs if s < 0)
    assert plus == minus


def test_causally_disjoint_boxes():
    A = Box.around((0, 0, 0, 0), (0.1,) * 4)
    assert geometry.causally_disjoint_boxes(A, Box.around((0, 5, 0, 0), (0.1,) * 4))
    assert not geometry.causally_disjoint_boxes(A, Box.around((5, 0, 0, 0), (0.1,) * 4))
    assert not geometry.causally_disjoint_boxes(A, A)


def test_reflected_disjointness_examples():
    hs = Region.halfspace()
    a = Box.around((0, 0, 0, 10), (0.1, 0.3, 0.3, 0.3))
    b = Box.around((0, 2, 0, 10), (0.1, 0.3, 0.3, 0.3))
    assert geometry.reflected_causally_disjoint(hs, a, b)
    a = Box.around((0, 0, 0, 1), (0.05,) * 4)
    b = Box.around((2, 0, 0, 1), (0.05,) * 4)
    assert not geometry.reflected_causally_disjoint(hs, a, b, include_direct=False)


def test_slab_large_time_gap_is_connected():
    d = 1.0
    slab = Region.slab(d)
    rng = np.random.default_rng(3)
    for _ in range(10):
        za, zb = rng.uniform(0.2, 0.8, size=2)
        a = Box.around((0, 0, 0, za), (0.05, 0.1, 0.1, 0.05))
        b = Box.around((2 * d + 0.5 + rng.uniform(0, 3), 0, 0, zb), (0.05, 0.1, 0.1, 0.05))
        assert not geometry.reflected_causally_disjoint(slab, a, b)


def test_region_validation():
    with pytest.raises(ValidationError):
        Region.slab(-1.0)
    with pytest.raises(ValidationError):
        Region.slab(0.0)
    assert Region.slab(2.0).describe() == "slab(d=2.0)"
    assert Region.halfspace().z_bounds() == (0.0, math.inf)


def test_isometry_inverse_roundtrip():
    rng = np.random.default_rng(0)
    d = 1.3
    for parity in (1, -1):
        for shift in (0.0, 2 * d, -4 * d):
            iso = geometry.Isometry.from_affine(parity, shift, d)
            p = SpacetimePoint(*rng.normal(size=4))
            assert np.allclose(iso.inverse().apply(iso.apply(p)).as_array(), p.as_array())
