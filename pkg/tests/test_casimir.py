import math

import numpy as np
import pytest

from mirrorfield import Region, SupportError, ValidationError
from mirrorfield import casimir

XI = casimir.CONFORMAL_XI
CASIMIR = -math.pi**2 / 1440


def test_phi2_anchors():
    assert casimir.phi2_renormalized(Region.halfspace(), 1.0) == pytest.approx(-6.33257e-3, abs=1e-8)
    assert casimir.phi2_renormalized(Region.slab(1.0), 0.5) == pytest.approx(-1 / 24, abs=1e-10)
    big = casimir.phi2_renormalized(Region.slab(50.0), 1.0)
    assert abs(big / casimir.phi2_closed_form(Region.halfspace(), 1.0) - 1) <= 1e-4


def test_phi2_accepts_names():
    assert casimir.phi2_renormalized("slab", 0.5, d=1.0) == pytest.approx(-1 / 24, abs=1e-10)


def test_conformal_slab_uniform():
    slab = Region.slab(1.0)
    vals = [casimir.t00_renormalized(slab, z, XI) for z in (0.25, 0.5, 0.75)]
    for v in vals:
        assert abs(v / CASIMIR - 1) <= 1e-6
    assert CASIMIR == pytest.approx(-6.85389e-3, abs=1e-8)


def test_conformal_halfspace_vanishes():
    ps = casimir.t00_point_split(Region.halfspace(), 1.0)
    assert abs(ps.t00(XI)) <= 1e-8 * abs(ps.t00(0.0))


def test_xi_affinity_halfspace():
    hs = Region.halfspace()
    ps = casimir.t00_point_split(hs, 1.0)
    t0, t6 = ps.t00(0.0), ps.t00(XI)
    slope = (t6 - t0) / XI
    assert abs(slope + ps.lap_phi2) <= 1e-6 * abs(ps.lap_phi2)
    assert t0 == pytest.approx(casimir.t00_closed_form(hs, 1.0, 0.0), rel=1e-6)


def test_oracle_matches():
    o = casimir.mode_sum_oracle(0.5, 1.0, XI)
    assert abs(o.value - (-6.854e-3)) <= 1e-4
    assert abs(o.value / casimir.t00_renormalized(Region.slab(1.0), 0.5, XI) - 1) <= 0.02


def test_oracle_raw_values_finite_and_smooth():
    o = casimir.mode_sum_oracle(0.5, 1.0, XI)
    assert np.all(np.isfinite(o.raw))
    divergent = 3 / (2 * math.pi**2 * o.eps**4)
    assert np.all(np.abs(o.raw) <= 1e-3 * divergent)
    steps = np.diff(o.raw)
    assert np.all(steps > 0)
    assert np.all(np.abs(np.diff(steps)) < np.abs(steps[:-1]))


def test_oracle_mirror_symmetry():
    a = casimir.mode_sum_oracle(0.3, 1.0).value
    b = casimir.mode_sum_oracle(0.7, 1.0).value
    assert abs(a - b) <= 1e-6 * abs(CASIMIR)


def test_oracle_validation():
    with pytest.raises(ValidationError):
        casimir.mode_sum_oracle(0.5, 1.0, eps=[0.1, 0.2, 0.3])
    with pytest.raises(ValidationError):
        casimir.mode_sum_oracle(0.5, 1.0, eps=[0.2, 0.1])


def test_energy_per_area():
    e1 = casimir.energy_per_area(1.0)
    assert e1 == pytest.approx(-6.85389e-3, abs=1e-8)
    assert abs(casimir.energy_per_area(2.0) * 8 / e1 - 1) <= 1e-8
    with pytest.raises(ValidationError):
        casimir.energy_per_area(1.0, 0.0)


def test_scaling_laws():
    hs = Region.halfspace()
    assert casimir.phi2_renormalized(hs, 2.0) * 4 == pytest.approx(casimir.phi2_renormalized(hs, 1.0), rel=1e-8)
    assert (casimir.phi2_renormalized(Region.slab(2.0), 0.6) * 4
            == pytest.approx(casimir.phi2_renormalized(Region.slab(1.0), 0.3), rel=1e-8))
    a = casimir.t00_point_split(Region.slab(2.0), 0.6).t00(0.0)
    b = casimir.t00_point_split(Region.slab(1.0), 0.3).t00(0.0)
    assert a * 16 == pytest.approx(b, rel=1e-8)


def test_large_slab_t00_limit():
    big = casimir.t00_point_split(Region.slab(50.0), 1.0).t00(0.0)
    hs = casimir.t00_point_split(Region.halfspace(), 1.0).t00(0.0)
    assert abs(big / hs - 1) <= 1e-3


@pytest.mark.parametrize("z", [0.0, 1.0, -0.2, 1.5])
def test_boundary_and_outside_rejected(z):
    with pytest.raises(SupportError):
        casimir.t00_renormalized(Region.slab(1.0), z)


def test_minkowski_and_bad_inputs_rejected():
    with pytest.raises(ValidationError):
        casimir.phi2_renormalized(Region.minkowski(), 1.0)
    with pytest.raises(ValidationError):
        casimir.t00_renormalized(Region.halfspace(), 1.0, xi=-0.1)
    with pytest.raises(ValidationError):
        casimir.t00_point_split(Region.halfspace(), 1.0, h=0.5)
    with pytest.raises(ValidationError):
        casimir.ProfileRequest(Region.halfspace(), ())
