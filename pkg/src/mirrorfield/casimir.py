"""Renormalized ``<φ²>`` and ``<T_00>`` from the subtracted kernel ``W``.

The energy density is read off the flat-space improved stress tensor.  For
massless on-shell fields this reduces to

    T_00 = ½ (∂_t φ ∂_t' φ + ∇φ·∇'φ) - ξ ∇²(φ²),

so ``<T_00> = ½ (∂_t∂_t' + ∇·∇') W |_coinc - ξ ∂_z² [W(x, x)]``.  Derivatives
are taken on ``W`` by central differences in the split variables with
Richardson extrapolation, and cross-checked against the closed forms of the
image sums.  An independent regulated Dirichlet mode sum serves as oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, SupportError, ValidationError
from .geometry import Region, RegionKind, SpacetimePoint
from .states import SubtractedKernel

__all__ = [
    "CouplingXi",
    "ProfileRequest",
    "PointSplit",
    "ModeSumResult",
    "phi2_closed_form",
    "phi2_renormalized",
    "t00_closed_form",
    "t00_point_split",
    "t00_renormalized",
    "mode_sum_oracle",
    "energy_per_area",
    "CONFORMAL_XI",
]

CONFORMAL_XI = 1.0 / 6.0
PHI2_TOL = 1e-10
T00_TOL = 1e-6


@dataclass(frozen=True)
class CouplingXi:
    xi: float = CONFORMAL_XI

    def __post_init__(self):
        if not (math.isfinite(self.xi) and self.xi >= 0):
            raise ValidationError(f"coupling xi must be >= 0, got {self.xi}")


def _region(region, d: float | None = None) -> Region:
    if isinstance(region, Region):
        r = region
    elif region in ("halfspace", "half-space"):
        r = Region.halfspace()
    elif region == "slab":
        if d is None:
            raise ValidationError("slab needs a width d")
        r = Region.slab(d)
    else:
        raise ValidationError(f"unknown region {region!r}")
    if r.kind is RegionKind.MINKOWSKI:
        raise ValidationError("renormalized observables vanish identically on Minkowski space; pick a boundary region")
    if d is not None and r.kind is RegionKind.SLAB and not math.isclose(r.d, d):
        raise ValidationError(f"slab width {r.d} does not match d={d}")
    return r


def _wall_distance(region: Region, z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise ValidationError("z must be finite")
    lo, hi = region.z_bounds()
    dist = min(z - lo, hi - z)
    if not dist > 0:
        raise SupportError(f"z={z:g} is not in the open interior of {region.describe()}; "
                           "renormalized observables are defined away from the walls")
    return dist


@dataclass(frozen=True)
class ProfileRequest:
    region: Region
    z: tuple[float, ...]
    xi: float = CONFORMAL_XI
    h: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(v) for v in self.z))
        if not self.z:
            raise ValidationError("profile needs at least one z sample")
        CouplingXi(self.xi)
        for z in self.z:
            dist = _wall_distance(self.region, z)
            if self.h is not None and not (0 < self.h <= dist / 10):
                raise ValidationError(f"split step h={self.h:g} must satisfy 0 < h <= {dist / 10:g} at z={z:g}")


# ---------------------------------------------------------------- closed forms


def phi2_closed_form(region, z: float, d: float | None = None) -> float:
    r = _region(region, d)
    _wall_distance(r, z)
    if r.kind is RegionKind.HALFSPACE:
        return -1.0 / (16 * math.pi**2 * z * z)
    d = r.d
    return 1.0 / (48 * d * d) - 1.0 / (16 * d * d * math.sin(math.pi * z / d) ** 2)


def t00_closed_form(region, z: float, xi: float = CONFORMAL_XI, d: float | None = None) -> float:
    r = _region(region, d)
    _wall_distance(r, z)
    CouplingXi(xi)
    if r.kind is RegionKind.HALFSPACE:
        return -(1 - 6 * xi) / (16 * math.pi**2 * z**4)
    d = r.d
    s2 = math.sin(math.pi * z / d) ** 2
    return (-math.pi**2 / (1440 * d**4)
            - (1 - 6 * xi) * math.pi**2 * (3 - 2 * s2) / (48 * d**4 * s2 * s2))


# ---------------------------------------------------------------- point splitting


def _coincident(z: float) -> SpacetimePoint:
    return SpacetimePoint(0.0, 0.0, 0.0, z)


def phi2_renormalized(region, z: float, d: float | None = None) -> float:
    """``W`` at coincidence from the numeric image sum, checked against the closed form."""
    r = _region(region, d)
    _wall_distance(r, z)
    p = _coincident(z)
    val = SubtractedKernel(r)(p, p)
    ref = phi2_closed_form(r, z)
    if abs(val - ref) > PHI2_TOL * max(1.0, abs(ref)):
        raise ConvergenceError(f"image sum {val:.16e} disagrees with closed form {ref:.16e}", estimate=abs(val - ref))
    return val


@dataclass(frozen=True)
class PointSplit:
    """Point-split pieces at coincidence (Richardson-extrapolated)."""

    dt_dt: float
    grad_grad: float
    lap_phi2: float
    residual: float
    h: float

    def t00(self, xi: float) -> float:
        return 0.5 * (self.dt_dt + self.grad_grad) - xi * self.lap_phi2


def _mixed(W, z: float, axis: int, h: float) -> float:
    """``∂_a ∂_a' W`` at coincidence, four-point central stencil."""
    e = np.zeros(4)
    e[axis] = h
    base = np.array([0.0, 0.0, 0.0, z])
    pp = W(base + e, base + e)
    pm = W(base + e, base - e)
    mp = W(base - e, base + e)
    mm = W(base - e, base - e)
    return (pp - pm - mp + mm) / (4 * h * h)


def _pieces(W, z: float, h: float) -> np.ndarray:
    dt = _mixed(W, z, 0, h)
    grad = _mixed(W, z, 1, h) + _mixed(W, z, 2, h) + _mixed(W, z, 3, h)
    w = [W(_coincident(z + s * h), _coincident(z + s * h)) for s in (-1, 0, 1)]
    lap = (w[0] - 2 * w[1] + w[2]) / (h * h)
    return np.array([dt, grad, lap])


def t00_point_split(region, z: float, d: float | None = None, h: float | None = None) -> PointSplit:
    """Point-split derivatives of ``W`` with steps ``h, h/2, h/4``.

    Two Richardson levels remove the ``h^2`` and ``h^4`` errors; the residual
    is the spread of the two first-level estimates after the second level.
    """
    r = _region(region, d)
    dist = _wall_distance(r, z)
    h = dist / 40 if h is None else float(h)
    if not (0 < h <= dist / 10):
        raise ValidationError(f"split step h={h:g} must satisfy 0 < h <= {dist / 10:g} (distance to wall / 10)")
    W = SubtractedKernel(r)
    raw = [_pieces(W, z, h / 2**k) for k in range(3)]
    r1 = [(4 * raw[k + 1] - raw[k]) / 3 for k in range(2)]
    r2 = (16 * r1[1] - r1[0]) / 15
    scale = np.maximum(np.abs(r2), 1e-300)
    residual = float(np.max(np.abs(r2 - r1[1]) / scale))
    return PointSplit(float(r2[0]), float(r2[1]), float(r2[2]), residual, h)


def t00_renormalized(region, z: float, xi: float = CONFORMAL_XI, d: float | None = None,
                     h: float | None = None) -> float:
    """``<T_00>`` by point splitting, checked against the image-sum closed form."""
    CouplingXi(xi)
    r = _region(region, d)
    ps = t00_point_split(r, z, h=h)
    val = ps.t00(xi)
    ref = t00_closed_form(r, z, xi)
    scale = max(abs(ref), abs(t00_closed_form(r, z, 0.0)))
    if ps.residual > T00_TOL:
        raise ConvergenceError(f"Richardson residual {ps.residual:.2e} above {T00_TOL:g}", estimate=ps.residual)
    if abs(val - ref) > T00_TOL * scale:
        raise ConvergenceError(f"point-split T00 {val:.12e} disagrees with closed form {ref:.12e}",
                               estimate=abs(val - ref) / scale)
    return val


# ---------------------------------------------------------------- mode-sum oracle


@dataclass(frozen=True)
class ModeSumResult:
    value: float
    residual: float
    eps: np.ndarray
    raw: np.ndarray  # regulated, Minkowski-subtracted values per eps


def _regulated_density(z: float, d: float, xi: float, eps: float) -> float:
    """Slab mode sum with ``e^{-εω}`` regulator minus the equally regulated Minkowski value."""
    m_max = int(math.ceil((60.0 / eps) * d / math.pi)) + 1
    k = np.arange(1, m_max + 1) * math.pi / d
    A = (2.0 / d) / (4 * math.pi)
    ek = np.exp(-eps * k)
    I0 = ek / eps
    I2 = ek * (k * k / eps + 2 * k / eps**2 + 2 / eps**3)
    s2 = np.sin(k * z) ** 2
    c2 = np.cos(k * z) ** 2
    dtdt = A * s2 * I2
    grad = A * (s2 * (I2 - k * k * I0) + k * k * c2 * I0)
    lap = A * I0 * 2 * k * k * np.cos(2 * k * z)
    # sum smallest terms first
    slab = math.fsum((0.5 * (dtdt + grad) - xi * lap)[::-1])
    return slab - 3.0 / (2 * math.pi**2 * eps**4)


def mode_sum_oracle(z: float, d: float, xi: float = CONFORMAL_XI, eps: Sequence[float] | None = None,
                    tol: float | None = None) -> ModeSumResult:
    """Energy density from the regulated Dirichlet mode sum, extrapolated to ε → 0.

    The subtracted values are fitted by a polynomial in ``ε²`` through all
    points; the residual is the change when the largest ε is dropped.
    """
    r = _region("slab", d)
    dist = _wall_distance(r, z)
    CouplingXi(xi)
    if eps is None:
        eps = dist * np.array([0.4, 0.3, 0.2, 0.1])
    eps = np.asarray(eps, dtype=float)
    if eps.size < 3:
        raise ValidationError("mode-sum extrapolation needs at least three regulator values")
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValidationError("regulator values must be positive and strictly decreasing")
    raw = np.array([_regulated_density(z, d, xi, e) for e in eps])
    x = eps**2

    def extrapolate(xs, ys):
        return float(np.polynomial.polynomial.polyfit(xs, ys, len(xs) - 1)[0])

    value = extrapolate(x, raw)
    residual = abs(value - extrapolate(x[1:], raw[1:]))
    if tol is not None and residual > tol:
        raise ConvergenceError(f"mode-sum extrapolation residual {residual:.2e} above {tol:g}", estimate=residual)
    return ModeSumResult(value, residual, eps, raw)


def energy_per_area(d: float, xi: float = CONFORMAL_XI) -> float:
    """``d * <T_00>`` of the slab; only the conformal coupling has a finite total."""
    if not math.isclose(xi, CONFORMAL_XI, rel_tol=0, abs_tol=1e-9):
        raise ValidationError("energy per area is only finite at xi = 1/6; "
                              "for other couplings the density is not integrable at the walls")
    if not (math.isfinite(d) and d > 0):
        raise ValidationError(f"slab width must be positive, got {d}")
    return d * t00_renormalized(Region.slab(d), d / 2, CONFORMAL_XI)
