"""Retarded, advanced and causal propagators of ``P = -d_t^2 + laplacian``.

Sign convention: ``P E^- f = f`` with

    (E^- f)(t, x) = -(1/4π) ∫_0^∞ r dr ∫ dΩ f(t - r, x + r n),

and ``E^+`` the same with ``t + r``.  ``E = E^+ - E^-``.

Smeared pairings ``∫ f (E g)`` have two independent backends:

* position: ``-(1/4π) ∫ r dr dΩ [K(r, r n) - K(-r, r n)]`` where ``K(λ) = ∫ f(x) g(x + λ)``
  factorizes into one-dimensional bump correlations;
* momentum: ``2 Im ω2(f, g)`` on shell (see :mod:`mirrorfield.spectral`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

import numpy as np

from . import bump1d, spectral
from .errors import ConvergenceError, SupportError, ValidationError
from .geometry import Box, Region, RegionKind, causally_disjoint_boxes
from .parallel import ordered_map, ordered_sum
from .testfields import (
    BumpTestFunction,
    ImageExpansion,
    TestFunction,
    as_test_function,
    eta_map,
    image_sum,
    n_map,
)

__all__ = [
    "PairingBackendConfig",
    "FieldEvaluator",
    "retarded",
    "advanced",
    "causal_field",
    "pair_E",
    "pair_E_boundary",
    "image_expansion",
    "SmoothCutoff",
    "validate_cutoff",
    "TimeSliceRepresentative",
    "time_slice_representative",
    "finite_difference_P",
]

BACKENDS = ("position", "momentum", "both")


@dataclass(frozen=True)
class PairingBackendConfig:
    """Quadrature orders and tolerances.

    Position pairing: ``radial_order`` Gauss-Legendre nodes along each ray,
    ``polar_order`` x ``azimuth_order`` directions in the cone subtended by
    the lag box.  Pointwise fields use the ``probe_*`` orders.  ``abs_tol`` and
    ``rel_tol`` define the agreement demanded between backends.
    """

    radial_order: int = 48
    polar_order: int = 96
    azimuth_order: int = 96
    probe_radial_order: int = 48
    probe_polar_order: int = 128
    probe_azimuth_order: int = 128
    spectral: spectral.SpectralConfig = field(default_factory=spectral.SpectralConfig)
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6

    def __post_init__(self):
        orders = (self.radial_order, self.polar_order, self.azimuth_order,
                  self.probe_radial_order, self.probe_polar_order, self.probe_azimuth_order)
        if any(int(o) != o or o < 2 for o in orders):
            raise ValidationError("quadrature orders must be integers >= 2")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValidationError("tolerances must be positive")

    def refined(self) -> "PairingBackendConfig":
        return replace(
            self,
            radial_order=2 * self.radial_order,
            polar_order=2 * self.polar_order,
            azimuth_order=2 * self.azimuth_order,
            spectral=self.spectral.refined(),
        )

    def tolerance(self, scale: float) -> float:
        return self.abs_tol + self.rel_tol * abs(scale)


DEFAULT_CONFIG = PairingBackendConfig()


# ---------------------------------------------------------------- ray geometry


def _ray_box(n: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Parameter interval ``[r0, r1]`` with ``r n`` inside the box, for unit directions ``n[..., 3]``."""
    zero = n == 0.0
    safe = np.where(zero, 1.0, n)
    t1 = lo / safe
    t2 = hi / safe
    inside = (lo <= 0.0) & (hi >= 0.0)
    tmin = np.where(zero, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
    tmax = np.where(zero, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
    return tmin.max(axis=-1), tmax.min(axis=-1)


def _cone(lo: np.ndarray, hi: np.ndarray, n_polar: int, n_azimuth: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions covering every ray from the origin that meets the box, with weights."""
    ctr = (lo + hi) / 2
    R = float(np.linalg.norm((hi - lo) / 2))
    D = float(np.linalg.norm(ctr))
    if D > R * (1 + 1e-9):
        axis = ctr / D
        cmin = math.sqrt(max(0.0, 1.0 - (R / D) ** 2))
    else:
        axis = np.array([0.0, 0.0, 1.0])
        cmin = -1.0
    ref = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, ref)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    x, w = bump1d.gauss_legendre(n_polar)
    u = (1 + cmin) / 2 + (1 - cmin) / 2 * x
    wu = w * (1 - cmin) / 2
    phi = np.arange(n_azimuth) * (2 * np.pi / n_azimuth)
    st = np.sqrt(np.maximum(1 - u * u, 0.0))
    n = (u[:, None, None] * axis
         + st[:, None, None] * (np.cos(phi)[None, :, None] * e1 + np.sin(phi)[None, :, None] * e2))
    weights = wu[:, None] * np.full(n_azimuth, 2 * np.pi / n_azimuth)[None, :]
    return n, weights


def _gl_on(ra: np.ndarray, rb: np.ndarray, order: int):
    """Gauss-Legendre nodes on per-ray intervals; empty intervals get zero weight."""
    x, w = bump1d.gauss_legendre(order)
    ok = rb > ra
    ra = np.where(ok, ra, 0.0)
    rb = np.where(ok, rb, 0.0)
    half = (rb - ra) / 2
    mid = (ra + rb) / 2
    return mid[..., None] + half[..., None] * x, half[..., None] * w


# ---------------------------------------------------------------- pointwise fields


def _kirchhoff(term: BumpTestFunction, p: np.ndarray, direction: int, t_order: int,
               cfg: PairingBackendConfig) -> float:
    c = np.asarray(term.center)
    w = np.asarray(term.halfwidths)
    t, x = p[0], p[1:]
    # retarded (direction +1) samples t - r, advanced samples t + r
    if direction > 0:
        ta, tb = t - c[0] - w[0], t - c[0] + w[0]
    else:
        ta, tb = c[0] - w[0] - t, c[0] + w[0] - t
    ta = max(ta, 0.0)
    if tb <= ta:
        return 0.0
    lo = c[1:] - w[1:] - x
    hi = c[1:] + w[1:] - x
    n, wdir = _cone(lo, hi, cfg.probe_polar_order, cfg.probe_azimuth_order)
    r0, r1 = _ray_box(n, lo, hi)
    r, wr = _gl_on(np.maximum(r0, ta), np.minimum(r1, tb), cfg.probe_radial_order)
    val = bump1d.bump_deriv((t - direction * r - c[0]) / w[0], t_order) / w[0] ** t_order
    for i in range(3):
        val = val * bump1d.bump((x[i] + r * n[..., None, i] - c[i + 1]) / w[i + 1])
    inner = np.sum(val * r * wr, axis=-1)
    return -term.amplitude * float(np.sum(inner * wdir)) / (4 * np.pi)


def _terms_near(source, p: np.ndarray, reach: float) -> tuple[BumpTestFunction, ...]:
    if isinstance(source, ImageExpansion):
        return source.window(p[3] - reach, p[3] + reach).terms
    return source.terms


class FieldEvaluator:
    """Pointwise ``(E^- f)``, ``(E^+ f)`` or ``(E f)`` and its time derivative.

    The source may be a test function or an image expansion; image terms are
    enumerated per probe within the causal reach, so the sum is finite.
    """

    def __init__(self, source, kind: str, cfg: PairingBackendConfig | None = None):
        if kind not in ("retarded", "advanced", "causal"):
            raise ValidationError(f"unknown propagator kind {kind!r}")
        self.source = source if isinstance(source, ImageExpansion) else as_test_function(source)
        self.kind = kind
        self.cfg = cfg or DEFAULT_CONFIG
        base = self.source.base if isinstance(self.source, ImageExpansion) else self.source
        box = base.box
        self._tlo = box.lo[0] if box else 0.0
        self._thi = box.hi[0] if box else 0.0
        self._empty = box is None

    def _at(self, p: np.ndarray, t_order: int) -> float:
        if self._empty:
            return 0.0
        reach = max(p[0] - self._tlo, self._thi - p[0], 0.0)
        terms = _terms_near(self.source, p, reach)
        # (direction, coefficient): E^- samples t - r, E^+ samples t + r, E = E^+ - E^-
        parts = {"retarded": ((1, 1.0),), "advanced": ((-1, 1.0),), "causal": ((-1, 1.0), (1, -1.0))}[self.kind]
        total = 0.0
        for direction, coef in parts:
            for term in terms:
                total += coef * _kirchhoff(term, p, direction, t_order, self.cfg)
        return total

    def _eval(self, points, t_order: int):
        pts = np.asarray(getattr(points, "as_array", lambda: points)(), dtype=float)
        flat = pts.reshape(-1, 4)
        out = np.array(ordered_map(lambda q: self._at(q, t_order), list(flat)))
        if pts.ndim == 1:
            return float(out[0])
        return out.reshape(pts.shape[:-1])

    def __call__(self, points):
        return self._eval(points, 0)

    def dt(self, points):
        """Time derivative of the field at the given points."""
        return self._eval(points, 1)


def retarded(f, cfg: PairingBackendConfig | None = None) -> FieldEvaluator:
    """``E^- f``, supported in the causal future of ``supp f``."""
    return FieldEvaluator(f, "retarded", cfg)


def advanced(f, cfg: PairingBackendConfig | None = None) -> FieldEvaluator:
    """``E^+ f``, supported in the causal past of ``supp f``."""
    return FieldEvaluator(f, "advanced", cfg)


def causal_field(f, cfg: PairingBackendConfig | None = None) -> FieldEvaluator:
    """``E f = E^+ f - E^- f``."""
    return FieldEvaluator(f, "causal", cfg)


def finite_difference_P(field: Callable, p, h: float) -> float:
    """Second-order central-difference ``(-d_t^2 + laplacian)`` of a scalar field."""
    p = np.asarray(getattr(p, "as_array", lambda: p)(), dtype=float)
    pts = [p]
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        pts += [p + e, p - e]
    v = np.asarray(field(np.array(pts)), dtype=float)
    out = 0.0
    for i, s in enumerate((-1.0, 1.0, 1.0, 1.0)):
        out += s * (v[1 + 2 * i] + v[2 + 2 * i] - 2 * v[0]) / h**2
    return float(out)


# ---------------------------------------------------------------- smeared pairings


def _pair_bumps_position(fb: BumpTestFunction, gb: BumpTestFunction, cfg: PairingBackendConfig) -> float:
    if causally_disjoint_boxes(fb.box, gb.box):
        return 0.0
    corr = [bump1d.correlation(fb.center[i], fb.halfwidths[i], gb.center[i], gb.halfwidths[i]) for i in range(4)]
    lo = np.array([corr[i].lo for i in (1, 2, 3)])
    hi = np.array([corr[i].hi for i in (1, 2, 3)])
    n, wdir = _cone(lo, hi, cfg.polar_order, cfg.azimuth_order)
    r0, r1 = _ray_box(n, lo, hi)
    tl, th = corr[0].lo, corr[0].hi
    total = 0.0
    for sgn in (1, -1):
        a, b = (tl, th) if sgn > 0 else (-th, -tl)
        ra = np.maximum(np.maximum(r0, a), 0.0)
        rb = np.minimum(r1, b)
        if not np.any(rb > ra):
            continue
        r, wr = _gl_on(ra, rb, cfg.radial_order)
        val = corr[0](sgn * r)
        for i in range(3):
            val = val * corr[i + 1](r * n[..., None, i])
        inner = np.sum(val * r * wr, axis=-1)
        total += -sgn * float(np.sum(inner * wdir)) / (4 * np.pi)
    return fb.amplitude * gb.amplitude * total


def _image_terms_for(f: TestFunction, g) -> tuple[BumpTestFunction, ...]:
    """Terms of ``g`` (expanding images) that can be causally connected to ``supp f``."""
    if not isinstance(g, ImageExpansion):
        return as_test_function(g).terms
    fb, gb = f.box, g.base.box
    if fb is None or gb is None:
        return ()
    reach = max(abs(fb.hi[0] - gb.lo[0]), abs(gb.hi[0] - fb.lo[0]))
    return g.window(fb.lo[3] - reach, fb.hi[3] + reach).terms


def _pair_position(f: TestFunction, g, cfg: PairingBackendConfig) -> float:
    jobs = [(a, b) for a in f.terms for b in _image_terms_for(f, g) if a.amplitude and b.amplitude]
    return float(ordered_sum([0.0] + ordered_map(lambda ab: _pair_bumps_position(ab[0], ab[1], cfg), jobs)))


def _spectral_args(g) -> tuple[TestFunction, str, float | None, float]:
    if isinstance(g, ImageExpansion):
        mode = "odd" if g.region.kind is RegionKind.HALFSPACE else "slab"
        return g.base, mode, g.region.d, g.normalization
    return as_test_function(g), "free", None, 1.0


def _pair_momentum(f: TestFunction, g, cfg: PairingBackendConfig) -> float:
    base, mode, d, norm = _spectral_args(g)
    if f.is_zero or base.is_zero:
        return 0.0
    return 2.0 * norm * spectral.pair_form(f, base, mode, d, cfg.spectral).imag


def pair_E(f, g, backend: str = "position", cfg: PairingBackendConfig | None = None) -> float:
    """``∫ f (E g) d^4x`` for a test function ``f`` and a test function or image expansion ``g``.

    ``backend="both"`` evaluates both routes, refines once on disagreement and
    raises :class:`ConvergenceError` if they still differ by more than ten
    times the tolerance.
    """
    cfg = cfg or DEFAULT_CONFIG
    if backend not in BACKENDS:
        raise ValidationError(f"backend must be one of {BACKENDS}")
    f = as_test_function(f)
    if not isinstance(g, ImageExpansion):
        g = as_test_function(g)
    if backend == "position":
        return _pair_position(f, g, cfg)
    if backend == "momentum":
        return _pair_momentum(f, g, cfg)
    a, b = _pair_position(f, g, cfg), _pair_momentum(f, g, cfg)
    tol = cfg.tolerance(max(abs(a), abs(b)))
    if abs(a - b) <= tol:
        return a
    fine = cfg.refined()
    a, b = _pair_position(f, g, fine), _pair_momentum(f, g, fine)
    tol = fine.tolerance(max(abs(a), abs(b)))
    if abs(a - b) > 10 * tol:
        raise ConvergenceError(
            f"position and momentum pairings disagree by {abs(a - b):.3e} (tolerance {tol:.1e})",
            estimate=abs(a - b),
        )
    return a


def image_expansion(region: Region, g):
    """The region's image map: ``eta_map`` (half-space), ``n_map`` (slab), identity (Minkowski)."""
    if region.kind is RegionKind.HALFSPACE:
        return eta_map(g)
    if region.kind is RegionKind.SLAB:
        return n_map(g, region.d)
    return as_test_function(g)


def _require_inside(region: Region, *fs, strict: bool = False) -> None:
    for f in fs:
        box = as_test_function(f).box
        if box is not None and not region.contains_box(box, strict=strict):
            where = "the open interior of " if strict else ""
            raise SupportError(f"test function support {box.lo[3]:g} <= z <= {box.hi[3]:g} "
                               f"is not inside {where}{region.describe()}")


def pair_E_boundary(region: Region, f, g, backend: str = "position",
                    cfg: PairingBackendConfig | None = None) -> float:
    """``pair_E(f, image_expansion(region, g))`` with both supports inside the region."""
    f, g = as_test_function(f), as_test_function(g)
    _require_inside(region, f, g)
    return pair_E(f, image_expansion(region, g), backend, cfg)


# ---------------------------------------------------------------- time slice


class Cutoff(Protocol):
    t0: float
    t1: float

    def value(self, t): ...
    def d1(self, t): ...
    def d2(self, t): ...


@dataclass(frozen=True)
class SmoothCutoff:
    """Smooth step rising from 0 at ``t0`` to 1 at ``t1``; ``χ'`` is a normalized bump."""

    t0: float
    t1: float

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)) or not self.t1 > self.t0:
            raise ValidationError(f"cutoff transition [{self.t0}, {self.t1}] is degenerate")

    @property
    def mid(self) -> float:
        return (self.t0 + self.t1) / 2

    @property
    def half(self) -> float:
        return (self.t1 - self.t0) / 2

    def d1(self, t):
        s = (np.asarray(t, dtype=float) - self.mid) / self.half
        return bump1d.bump(s) / (self.half * bump1d.BUMP_INTEGRAL)

    def d2(self, t):
        s = (np.asarray(t, dtype=float) - self.mid) / self.half
        return bump1d.bump_d1(s) / (self.half**2 * bump1d.BUMP_INTEGRAL)

    def value(self, t):
        s = np.clip((np.asarray(t, dtype=float) - self.mid) / self.half, -1.0, 1.0)
        # integrate from -1 to -|s| only; the step is odd about its midpoint
        a = -np.abs(s)
        x, w = bump1d.gauss_legendre(64)
        half = (a + 1) / 2
        nodes = -1 + half[..., None] * (x + 1)
        low = np.sum(bump1d.bump(nodes) * w, axis=-1) * half / bump1d.BUMP_INTEGRAL
        return np.where(s > 0, 1.0 - low, low)


def validate_cutoff(cutoff, samples: int = 401) -> None:
    """Reject cutoffs that are not monotone steps from 0 to 1 across a nondegenerate ``[t0, t1]``."""
    t0, t1 = float(cutoff.t0), float(cutoff.t1)
    if not (math.isfinite(t0) and math.isfinite(t1)) or not t1 > t0:
        raise ValidationError(f"cutoff transition [{t0}, {t1}] is degenerate")
    span = t1 - t0
    ts = np.linspace(t0 - 0.25 * span, t1 + 0.25 * span, samples)
    v = np.asarray(cutoff.value(ts), dtype=float)
    if np.any(np.diff(v) < -1e-12):
        raise ValidationError("cutoff is not monotone")
    if abs(v[0]) > 1e-12 or abs(v[-1] - 1.0) > 1e-12:
        raise ValidationError("cutoff must rise from 0 before t0 to 1 after t1 (constant cutoffs have no transition)")
    d1 = np.asarray(cutoff.d1(ts), dtype=float)
    if not np.any(d1 > 0):
        raise ValidationError("cutoff has no transition")


class TimeSliceRepresentative:
    """``h = χ'' u + 2 χ' ∂_t u`` with ``u = E(I f)``, ``I`` the region's unnormalized image sum.

    ``h`` vanishes identically outside the transition slab ``[t0, t1]``.
    """

    def __init__(self, region: Region, f: TestFunction, cutoff: SmoothCutoff, cfg: PairingBackendConfig | None = None):
        self.region = region
        self.f = f
        self.cutoff = cutoff
        self.field = causal_field(image_sum(region, f), cfg)

    def __call__(self, points):
        pts = np.asarray(getattr(points, "as_array", lambda: points)(), dtype=float)
        flat = pts.reshape(-1, 4)
        out = np.zeros(flat.shape[0])
        t = flat[:, 0]
        live = (t > self.cutoff.t0) & (t < self.cutoff.t1)
        if np.any(live):
            q = flat[live]
            out[live] = (np.asarray(self.cutoff.d2(q[:, 0])) * self.field(q)
                         + 2 * np.asarray(self.cutoff.d1(q[:, 0])) * self.field.dt(q))
        if pts.ndim == 1:
            return float(out[0])
        return out.reshape(pts.shape[:-1])

    def pair_solution(self, alpha, cfg: spectral.SpectralConfig | None = None) -> float:
        """``∫_Ω h φ`` for the solution ``φ = E(I alpha)`` (closed-form time integrals)."""
        return float(self.pair_solutions([alpha], cfg)[0])

    def pair_solutions(self, alphas, cfg: spectral.SpectralConfig | None = None) -> np.ndarray:
        mode = {RegionKind.MINKOWSKI: "free", RegionKind.HALFSPACE: "odd", RegionKind.SLAB: "slab"}[self.region.kind]
        return spectral.time_slice_forms(self.f, [as_test_function(a) for a in alphas], self.cutoff.mid,
                                         self.cutoff.half, mode, self.region.d, cfg)


def time_slice_representative(region: Region, f, cutoff, cfg: PairingBackendConfig | None = None) -> TimeSliceRepresentative:
    """Representative of ``[f]`` supported in the cutoff's transition slab."""
    validate_cutoff(cutoff)
    if not isinstance(cutoff, SmoothCutoff):
        raise ValidationError("only SmoothCutoff transitions have closed-form time integrals")
    f = as_test_function(f)
    if region.has_boundary:
        _require_inside(region, f)
    return TimeSliceRepresentative(region, f, cutoff, cfg)
