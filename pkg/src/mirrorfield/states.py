"""Vacuum and image two-point functions, the subtracted kernel ``W`` and a singularity probe.

``vacuum_two_point(f, g) = ∫ d^3k / ((2π)^3 2|k|) conj(F) G`` on shell, with the
phase convention fixing ``ω2(f, g) - ω2(g, f) = i pair_E(f, g)``.  Pairs of bumps
whose supports are spacelike separated with margin use the smooth position
kernel ``1/(4π^2 (|Δx|^2 - Δt^2))`` instead (cheaper and exactly real).

Image states put the image map in one slot:
half-space ``ω2(f, η g)``, slab ``ω2(f, N g)`` (interior supports only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import zeta

from . import bump1d, spectral
from .errors import SingularConfigurationError, SupportError, ValidationError
from .geometry import Box, Isometry, IsometryKind, Region, RegionKind, SpacetimePoint, interval
from .geometry import _max_time_separation, _spatial_gap, image_isometries
from .parallel import ordered_sum
from .propagators import DEFAULT_CONFIG, PairingBackendConfig, _require_inside
from .testfields import ETA_NORMALIZATION, BumpTestFunction, TestFunction, as_test_function

__all__ = [
    "vacuum_two_point",
    "image_two_point",
    "TwoPointPairing",
    "vacuum_kernel",
    "subtracted_kernel",
    "SubtractedKernel",
    "image_term_bound",
    "ProbeResult",
    "singularity_probe",
]

KERNEL_ORDER = 16
LATTICE_N = 64


def _G(rho2, tau2):
    return 1.0 / (4 * np.pi**2 * (rho2 - tau2))


# ---------------------------------------------------------------- smeared vacuum


def _kernel_ready(a: Box, b: Box) -> bool:
    """Spacelike separated by at least the combined half-extent (smooth kernel, fast GL)."""
    reach = float(np.max(a.halfwidths + b.halfwidths))
    return _spatial_gap(a, b) - _max_time_separation(a, b) >= reach


def _kernel_pair(fb: BumpTestFunction, gb: BumpTestFunction, order: int = KERNEL_ORDER) -> float:
    """``∫∫ f(x) g(y) G(y - x)`` through the lag correlations.

    ``G`` is smooth on the lag box, so it is interpolated on a Chebyshev tensor
    grid and integrated against the exact correlation moments (product rule).
    """
    cheb = np.cos(np.pi * (np.arange(order) + 0.5) / order)
    nodes, weights = [], []
    for i in range(4):
        c = bump1d.correlation(fb.center[i], fb.halfwidths[i], gb.center[i], gb.halfwidths[i])
        lam = (c.lo + c.hi) / 2 + (c.hi - c.lo) / 2 * cheb
        nodes.append(lam)
        weights.append(c.moments(lam))
    t = nodes[0][:, None, None, None]
    rho2 = (nodes[1][None, :, None, None] ** 2 + nodes[2][None, None, :, None] ** 2
            + nodes[3][None, None, None, :] ** 2)
    vals = _G(rho2, t * t)
    out = np.tensordot(vals, weights[3], axes=([3], [0]))
    out = np.tensordot(out, weights[2], axes=([2], [0]))
    out = np.tensordot(out, weights[1], axes=([1], [0]))
    return fb.amplitude * gb.amplitude * float(out @ weights[0])


def _hybrid(pairs: list[tuple[BumpTestFunction, BumpTestFunction]], cfg: PairingBackendConfig) -> complex:
    """Sum of free two-point values over bump pairs, each by the cheaper exact route."""
    near = [(a, b) for a, b in pairs if not _kernel_ready(a.box, b.box)]
    far = [(a, b) for a, b in pairs if _kernel_ready(a.box, b.box)]
    total = complex(ordered_sum([0.0] + [_kernel_pair(a, b) for a, b in far]))
    for a, b in near:
        total += spectral.pair_form(TestFunction((a,)), TestFunction((b,)), "free", None, cfg.spectral)
    return total


def vacuum_two_point(f, g, cfg: PairingBackendConfig | None = None) -> complex:
    """Minkowski vacuum ``ω2(f, g)`` (antilinear in ``f``)."""
    cfg = cfg or DEFAULT_CONFIG
    f, g = as_test_function(f), as_test_function(g)
    pairs = [(a, b) for a in f.terms for b in g.terms if a.amplitude and b.amplitude]
    if not pairs:
        return 0j
    if not any(_kernel_ready(a.box, b.box) for a, b in pairs):
        return spectral.pair_form(f, g, "free", None, cfg.spectral)
    return _hybrid(pairs, cfg)


def image_two_point(region: Region, f, g, cfg: PairingBackendConfig | None = None) -> complex:
    """Image state two-point function.

    Half-space: ``ω2(f, η g) = (ω2(f, g) - ω2(f, Rg))/√2``.
    Slab: ``ω2(f, N g)`` by the Dirichlet mode sum; both supports must lie in the open slab.
    """
    cfg = cfg or DEFAULT_CONFIG
    f, g = as_test_function(f), as_test_function(g)
    if region.kind is RegionKind.MINKOWSKI:
        return vacuum_two_point(f, g, cfg)
    if region.kind is RegionKind.SLAB:
        _require_interior(region, f, g)
        return spectral.pair_form(f, g, "slab", region.d, cfg.spectral)
    _require_inside(region, f, g)
    direct = [(a, b) for a in f.terms for b in g.terms if a.amplitude and b.amplitude]
    mirrored = [(a, b.pullback(Isometry(IsometryKind.REFLECT_Z0))) for a, b in direct]
    if not any(_kernel_ready(a.box, b.box) for a, b in direct + mirrored):
        return ETA_NORMALIZATION * spectral.pair_form(f, g, "odd", None, cfg.spectral)
    return ETA_NORMALIZATION * (_hybrid(direct, cfg) - _hybrid(mirrored, cfg))


def _require_interior(region: Region, *fs) -> None:
    try:
        _require_inside(region, *fs, strict=True)
    except SupportError as exc:
        raise SupportError(f"{exc}; slab image states are defined for interior supports only") from None


@dataclass(frozen=True)
class TwoPointPairing:
    """The two-point function of the vacuum (Minkowski) or of the region's image state."""

    region: Region = field(default_factory=Region.minkowski)
    cfg: PairingBackendConfig = field(default_factory=lambda: DEFAULT_CONFIG)

    @property
    def normalization(self) -> float:
        return ETA_NORMALIZATION if self.region.kind is RegionKind.HALFSPACE else 1.0

    def check_domain(self, f) -> None:
        f = as_test_function(f)
        if self.region.kind is RegionKind.SLAB:
            _require_interior(self.region, f)
        elif self.region.kind is RegionKind.HALFSPACE:
            _require_inside(self.region, f)

    def __call__(self, f, g) -> complex:
        return image_two_point(self.region, f, g, self.cfg)

    def gram(self, fs: Sequence) -> np.ndarray:
        """``M_ij = ω(f_i, f_j)`` on one shared spectral grid (exactly Hermitian PSD)."""
        fs = [as_test_function(f) for f in fs]
        for f in fs:
            self.check_domain(f)
        mode = {RegionKind.MINKOWSKI: "free", RegionKind.HALFSPACE: "odd", RegionKind.SLAB: "slab"}[self.region.kind]
        return self.normalization * spectral.quadratic_form(fs, mode, self.region.d, self.cfg.spectral)


# ---------------------------------------------------------------- point kernels


def vacuum_kernel(x, xp) -> float:
    """Real part of the massless Wightman function, ``-1/(4π^2 s^2)``, away from the light cone."""
    s2 = interval(x, xp)
    if s2 == 0.0:
        raise SingularConfigurationError("vacuum kernel requested on the light cone")
    return -1.0 / (4 * np.pi**2 * s2)


def _tail(c: float, alpha: float, d: float, N: int) -> float:
    """``Σ_{|n|>N} 1/(c + (2d)^2 (n - alpha)^2)`` by the Hurwitz-zeta expansion in ``c``."""
    two_d2 = (2 * d) ** 2
    total, k = 0.0, 0
    while True:
        s = 2 * k + 2
        term = (-c) ** k / two_d2 ** (k + 1) * (zeta(s, N + 1 - alpha) + zeta(s, N + 1 + alpha))
        total += term
        k += 1
        if abs(term) <= 1e-18 * max(abs(total), 1e-300) or k > 60:
            break
    return float(total)


@dataclass(frozen=True)
class SubtractedKernel:
    """``W(x, x') = Σ_{σ ≠ id} sign(σ) G(x, σx')``: the image part of the state's two-point function."""

    region: Region
    lattice_n: int = LATTICE_N

    def _check(self, x: SpacetimePoint, xp: SpacetimePoint) -> None:
        lo, hi = self.region.z_bounds()
        for p in (x, xp):
            if not (lo < p.z < hi):
                raise SupportError(f"point z={p.z:g} is not in the open interior of {self.region.describe()}")

    def _nonspacelike_images(self, x: SpacetimePoint, xp: SpacetimePoint) -> list[Isometry]:
        tau = abs(x.t - xp.t)
        isos = image_isometries(self.region, x.z - tau, x.z + tau, xp.z, xp.z)
        bad = []
        for iso in isos:
            if iso.kind is IsometryKind.IDENTITY:
                continue
            if interval(x, iso.apply(xp)) >= 0.0:
                bad.append(iso)
        return bad

    def __call__(self, x, xp) -> float:
        x, xp = SpacetimePoint.of(x), SpacetimePoint.of(xp)
        if self.region.kind is RegionKind.MINKOWSKI:
            return 0.0
        self._check(x, xp)
        bad = self._nonspacelike_images(x, xp)
        if bad:
            iso = bad[0]
            raise SingularConfigurationError(
                f"x' image under {iso.kind.value}(n={iso.n}) is timelike or null related to x; "
                "W is only evaluated where every image is spacelike")
        if self.region.kind is RegionKind.HALFSPACE:
            return -float(_G(_rho2(x, xp) + (x.z + xp.z) ** 2, (x.t - xp.t) ** 2))
        return self._lattice(x, xp)

    def _lattice(self, x: SpacetimePoint, xp: SpacetimePoint) -> float:
        d, N = self.region.d, self.lattice_n
        c = _rho2(x, xp) - (x.t - xp.t) ** 2
        n = np.arange(-N, N + 1)
        nz = n[n != 0]  # n = 0 translation is the direct term, i.e. the parametrix
        trans = 1.0 / (c + ((x.z - xp.z) - 2 * nz * d) ** 2)
        refl = 1.0 / (c + ((x.z + xp.z) - 2 * n * d) ** 2)
        direct = float(np.sum(trans) - np.sum(refl))
        tail = _tail(c, (x.z - xp.z) / (2 * d), d, N) - _tail(c, (x.z + xp.z) / (2 * d), d, N)
        return (direct + tail) / (4 * np.pi**2)


def _rho2(x: SpacetimePoint, xp: SpacetimePoint) -> float:
    return (x.x - xp.x) ** 2 + (x.y - xp.y) ** 2


def subtracted_kernel(region: Region, x, xp) -> float:
    return SubtractedKernel(region)(x, xp)


def image_term_bound(region: Region, f, g, terms: int = 200) -> float:
    """Upper bound on ``|image_two_point - normalization * vacuum_two_point|`` for reflected-disjoint
    supports: ``sup |G|`` over each image pair of boxes times the L1 norms (normalization included)."""
    f, g = as_test_function(f), as_test_function(g)
    fb, gb = f.box, g.box
    if fb is None or gb is None or region.kind is RegionKind.MINKOWSKI:
        return 0.0
    norm = f.l1_bound * g.l1_bound
    tsep = _max_time_separation(fb, gb)
    if region.kind is RegionKind.HALFSPACE:
        isos = [Isometry(IsometryKind.REFLECT_Z0)]
        scale = ETA_NORMALIZATION
    else:
        d = region.d
        isos = [iso for iso in image_isometries(region, fb.lo[3] - 2 * terms * d, fb.hi[3] + 2 * terms * d,
                                                gb.lo[3], gb.hi[3]) if iso.kind is not IsometryKind.IDENTITY]
        scale = 1.0
    total = 0.0
    for iso in isos:
        gap = _spatial_gap(fb, gb.image(iso))
        if gap <= tsep:
            return math.inf
        total += 1.0 / (4 * np.pi**2 * (gap * gap - tsep * tsep))
    if region.kind is RegionKind.SLAB:
        # remaining images beyond the enumerated window: Σ_{n>terms} 2 * 2/(2nd)^2
        total += 4.0 / (4 * np.pi**2 * (2 * region.d) ** 2 * terms)
    return scale * norm * total


# ---------------------------------------------------------------- singularity probe


@dataclass(frozen=True)
class ProbeResult:
    exponent: float
    deltas: np.ndarray
    values: np.ndarray
    residual: float


def singularity_probe(region: Region, x, path: Callable[[float], object],
                      deltas: Sequence[float] | None = None) -> ProbeResult:
    """Fit ``|W(x, x'(δ))| ∝ δ^(-p)`` along a path and return ``p``.

    For boundary regions ``W`` is the subtracted kernel; for Minkowski it is the
    vacuum kernel itself.  The direct interval must stay away from zero and keep
    one sign along the path.
    """
    x = SpacetimePoint.of(x)
    deltas = np.logspace(-3, -2, 11) if deltas is None else np.asarray(deltas, dtype=float)
    if deltas.size < 3 or np.any(deltas <= 0):
        raise ValidationError("need at least three positive path parameters")
    if deltas.max() / deltas.min() < 9.99:
        raise ValidationError("the fit needs path parameters spanning a decade")
    points = [SpacetimePoint.of(path(float(dl))) for dl in deltas]
    direct = np.array([interval(x, p) for p in points])
    scale = max(1.0, max(float(np.sum((x.as_array() - p.as_array()) ** 2)) for p in points))
    if np.any(np.abs(direct) < 1e-3 * scale) or not (np.all(direct > 0) or np.all(direct < 0)):
        raise ValidationError("probe path meets or crosses the direct light cone")
    if region.kind is RegionKind.MINKOWSKI:
        vals = np.array([vacuum_kernel(x, p) for p in points])
    else:
        kern = SubtractedKernel(region)
        vals = np.array([kern(x, p) for p in points])
    mags = np.abs(vals)
    if np.any(mags == 0):
        raise ValidationError("kernel vanishes on the path; no growth to fit")
    A = np.vstack([np.log(deltas), np.ones_like(deltas)]).T
    coef, res, *_ = np.linalg.lstsq(A, np.log(mags), rcond=None)
    resid = float(np.sqrt(res[0] / deltas.size)) if res.size else 0.0
    return ProbeResult(float(-coef[0]), deltas, vals, resid)
