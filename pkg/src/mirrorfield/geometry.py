"""Spacetime points, regions with Dirichlet walls, image isometries and causal predicates.

The interval uses the (+,-,-,-) convention: ``interval(a, b) > 0`` is timelike,
``== 0`` null and ``< 0`` spacelike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .errors import SupportError, ValidationError

__all__ = [
    "SpacetimePoint",
    "RegionKind",
    "Region",
    "IsometryKind",
    "Isometry",
    "Box",
    "interval",
    "images",
    "image_isometries",
    "causally_disjoint_boxes",
    "reflected_causally_disjoint",
]


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("t", "x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(f"coordinate {name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, p) -> "SpacetimePoint":
        if isinstance(p, SpacetimePoint):
            return p
        t, x, y, z = (float(c) for c in p)
        return cls(t, x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z])

    def with_z(self, z: float) -> "SpacetimePoint":
        return SpacetimePoint(self.t, self.x, self.y, z)


def interval(a, b) -> float:
    """Squared Minkowski interval ``(dt)^2 - |dx|^2`` between two points."""
    a = SpacetimePoint.of(a)
    b = SpacetimePoint.of(b)
    return (a.t - b.t) ** 2 - (a.x - b.x) ** 2 - (a.y - b.y) ** 2 - (a.z - b.z) ** 2


class RegionKind(str, Enum):
    MINKOWSKI = "minkowski"
    HALFSPACE = "halfspace"
    SLAB = "slab"


@dataclass(frozen=True)
class Region:
    kind: RegionKind
    d: float | None = None

    def __post_init__(self):
        kind = RegionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is RegionKind.SLAB:
            if self.d is None or not math.isfinite(self.d) or self.d <= 0:
                raise ValidationError(f"slab width must be positive and finite, got {self.d}")
            object.__setattr__(self, "d", float(self.d))
        elif self.d is not None:
            raise ValidationError(f"width d is only meaningful for a slab (kind={kind.value})")

    @classmethod
    def minkowski(cls) -> "Region":
        return cls(RegionKind.MINKOWSKI)

    @classmethod
    def halfspace(cls) -> "Region":
        return cls(RegionKind.HALFSPACE)

    @classmethod
    def slab(cls, d: float) -> "Region":
        return cls(RegionKind.SLAB, d)

    @classmethod
    def parse(cls, name: str, d: float | None = None) -> "Region":
        name = name.lower()
        if name == "slab":
            return cls.slab(1.0 if d is None else d)
        return cls(RegionKind(name))

    @property
    def has_boundary(self) -> bool:
        return self.kind is not RegionKind.MINKOWSKI

    def z_bounds(self) -> tuple[float, float]:
        if self.kind is RegionKind.MINKOWSKI:
            return -math.inf, math.inf
        if self.kind is RegionKind.HALFSPACE:
            return 0.0, math.inf
        return 0.0, self.d

    def contains(self, p) -> bool:
        lo, hi = self.z_bounds()
        return lo <= SpacetimePoint.of(p).z <= hi

    def contains_box(self, box: "Box", strict: bool = False) -> bool:
        lo, hi = self.z_bounds()
        zlo, zhi = box.lo[3], box.hi[3]
        if strict:
            return lo < zlo and zhi < hi
        return lo <= zlo and zhi <= hi

    def describe(self) -> str:
        if self.kind is RegionKind.SLAB:
            return f"slab(d={self.d!r})"
        return self.kind.value


class IsometryKind(str, Enum):
    IDENTITY = "identity"
    REFLECT_Z0 = "reflect_z0"
    TRANSLATE_Z = "translate_z"
    REFLECT_AT = "reflect_at"


@dataclass(frozen=True)
class Isometry:
    """Map ``z -> z + 2nd`` (translation) or ``z -> 2nd - z`` (reflection); t, x, y untouched."""

    kind: IsometryKind
    n: int = 0
    d: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", IsometryKind(self.kind))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", float(self.d))

    @property
    def parity(self) -> int:
        """+1 for orientation-preserving maps, -1 for reflections."""
        return -1 if self.kind in (IsometryKind.REFLECT_Z0, IsometryKind.REFLECT_AT) else 1

    # the affine action z -> parity * z + shift
    @property
    def shift(self) -> float:
        if self.kind in (IsometryKind.IDENTITY, IsometryKind.REFLECT_Z0):
            return 0.0
        return 2.0 * self.n * self.d

    def apply_z(self, z):
        return self.parity * z + self.shift

    def apply(self, p) -> SpacetimePoint:
        p = SpacetimePoint.of(p)
        return p.with_z(self.apply_z(p.z))

    def inverse(self) -> "Isometry":
        if self.kind is IsometryKind.TRANSLATE_Z:
            return Isometry(self.kind, -self.n, self.d)
        return self

    def compose(self, other: "Isometry") -> "Isometry":
        """``self ∘ other``."""
        parity = self.parity * other.parity
        shift = self.parity * other.shift + self.shift
        d = self.d or other.d
        return Isometry.from_affine(parity, shift, d)

    @classmethod
    def from_affine(cls, parity: int, shift: float, d: float) -> "Isometry":
        if abs(shift) < 1e-15:
            kind = IsometryKind.IDENTITY if parity > 0 else IsometryKind.REFLECT_Z0
            return cls(kind, 0, d)
        if d <= 0:
            raise ValidationError("nonzero image shift requires a slab width")
        n = shift / (2.0 * d)
        if abs(n - round(n)) > 1e-9:
            raise ValidationError(f"shift {shift} is not an image shift of width {d}")
        kind = IsometryKind.TRANSLATE_Z if parity > 0 else IsometryKind.REFLECT_AT
        return cls(kind, int(round(n)), d)


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box in (t, x, y, z)."""

    lo: tuple[float, float, float, float]
    hi: tuple[float, float, float, float]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 4 or len(hi) != 4:
            raise ValidationError("a box needs four lower and four upper bounds")
        if any(not (math.isfinite(a) and math.isfinite(b)) or a > b for a, b in zip(lo, hi)):
            raise ValidationError(f"degenerate or unbounded box {lo}..{hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def around(cls, center, halfwidths) -> "Box":
        c = SpacetimePoint.of(center).as_array()
        w = np.broadcast_to(np.asarray(halfwidths, dtype=float), (4,))
        return cls(tuple(c - w), tuple(c + w))

    @property
    def center(self) -> np.ndarray:
        return (np.array(self.lo) + np.array(self.hi)) / 2

    @property
    def halfwidths(self) -> np.ndarray:
        return (np.array(self.hi) - np.array(self.lo)) / 2

    def contains(self, p) -> bool:
        q = SpacetimePoint.of(p).as_array()
        return bool(np.all(q >= self.lo) and np.all(q <= self.hi))

    def union(self, other: "Box") -> "Box":
        return Box(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def shrink(self, factor: float) -> "Box":
        return Box.around(self.center, self.halfwidths * factor)

    def image(self, iso: Isometry) -> "Box":
        a, b = iso.apply_z(self.lo[3]), iso.apply_z(self.hi[3])
        lo, hi = list(self.lo), list(self.hi)
        lo[3], hi[3] = min(a, b), max(a, b)
        return Box(lo, hi)


def image_isometries(region: Region, zlo: float, zhi: float, source_zlo: float, source_zhi: float) -> list[Isometry]:
    """Nontrivial and trivial isometries whose image of ``[source_zlo, source_zhi]`` meets ``[zlo, zhi]``.

    The identity is always first when it qualifies.  Order is deterministic.
    """
    if region.kind is RegionKind.MINKOWSKI:
        raise ValidationError("the Minkowski region has no images")
    isos = []
    if region.kind is RegionKind.HALFSPACE:
        candidates = [Isometry(IsometryKind.IDENTITY), Isometry(IsometryKind.REFLECT_Z0)]
    else:
        d = region.d
        two_d = 2.0 * d
        # translation: image interval [a + 2nd, b + 2nd]; reflection: [2nd - b, 2nd - a]
        n_t = range(math.ceil((zlo - source_zhi) / two_d), math.floor((zhi - source_zlo) / two_d) + 1)
        n_r = range(math.ceil((zlo + source_zlo) / two_d), math.floor((zhi + source_zhi) / two_d) + 1)
        candidates = []
        for n in sorted(set(n_t) | set(n_r), key=lambda k: (abs(k), k)):
            if n in n_t:
                candidates.append(Isometry(IsometryKind.IDENTITY if n == 0 else IsometryKind.TRANSLATE_Z, n, d))
            if n in n_r:
                candidates.append(Isometry(IsometryKind.REFLECT_Z0 if n == 0 else IsometryKind.REFLECT_AT, n, d))
    for iso in candidates:
        a, b = sorted((iso.apply_z(source_zlo), iso.apply_z(source_zhi)))
        if b >= zlo and a <= zhi:
            isos.append(iso)
    return isos


def images(region: Region, p, window: Sequence[float] | None = None) -> list[tuple[int, SpacetimePoint]]:
    """Signed image points of ``p``.

    Half-space: the point and its mirror image.  Slab: all images ``z + 2nd``
    (sign +1) and ``2nd - z`` (sign -1) with z inside ``window``.
    """
    p = SpacetimePoint.of(p)
    if region.kind is RegionKind.MINKOWSKI:
        raise ValidationError("images are undefined without a boundary")
    if region.kind is RegionKind.HALFSPACE:
        return [(1, p), (-1, p.with_z(-p.z))]
    if window is None:
        raise ValidationError("slab images need a bounded z-window")
    zlo, zhi = float(window[0]), float(window[1])
    if not (math.isfinite(zlo) and math.isfinite(zhi)) or zlo > zhi:
        raise ValidationError(f"bad window {window}")
    return [(iso.parity, iso.apply(p)) for iso in image_isometries(region, zlo, zhi, p.z, p.z)]


def _max_time_separation(a: Box, b: Box) -> float:
    return max(abs(a.hi[0] - b.lo[0]), abs(b.hi[0] - a.lo[0]))


def _spatial_gap(a: Box, b: Box) -> float:
    gaps = [max(0.0, b.lo[i] - a.hi[i], a.lo[i] - b.hi[i]) for i in (1, 2, 3)]
    return math.sqrt(sum(g * g for g in gaps))


def causally_disjoint_boxes(a: Box, b: Box) -> bool:
    """True only if every point of ``a`` is spacelike to every point of ``b``.

    Conservative: compares the largest time separation with the smallest
    spatial distance, so it can say False for disjoint pairs but never True
    for connected ones.
    """
    return _max_time_separation(a, b) < _spatial_gap(a, b)


def _box_images(region: Region, a: Box, reach_lo: float, reach_hi: float) -> Iterator[Isometry]:
    yield from image_isometries(region, reach_lo, reach_hi, a.lo[3], a.hi[3])


def reflected_causally_disjoint(region: Region, a: Box, b: Box, include_direct: bool = True) -> bool:
    """True if ``a`` and all of its region images are spacelike to ``b``.

    With ``include_direct=False`` only the nontrivial images are tested.
    """
    if region.kind is RegionKind.MINKOWSKI:
        return causally_disjoint_boxes(a, b) if include_direct else True
    if not (region.contains_box(a) and region.contains_box(b)):
        raise SupportError(f"boxes must lie inside {region.describe()}")
    reach = _max_time_separation(a, b)
    for iso in _box_images(region, a, b.lo[3] - reach, b.hi[3] + reach):
        if iso.kind is IsometryKind.IDENTITY and not include_direct:
            continue
        if not causally_disjoint_boxes(a.image(iso), b):
            return False
    return True
