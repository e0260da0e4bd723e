"""Compactly supported test functions, the image maps and the wave operator.

A ``BumpTestFunction`` is ``amplitude * prod_i b((u_i - c_i)/w_i)``; a
``TestFunction`` is a finite sum of them.  ``eta_map`` and ``n_map`` build
``ImageExpansion`` objects: signed sums of reflected/translated copies, each
copy again a bump.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import bump1d
from .errors import ValidationError
from .geometry import Box, Isometry, IsometryKind, Region, RegionKind, image_isometries

__all__ = [
    "BumpTestFunction",
    "TestFunction",
    "ImageExpansion",
    "WaveOperator",
    "PField",
    "unit_bump",
    "as_test_function",
    "evaluate",
    "eta_map",
    "n_map",
    "image_sum",
    "apply_P",
]

ETA_NORMALIZATION = 1.0 / math.sqrt(2.0)


def _points(p) -> np.ndarray:
    arr = np.asarray(getattr(p, "as_array", lambda: p)(), dtype=float)
    if arr.shape[-1] != 4:
        raise ValidationError("points must have four coordinates (t, x, y, z)")
    return arr


@dataclass(frozen=True)
class BumpTestFunction:
    center: tuple[float, float, float, float]
    halfwidths: tuple[float, float, float, float]
    amplitude: float = 1.0

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        w = tuple(float(v) for v in np.broadcast_to(np.asarray(self.halfwidths, dtype=float), (4,)))
        if len(c) != 4:
            raise ValidationError("bump center needs four coordinates")
        if not all(math.isfinite(v) for v in c):
            raise ValidationError(f"bump center must be finite: {c}")
        if not all(math.isfinite(v) and v > 0 for v in w):
            raise ValidationError(f"bump halfwidths must be positive: {w}")
        if not math.isfinite(float(self.amplitude)):
            raise ValidationError("bump amplitude must be finite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "halfwidths", w)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @property
    def box(self) -> Box:
        return Box.around(self.center, self.halfwidths)

    @property
    def integral(self) -> float:
        return self.amplitude * math.prod(w * bump1d.BUMP_INTEGRAL for w in self.halfwidths)

    def derivative(self, points, orders: Sequence[int] = (0, 0, 0, 0)) -> np.ndarray:
        """Mixed coordinate derivative (each order <= 2) in closed form."""
        u = _points(points)
        out = np.full(u.shape[:-1], self.amplitude)
        for i in range(4):
            s = (u[..., i] - self.center[i]) / self.halfwidths[i]
            out = out * bump1d.bump_deriv(s, orders[i]) / self.halfwidths[i] ** orders[i]
        return out

    def __call__(self, points) -> np.ndarray:
        return self.derivative(points)

    def scaled(self, a: float) -> "BumpTestFunction":
        return BumpTestFunction(self.center, self.halfwidths, self.amplitude * a)

    def pullback(self, iso: Isometry) -> "BumpTestFunction":
        """``f ∘ iso`` (again a bump, since b is even)."""
        c = list(self.center)
        if iso.parity > 0:
            c[3] = c[3] - iso.shift
        else:
            c[3] = iso.shift - c[3]
        return BumpTestFunction(tuple(c), self.halfwidths, self.amplitude)

    def pushforward(self, iso: Isometry) -> "BumpTestFunction":
        """``f ∘ iso^{-1}``: the copy supported on ``iso(supp f)``."""
        return self.pullback(iso.inverse())

    def time_reversed(self) -> "BumpTestFunction":
        c = list(self.center)
        c[0] = -c[0]
        return BumpTestFunction(tuple(c), self.halfwidths, self.amplitude)

    def to_dict(self) -> dict:
        return {"center": list(self.center), "halfwidths": list(self.halfwidths), "amplitude": self.amplitude}


def unit_bump(center, halfwidths) -> BumpTestFunction:
    """Bump normalized to unit integral."""
    w = np.broadcast_to(np.asarray(halfwidths, dtype=float), (4,))
    return BumpTestFunction(tuple(center), tuple(w), 1.0 / float(np.prod(w * bump1d.BUMP_INTEGRAL)))


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # not a pytest class

    terms: tuple[BumpTestFunction, ...] = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            if not isinstance(t, BumpTestFunction):
                raise ValidationError(f"terms must be bumps, got {type(t).__name__}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def bump(cls, center, halfwidths, amplitude: float = 1.0) -> "TestFunction":
        return cls((BumpTestFunction(tuple(center), halfwidths, amplitude),))

    @classmethod
    def zero(cls) -> "TestFunction":
        return cls(())

    @property
    def is_zero(self) -> bool:
        return all(t.amplitude == 0 for t in self.terms)

    @property
    def box(self) -> Box | None:
        boxes = [t.box for t in self.terms if t.amplitude != 0]
        if not boxes:
            return None
        out = boxes[0]
        for b in boxes[1:]:
            out = out.union(b)
        return out

    @property
    def l1_bound(self) -> float:
        return sum(abs(t.integral) for t in self.terms)

    def derivative(self, points, orders=(0, 0, 0, 0)) -> np.ndarray:
        u = _points(points)
        out = np.zeros(u.shape[:-1])
        for t in self.terms:
            out = out + t.derivative(u, orders)
        return out

    def __call__(self, points) -> np.ndarray:
        return self.derivative(points)

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return TestFunction(self.terms + as_test_function(other).terms)

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return self + (-1.0) * as_test_function(other)

    def __neg__(self) -> "TestFunction":
        return (-1.0) * self

    def __mul__(self, a: float) -> "TestFunction":
        return TestFunction(tuple(t.scaled(float(a)) for t in self.terms))

    __rmul__ = __mul__

    def pullback(self, iso: Isometry) -> "TestFunction":
        return TestFunction(tuple(t.pullback(iso) for t in self.terms))

    def reflected(self) -> "TestFunction":
        """``f(x, -z)``."""
        return self.pullback(Isometry(IsometryKind.REFLECT_Z0))

    def time_reversed(self) -> "TestFunction":
        return TestFunction(tuple(t.time_reversed() for t in self.terms))

    def to_dict(self) -> dict:
        return {"terms": [t.to_dict() for t in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def key(self) -> str:
        """Canonical serialization used for ordering and equality of factors."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "TestFunction":
        try:
            terms = data["terms"]
            return cls(
                tuple(
                    BumpTestFunction(tuple(t["center"]), tuple(t["halfwidths"]), float(t.get("amplitude", 1.0)))
                    for t in terms
                )
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed test-function JSON: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "TestFunction":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


def as_test_function(f) -> TestFunction:
    if isinstance(f, TestFunction):
        return f
    if isinstance(f, BumpTestFunction):
        return TestFunction((f,))
    raise ValidationError(f"expected a test function, got {type(f).__name__}")


@dataclass(frozen=True)
class ImageExpansion:
    """Signed sum ``normalization * sum_sigma parity(sigma) * base∘sigma``.

    Half-space: identity and the reflection at z = 0.  Slab: all translations
    by 2nd and reflections z -> 2nd - z, enumerated lazily per window.
    """

    base: TestFunction
    region: Region
    normalization: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "base", as_test_function(self.base))
        if self.region.kind is RegionKind.MINKOWSKI:
            raise ValidationError("image expansions need a region with boundary")

    def isometries(self, zlo: float, zhi: float) -> list[Isometry]:
        box = self.base.box
        if box is None:
            return []
        return image_isometries(self.region, zlo, zhi, box.lo[3], box.hi[3])

    def window(self, zlo: float, zhi: float) -> TestFunction:
        """All image copies whose support meets ``[zlo, zhi]``, as a finite test function."""
        terms = []
        for iso in self.isometries(zlo, zhi):
            for t in self.base.terms:
                img = t.pushforward(iso)
                b = img.box
                if b.hi[3] >= zlo and b.lo[3] <= zhi:
                    terms.append(img.scaled(iso.parity * self.normalization))
        return TestFunction(tuple(terms))

    def derivative(self, points, orders=(0, 0, 0, 0)) -> np.ndarray:
        u = _points(points)
        if u.size == 0:
            return np.zeros(u.shape[:-1])
        z = u[..., 3]
        return self.window(float(np.min(z)), float(np.max(z))).derivative(u, orders)

    def __call__(self, points) -> np.ndarray:
        return self.derivative(points)


def evaluate(f, p) -> np.ndarray | float:
    """Value of a test function or image expansion at point(s) ``p``."""
    u = _points(p)
    val = f(u)
    return float(val) if np.ndim(val) == 0 else val


def eta_map(f) -> ImageExpansion:
    """Half-space image map with its 1/sqrt(2) normalization."""
    return ImageExpansion(as_test_function(f), Region.halfspace(), ETA_NORMALIZATION)


def n_map(f, d: float) -> ImageExpansion:
    """Slab image map (periodic and odd about every wall), unnormalized."""
    return ImageExpansion(as_test_function(f), Region.slab(d), 1.0)


def image_sum(region: Region, f) -> ImageExpansion | TestFunction:
    """Unnormalized signed image sum (``f`` itself for Minkowski)."""
    if region.kind is RegionKind.MINKOWSKI:
        return as_test_function(f)
    return ImageExpansion(as_test_function(f), region, 1.0)


@dataclass(frozen=True)
class WaveOperator:
    """``P = -d_t^2 + laplacian - xi R`` on flat space, where R = 0."""

    xi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.xi) and self.xi >= 0):
            raise ValidationError(f"coupling xi must be >= 0, got {self.xi}")

    def __call__(self, f) -> "PField":
        return PField(f)


_P_TERMS = ((-1.0, (2, 0, 0, 0)), (1.0, (0, 2, 0, 0)), (1.0, (0, 0, 2, 0)), (1.0, (0, 0, 0, 2)))


@dataclass(frozen=True)
class PField:
    """Closed-form ``P f`` for a test function or image expansion."""

    source: object

    def __call__(self, points) -> np.ndarray:
        u = _points(points)
        return sum(s * self.source.derivative(u, o) for s, o in _P_TERMS)

    @property
    def box(self):
        return getattr(self.source, "box", None)


def apply_P(f) -> PField:
    return PField(f if isinstance(f, ImageExpansion) else as_test_function(f))


def random_bump(rng: np.random.Generator, center_lo: Iterable[float], center_hi: Iterable[float],
                width_lo: float = 0.3, width_hi: float = 0.6, unit: bool = True) -> BumpTestFunction:
    c = rng.uniform(np.asarray(center_lo, float), np.asarray(center_hi, float))
    w = rng.uniform(width_lo, width_hi, size=4)
    if unit:
        return unit_bump(tuple(c), tuple(w))
    return BumpTestFunction(tuple(c), tuple(w), 1.0)
