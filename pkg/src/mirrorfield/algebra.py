"""Polynomial observables and the star product built on a kernel pairing.

A ``PolynomialFunctional`` is ``Σ c ∏_i <f_i, φ>``.  Functional derivatives of
such a term vanish beyond its degree, so the star product

    F ⋆ G = Σ_n (iħ/2)^n / n! <F^(n), K^{⊗n} G^(n)>

is a finite sum.  With ``F^(n)`` written as a sum over ordered n-tuples of
distinct factors, the ``n!`` cancels and the n-th order becomes a sum over
n-subsets of each side and bijections between them.
"""

from __future__ import annotations

import itertools
import json
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ObstructionError, ValidationError
from .geometry import Region, RegionKind, reflected_causally_disjoint
from .propagators import (
    DEFAULT_CONFIG,
    PairingBackendConfig,
    SmoothCutoff,
    pair_E,
    pair_E_boundary,
    time_slice_representative,
)
from .states import TwoPointPairing
from .testfields import TestFunction, as_test_function, image_sum, random_bump

__all__ = [
    "PolynomialFunctional",
    "KernelPairing",
    "StarConfig",
    "star",
    "commutator",
    "star_H",
    "hadamard_config",
    "expectation_value",
    "ordered_expectation",
    "time_slice_check",
]

NORMAL_FORM_TOL = 1e-9

Factors = tuple[TestFunction, ...]


def _sorted_factors(factors: Iterable) -> Factors:
    fs = [as_test_function(f) for f in factors]
    return tuple(sorted(fs, key=lambda f: f.key()))


def _signature(factors: Factors) -> tuple[str, ...]:
    return tuple(f.key() for f in factors)


@dataclass(frozen=True)
class PolynomialFunctional:
    """Finite sum of ``coefficient * ∏ <f, φ>`` in normal form.

    Factors within a term are sorted by their canonical key and terms with the
    same factor multiset are merged, so equal functionals have equal terms.
    """

    terms: tuple[tuple[complex, Factors], ...] = ()

    def __post_init__(self):
        merged: dict[tuple[str, ...], list] = {}
        for coef, factors in self.terms:
            factors = _sorted_factors(factors)
            sig = _signature(factors)
            if sig in merged:
                merged[sig][0] += complex(coef)
            else:
                merged[sig] = [complex(coef), factors]
        out = tuple((c, fs) for sig, (c, fs) in sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0]))
                    if c != 0)
        object.__setattr__(self, "terms", out)

    # construction
    @classmethod
    def constant(cls, c: complex = 1.0) -> "PolynomialFunctional":
        return cls(((c, ()),))

    @classmethod
    def linear(cls, f, c: complex = 1.0) -> "PolynomialFunctional":
        return cls(((c, (as_test_function(f),)),))

    @classmethod
    def monomial(cls, factors: Sequence, c: complex = 1.0) -> "PolynomialFunctional":
        return cls(((c, tuple(factors)),))

    @classmethod
    def zero(cls) -> "PolynomialFunctional":
        return cls(())

    @property
    def degree(self) -> int:
        return max((len(fs) for _, fs in self.terms), default=0)

    def coefficient(self, factors: Sequence = ()) -> complex:
        sig = _signature(_sorted_factors(factors))
        for c, fs in self.terms:
            if _signature(fs) == sig:
                return c
        return 0j

    def scalar(self) -> complex:
        return self.coefficient(())

    def factors(self) -> list[TestFunction]:
        """Distinct factor test functions, in key order."""
        seen = {}
        for _, fs in self.terms:
            for f in fs:
                seen.setdefault(f.key(), f)
        return [seen[k] for k in sorted(seen)]

    # arithmetic
    def __add__(self, other) -> "PolynomialFunctional":
        other = _as_functional(other)
        return PolynomialFunctional(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> "PolynomialFunctional":
        return self * -1.0

    def __sub__(self, other) -> "PolynomialFunctional":
        return self + (-1.0) * _as_functional(other)

    def __rsub__(self, other) -> "PolynomialFunctional":
        return _as_functional(other) - self

    def __mul__(self, other) -> "PolynomialFunctional":
        """Scalar multiple, or the pointwise (commutative) product."""
        if isinstance(other, PolynomialFunctional):
            return PolynomialFunctional(tuple((a * b, fa + fb) for a, fa in self.terms for b, fb in other.terms))
        return PolynomialFunctional(tuple((complex(other) * c, fs) for c, fs in self.terms))

    __rmul__ = __mul__

    def adjoint(self) -> "PolynomialFunctional":
        """``F*``: conjugate coefficients (factors are real test functions)."""
        return PolynomialFunctional(tuple((c.conjugate(), fs) for c, fs in self.terms))

    def max_abs_difference(self, other) -> float:
        a, b = self._table(), _as_functional(other)._table()
        return max((abs(a.get(k, 0j) - b.get(k, 0j)) for k in set(a) | set(b)), default=0.0)

    def allclose(self, other, tol: float = NORMAL_FORM_TOL) -> bool:
        return self.max_abs_difference(other) <= tol

    def _table(self) -> dict[tuple[str, ...], complex]:
        return {_signature(fs): c for c, fs in self.terms}

    # serialization
    def to_dict(self) -> dict:
        return {"terms": [{"coefficient": [c.real, c.imag], "factors": [f.to_dict() for f in fs]}
                          for c, fs in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "PolynomialFunctional":
        try:
            terms = []
            for t in data["terms"]:
                c = t.get("coefficient", 1.0)
                c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
                terms.append((c, tuple(TestFunction.from_dict(f) for f in t["factors"])))
            return cls(tuple(terms))
        except (KeyError, TypeError, IndexError) as exc:
            raise ValidationError(f"malformed functional JSON: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "PolynomialFunctional":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc


def _as_functional(x) -> PolynomialFunctional:
    if isinstance(x, PolynomialFunctional):
        return x
    if isinstance(x, (int, float, complex)):
        return PolynomialFunctional.constant(x)
    raise ValidationError(f"cannot combine a functional with {type(x).__name__}")


# ---------------------------------------------------------------- pairings


class KernelPairing:
    """Memoized bilinear form ``K(f, g)`` on test functions.

    ``antisymmetric`` pairings (``E`` and its boundary versions) are evaluated
    once per unordered pair.
    """

    def __init__(self, fn: Callable[[TestFunction, TestFunction], complex], name: str,
                 antisymmetric: bool = False, region: Region | None = None):
        self._fn = fn
        self.name = name
        self.antisymmetric = antisymmetric
        self.region = region or Region.minkowski()
        self._cache: dict[tuple[str, str], complex] = {}
        self._lock = threading.Lock()

    def __call__(self, f, g) -> complex:
        f, g = as_test_function(f), as_test_function(g)
        kf, kg = f.key(), g.key()
        with self._lock:
            hit = self._cache.get((kf, kg))
        if hit is not None:
            return hit
        if self.antisymmetric and kf == kg:
            val = 0j
        else:
            val = complex(self._fn(f, g))
        with self._lock:
            self._cache[(kf, kg)] = val
            if self.antisymmetric:
                self._cache[(kg, kf)] = -val
        return val

    def store(self, f, g, value: complex) -> None:
        with self._lock:
            self._cache[(as_test_function(f).key(), as_test_function(g).key())] = complex(value)

    def prime(self, fs: Sequence) -> None:
        """Fill the cache for all ordered pairs of ``fs`` (one call each)."""
        for f in fs:
            for g in fs:
                self(f, g)

    @classmethod
    def causal(cls, region: Region | None = None, cfg: PairingBackendConfig | None = None) -> "KernelPairing":
        """``E`` (Minkowski) or the boundary pairing ``E_Ω`` (position backend)."""
        region = region or Region.minkowski()
        cfg = cfg or DEFAULT_CONFIG
        if region.kind is RegionKind.MINKOWSKI:
            fn = lambda f, g: pair_E(f, g, "position", cfg)
        else:
            fn = lambda f, g: pair_E_boundary(region, f, g, "position", cfg)
        return cls(fn, f"E[{region.describe()}]", antisymmetric=True, region=region)

    @classmethod
    def from_state(cls, state: TwoPointPairing, fs: Sequence) -> tuple["KernelPairing", "KernelPairing"]:
        """The two-point pairing of ``state`` and the matching causal pairing,
        both filled from one Gram matrix over ``fs`` (``M - M^T = i E``)."""
        fs = [as_test_function(f) for f in fs]
        M = state.gram(fs)
        two = cls.two_point(state)
        causal = cls.causal(state.region, state.cfg)
        for i, f in enumerate(fs):
            for j, g in enumerate(fs):
                two.store(f, g, M[i, j])
                causal.store(f, g, ((M[i, j] - M[j, i]) / 1j).real)
        return two, causal

    @classmethod
    def two_point(cls, state: TwoPointPairing) -> "KernelPairing":
        def fn(f, g):
            state.check_domain(f)
            state.check_domain(g)
            return state(f, g)
        return cls(fn, f"omega2[{state.region.describe()}]", region=state.region)

    @classmethod
    def hadamard(cls, cfg: PairingBackendConfig | None = None,
                 two_point: "KernelPairing | None" = None) -> "KernelPairing":
        """``-2i H`` with ``H`` the Minkowski vacuum two-point function."""
        base = two_point or cls.two_point(TwoPointPairing(Region.minkowski(), cfg or DEFAULT_CONFIG))
        return cls(lambda f, g: -2j * base(f, g), "-2iH", region=Region.minkowski())


@dataclass(frozen=True)
class StarConfig:
    pairing: KernelPairing = field(default_factory=KernelPairing.causal)
    hbar: float = 1.0
    antisymmetric: bool | None = None

    def __post_init__(self):
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        if self.antisymmetric is None:
            object.__setattr__(self, "antisymmetric", self.pairing.antisymmetric)


# ---------------------------------------------------------------- products


def _contractions(a: Factors, b: Factors, n: int):
    """(left indices, right indices in matched order) for every n-contraction."""
    for S in itertools.combinations(range(len(a)), n):
        for T in itertools.permutations(range(len(b)), n):
            yield S, T


def _star_terms(a: Factors, b: Factors, K: KernelPairing, scale: complex, max_order: int | None):
    top = min(len(a), len(b)) if max_order is None else min(len(a), len(b), max_order)
    for n in range(top + 1):
        pref = scale**n
        for S, T in _contractions(a, b, n):
            val = pref
            for i, j in zip(S, T):
                val *= K(a[i], b[j])
            if val == 0:
                continue
            rest = tuple(f for i, f in enumerate(a) if i not in S) + tuple(f for j, f in enumerate(b) if j not in T)
            yield val, rest


def star(F, G, cfg: StarConfig | None = None, max_order: int | None = None) -> PolynomialFunctional:
    """``F ⋆ G`` (exact finite sum); ``max_order`` truncates the series for grading checks."""
    cfg = cfg or StarConfig()
    F, G = _as_functional(F), _as_functional(G)
    scale = 0.5j * cfg.hbar
    out = []
    for ca, fa in F.terms:
        for cb, fb in G.terms:
            for val, rest in _star_terms(fa, fb, cfg.pairing, scale, max_order):
                out.append((ca * cb * val, rest))
    return PolynomialFunctional(tuple(out))


def commutator(F, G, cfg: StarConfig | None = None) -> PolynomialFunctional:
    cfg = cfg or StarConfig()
    return star(F, G, cfg) - star(G, F, cfg)


def hadamard_config(region: Region | None = None, functionals: Sequence = (), hbar: float = 1.0,
                    two_point: KernelPairing | None = None,
                    cfg: PairingBackendConfig | None = None) -> StarConfig:
    """Star configuration with ``-2iH``, after checking it is locally admissible.

    In a region with boundary the vacuum parametrix only describes the state
    where no factor is causally connected to any image of another (or of
    itself); elsewhere the product is not defined without a further non-local
    deformation, which is not provided.
    """
    region = region or Region.minkowski()
    if region.kind is not RegionKind.MINKOWSKI:
        facs = []
        for F in functionals:
            facs.extend(_as_functional(F).factors())
        for f in facs:
            if f.box is not None and not region.contains_box(f.box, strict=True):
                raise ObstructionError(
                    f"star_H requested with a factor touching the boundary of {region.describe()}; "
                    "the H-deformed product is only defined locally, away from reflected causal curves")
        for f, g in itertools.product(facs, repeat=2):
            if f.box is None or g.box is None:
                continue
            if not reflected_causally_disjoint(region, f.box, g.box, include_direct=False):
                raise ObstructionError(
                    f"factors are connected by a causal curve reflected at the boundary of {region.describe()}; "
                    "the H-deformed product is only defined locally and the global deformation is not provided")
    return StarConfig(KernelPairing.hadamard(cfg, two_point), hbar, antisymmetric=False)


def star_H(F, G, region: Region | None = None, hbar: float = 1.0, two_point: KernelPairing | None = None,
           cfg: PairingBackendConfig | None = None) -> PolynomialFunctional:
    """``F ⋆_H G``: the star product with ``E`` replaced by ``-2iH``."""
    return star(F, G, hadamard_config(region, (F, G), hbar, two_point, cfg))


# ---------------------------------------------------------------- states


def _state_pairing(state) -> KernelPairing:
    if isinstance(state, KernelPairing):
        return state
    if isinstance(state, TwoPointPairing):
        return KernelPairing.two_point(state)
    raise ValidationError("state must be a TwoPointPairing or a two-point KernelPairing")


def _matchings(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, other in enumerate(rest):
        for m in _matchings(rest[:k] + rest[k + 1:]):
            yield [(first, other)] + m


def expectation_value(state, F, hbar: float = 1.0) -> complex:
    """Quasi-free expectation: Wick pairings of each term's factors with the
    symmetric part of the two-point function (the pointwise product is symmetric)."""
    K = _state_pairing(state)
    F = _as_functional(F)
    total = 0j
    for c, fs in F.terms:
        if len(fs) % 2:
            continue
        acc = 0j
        for m in _matchings(list(range(len(fs)))):
            val = 1.0 + 0j
            for i, j in m:
                val *= hbar * 0.5 * (K(fs[i], fs[j]) + K(fs[j], fs[i]))
            acc += val
        total += c * acc
    return total


def ordered_expectation(state, functionals: Sequence, hbar: float = 1.0) -> complex:
    """``ω(F_1 ⋆ F_2 ⋆ ... ⋆ F_k)`` computed directly from Wightman combinatorics:
    pairs inside one ``F_i`` use the symmetric part, pairs across use the
    two-point function in operator order.  Independent of :func:`star`."""
    K = _state_pairing(state)
    Fs = [_as_functional(F) for F in functionals]
    total = 0j
    for combo in itertools.product(*[F.terms for F in Fs]):
        coef = complex(np.prod([c for c, _ in combo])) if combo else 1.0 + 0j
        flat, block = [], []
        for b, (_, fs) in enumerate(combo):
            flat.extend(fs)
            block.extend([b] * len(fs))
        if len(flat) % 2:
            continue
        acc = 0j
        for m in _matchings(list(range(len(flat)))):
            val = 1.0 + 0j
            for i, j in m:
                if block[i] == block[j]:
                    val *= hbar * 0.5 * (K(flat[i], flat[j]) + K(flat[j], flat[i]))
                else:
                    val *= hbar * K(flat[i], flat[j])
            acc += val
        total += coef * acc
    return total


# ---------------------------------------------------------------- time slice


def _linear_source(F) -> TestFunction:
    F = _as_functional(F)
    f = TestFunction.zero()
    for c, fs in F.terms:
        if len(fs) != 1:
            raise ValidationError("time_slice_check needs a linear functional")
        if abs(c.imag) > 0:
            raise ValidationError("time_slice_check needs real coefficients")
        f = f + c.real * fs[0]
    if f.is_zero:
        raise ValidationError("time_slice_check needs a nonzero linear functional")
    return f


def sample_sources(region: Region, f: TestFunction, count: int = 5, seed: int = 0) -> list[TestFunction]:
    """Random bump sources in the region near ``supp f`` (interior for the slab)."""
    rng = np.random.default_rng(seed)
    box = f.box
    lo = np.asarray(box.lo) - 0.5
    hi = np.asarray(box.hi) + 0.5
    if region.kind is not RegionKind.MINKOWSKI:
        zlo, zhi = region.z_bounds()
        lo[3] = max(lo[3], zlo + 0.7)
        hi[3] = min(hi[3], zhi - 0.7) if math.isfinite(zhi) else hi[3]
        if hi[3] < lo[3]:
            lo[3] = hi[3] = (zlo + zhi) / 2
    return [TestFunction((random_bump(rng, lo, hi, 0.3, 0.6),)) for _ in range(count)]


def time_slice_check(F, cutoff: SmoothCutoff, region: Region | None = None, sources: Sequence | None = None,
                     seed: int = 0, cfg: PairingBackendConfig | None = None) -> float:
    """``max_α |∫ f φ - ∫ h φ|`` over solutions ``φ = E(I α)``.

    ``∫ f φ`` uses the position backend; ``∫ h φ`` uses the closed-form time
    integrals of the representative in momentum space.
    """
    region = region or Region.minkowski()
    f = _linear_source(F)
    rep = time_slice_representative(region, f, cutoff, cfg)
    sources = sample_sources(region, f, 5, seed) if sources is None else [as_test_function(a) for a in sources]
    grid_cfg = (cfg or DEFAULT_CONFIG).spectral
    sliced = rep.pair_solutions(sources, grid_cfg)
    direct = [pair_E(f, image_sum(region, a), "position", cfg) for a in sources]
    return float(max(abs(x - y) for x, y in zip(direct, sliced)))
