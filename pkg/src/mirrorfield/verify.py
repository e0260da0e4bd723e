"""Deterministic invariant suites behind ``mirrorfield verify``.

Every suite draws its random inputs from ``numpy.random.default_rng(seed)``
and returns a list of :class:`Check` records.  Nothing time- or
thread-dependent enters a record, so reports are byte-reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import __version__, algebra, bump1d, casimir, geometry, propagators, states
from .errors import ObstructionError, ValidationError
from .geometry import Box, Region, RegionKind, SpacetimePoint
from .testfields import (
    BumpTestFunction,
    TestFunction,
    apply_P,
    eta_map,
    n_map,
    random_bump,
    unit_bump,
)

__all__ = ["Check", "SUITES", "run_suites", "report_json", "summary"]


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    tolerance: float
    measured: float
    passed: bool


class _Collector:
    def __init__(self, suite: str):
        self.suite = suite
        self.checks: list[Check] = []

    def at_most(self, name: str, measured: float, tol: float) -> None:
        m = float(measured)
        self.checks.append(Check(self.suite, name, float(tol), m, bool(m <= tol)))

    def at_least(self, name: str, measured: float, floor: float) -> None:
        m = float(measured)
        self.checks.append(Check(self.suite, name, float(floor), m, bool(m >= floor)))

    def within(self, name: str, measured: float, target: float, tol: float) -> None:
        m = float(measured)
        self.checks.append(Check(self.suite, name, float(tol), m, bool(abs(m - target) <= tol)))


def _tf(b) -> TestFunction:
    return TestFunction((b,))


# ---------------------------------------------------------------- random families


_HALF_LO, _HALF_HI = (-0.5, -0.5, -0.5, 0.8), (0.5, 0.5, 0.5, 1.6)
DEFAULT_SLAB_D = 2.0
MIN_SLAB_D = 2.0
_SLAB_LO, _SLAB_HI = (-0.5, -0.5, -0.5, 0.7), (0.5, 0.5, 0.5, 1.3)
_FREE_LO, _FREE_HI = (-0.5, -0.5, -0.5, -0.5), (0.5, 0.5, 0.5, 0.5)


def family_bounds(region: Region) -> tuple[tuple, tuple]:
    """Center ranges for random bumps (halfwidths 0.3-0.6) lying inside ``region``."""
    if region.kind is RegionKind.HALFSPACE:
        return _HALF_LO, _HALF_HI
    if region.kind is RegionKind.SLAB:
        mid = region.d / 2
        return (-0.5, -0.5, -0.5, mid - 0.3), (0.5, 0.5, 0.5, mid + 0.3)
    return _FREE_LO, _FREE_HI


def random_family(rng, region: Region, n: int) -> list[TestFunction]:
    lo, hi = family_bounds(region)
    return [_tf(random_bump(rng, lo, hi)) for _ in range(n)]


def reflected_disjoint_pair(rng, region: Region) -> tuple[TestFunction, TestFunction]:
    """A pair that may be causally related directly but not through any image."""
    z0 = 4.0
    while True:
        c = np.array([0.0, 0.0, 0.0, z0])
        f = _tf(random_bump(rng, c - [0.3, 0.5, 0.5, 0.5], c + [0.3, 0.5, 0.5, 0.5]))
        g = _tf(random_bump(rng, c - [0.3, 0.5, 0.5, 0.5], c + [0.3, 0.5, 0.5, 0.5]))
        if geometry.reflected_causally_disjoint(region, f.box, g.box, include_direct=False):
            return f, g


def causally_disjoint_pair(rng, z0: float = 0.0) -> tuple[TestFunction, TestFunction]:
    while True:
        f = _tf(random_bump(rng, (-0.2, -0.2, -0.2, z0 - 0.2), (0.2, 0.2, 0.2, z0 + 0.2)))
        g = _tf(random_bump(rng, (-0.2, 2.8, -0.2, z0 - 0.2), (0.2, 3.2, 0.2, z0 + 0.2)))
        if geometry.causally_disjoint_boxes(f.box, g.box):
            return f, g


def _random_box(rng, lo, hi, wmax=0.5) -> Box:
    return Box.around(rng.uniform(lo, hi), rng.uniform(0.05, wmax, size=4))


# ---------------------------------------------------------------- suites


def suite_geometry(seed: int) -> list[Check]:
    col = _Collector("geometry")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(100, 2, 4))
    col.at_most("interval symmetric", max(abs(geometry.interval(a, b) - geometry.interval(b, a)) for a, b in pts), 0.0)
    bad = 0
    for _ in range(50):
        d = rng.uniform(0.5, 2.0)
        zlo = rng.uniform(-5, 5)
        W = rng.uniform(0.5, 6.0)
        p = SpacetimePoint(0, 0, 0, rng.uniform(0, d))
        n = len(geometry.images(Region.slab(d), p, (zlo, zlo + W)))
        bad += not (math.floor(W / d) <= n <= math.ceil(W / d) + 2)
    col.at_most("slab image count per window", bad, 0)
    bad = 0
    for region in (Region.halfspace(), Region.slab(1.5)):
        lo, hi = region.z_bounds()
        hi = 3.0 if not math.isfinite(hi) else hi
        for _ in range(50):
            p = SpacetimePoint(*rng.normal(size=3), rng.uniform(lo + 1e-3, hi - 1e-3))
            window = (lo - 4 * hi, hi + 4 * hi)
            imgs = geometry.images(region, p, window) if region.kind is RegionKind.SLAB else geometry.images(region, p)
            for sign, q in imgs:
                if (sign, q) == (1, p):
                    continue
                bad += region.contains(q)
    col.at_most("nontrivial images leave the region", bad, 0)
    flips = 0
    region = Region.halfspace()
    for _ in range(100):
        a = _random_box(rng, (-1, -2, -2, 1.0), (1, 2, 2, 4.0))
        b = _random_box(rng, (-1, -2, -2, 1.0), (1, 2, 2, 4.0))
        if not (region.contains_box(a) and region.contains_box(b)):
            continue
        if geometry.reflected_causally_disjoint(region, a, b):
            flips += not geometry.reflected_causally_disjoint(region, a.shrink(0.5), b)
            flips += not geometry.reflected_causally_disjoint(region, a, b.shrink(0.7))
    col.at_most("reflected disjointness monotone under shrinking", flips, 0)
    return col.checks


def _overlap_1d(a, i: int, b, oa: int, ob: int, order: int = 200) -> float:
    """``∫ a_i^(oa) b_i^(ob) du`` for the i-th factors of two bumps."""
    lo = max(a.center[i] - a.halfwidths[i], b.center[i] - b.halfwidths[i])
    hi = min(a.center[i] + a.halfwidths[i], b.center[i] + b.halfwidths[i])
    if hi <= lo:
        return 0.0
    x, w = bump1d.gauss_legendre(order)
    u = (lo + hi) / 2 + (hi - lo) / 2 * x
    fa = bump1d.bump_deriv((u - a.center[i]) / a.halfwidths[i], oa) / a.halfwidths[i] ** oa
    fb = bump1d.bump_deriv((u - b.center[i]) / b.halfwidths[i], ob) / b.halfwidths[i] ** ob
    return float(np.sum(w * fa * fb) * (hi - lo) / 2)


def pairing_with_P(f: TestFunction, g: TestFunction, left: bool) -> float:
    """``∫ (Pf) g`` (``left``) or ``∫ f (Pg)`` by separable one-dimensional quadrature."""
    total = 0.0
    for a in f.terms:
        for b in g.terms:
            for i, sign in enumerate((-1.0, 1.0, 1.0, 1.0)):
                prod = sign * a.amplitude * b.amplitude
                for j in range(4):
                    o = 2 if i == j else 0
                    prod *= _overlap_1d(a, j, b, o if left else 0, 0 if left else o)
                total += prod
    return total


def suite_testfields(seed: int) -> list[Check]:
    col = _Collector("testfields")
    rng = np.random.default_rng(seed + 1)
    f = _tf(random_bump(rng, (-0.3,) * 4, (0.3,) * 4, unit=False))
    g = _tf(random_bump(rng, (-0.3,) * 4, (0.3,) * 4, unit=False))
    u = rng.uniform(-0.6, 0.6, size=(200, 4))
    a, b = rng.normal(size=2)
    col.at_most("linearity", np.max(np.abs((a * f + b * g)(u) - a * f(u) - b * g(u))), 1e-14)
    h = _tf(random_bump(rng, (-0.3, -0.3, -0.3, 1.1), (0.3, 0.3, 0.3, 1.9), unit=False))
    e = eta_map(h)
    v = rng.uniform([-0.6, -0.6, -0.6, -2.5], [0.6, 0.6, 0.6, 2.5], size=(200, 4))
    vr = v * [1, 1, 1, -1]
    col.at_most("eta output odd in z", np.max(np.abs(e(vr) + e(v))), 0.0)
    d = 1.0
    k = _tf(random_bump(rng, (-0.3, -0.3, -0.3, 0.45), (0.3, 0.3, 0.3, 0.55), 0.3, 0.4, unit=False))
    N = n_map(k, d)
    col.at_most("N periodic under z -> z + 2d", np.max(np.abs(N(v + [0, 0, 0, 2 * d]) - N(v))), 1e-15)
    col.at_most("N odd about z = 0", np.max(np.abs(N(vr) + N(v))), 1e-15)
    col.at_most("N odd about z = d", np.max(np.abs(N(v * [1, 1, 1, -1] + [0, 0, 0, 2 * d]) + N(v))), 1e-15)
    lhs, rhs = pairing_with_P(f, g, True), pairing_with_P(f, g, False)
    col.at_most("P formally self-adjoint (relative)", abs(lhs - rhs) / max(abs(lhs), 1e-300), 1e-6)
    Pf = apply_P(f)
    refl = h.reflected()
    col.at_most("P commutes with reflection",
                np.max(np.abs(apply_P(refl)(v) - apply_P(h)(vr))), 1e-9 * max(1.0, np.max(np.abs(apply_P(h)(vr)))))
    c = np.array(f.terms[0].center)
    hstep = 1e-3
    fd = propagators.finite_difference_P(f, c, hstep)
    col.at_most("P bump vs finite differences at h=1e-3", abs(fd - float(Pf(c))), 1e-4)
    return col.checks


FD_BUMP = BumpTestFunction((0.0, 0.0, 0.0, 0.0), (0.5, 0.5, 0.5, 0.5), 1.0)


def fd_order_check(n_probes: int, rng, steps=(0.04, 0.02), cfg=None) -> tuple[float, float, float]:
    """Max ``|P_h E^- f - f|`` at two steps plus the (max-error) ratio."""
    f = _tf(FD_BUMP)
    ret = propagators.retarded(f, cfg)
    probes = rng.uniform([-0.3, -0.4, -0.4, -0.4], [1.2, 0.4, 0.4, 0.4], size=(n_probes, 4))
    errs = []
    for h in steps:
        errs.append(max(abs(propagators.finite_difference_P(ret, p, h) - float(f(p))) for p in probes))
    return errs[0], errs[1], errs[0] / max(errs[1], 1e-300)


def suite_propagators(seed: int) -> list[Check]:
    col = _Collector("propagators")
    rng = np.random.default_rng(seed + 2)
    cfg = propagators.DEFAULT_CONFIG
    fam = random_family(rng, Region.minkowski(), 6)
    pairs = [(fam[0], fam[1]), (fam[2], fam[3]), (fam[4], fam[5])]
    anti, agree = 0.0, 0.0
    for f, g in pairs:
        a = propagators.pair_E(f, g, "position")
        b = propagators.pair_E(g, f, "position")
        anti = max(anti, abs(a + b) / (2 * cfg.tolerance(abs(a))))
        m = propagators.pair_E(f, g, "momentum")
        agree = max(agree, abs(a - m) / cfg.tolerance(abs(a)))
    col.at_most("pair_E antisymmetric (in units of 2x tolerance)", anti, 1.0)
    col.at_most("position/momentum backends agree (in units of tolerance)", agree, 1.0)
    col.at_most("pair_E(f, f)", abs(propagators.pair_E(fam[0], fam[0], "position")), 1e-8)
    e1, e2, ratio = fd_order_check(4, rng)
    col.at_most("finite-difference P E^- f = f at h=0.02", e2, 1e-3)
    col.within("finite-difference error ratio h -> h/2 (second order)", ratio, 4.0, 1.0)
    f = _tf(FD_BUMP)
    before = rng.uniform([-3.0, -1, -1, -1], [-0.55, 1, 1, 1], size=(5, 4))
    col.at_most("retarded field vanishes before the source", np.max(np.abs(propagators.retarded(f)(before))), 0.0)
    col.at_most("advanced field vanishes after the source",
                np.max(np.abs(propagators.advanced(f)(before * [-1, 1, 1, 1]))), 0.0)
    g = _tf(random_bump(rng, (-0.2,) * 4, (0.2,) * 4))
    q = rng.uniform([-1.5, -0.5, -0.5, -0.5], [-0.5, 0.5, 0.5, 0.5], size=(3, 4))
    adv = propagators.advanced(g)(q)
    ret = propagators.retarded(g.time_reversed())(q * [-1, 1, 1, 1])
    col.at_most("advanced = time-reversed retarded (relative)", np.max(np.abs(adv - ret)) / np.max(np.abs(adv)), 1e-8)
    for region, alpha in ((Region.halfspace(), eta_map(_tf(random_bump(rng, (-0.3, -.3, -.3, 0.5), (0.3, .3, .3, 0.9))))),
                          (Region.slab(1.5), n_map(_tf(random_bump(rng, (-0.3, -.3, -.3, 0.65), (0.3, .3, .3, 0.85), 0.3, 0.45)), 1.5))):
        walls = [0.0] if region.kind is RegionKind.HALFSPACE else [0.0, region.d]
        field = propagators.causal_field(alpha)
        worst = 0.0
        for zw in walls:
            p = rng.uniform([0.6, -0.5, -0.5, zw], [1.4, 0.5, 0.5, zw], size=(3, 4))
            worst = max(worst, float(np.max(np.abs(field(p)))))
        col.at_most(f"Dirichlet vanishing on the walls ({region.describe()})", worst, 1e-6)
    return col.checks


def suite_causality(seed: int) -> list[Check]:
    col = _Collector("causality")
    rng = np.random.default_rng(seed + 3)
    for region in (Region.halfspace(), Region.slab(8.0)):
        norm = states.TwoPointPairing(region).normalization
        worst = 0.0
        for _ in range(3):
            f, g = reflected_disjoint_pair(rng, region)
            worst = max(worst, abs(propagators.pair_E_boundary(region, f, g) - norm * propagators.pair_E(f, g)))
        col.at_most(f"boundary pairing = bulk pairing away from images ({region.describe()})", worst, 1e-6)
    worst = 0.0
    for region in (Region.minkowski(), Region.halfspace()):
        cfg = algebra.StarConfig(algebra.KernelPairing.causal(region))
        for _ in range(2):
            f, g = causally_disjoint_pair(rng, 0.0 if region.kind is RegionKind.MINKOWSKI else 1.0)
            c = algebra.commutator(algebra.PolynomialFunctional.linear(f), algebra.PolynomialFunctional.linear(g), cfg)
            worst = max(worst, max((abs(x) for x, _ in c.terms), default=0.0))
    col.at_most("linear commutators vanish for causally disjoint supports", worst, 1e-6)
    cut = propagators.SmoothCutoff(-1.1, -0.6)
    f = _tf(unit_bump((0.0, 0.0, 0.0, 1.2), (0.3, 0.3, 0.3, 0.3)))
    F = algebra.PolynomialFunctional.linear(f)
    for region in (Region.minkowski(), Region.halfspace(), Region.slab(2.5)):
        res = algebra.time_slice_check(F, cut, region, seed=seed)
        col.at_most(f"time-slice residual over 5 solutions ({region.describe()})", res, 1e-4)
    rep = propagators.time_slice_representative(Region.minkowski(), f, cut)
    out = rng.uniform([-3, -1, -1, 0], [3, 1, 1, 2], size=(50, 4))
    out[:, 0] = np.where(out[:, 0] > -0.85, out[:, 0] + 0.25, out[:, 0] - 0.25)
    col.at_most("representative vanishes outside the cutoff slab", np.max(np.abs(rep(out))), 0.0)
    return col.checks


def ccr_defect(region: Region, f: TestFunction, g: TestFunction) -> float:
    M = states.TwoPointPairing(region).gram([f, g])
    if region.kind is RegionKind.MINKOWSKI:
        E = propagators.pair_E(f, g, "position")
    else:
        E = propagators.pair_E_boundary(region, f, g, "position")
    return abs(M[0, 1] - M[1, 0] - 1j * E)


def suite_states(seed: int, slab_d: float = DEFAULT_SLAB_D) -> list[Check]:
    col = _Collector("states")
    rng = np.random.default_rng(seed + 4)
    regions = (Region.minkowski(), Region.halfspace(), Region.slab(slab_d))
    for region in regions:
        worst = 0.0
        for _ in range(3):
            f, g = random_family(rng, region, 2)
            worst = max(worst, ccr_defect(region, f, g))
        col.at_most(f"CCR defect ({region.describe()})", worst, 1e-5)
    for region in regions:
        worst_eig, herm = math.inf, 0.0
        for n in (2, 4):
            M = states.TwoPointPairing(region).gram(random_family(rng, region, n))
            herm = max(herm, float(np.max(np.abs(M - M.conj().T))))
            worst_eig = min(worst_eig, float(np.linalg.eigvalsh((M + M.conj().T) / 2).min()))
        col.at_least(f"Gram minimum eigenvalue ({region.describe()})", worst_eig, -1e-8)
        col.at_most(f"Hermiticity ({region.describe()})", herm, 1e-8)
    c = rng.uniform((-0.05, -0.3, -0.3, 9.7), (0.05, 0.3, 0.3, 10.3))
    f = _tf(BumpTestFunction(tuple(c), (0.05, 0.4, 0.4, 0.4), 1.0))
    hs = Region.halfspace()
    img = states.image_two_point(hs, f, f)
    vac = states.TwoPointPairing(hs).normalization * states.vacuum_two_point(f, f)
    bound = states.image_term_bound(hs, f, f)
    col.at_most("half-space far from the wall: |image - vacuum| / image-term bound",
                abs(img - vac) / bound, 1.0)
    col.at_most("half-space far from the wall: |image - vacuum|", abs(img - vac), 1e-5)
    col.at_most("half-space far from the wall: imaginary part of the difference", abs((img - vac).imag), 1e-10)
    d = 1.0
    zs = np.linspace(0.05, 0.95, 20)
    W = states.SubtractedKernel(Region.slab(d))
    lat = np.array([W((0, 0, 0, z), (0, 0, 0, z)) for z in zs])
    closed = np.array([casimir.phi2_closed_form(Region.slab(d), z) for z in zs])
    col.at_most("slab coincidence lattice sum vs closed form", np.max(np.abs(lat - closed)), 1e-10)
    mirror = np.array([W((0, 0, 0, d - z), (0, 0, 0, d - z)) for z in zs])
    col.at_most("slab coincidence symmetric under z -> d - z", np.max(np.abs(lat - mirror)), 1e-10)
    return col.checks


def _pool(rng, n: int = 4) -> list[TestFunction]:
    return random_family(rng, Region.minkowski(), n)


def _random_poly(rng, pool, max_degree: int = 3, n_terms: int = 3) -> algebra.PolynomialFunctional:
    terms = []
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        idx = rng.integers(0, len(pool), size=deg)
        c = complex(rng.normal(), rng.normal())
        terms.append((c, tuple(pool[i] for i in idx)))
    return algebra.PolynomialFunctional(tuple(terms))


def _order_part(F, G, cfg, n):
    hi = algebra.star(F, G, cfg, max_order=n)
    if n == 0:
        return hi
    return hi - algebra.star(F, G, cfg, max_order=n - 1)


def suite_algebra(seed: int) -> list[Check]:
    col = _Collector("algebra")
    rng = np.random.default_rng(seed + 5)
    pool = _pool(rng)
    state = states.TwoPointPairing()
    two, E = algebra.KernelPairing.from_state(state, pool)
    cfg = algebra.StarConfig(E)
    P = algebra.PolynomialFunctional
    worst_a, worst_i = 0.0, 0.0
    for _ in range(3):
        A, B, C = (_random_poly(rng, pool) for _ in range(3))
        worst_a = max(worst_a, algebra.star(algebra.star(A, B, cfg), C, cfg).max_abs_difference(
            algebra.star(A, algebra.star(B, C, cfg), cfg)))
        worst_i = max(worst_i, algebra.star(A, B, cfg).adjoint().max_abs_difference(
            algebra.star(B.adjoint(), A.adjoint(), cfg)))
    col.at_most("associativity", worst_a, 1e-6)
    col.at_most("involution (F*G)* = G* * F*", worst_i, 1e-6)
    A, B = _random_poly(rng, pool), _random_poly(rng, pool)
    cfg2 = algebra.StarConfig(E, hbar=2.0)
    grading = 0.0
    for n in (1, 2):
        grading = max(grading, (2.0**n * _order_part(A, B, cfg, n)).max_abs_difference(_order_part(A, B, cfg2, n)))
    col.at_most("hbar grading of orders 1 and 2", grading, 1e-12)
    col.at_most("order zero is the pointwise product", algebra.star(A, B, cfg, max_order=0).max_abs_difference(A * B), 0.0)
    L = [P.linear(f) for f in pool]
    col.at_most("CCR of linear generators",
                abs(algebra.commutator(L[0], L[1], cfg).scalar() - 1j * E(pool[0], pool[1])), 1e-12)
    jac = (algebra.commutator(L[0], algebra.commutator(L[1], L[2], cfg), cfg)
           + algebra.commutator(L[1], algebra.commutator(L[2], L[0], cfg), cfg)
           + algebra.commutator(L[2], algebra.commutator(L[0], L[1], cfg), cfg))
    col.at_most("Jacobi identity", jac.max_abs_difference(P.zero()), 1e-12)
    causal = algebra.KernelPairing.causal()
    Hcfg = algebra.hadamard_config(two_point=two)
    worst = 0.0
    for i, j in ((0, 1), (2, 3), (1, 3)):
        worst = max(worst, algebra.commutator(L[i], L[j], Hcfg).max_abs_difference(
            algebra.commutator(L[i], L[j], algebra.StarConfig(causal))))
    col.at_most("star_H commutator = star commutator (independent E)", worst, 1e-5)
    shift = algebra.star_H(L[0], L[0], two_point=two) - algebra.star(L[0], L[0], cfg)
    col.at_most("star_H - star on phi(f)^2 is central", max((abs(c) for c, fs in shift.terms if fs), default=0.0), 0.0)
    F = L[0] * L[0]
    wick = algebra.expectation_value(two, algebra.star(F, F, cfg))
    oracle = algebra.ordered_expectation(two, [F, F])
    col.at_most("vacuum star product vs Wightman matchings", abs(wick - oracle), 1e-6)
    col.at_most("phi(f)^4 = 3 omega(f,f)^2", abs(algebra.expectation_value(two, F * F) - 3 * two(pool[0], pool[0]) ** 2),
                1e-6)
    worst = math.inf
    for _ in range(4):
        X = _random_poly(rng, pool, 2)
        worst = min(worst, algebra.expectation_value(two, algebra.star(X.adjoint(), X, cfg)).real)
    col.at_least("state positivity omega(F* F)", worst, -1e-8)
    hs = Region.halfspace()
    near = P.linear(_tf(unit_bump((0, 0, 0, 0.3), (0.5, 0.2, 0.2, 0.2))))
    try:
        algebra.star_H(near, near, region=hs)
        rejected = 0.0
    except ObstructionError:
        rejected = 1.0
    col.at_least("star_H rejected near the boundary", rejected, 1.0)
    return col.checks


def suite_casimir(seed: int) -> list[Check]:
    col = _Collector("casimir")
    slab1 = Region.slab(1.0)
    hs = Region.halfspace()
    col.at_most("phi2 half-space z=1", abs(casimir.phi2_renormalized(hs, 1.0) + 1 / (16 * math.pi**2)), 1e-10)
    col.at_most("phi2 slab d=1 z=0.5", abs(casimir.phi2_renormalized(slab1, 0.5) + 1 / 24), 1e-10)
    lim = casimir.phi2_renormalized(Region.slab(50.0), 1.0)
    col.at_most("phi2 slab d=50z vs half-space (relative)", abs(lim / casimir.phi2_closed_form(hs, 1.0) - 1), 1e-3)
    target = -math.pi**2 / 1440
    vals = [casimir.t00_renormalized(slab1, z, casimir.CONFORMAL_XI) for z in (0.25, 0.5, 0.75)]
    col.at_most("conformal slab T00 vs -pi^2/1440 (relative)", max(abs(v / target - 1) for v in vals), 1e-6)
    zs = np.linspace(0.2, 0.8, 5)
    prof = [casimir.t00_point_split(slab1, z).t00(casimir.CONFORMAL_XI) for z in zs]
    col.at_most("conformal slab T00 uniform in z", (max(prof) - min(prof)) / abs(target), 1e-6)
    oracle = [casimir.mode_sum_oracle(z, 1.0).value for z in (0.25, 0.5, 0.75)]
    col.at_most("mode-sum oracle vs point split (relative)", max(abs(o / v - 1) for o, v in zip(oracle, vals)), 0.02)
    col.at_most("mode-sum oracle z <-> d - z",
                abs(casimir.mode_sum_oracle(0.3, 1.0).value - casimir.mode_sum_oracle(0.7, 1.0).value)
                / abs(target), 1e-6)
    hsv = casimir.t00_point_split(hs, 1.0)
    col.at_most("conformal half-space T00", abs(hsv.t00(casimir.CONFORMAL_XI)), 1e-8 * abs(hsv.t00(0.0)))
    ps = casimir.t00_point_split(slab1, 0.3)
    t = [ps.t00(x) for x in (0.0, 1 / 12, 1 / 6)]
    col.at_most("T00 affine in xi (collinearity)", abs(t[0] - 2 * t[1] + t[2]) / abs(t[0]), 1e-6)
    slope = (t[2] - t[0]) / (1 / 6)
    col.at_most("xi slope equals -lap(phi2)", abs(slope + ps.lap_phi2) / abs(ps.lap_phi2), 1e-6)
    e1, e2 = casimir.energy_per_area(1.0), casimir.energy_per_area(2.0)
    col.at_most("energy per area d=1", abs(e1 / target - 1), 1e-6)
    col.at_most("energy per area scales as d^-3", abs(e2 * 8 / e1 - 1), 1e-8)
    a = casimir.t00_point_split(Region.slab(2.0), 0.6).t00(0.0)
    b = casimir.t00_point_split(slab1, 0.3).t00(0.0)
    col.at_most("T00 scaling d^-4", abs(a * 16 / b - 1), 1e-8)
    a = casimir.phi2_renormalized(hs, 2.0)
    col.at_most("phi2 scaling z^-2", abs(a * 4 / casimir.phi2_renormalized(hs, 1.0) - 1), 1e-8)
    big = casimir.t00_point_split(Region.slab(50.0), 1.0).t00(0.0)
    col.at_most("T00 slab d=50z vs half-space (relative)", abs(big / hsv.t00(0.0) - 1), 1e-3)
    return col.checks


def suite_probe(seed: int) -> list[Check]:
    col = _Collector("probe")
    x = (0.0, 0.0, 0.0, 1.0)
    path = lambda dl: (2.0 - dl, 0.0, 0.0, 1.0)
    col.within("half-space bounce exponent", states.singularity_probe(Region.halfspace(), x, path).exponent, 1.0, 0.05)
    col.within("Minkowski control exponent", states.singularity_probe(Region.minkowski(), x, path).exponent, 0.0, 0.05)
    xs = (0.0, 0.0, 0.0, 0.5)
    spath = lambda dl: (1.0 - dl, 0.0, 0.0, 0.5)
    col.within("slab bounce exponent", states.singularity_probe(Region.slab(1.0), xs, spath).exponent, 1.0, 0.05)
    return col.checks


SUITES: dict[str, Callable[[int], list[Check]]] = {
    "geometry": suite_geometry,
    "testfields": suite_testfields,
    "propagators": suite_propagators,
    "causality": suite_causality,
    "states": suite_states,
    "algebra": suite_algebra,
    "casimir": suite_casimir,
    "probe": suite_probe,
}


def run_suites(seed: int = 0, names=None, slab_d: float = DEFAULT_SLAB_D) -> list[Check]:
    """Run the named suites in order; ``slab_d`` is the slab width used by the state checks."""
    names = list(SUITES) if not names else list(names)
    for n in names:
        if n not in SUITES:
            raise ValidationError(f"unknown suite {n!r}; choose from {', '.join(SUITES)}")
    if not (math.isfinite(slab_d) and slab_d >= MIN_SLAB_D):
        raise ValidationError(f"slab width must be >= {MIN_SLAB_D:g} so the random families fit inside, got {slab_d}")
    out = []
    for n in names:
        out.extend(SUITES[n](seed, slab_d) if n == "states" else SUITES[n](seed))
    return out


def report_json(checks: list[Check], seed: int, names, slab_d: float = DEFAULT_SLAB_D) -> str:
    rep = {
        "version": __version__,
        "seed": seed,
        "slab_d": slab_d,
        "suites": list(names) if names else list(SUITES),
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
    return json.dumps(rep, indent=2, sort_keys=True) + "\n"


def summary(checks: list[Check]) -> str:
    lines = []
    for c in checks:
        mark = "PASS" if c.passed else "FAIL"
        lines.append(f"{mark}  [{c.suite}] {c.name}: measured {c.measured:.3e} (tol {c.tolerance:.1e})")
    n_ok = sum(c.passed for c in checks)
    lines.append(f"{n_ok}/{len(checks)} invariants passed")
    return "\n".join(lines)
