"""Acceptance criteria 1-10 at their stated tolerances.

Run with ``pytest tests/test_acceptance.py`` (or ``python3 tests/test_acceptance.py``);
one PASS/FAIL line per criterion is printed in the terminal summary.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from mirrorfield import Region, TestFunction, unit_bump
from mirrorfield import algebra, casimir, geometry, propagators, states
from mirrorfield.algebra import PolynomialFunctional as P
from mirrorfield.testfields import eta_map, n_map, random_bump
from mirrorfield.verify import (
    FD_BUMP,
    causally_disjoint_pair,
    ccr_defect,
    fd_order_check,
    random_family,
    reflected_disjoint_pair,
)

SEED = 20240
XI = casimir.CONFORMAL_XI
REGIONS = (Region.minkowski(), Region.halfspace(), Region.slab(2.0))


def tf(b):
    return TestFunction((b,))


def test_criterion_01_casimir_density(criterion_log):
    t = time.perf_counter()
    slab = Region.slab(1.0)
    target = -math.pi**2 / 1440
    zs = (0.25, 0.5, 0.75)
    vals = [casimir.t00_point_split(slab, z).t00(XI) for z in zs]
    closed = [casimir.t00_closed_form(slab, z, XI) for z in zs]
    oracle = [casimir.mode_sum_oracle(z, 1.0, XI).value for z in zs]
    rel = max(abs(v / target - 1) for v in vals)
    rel_closed = max(abs(v / c - 1) for v, c in zip(vals, closed))
    spread = (max(vals) - min(vals)) / abs(target)
    orc = max(abs(o / v - 1) for o, v in zip(oracle, vals))
    elapsed = time.perf_counter() - t
    ok = rel <= 1e-6 and rel_closed <= 1e-6 and spread <= 1e-6 and orc <= 0.02 and elapsed < 60
    criterion_log(1, ok, f"t00 rel {rel:.1e}, vs closed {rel_closed:.1e}, spread {spread:.1e}, "
                         f"oracle {orc:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_phi2_anchors(criterion_log):
    hs = Region.halfspace()
    a = abs(casimir.phi2_renormalized(hs, 1.0) + 1 / (16 * math.pi**2))
    b = abs(casimir.phi2_renormalized(Region.slab(1.0), 0.5) + 1 / 24)
    lat = states.subtracted_kernel(hs, (0, 0, 0, 1), (0, 0, 0, 1))
    a = max(a, abs(lat + 1 / (16 * math.pi**2)))
    c = abs(casimir.phi2_renormalized(Region.slab(50.0), 1.0) / casimir.phi2_closed_form(hs, 1.0) - 1)
    c_t00 = abs(casimir.t00_point_split(Region.slab(50.0), 1.0).t00(0.0)
                / casimir.t00_point_split(hs, 1.0).t00(0.0) - 1)
    ok = a <= 1e-10 and b <= 1e-10 and c <= 1e-3 and c_t00 <= 1e-3
    criterion_log(2, ok, f"half-space {a:.1e}, slab {b:.1e}, d=50z limit phi2 {c:.1e} t00 {c_t00:.1e}")
    assert ok


def test_criterion_03_ccr(criterion_log):
    t = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    worst = {}
    for region in REGIONS:
        worst[region.describe()] = max(ccr_defect(region, *random_family(rng, region, 2)) for _ in range(20))
    elapsed = time.perf_counter() - t
    ok = max(worst.values()) <= 1e-5 and elapsed < 300
    criterion_log(3, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (20 pairs each, {elapsed:.0f}s)")
    assert ok


def test_criterion_04_locality(criterion_log):
    rng = np.random.default_rng(SEED + 4)
    worst_b = 0.0
    for region in (Region.halfspace(), Region.slab(8.0)):
        norm = states.TwoPointPairing(region).normalization
        for _ in range(10):
            f, g = reflected_disjoint_pair(rng, region)
            worst_b = max(worst_b, abs(propagators.pair_E_boundary(region, f, g) - norm * propagators.pair_E(f, g)))
    worst_c = 0.0
    for region in (Region.minkowski(), Region.halfspace()):
        cfg = algebra.StarConfig(algebra.KernelPairing.causal(region))
        for _ in range(5):
            f, g = causally_disjoint_pair(rng, 0.0 if region.kind.value == "minkowski" else 1.0)
            c = algebra.commutator(P.linear(f), P.linear(g), cfg)
            worst_c = max(worst_c, max((abs(x) for x, _ in c.terms), default=0.0))
    ok = worst_b <= 1e-6 and worst_c <= 1e-6
    criterion_log(4, ok, f"boundary vs bulk {worst_b:.1e} (10 pairs per region), commutators {worst_c:.1e}")
    assert ok


def test_criterion_05_time_slice(criterion_log):
    cut = propagators.SmoothCutoff(-1.1, -0.6)
    F = P.linear(tf(unit_bump((0.0, 0.0, 0.0, 1.2), (0.3, 0.3, 0.3, 0.3))))
    res = {r.describe(): algebra.time_slice_check(F, cut, r, seed=SEED)
           for r in (Region.minkowski(), Region.halfspace(), Region.slab(2.5))}
    ok = max(res.values()) <= 1e-4
    criterion_log(5, ok, ", ".join(f"{k} {v:.1e}" for k, v in res.items()) + " (5 solutions each)")
    assert ok


def test_criterion_06_propagator_axioms(criterion_log):
    rng = np.random.default_rng(SEED + 6)
    e1, e2, ratio = fd_order_check(20, rng)
    f = tf(FD_BUMP)
    before = rng.uniform([-3.0, -1, -1, -1], [-0.51, 1, 1, 1], size=(20, 4))
    support = max(float(np.max(np.abs(propagators.retarded(f)(before)))),
                  float(np.max(np.abs(propagators.advanced(f)(before * [-1, 1, 1, 1])))))
    walls = 0.0
    sources = ((Region.halfspace(), eta_map(tf(random_bump(rng, (-0.3, -.3, -.3, 0.5), (0.3, .3, .3, 0.9)))), (0.0,)),
               (Region.slab(1.5), n_map(tf(random_bump(rng, (-0.3, -.3, -.3, 0.65), (0.3, .3, .3, 0.85), 0.3, 0.45)),
                                        1.5), (0.0, 1.5)))
    for region, alpha, zw in sources:
        field = propagators.causal_field(alpha)
        for z in zw:
            p = rng.uniform([0.6, -0.5, -0.5, z], [1.4, 0.5, 0.5, z], size=(4, 4))
            walls = max(walls, float(np.max(np.abs(field(p)))))
    ok = e2 <= 1e-3 and 3.0 <= ratio <= 5.0 and support == 0.0 and walls <= 1e-6
    criterion_log(6, ok, f"FD error {e1:.1e} -> {e2:.1e} (ratio {ratio:.2f}, 20 probes), support {support:g}, "
                         f"walls {walls:.1e}")
    assert ok


def test_criterion_07_positivity(criterion_log):
    rng = np.random.default_rng(SEED + 7)
    floor = math.inf
    for region in REGIONS:
        state = states.TwoPointPairing(region)
        for k in range(10):
            M = state.gram(random_family(rng, region, 2 + k % 4))
            floor = min(floor, float(np.linalg.eigvalsh((M + M.conj().T) / 2).min()))
    pool = random_family(rng, Region.minkowski(), 4)
    two, E = algebra.KernelPairing.from_state(states.TwoPointPairing(), pool)
    cfg = algebra.StarConfig(E)
    ev = math.inf
    for _ in range(10):
        terms = []
        for _ in range(3):
            idx = rng.integers(0, len(pool), size=int(rng.integers(0, 3)))
            terms.append((complex(rng.normal(), rng.normal()), tuple(pool[i] for i in idx)))
        X = P(tuple(terms))
        ev = min(ev, algebra.expectation_value(two, algebra.star(X.adjoint(), X, cfg)).real)
    ok = floor >= -1e-8 and ev >= -1e-8
    criterion_log(7, ok, f"Gram eigenvalue floor {floor:.2e} (10 families x 3 regions), omega(F*F) min {ev:.2e}")
    assert ok


def _poly(rng, pool, max_degree=3, n_terms=3):
    terms = []
    for _ in range(n_terms):
        idx = rng.integers(0, len(pool), size=int(rng.integers(0, max_degree + 1)))
        terms.append((complex(rng.normal(), rng.normal()), tuple(pool[i] for i in idx)))
    return P(tuple(terms))


def test_criterion_08_star_algebra(criterion_log):
    rng = np.random.default_rng(SEED + 8)
    pool = random_family(rng, Region.minkowski(), 4)
    two, E = algebra.KernelPairing.from_state(states.TwoPointPairing(), pool)
    cfg = algebra.StarConfig(E)
    assoc = invol = 0.0
    for _ in range(5):
        A, B, C = (_poly(rng, pool) for _ in range(3))
        assoc = max(assoc, algebra.star(algebra.star(A, B, cfg), C, cfg).max_abs_difference(
            algebra.star(A, algebra.star(B, C, cfg), cfg)))
        invol = max(invol, algebra.star(A, B, cfg).adjoint().max_abs_difference(
            algebra.star(B.adjoint(), A.adjoint(), cfg)))
    L = [P.linear(f) for f in pool]
    Hcfg = algebra.hadamard_config(two_point=two)
    causal = algebra.StarConfig(algebra.KernelPairing.causal())
    hcom = max(algebra.commutator(L[i], L[j], Hcfg).max_abs_difference(algebra.commutator(L[i], L[j], causal))
               for i, j in ((0, 1), (0, 2), (1, 3), (2, 3)))
    A, B = _poly(rng, pool), _poly(rng, pool)
    grading = 0.0
    for hbar in (0.5, 2.0, 3.0):
        hc = algebra.StarConfig(E, hbar=hbar)
        for n in (1, 2, 3):
            unit = algebra.star(A, B, cfg, max_order=n) - algebra.star(A, B, cfg, max_order=n - 1)
            scaled = algebra.star(A, B, hc, max_order=n) - algebra.star(A, B, hc, max_order=n - 1)
            size = max((abs(c) for c, _ in unit.terms), default=1.0)
            grading = max(grading, (hbar**n * unit).max_abs_difference(scaled) / size)
    order0 = algebra.star(A, B, cfg, max_order=0).max_abs_difference(A * B)
    ok = assoc <= 1e-6 and invol <= 1e-6 and hcom <= 1e-5 and grading <= 1e-13 and order0 == 0.0
    criterion_log(8, ok, f"associativity {assoc:.1e}, involution {invol:.1e}, star_H commutator {hcom:.1e}, "
                         f"hbar grading {grading:.1e} (relative), order 0 {order0:g}")
    assert ok


def test_criterion_09_probe(criterion_log):
    x = (0.0, 0.0, 0.0, 1.0)
    path = lambda dl: (2.0 - dl, 0.0, 0.0, 1.0)
    p_half = states.singularity_probe(Region.halfspace(), x, path).exponent
    p_mink = states.singularity_probe(Region.minkowski(), x, path).exponent
    p_slab = states.singularity_probe(Region.slab(1.0), (0.0, 0.0, 0.0, 0.5), lambda dl: (1.0 - dl, 0.0, 0.0, 0.5)).exponent
    ok = abs(p_half - 1) <= 0.05 and abs(p_slab - 1) <= 0.05 and abs(p_mink) <= 0.05
    criterion_log(9, ok, f"half-space {p_half:.4f}, slab {p_slab:.4f}, Minkowski {p_mink:.4f}")
    assert ok


def _verify(threads: int) -> subprocess.CompletedProcess:
    env = dict(os.environ, MIRRORFIELD_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "mirrorfield.cli", "verify", "--seed", "0"],
                          capture_output=True, env=env, timeout=1800)


@pytest.mark.slow
def test_criterion_10_determinism(criterion_log):
    t = time.perf_counter()
    runs = [_verify(1), _verify(1), _verify(4)]
    elapsed = time.perf_counter() - t
    same = all(r.stdout == runs[0].stdout and r.stderr == runs[0].stderr for r in runs[1:])
    codes = [r.returncode for r in runs]
    ok = same and len(runs[0].stdout) > 0
    criterion_log(10, ok, f"verify reports byte-identical: {same} (threads 1, 1, 4; exit codes {codes}; "
                          f"{elapsed:.0f}s)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
