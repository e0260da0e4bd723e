"""The one-dimensional bump ``b(s) = exp(-1/(1-s^2))`` and quantities derived from it.

Everything downstream is built from products of this profile, so its value,
derivatives, Fourier transform and pairwise correlation live here.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "EDGE",
    "bump",
    "bump_d1",
    "bump_d2",
    "bump_deriv",
    "BUMP_INTEGRAL",
    "gauss_legendre",
    "transform",
    "transform_envelope",
    "Correlation",
    "correlation",
]

# |s| >= 1 - EDGE is treated as outside the support (value and derivatives vanish there)
EDGE = 1e-12


def _inside(s):
    s = np.asarray(s, dtype=float)
    return s, np.abs(s) < 1.0 - EDGE


def bump(s):
    s, m = _inside(s)
    out = np.zeros(s.shape)
    sm = s[m]
    out[m] = np.exp(-1.0 / (1.0 - sm * sm))
    return out


def bump_d1(s):
    s, m = _inside(s)
    out = np.zeros(s.shape)
    sm = s[m]
    q = 1.0 - sm * sm
    out[m] = -2.0 * sm / q**2 * np.exp(-1.0 / q)
    return out


def bump_d2(s):
    s, m = _inside(s)
    out = np.zeros(s.shape)
    sm = s[m]
    q = 1.0 - sm * sm
    g1 = -2.0 * sm / q**2
    g2 = -2.0 / q**2 - 8.0 * sm * sm / q**3
    out[m] = (g2 + g1 * g1) * np.exp(-1.0 / q)
    return out


def bump_deriv(s, order: int):
    if order == 0:
        return bump(s)
    if order == 1:
        return bump_d1(s)
    if order == 2:
        return bump_d2(s)
    raise ValueError("closed-form derivatives are available up to order 2")


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _integral() -> float:
    x, w = gauss_legendre(160)
    return float(w @ bump(x))


BUMP_INTEGRAL = _integral()  # 0.44399381616807...


# Fourier transform B(k) = ∫ b(s) cos(k s) ds, tabulated once by FFT of the
# periodized samples (spectrally accurate: b is smooth with compact support).
_TABLE_KMAX = 1500.0
_TABLE_DK = 1.0 / 256.0


@lru_cache(maxsize=1)
def _transform_table() -> np.ndarray:
    # period n*ds equals 2π/_TABLE_DK exactly, with ds close to 1/1024
    period = 2.0 * np.pi / _TABLE_DK
    n = 2 * int(np.ceil(period * 512.0))
    ds = period / n
    s = np.arange(n) * ds
    s[s >= n * ds / 2] -= n * ds
    ft = np.fft.rfft(bump(s)) * ds
    m = int(_TABLE_KMAX / _TABLE_DK) + 4
    table = np.ascontiguousarray(ft.real[:m])
    table.setflags(write=False)
    return table


def transform(k):
    """``B(k) = ∫ b(s) e^{-iks} ds`` (real and even); zero beyond the table end (|B| < 1e-16 there)."""
    table = _transform_table()
    k = np.abs(np.asarray(k, dtype=float))
    u = k / _TABLE_DK
    i = np.floor(u).astype(np.int64)
    inside = i < table.size - 3
    i = np.where(inside, np.maximum(i, 1), 1)
    f = u - i
    # four-point Lagrange cubic on nodes i-1..i+2; B is even so index -1 mirrors to 1
    p0 = table[i - 1]
    p1 = table[i]
    p2 = table[i + 1]
    p3 = table[i + 2]
    val = (
        -f * (f - 1) * (f - 2) / 6 * p0
        + (f + 1) * (f - 1) * (f - 2) / 2 * p1
        - (f + 1) * f * (f - 2) / 2 * p2
        + (f + 1) * f * (f - 1) / 6 * p3
    )
    return np.where(inside, val, 0.0)


@lru_cache(maxsize=1)
def _envelope_table() -> np.ndarray:
    a = np.abs(_transform_table())
    env = np.maximum.accumulate(a[::-1])[::-1]
    env.setflags(write=False)
    return env


def transform_envelope(k):
    """Non-increasing majorant ``sup_{q >= |k|} |B(q)|`` on the table grid (zero beyond it)."""
    env = _envelope_table()
    i = np.floor(np.abs(np.asarray(k, dtype=float)) / _TABLE_DK).astype(np.int64)
    inside = i < env.size
    return np.where(inside, env[np.minimum(i, env.size - 1)], 0.0)


class Correlation:
    """``c(lam) = ∫ b((u-cf)/wf) b((u+lam-cg)/wg) du`` on its support ``|lam-(cg-cf)| < wf+wg``.

    Tabulated by Gauss-Legendre on the exact overlap interval and interpolated
    with a cubic spline; zero outside the support.
    """

    def __init__(self, cf: float, wf: float, cg: float, wg: float, npts: int = 1601, order: int = 64):
        self.lo = (cg - cf) - (wf + wg)
        self.hi = (cg - cf) + (wf + wg)
        lam = np.linspace(self.lo, self.hi, npts)
        a = np.maximum(cf - wf, cg - lam - wg)
        b = np.minimum(cf + wf, cg - lam + wg)
        half = np.maximum(b - a, 0.0) / 2
        mid = (a + b) / 2
        x, w = gauss_legendre(order)
        u = mid[:, None] + half[:, None] * x[None, :]
        vals = (bump((u - cf) / wf) * bump((u + lam[:, None] - cg) / wg)) @ w * half
        vals[0] = vals[-1] = 0.0
        self.grid, self.values = lam, vals
        self._spline = CubicSpline(lam, vals)

    def moments(self, nodes: np.ndarray) -> np.ndarray:
        """``∫ c(lam) l_j(lam) dlam`` for the Lagrange basis on ``nodes``.

        Trapezoid on the table grid, which is spectrally accurate here because
        ``c`` vanishes to all orders at both ends.
        """
        nodes = np.asarray(nodes, dtype=float)
        diff = nodes[:, None] - nodes[None, :]
        np.fill_diagonal(diff, 1.0)
        bary = 1.0 / np.prod(diff, axis=1)
        dl = self.grid[:, None] - nodes[None, :]
        hit = dl == 0.0
        dl[hit] = 1.0
        terms = bary[None, :] / dl
        basis = terms / terms.sum(axis=1, keepdims=True)
        rows = np.where(hit.any(axis=1))[0]
        basis[rows] = hit[rows].astype(float)
        h = self.grid[1] - self.grid[0]
        return h * (self.values @ basis)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        inside = (lam > self.lo) & (lam < self.hi)
        return np.where(inside, self._spline(np.clip(lam, self.lo, self.hi)), 0.0)


@lru_cache(maxsize=4096)
def correlation(cf: float, wf: float, cg: float, wg: float) -> Correlation:
    return Correlation(cf, wf, cg, wg)
