"""On-shell momentum-space quadratic forms of bump test functions.

Transforms use ``F(w, k) = ∫ f(t, x) exp(-i(w t - k.x)) d^4x``; on shell ``w = |k|``.
For a bump this is a product of one-dimensional transforms ``B`` times a phase,
so everything here is direct (no FFT) evaluation on a deterministic grid.

Three geometries share one engine:

``free``   ``∫ d^3k / ((2π)^3 2|k|) conj(F) G`` over the full sphere.
``odd``    the same with ``F(k) - F(k_R)`` (``k_R`` = kz reversed) over the upper
           hemisphere; equals the free form of ``(f, g - Rg)``.
``slab``   Dirichlet modes ``kz = mπ/d``: ``Σ_m (1/2d) ∫ d^2k/(2π)^2 (1/2w) conj(S_f) S_g``
           with ``S = F(k⊥, kz) - F(k⊥, -kz)``; equals the free form of ``(f, N g)``.

All three are manifestly positive semidefinite on a shared grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import bump1d
from .errors import ValidationError
from .parallel import ordered_map, ordered_sum
from .testfields import BumpTestFunction, TestFunction, as_test_function

__all__ = ["SpectralConfig", "Source", "quadratic_form", "pair_form", "cutoff"]

MODES = ("free", "odd", "slab")


@dataclass(frozen=True)
class SpectralConfig:
    """Grid controls.

    ``rel_tol`` sets the radial cutoff through the transform envelope; the
    angular node count on each radial panel is ``ceil(k_hi * rho) + angular_margin``
    (rho = radius of the lag support), and panels are at most ``max_panel`` wide
    and narrow enough to resolve the radial phase.
    """

    rel_tol: float = 1e-8
    nodes_per_panel: int = 16
    max_panel: float = 2.0
    radial_phase: float = 10.0
    angular_scale: float = 0.7
    angular_margin: int = 16
    k_cap: float = 1200.0

    def __post_init__(self):
        if not (0 < self.rel_tol < 1):
            raise ValidationError("rel_tol must lie in (0, 1)")
        if self.nodes_per_panel < 2 or self.angular_margin < 2:
            raise ValidationError("quadrature orders must be >= 2")
        if self.max_panel <= 0 or self.radial_phase <= 0 or self.angular_scale <= 0:
            raise ValidationError("panel controls must be positive")

    def refined(self) -> "SpectralConfig":
        return replace(
            self,
            rel_tol=self.rel_tol * 1e-2,
            nodes_per_panel=self.nodes_per_panel * 2,
            angular_scale=self.angular_scale * 1.25,
            angular_margin=self.angular_margin * 2,
        )


@dataclass(frozen=True)
class Source:
    """Bump terms of one test function as arrays."""

    centers: np.ndarray
    widths: np.ndarray
    amps: np.ndarray

    @classmethod
    def of(cls, f) -> "Source":
        if isinstance(f, Source):
            return f
        terms = [t for t in as_test_function(f).terms if t.amplitude != 0]
        if not terms:
            return cls(np.zeros((0, 4)), np.ones((0, 4)), np.zeros(0))
        return cls(
            np.array([t.center for t in terms], dtype=float),
            np.array([t.halfwidths for t in terms], dtype=float),
            np.array([t.amplitude for t in terms], dtype=float),
        )

    def __len__(self) -> int:
        return self.amps.size


# ---------------------------------------------------------------- cutoffs

_ENV_DK = 0.05


@lru_cache(maxsize=1)
def _env_grid(k_cap: float) -> np.ndarray:
    return np.arange(0.0, k_cap + _ENV_DK, _ENV_DK)


def _envelope(src: Source, k_cap: float) -> np.ndarray:
    """Majorant of ``sup_{|k|=κ} |F(κ, k)|`` on the envelope grid."""
    kap = _env_grid(k_cap)
    b0 = bump1d.BUMP_INTEGRAL
    out = np.zeros_like(kap)
    for c, w, a in zip(src.centers, src.widths, src.amps):
        out += (
            abs(a) * np.prod(w) * b0 * b0
            * bump1d.transform_envelope(w[0] * kap)
            * bump1d.transform_envelope(np.min(w[1:]) * kap)
        )
    return out


def cutoff(sources: Iterable[Source], cfg: SpectralConfig) -> float:
    """Radial cutoff: the tail of ``∫ κ env(κ)^2 dκ`` beyond it is below ``rel_tol`` of the total."""
    kap = _env_grid(cfg.k_cap)
    best = 1.0
    for src in sources:
        if len(src) == 0:
            continue
        dens = kap * _envelope(src, cfg.k_cap) ** 2
        tail = np.cumsum(dens[::-1])[::-1]
        if tail[0] <= 0:
            continue
        idx = np.nonzero(tail <= cfg.rel_tol * tail[0])[0]
        k = kap[idx[0]] if idx.size else cfg.k_cap
        best = max(best, float(k))
    return min(best, cfg.k_cap)


def _lag_extent(sources: Sequence[Source], mode: str, first_only: bool = False) -> tuple[float, float]:
    """Largest time and spatial radius of any pairwise cross-correlation support.

    ``first_only`` restricts to pairs involving the terms of ``sources[0]``.
    """
    c = np.concatenate([s.centers for s in sources])
    w = np.concatenate([s.widths for s in sources])
    if c.shape[0] == 0:
        return 0.0, 0.0
    if first_only:
        n0 = len(sources[0])
        c0, w0 = c[:n0], w[:n0]
    else:
        c0, w0 = c, w
    dt = np.abs(c0[:, None, 0] - c[None, :, 0]) + w0[:, None, 0] + w[None, :, 0]
    dx = c0[:, None, 1:] - c[None, :, 1:]
    ws = w0[:, None, 1:] + w[None, :, 1:]
    if mode == "free":
        rho = np.linalg.norm(np.abs(dx) + ws, axis=-1)
    else:
        # odd-in-z transforms carry absolute z phases sin(kz z)
        dz = np.abs(c0[:, None, 3]) + np.abs(c[None, :, 3]) + ws[..., 2]
        perp = np.abs(dx[..., :2]) + ws[..., :2]
        rho = np.sqrt(np.sum(perp**2, axis=-1) + dz**2)
    return float(dt.max()), float(rho.max())


# ---------------------------------------------------------------- grids


@dataclass(frozen=True)
class _Panel:
    kap: np.ndarray  # radial nodes (nk,)
    wk: np.ndarray
    n_ang: int


def _radial_panels(K: float, tau: float, rho: float, cfg: SpectralConfig, rho_ang: float) -> list[_Panel]:
    width = min(cfg.max_panel, cfg.radial_phase / max(tau + rho, 1e-9))
    npan = max(1, math.ceil(K / width))
    edges = np.linspace(0.0, K, npan + 1)
    x, w = bump1d.gauss_legendre(cfg.nodes_per_panel)
    panels = []
    for a, b in zip(edges[:-1], edges[1:]):
        half = (b - a) / 2
        n_ang = math.ceil(cfg.angular_scale * b * rho_ang) + cfg.angular_margin
        panels.append(_Panel((a + b) / 2 + half * x, half * w, n_ang))
    return panels


@lru_cache(maxsize=256)
def _sphere_angles(n_ang: int, hemisphere: bool):
    nu = max(4, math.ceil(n_ang / 2) + 4)
    x, w = bump1d.gauss_legendre(nu)
    if hemisphere:
        u, wu = (x + 1) / 2, w / 2
    else:
        u, wu = x, w
    nphi = max(4, n_ang)
    phi = np.arange(nphi) * (2 * np.pi / nphi)
    return u, wu, phi, np.full(nphi, 2 * np.pi / nphi)


def _B(w, k):
    return w * bump1d.transform(w * k)


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class _Item:
    """A block of on-shell nodes: ``om = |k|`` and ``k``, plus the measure ``d^3k/(2π)^3``
    (free/odd) or ``(1/2d) d^2k/(2π)^2`` (slab); all arrays broadcast together."""

    om: np.ndarray
    kx: np.ndarray
    ky: np.ndarray
    kz: np.ndarray
    measure: np.ndarray


def _sphere_item(panel: _Panel, hemisphere: bool) -> _Item:
    u, wu, phi, wphi = _sphere_angles(panel.n_ang, hemisphere)
    kap = panel.kap[:, None, None]
    s = np.sqrt(np.maximum(1.0 - u * u, 0.0))[None, :, None]
    kx = kap * s * np.cos(phi)[None, None, :]
    ky = kap * s * np.sin(phi)[None, None, :]
    kz = kap * u[None, :, None]
    measure = (panel.kap**2 * panel.wk)[:, None, None] * wu[None, :, None] * wphi[None, None, :] / (2 * np.pi) ** 3
    return _Item(kap, kx, ky, kz, measure)


def _slab_item(panel: _Panel, modes: np.ndarray, d: float) -> _Item:
    n = panel.n_ang
    phi = np.arange(n) * (2 * np.pi / n)
    kp = panel.kap[None, :, None]
    kx = kp * np.cos(phi)[None, None, :]
    ky = kp * np.sin(phi)[None, None, :]
    kz = (modes * np.pi / d)[:, None, None]
    om = np.sqrt(kp * kp + kz * kz)
    measure = np.broadcast_to((panel.kap * panel.wk)[None, :, None] * (2 * np.pi / n) / (2 * d * (2 * np.pi) ** 2), om.shape[:2] + (n,))
    return _Item(om, kx, ky, kz, measure)


def _transform(src: Source, item: _Item, origin: np.ndarray, odd: bool, sign: int = 1) -> np.ndarray:
    """``F(sign*|k|, k)``; with ``odd`` the z-odd combination ``F(k) - F(k_R)``."""
    shape = np.broadcast_shapes(item.om.shape, item.kx.shape, item.kz.shape)
    acc = np.zeros(shape, dtype=complex)
    for c, w, a in zip(src.centers, src.widths, src.amps):
        rel = c - origin
        real = (a * _B(w[0], item.om)) * _B(w[3], item.kz) * (_B(w[1], item.kx) * _B(w[2], item.ky))
        arg = sign * item.om * rel[0] - item.kx * rel[1] - item.ky * rel[2]
        if odd:
            acc += real * (2j * np.sin(item.kz * c[3])) * np.exp(-1j * arg)
        else:
            acc += real * np.exp(-1j * (arg - item.kz * rel[3]))
    return acc


def _grid(sources: Sequence[Source], mode: str, d: float | None, cfg: SpectralConfig,
          extra_tau: float = 0.0, extra_k: float = 0.0, first_only: bool = False) -> tuple[list, np.ndarray]:
    """Deterministic list of grid items and the phase origin for a set of sources."""
    live = [s for s in sources if len(s)]
    K = max(cutoff(live, cfg), extra_k)
    tau, rho = _lag_extent(live, "free" if mode == "free" else "odd", first_only)
    tau += extra_tau
    origin = np.concatenate([s.centers for s in live]).mean(axis=0)
    if mode != "free":
        origin[3] = 0.0
    if mode != "slab":
        panels = _radial_panels(K, tau, rho, cfg, rho)
        return [(_sphere_item, (p, mode == "odd")) for p in panels], origin
    # transverse lag radius only; the mode sum treats z exactly
    c = np.concatenate([s.centers for s in live])
    w = np.concatenate([s.widths for s in live])
    n0 = len(live[0]) if first_only else len(c)
    perp = np.abs(c[:n0, None, 1:3] - c[None, :, 1:3]) + w[:n0, None, 1:3] + w[None, :, 1:3]
    rho_perp = float(np.linalg.norm(perp, axis=-1).max())
    panels = _radial_panels(K, tau, rho_perp, cfg, rho_perp)
    mmax = max(1, math.ceil(K * d / np.pi))
    items = []
    for a in range(1, mmax + 1, 8):
        modes = np.arange(a, min(a + 8, mmax + 1), dtype=float)
        kmin = modes[0] * np.pi / d
        reach = math.sqrt(max(K * K - kmin * kmin, 0.0))
        for p in panels:
            if p.kap[0] - (p.kap[1] - p.kap[0]) <= reach or p is panels[0]:
                items.append((_slab_item, (p, modes, d)))
    return items, origin


def _check_mode(mode: str, d: float | None) -> None:
    if mode not in MODES:
        raise ValidationError(f"unknown spectral mode {mode!r}")
    if mode == "slab" and (d is None or not d > 0):
        raise ValidationError("slab mode needs a positive width d")


def quadratic_form(fs: Sequence, mode: str = "free", d: float | None = None,
                   cfg: SpectralConfig | None = None) -> np.ndarray:
    """Matrix ``M_ij`` of the on-shell form between test functions ``fs[i]``, ``fs[j]``.

    ``free``: the vacuum two-point function.  ``odd``: ``ω2(f_i, f_j - R f_j)``.
    ``slab``: ``ω2(f_i, N f_j)`` for slab width ``d``.  Hermitian and PSD by construction.
    """
    cfg = cfg or SpectralConfig()
    _check_mode(mode, d)
    sources = [Source.of(f) for f in fs]
    n = len(sources)
    if n == 0 or all(len(s) == 0 for s in sources):
        return np.zeros((n, n), dtype=complex)
    items, origin = _grid(sources, mode, d, cfg)
    odd = mode != "free"

    def work(spec):
        build, args = spec
        item = build(*args)
        weight = (item.measure / (2 * item.om)).reshape(-1)
        flat = np.stack([_transform(s, item, origin, odd).reshape(-1) for s in sources])
        # reshape(-1) above broadcasts measure/om to the full node shape first
        return (flat.conj() * np.broadcast_to(weight, flat.shape[1:])) @ flat.T

    return ordered_sum(ordered_map(work, items))


def pair_form(f, g, mode: str = "free", d: float | None = None, cfg: SpectralConfig | None = None) -> complex:
    """Single entry ``M_01`` of :func:`quadratic_form` for the pair ``(f, g)``."""
    return complex(quadratic_form([f, g], mode, d, cfg)[0, 1])


def time_slice_form(f, alpha, t_mid: float, half: float, mode: str = "free", d: float | None = None,
                    cfg: SpectralConfig | None = None) -> float:
    """``∫ h φ`` over the region, where ``φ = E(I alpha)``, ``h = χ'' u + 2 χ' ∂_t u``,
    ``u = E(I f)``, ``I`` the unnormalized image sum of the mode, and ``χ'`` the
    normalized bump on ``[t_mid - half, t_mid + half]``.

    Time integrals are done in closed form: ``∫ χ' e^{iνt} dt = e^{iν t_mid} B(ν half)/B(0)``.
    """
    return float(time_slice_forms(f, [alpha], t_mid, half, mode, d, cfg)[0])


def time_slice_forms(f, alphas: Sequence, t_mid: float, half: float, mode: str = "free",
                     d: float | None = None, cfg: SpectralConfig | None = None) -> np.ndarray:
    """:func:`time_slice_form` for several solutions on one shared grid."""
    cfg = cfg or SpectralConfig()
    _check_mode(mode, d)
    sf = Source.of(f)
    sas = [Source.of(a) for a in alphas]
    out = np.zeros(len(sas))
    live = [i for i, s in enumerate(sas) if len(s)]
    if len(sf) == 0 or not live:
        return out
    sources = [sf] + [sas[i] for i in live]
    # time phases are measured from the cutoff centre
    tc = np.concatenate([s.centers for s in sources])[:, 0].mean()
    items, origin = _grid(sources, mode, d, cfg, extra_tau=2 * half + 2 * abs(tc - t_mid), first_only=True)
    origin = origin.copy()
    origin[0] = t_mid
    odd = mode != "free"
    b0 = bump1d.BUMP_INTEGRAL

    def T1(nu):
        return bump1d.transform(nu * half) / b0

    def work(spec):
        build, args = spec
        item = build(*args)
        om = np.broadcast_to(item.om, np.broadcast_shapes(item.om.shape, item.kx.shape, item.kz.shape))
        meas = np.broadcast_to(item.measure, om.shape)
        Fp, Fm = _transform(sf, item, origin, odd, 1), _transform(sf, item, origin, odd, -1)
        U = {1: Fp / (2j * om), -1: -Fm / (2j * om)}
        D = {1: Fp / 2, -1: Fm / 2}
        # kernel[a][b] multiplies P_b
        kern = {b: sum(np.conj(U[a]) * (-1j * (b - a) * om * T1((b - a) * om)) + 2 * np.conj(D[a]) * T1((b - a) * om)
                       for a in (1, -1)) for b in (1, -1)}
        vals = []
        for sa in sources[1:]:
            Ap, Am = _transform(sa, item, origin, odd, 1), _transform(sa, item, origin, odd, -1)
            total = kern[1] * (Ap / (2j * om)) + kern[-1] * (-Am / (2j * om))
            vals.append(float(np.sum(total.real * meas)))
        return np.array(vals)

    res = ordered_sum(ordered_map(work, items))
    out[live] = res
    return out
