"""Doubling constants, ball-measure scaling functions and local dimensions.

Limits in ``h`` are tail estimates on fixed log grids: the ratio
``mu B(x, r h) / mu B(x, h)`` is sampled at 32 log-spaced ``h`` inside the
resolved range ``[64 * spacing / min(r, 1), reach / max(r, 1)]`` and the
smallest quarter of the grid (largest quarter for scales at infinity) is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .space import UniformGrid1D

N_H = 32
TAIL = 0.25
R_SMALL = 2.0**-6
R_LARGE = 2.0**6


@dataclass(frozen=True)
class DimensionBounds:
    dim_lower: float
    dim_inf_lower: float | None = None
    dim_inf_upper: float | None = None
    per_point: dict = field(default_factory=dict)
    converged: bool = True

    def to_dict(self):
        return {"dim_lower": self.dim_lower, "dim_inf_lower": self.dim_inf_lower,
                "dim_inf_upper": self.dim_inf_upper,
                "per_point": {str(k): list(v) for k, v in self.per_point.items()},
                "converged": self.converged}


def doubling_constant(space, max_radii=64, max_centers=None):
    """Max of ``mu B(x, 2r) / mu B(x, r)`` over closed balls at each distinct distance.

    Radii run over distances in ``(0, diameter / 2]``; for ``N > 512`` at most
    ``max_radii`` log-spaced radii are used per center. ``max_centers`` limits
    the centers to an evenly spaced subset.
    """
    best, worst = 0.0, (0, 0.0)
    half = space.diameter / 2
    centers = np.arange(space.n)
    if max_centers is not None and space.n > max_centers:
        centers = np.unique(np.linspace(0, space.n - 1, max_centers).round().astype(int))
    for c in centers:
        c = int(c)
        r = space.ball_radii(c)
        r = r[(r > 0) & (r <= half)]
        if r.size == 0:
            continue
        if space.n > 512 and r.size > max_radii:
            pick = np.unique(np.round(np.geomspace(1, r.size, max_radii)).astype(int) - 1)
            r = r[pick]
        ratio = space.ball_measure(c, 2 * r, closed=True) / space.ball_measure(c, r, closed=True)
        k = int(np.argmax(ratio))
        if ratio[k] > best:
            best, worst = float(ratio[k]), (c, float(r[k]))
    return {"C": best, "worst_pair": worst}


def reach(space, x):
    """Largest radius around ``x`` that stays inside the sampled region."""
    if isinstance(space, UniformGrid1D):
        if space.circle:
            return np.pi
        xc = space.nodes[x]
        return float(min(xc - space.a, space.b - xc))
    return 0.5 * float(space.distances_from(x).max())


def _h_grid(space, x, r):
    lo = 64 * space.min_spacing / min(r, 1.0)
    hi = reach(space, x) / max(r, 1.0)
    if not hi > lo:
        raise ValueError("h-grid exhausts the resolution of the space")
    return np.geomspace(lo, hi, N_H)


def _ratios(space, x, r, h):
    return space.ball_measure(x, r * h) / space.ball_measure(x, h)


def mu0(space, x, r, h_grid=None, reduce=np.max):
    """``limsup_{h -> 0} mu B(x, r h) / mu B(x, h)`` from the small-``h`` tail."""
    if not r > 0:
        raise ValueError("r must be positive")
    h = _h_grid(space, x, r) if h_grid is None else np.asarray(h_grid, dtype=float)
    tail = h[: max(1, int(round(h.size * TAIL)))]
    return float(reduce(_ratios(space, x, r, tail)))


def mu_infinity(space, x, r, h_grid=None, reduce=np.max):
    """``limsup_{h -> inf}`` of the same ratio over the top octave of usable scales.

    Returns ``(value, truncated)``; ``truncated`` is set when a queried radius
    exceeds a quarter of the diameter.
    """
    if not space.unbounded_model:
        raise ValueError("space is not flagged as a truncation of an unbounded model")
    if not r > 0:
        raise ValueError("r must be positive")
    if h_grid is None:
        top = min(reach(space, x), space.diameter / 4) / max(r, 1.0)
        h_grid = np.geomspace(top / 2, top, 8)
    h = np.asarray(h_grid, dtype=float)
    truncated = bool(np.max(h) * max(r, 1.0) > space.diameter / 4)
    return float(reduce(_ratios(space, x, r, h))), truncated


def _dim_pair(fn):
    lo = np.log(fn(R_SMALL)) / np.log(R_SMALL)
    hi = np.log(fn(R_LARGE)) / np.log(R_LARGE)
    lo2 = np.log(fn(np.sqrt(R_SMALL))) / np.log(np.sqrt(R_SMALL))
    hi2 = np.log(fn(np.sqrt(R_LARGE))) / np.log(np.sqrt(R_LARGE))
    conv = abs(lo - lo2) < 1e-2 and abs(hi - hi2) < 1e-2
    return float(lo), float(hi), bool(conv)


def local_dims(space, x, with_flag=False):
    """``(underline, overline)`` as ``ln mu0(x, r) / ln r`` at ``r = 2^-6`` and ``r = 2^6``."""
    lo, hi, conv = _dim_pair(lambda r: mu0(space, x, r))
    return (lo, hi, conv) if with_flag else (lo, hi)


def local_dims_infinity(space, x):
    lo, hi, _ = _dim_pair(lambda r: mu_infinity(space, x, r)[0])
    return lo, hi


def lower_dim_index_form(space, x, n_r=16):
    """``sup_{r > 1} ln(liminf_h ratio) / ln r`` over ``r`` in ``(1, 2^6]``."""
    rs = np.geomspace(2.0**0.25, R_LARGE, n_r)
    return float(max(np.log(mu0(space, x, r, reduce=np.min)) / np.log(r) for r in rs))


def lower_dim_sup_form(space, x, n_r=16):
    """``sup_{0 < r < 1} ln(limsup_h ratio) / ln r`` over ``r`` in ``[2^-6, 1)``."""
    rs = np.geomspace(R_SMALL, 2.0**-0.25, n_r)
    return float(max(np.log(mu0(space, x, r)) / np.log(r) for r in rs))


def dim_bounds(space, omega=None, max_points=64):
    """Lower bound of local lower dimensions over ``omega`` (point ids).

    At most ``max_points`` evenly spaced points of ``omega`` are evaluated.
    Infinity dimensions are added when the space is a truncated unbounded model.
    """
    pts = np.arange(space.n) if omega is None else np.asarray(list(omega), dtype=int)
    if pts.size == 0:
        raise ValueError("omega is empty")
    if pts.size > max_points:
        pts = pts[np.unique(np.linspace(0, pts.size - 1, max_points).round().astype(int))]
    per_point, conv = {}, True
    for x in pts:
        lo, hi, c = local_dims(space, int(x), with_flag=True)
        per_point[int(x)] = (lo, hi)
        conv &= c
    dim_lower = min(v[0] for v in per_point.values())
    inf_lo = inf_hi = None
    if space.unbounded_model:
        lo, hi = local_dims_infinity(space, space.origin)
        inf_lo, inf_hi = lo, hi
    return DimensionBounds(dim_lower, inf_lo, inf_hi, per_point, bool(conv))
