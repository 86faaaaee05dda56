"""Discrete measure spaces: uniform grids, circles, closed planar curves and point clouds.

Every space carries positive point masses and a (quasi)metric. Balls are strict,
``B(x, r) = {y : d(x, y) < r}``. The achievable balls around a center are exactly the
closed balls at each distinct distance, which is the family swept by the ball engine
``iter_ball_sums``.
"""

from __future__ import annotations

from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


class DiscreteMeasureSpace:
    """Finite quasimetric measure space given by a dense distance matrix.

    Parameters
    ----------
    masses : array_like
        Positive point masses.
    distances : array_like
        Symmetric ``(N, N)`` matrix with zero diagonal.
    kappa : float, optional
        Quasi-triangle constant. Computed by brute force when omitted.
    name : str
        Identifier used in reports.
    """

    kind = "custom"

    def __init__(self, masses, distances=None, *, kappa=None, name="custom",
                 unbounded_model=False, origin=0):
        masses = np.asarray(masses, dtype=float)
        if masses.ndim != 1 or masses.size < 1:
            raise ValueError("masses must be a non-empty vector")
        if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
            raise ValueError("masses must be finite and positive")
        self.masses = masses
        self.masses.flags.writeable = False
        self.name = name
        self.unbounded_model = bool(unbounded_model)
        self.origin = int(origin)
        if distances is not None:
            D = np.asarray(distances, dtype=float)
            if D.shape != (masses.size, masses.size):
                raise ValueError("distance matrix shape does not match masses")
            if not np.all(np.isfinite(D)) or np.any(D < 0):
                raise ValueError("distances must be finite and nonnegative")
            if np.any(np.diag(D) != 0):
                raise ValueError("distance matrix must have zero diagonal")
            if not np.array_equal(D, D.T):
                raise ValueError("distance matrix must be symmetric")
            off = D[~np.eye(D.shape[0], dtype=bool)]
            if np.any(off == 0):
                raise ValueError("distinct points must have positive distance")
            D.flags.writeable = False
            self._D = D
        self.kappa = float(kappa) if kappa is not None else self._brute_kappa()

    # -- metric ---------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.masses.size

    def __len__(self):
        return self.n

    def distances_from(self, i: int) -> np.ndarray:
        return self._D[int(i)]

    def distance_matrix(self) -> np.ndarray:
        return np.stack([self.distances_from(i) for i in range(self.n)])

    def distances_to_coordinate(self, x) -> np.ndarray:
        raise TypeError(f"space '{self.name}' has no coordinate embedding")

    def _brute_kappa(self) -> float:
        D = self.distance_matrix()
        kappa = 1.0
        for j in range(self.n):
            s = D[:, j][:, None] + D[j, :][None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(s > 0, D / s, 0.0)
            kappa = max(kappa, float(r.max()))
        return kappa

    @cached_property
    def diameter(self) -> float:
        return float(max(self.distances_from(i).max() for i in range(self.n)))

    @cached_property
    def min_spacing(self) -> float:
        if self.n < 2:
            return np.inf
        best = np.inf
        for i in range(self.n):
            d = self.distances_from(i)
            best = min(best, float(np.min(np.delete(d, i))))
        return best

    @property
    def eps_min(self) -> float:
        """Half the minimal spacing; used to regularize anchors and diagonals."""
        return 0.5 * self.min_spacing

    @cached_property
    def total_measure(self) -> float:
        return float(np.sum(self.masses))

    @property
    def param(self) -> np.ndarray:
        """Normalized position in [0, 1) used to lay out test functions."""
        return np.arange(self.n) / self.n

    # -- integration and balls ------------------------------------------------
    def integrate(self, f) -> float | complex:
        f = np.asarray(f)
        return np.sum(f * self.masses, axis=-1)

    def _sorted_row(self, center):
        return _sorted_row_cached(self, int(center))

    def ball(self, center: int, r: float):
        """Return ``(indices, measure)`` of the strict ball ``d(center, .) < r``."""
        if not r > 0:
            raise ValueError("radius must be positive")
        idx = np.flatnonzero(self.distances_from(center) < r)
        return idx, float(np.sum(self.masses[idx]))

    def ball_measure(self, center: int, radii, closed: bool = False) -> np.ndarray:
        """Measure of ``B(center, r)`` for each radius (``d <= r`` when ``closed``)."""
        d, _, cm = self._sorted_row(center)
        side = "right" if closed else "left"
        k = np.searchsorted(d, np.asarray(radii, dtype=float), side=side)
        return cm[k]

    def ball_radii(self, center: int) -> np.ndarray:
        """Distinct distances from ``center`` (closed-ball radii of the ball family)."""
        d, _, _ = self._sorted_row(center)
        return d[np.r_[np.diff(d) > 0, True]]


@lru_cache(maxsize=64)
def _sorted_row_cached(space, center):
    d = space.distances_from(center)
    order = np.argsort(d, kind="stable")
    ds = d[order]
    cm = np.concatenate(([0.0], np.cumsum(space.masses[order])))
    return ds, order, cm


class UniformGrid1D(DiscreteMeasureSpace):
    """Midpoint grid on ``[a, b]`` or on the circle of length ``2*pi``.

    Distances are integer offsets times the spacing, so ball windows are exact.
    Masses default to the cell length; a density may replace them.
    """

    def __init__(self, a, b, n, *, circle=False, masses=None, name=None,
                 unbounded_model=False, origin=None):
        a, b = float(a), float(b)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValueError("endpoints must be finite")
        if not a < b:
            raise ValueError("need a < b")
        n = int(n)
        if n < 2:
            raise ValueError("need n >= 2")
        self.a, self.b, self.circle = a, b, bool(circle)
        self.h = (b - a) / n
        self.nodes = a + (np.arange(n) + 0.5) * self.h
        self.nodes.flags.writeable = False
        self.lebesgue = masses is None
        if masses is None:
            masses = np.full(n, self.h)
        if name is None:
            name = f"circle[{n}]" if circle else f"interval[{a:g},{b:g}][{n}]"
        if origin is None:
            origin = int(np.argmin(np.abs(self.nodes)))
        super().__init__(masses, None, kappa=1.0, name=name,
                         unbounded_model=unbounded_model, origin=origin)
        self._prefix = np.concatenate(([0.0], np.cumsum(self.masses)))

    kind = "grid"

    def _offsets(self, i):
        m = np.abs(np.arange(self.n) - int(i))
        if self.circle:
            m = np.minimum(m, self.n - m)
        return m

    def distances_from(self, i):
        return self._offsets(i) * self.h

    def distances_to_coordinate(self, x):
        d = np.abs(self.nodes - float(x))
        if self.circle:
            d = np.minimum(d, 2 * np.pi - d)
        return d

    @cached_property
    def diameter(self):
        return (self.n // 2) * self.h if self.circle else (self.n - 1) * self.h

    @cached_property
    def min_spacing(self):
        return self.h

    @cached_property
    def total_measure(self):
        if self.lebesgue:
            return self.b - self.a
        return float(self._prefix[-1])

    @property
    def param(self):
        return (self.nodes - self.a) / (self.b - self.a)

    def _kmax(self, radii, closed):
        """Largest integer offset m with ``m*h < r`` (``<=`` when closed)."""
        r = np.asarray(radii, dtype=float)
        m = np.floor(r / self.h).astype(np.int64)
        inside = (lambda k: k * self.h <= r) if closed else (lambda k: k * self.h < r)
        m = np.where(inside(m + 1), m + 1, m)
        m = np.where(inside(m), m, m - 1)
        return m

    def ball(self, center, r):
        if not r > 0:
            raise ValueError("radius must be positive")
        idx = np.flatnonzero(self._offsets(center) <= self._kmax(r, False))
        return idx, float(np.sum(self.masses[idx]))

    def ball_measure(self, center, radii, closed=False):
        k = self._kmax(radii, closed)
        return self._window_measure(int(center), k)

    def _window_measure(self, i, k):
        k = np.asarray(k)
        P, n = self._prefix, self.n
        if self.circle:
            P3 = self._prefix3
            kk = np.clip(k, 0, (n - 1) // 2)
            inner = P3[n + i + kk + 1] - P3[n + i - kk]
            return np.where(2 * k + 1 >= n, P[n], np.where(k < 0, 0.0, inner))
        lo = np.clip(i - k, 0, n - 1)
        hi = np.clip(i + k, 0, n - 1)
        return np.where(k < 0, 0.0, P[hi + 1] - P[lo])

    @cached_property
    def _prefix3(self):
        return np.concatenate(([0.0], np.cumsum(np.tile(self.masses, 3))))

    def ball_radii(self, center):
        kmax = self.n // 2 if self.circle else max(int(center), self.n - 1 - int(center))
        return np.arange(kmax + 1) * self.h


class CurveSpace(DiscreteMeasureSpace):
    """Closed planar curve sampled at equal arc-length steps with chordal metric.

    ``points`` and ``tangents`` are complex; ``tangents`` have unit modulus so
    ``tangents * masses`` is the complex line element at each node.
    """

    kind = "curve"

    def __init__(self, points, tangents, length, *, name="curve"):
        points = np.asarray(points, dtype=complex)
        n = points.size
        self.points = points
        self.tangents = np.asarray(tangents, dtype=complex)
        self.length = float(length)
        super().__init__(np.full(n, self.length / n), None, kappa=1.0, name=name)

    def distances_from(self, i):
        return np.abs(self.points - self.points[int(i)])

    def distances_to_coordinate(self, x):
        return np.abs(self.points - complex(x))

    @cached_property
    def total_measure(self):
        return self.length

    @property
    def line_element(self) -> np.ndarray:
        return self.tangents * self.masses


# -- constructors -------------------------------------------------------------

def build_interval_grid(a, b, n, *, density=None, unbounded_model=False) -> UniformGrid1D:
    """Midpoint grid on ``[a, b]``; ``density`` (callable) gives weighted masses.

    Weighted cell masses integrate the density by Gauss-Legendre on each half
    cell, so densities with a kink at a node (such as ``|x|``) are exact.
    """
    grid = UniformGrid1D(a, b, n)
    if density is None:
        if unbounded_model:
            return UniformGrid1D(a, b, n, unbounded_model=True)
        return grid
    xg, wg = leggauss(8)
    masses = np.zeros(grid.n)
    for lo, hi in ((grid.nodes - grid.h / 2, grid.nodes), (grid.nodes, grid.nodes + grid.h / 2)):
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        pts = mid[:, None] + half[:, None] * xg[None, :]
        masses += half * (np.asarray(density(pts), dtype=float) @ wg)
    return UniformGrid1D(a, b, n, masses=masses, name=f"interval[{a:g},{b:g}][{n}]:weighted",
                         unbounded_model=unbounded_model)


def build_circle_grid(n) -> UniformGrid1D:
    if int(n) < 4:
        raise ValueError("circle grid needs n >= 4")
    return UniformGrid1D(-np.pi, np.pi, n, circle=True)


def _polygon_nodes(vertices, n):
    from shapely.geometry import LinearRing

    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2 or V.shape[1] != 2 or V.shape[0] < 3:
        raise ValueError("polygon needs at least 3 planar vertices")
    if not LinearRing(V).is_simple:
        raise ValueError("polygon is self-intersecting")
    z = V[:, 0] + 1j * V[:, 1]
    edges = np.roll(z, -1) - z
    lengths = np.abs(edges)
    if np.any(lengths == 0):
        raise ValueError("repeated polygon vertex")
    cum = np.concatenate(([0.0], np.cumsum(lengths)))
    L = cum[-1]
    s = (np.arange(n) + 0.5) * L / n
    e = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(edges) - 1)
    pts = z[e] + edges[e] * (s - cum[e]) / lengths[e]
    return pts, edges[e] / lengths[e], L


def _ellipse_nodes(a, b, n, samples=1 << 16):
    from scipy.integrate import cumulative_simpson

    if not (a > 0 and b > 0):
        raise ValueError("ellipse semi-axes must be positive")
    phi = np.linspace(-np.pi, np.pi, samples + 1)
    speed = np.hypot(a * np.sin(phi), b * np.cos(phi))
    s_of_phi = cumulative_simpson(speed, x=phi, initial=0.0)
    L = s_of_phi[-1]
    s = (np.arange(n) + 0.5) * L / n
    ph = phi[0] + (np.arange(n) + 0.5) * 2 * np.pi / n if a == b else np.interp(s, s_of_phi, phi)
    pts = a * np.cos(ph) + 1j * b * np.sin(ph)
    tan = -a * np.sin(ph) + 1j * b * np.cos(ph)
    return pts, tan / np.abs(tan), (2 * np.pi * a if a == b else L)


def build_carleson_curve(kind, n, **params) -> CurveSpace:
    """Closed curve sampled at ``n`` equal arc-length steps.

    ``kind`` is ``"circle"`` (``radius``), ``"ellipse"`` (``a``, ``b``) or
    ``"polygon"`` (``vertices``). Arc-length positions start at parameter
    ``-pi`` so the circle nodes coincide with ``build_circle_grid`` angles.
    """
    n = int(n)
    if n < 8:
        raise ValueError("curve needs n >= 8")
    if kind == "circle":
        r = float(params.get("radius", 1.0))
        pts, tan, L = _ellipse_nodes(r, r, n)
    elif kind == "ellipse":
        pts, tan, L = _ellipse_nodes(float(params["a"]), float(params["b"]), n)
    elif kind == "polygon":
        pts, tan, L = _polygon_nodes(params["vertices"], n)
    else:
        raise ValueError(f"unknown curve kind {kind!r}")
    return CurveSpace(pts, tan, L, name=f"{kind}[{n}]")


def load_custom_space(path_or_dict) -> DiscreteMeasureSpace:
    """Load ``{"n", "distances" (row-major), "masses", "kappa_hint"?}``.

    The quasi-triangle constant is always recomputed; a hint lower than the
    true value is rejected.
    """
    import json

    if isinstance(path_or_dict, dict):
        data = path_or_dict
    else:
        with open(path_or_dict) as fh:
            data = json.load(fh)
    n = int(data["n"])
    D = np.asarray(data["distances"], dtype=float)
    if D.size != n * n:
        raise ValueError(f"expected {n * n} distances, got {D.size}")
    space = DiscreteMeasureSpace(data["masses"], D.reshape(n, n), name=data.get("name", "custom"))
    hint = data.get("kappa_hint")
    if hint is not None and float(hint) < space.kappa - 1e-12:
        raise ValueError(f"kappa_hint {hint} below brute-force value {space.kappa}")
    return space


def annulus_report(space, center=0):
    """Fraction of dyadic annuli around ``center`` (within the resolved range) with no mass."""
    d = np.sort(space.distances_from(center))
    lo, hi = space.min_spacing, space.diameter
    if not hi > lo:
        return {"scales": 0, "empty": 0}
    js = np.arange(int(np.floor(np.log2(lo))), int(np.ceil(np.log2(hi))))
    empty = sum(not np.any((d >= 2.0**j) & (d < 2.0 ** (j + 1))) for j in js)
    return {"scales": int(js.size), "empty": int(empty)}


# -- ball engine --------------------------------------------------------------

def iter_ball_sums(space, values):
    """Yield ``(centers, measures, sums)`` for every achievable ball.

    ``values`` has shape ``(m, N)``; ``sums`` are ``int_B values dmu``. On grids
    ``centers`` is ``slice(None)`` and arrays run over all centers for one
    radius step. Otherwise ``centers`` is one point id and arrays run over
    that point's radii.
    """
    values = np.atleast_2d(values)
    if isinstance(space, UniformGrid1D):
        yield from _grid_ball_sums(space, values)
        return
    for c in range(space.n):
        ds, order, cm = space._sorted_row(c)
        ends = np.flatnonzero(np.r_[np.diff(ds) > 0, True])
        cv = np.cumsum(values[:, order] * space.masses[order], axis=1)
        yield c, cm[ends + 1], cv[:, ends]


def _grid_ball_sums(space, values):
    n = space.n
    mu = space.masses
    Pm = space._prefix
    Pv = np.concatenate((np.zeros((values.shape[0], 1)), np.cumsum(values * mu, axis=1)), axis=1)
    i = np.arange(n)
    if space.circle:
        Pm3 = np.concatenate(([0.0], np.cumsum(np.tile(mu, 3))))
        Pv3 = np.concatenate((np.zeros((values.shape[0], 1)),
                              np.cumsum(np.tile(values * mu, 3), axis=1)), axis=1)
        for k in range((n - 1) // 2 + 1):
            lo, hi = n + i - k, n + i + k + 1
            yield slice(None), Pm3[hi] - Pm3[lo], Pv3[:, hi] - Pv3[:, lo]
        if n % 2 == 0:
            yield slice(None), np.full(n, Pm[-1]), np.repeat(Pv[:, -1:], n, axis=1)
        return
    for k in range(n):
        lo = np.maximum(i - k, 0)
        hi = np.minimum(i + k, n - 1) + 1
        yield slice(None), Pm[hi] - Pm[lo], Pv[:, hi] - Pv[:, lo]


def ball_sup(space, values, fn, *, width=None):
    """Pointwise sup over the ball family of ``fn(measures, sums)``.

    ``fn`` maps measure arrays of shape ``(L,)`` and sums of shape ``(m, L)``
    to an array of shape ``(q, L)``; the result has shape ``(q, N)``.
    """
    acc = None
    for centers, meas, sums in iter_ball_sums(space, values):
        val = np.atleast_2d(fn(meas, sums))
        if acc is None:
            acc = np.full((val.shape[0], space.n), -np.inf)
        if isinstance(centers, slice):
            np.maximum(acc, val, out=acc)
        else:
            acc[:, centers] = np.maximum(acc[:, centers], val.max(axis=1))
    return acc
