"""Maximal operators, potentials, singular integrals, commutators and
pseudo-differential operators on discrete measure spaces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .space import CurveSpace, UniformGrid1D, ball_sup


@dataclass(frozen=True)
class OperatorReport:
    output: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _batch(f, space):
    f = np.asarray(f)
    if f.shape[-1] != space.n:
        raise ValueError("function length does not match space")
    return f, f.ndim == 1


# -- maximal operators --------------------------------------------------------

def hl_maximal(f, space) -> np.ndarray:
    """Centered maximal function: max over the ball family at x of the average of ``|f|``.

    Accepts one function or a stack ``(m, N)``.
    """
    f, single = _batch(f, space)
    a = np.abs(np.atleast_2d(f))
    # the singleton ball gives |f| exactly; prefix-sum differences can round below it
    out = np.maximum(ball_sup(space, a, lambda meas, sums: sums / meas), a)
    return out[0] if single else out


def iterated_maximal(f, k, space) -> np.ndarray:
    if k < 0:
        raise ValueError("k must be nonnegative")
    g = np.abs(np.asarray(f, dtype=float))
    for _ in range(int(k)):
        g = hl_maximal(g, space)
    return g


def fractional_maximal(f, gamma, space) -> np.ndarray:
    """``sup_r mu(B)^{gamma-1} int_B |f|``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    f, single = _batch(f, space)
    out = ball_sup(space, np.abs(np.atleast_2d(f)), lambda meas, sums: sums * meas ** (gamma - 1))
    return out[0] if single else out


def vector_maximal(fs, theta, space) -> np.ndarray:
    """``(sum_j (M f_j)^theta)^{1/theta}`` pointwise."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    if len(fs) == 0:
        raise ValueError("need at least one function")
    M = hl_maximal(np.stack([np.asarray(f) for f in fs]), space)
    return np.sum(M**theta, axis=0) ** (1.0 / theta)


def sharp_maximal(f, space, chunk=256) -> np.ndarray:
    """Centered mean oscillation ``sup_r avg_B |f - f_B|``. Cost is O(N^3)."""
    f = np.asarray(f)
    out = np.zeros(space.n)
    for c in range(space.n):
        ds, order, cm = space._sorted_row(c)
        ends = np.flatnonzero(np.r_[np.diff(ds) > 0, True])
        v = f[order]
        mu = space.masses[order]
        means = np.cumsum(v * mu)[ends] / cm[ends + 1]
        best = 0.0
        pos = np.arange(space.n)
        for s in range(0, ends.size, chunk):
            e = ends[s:s + chunk]
            dev = np.abs(v[None, :] - means[s:s + chunk, None]) * mu[None, :]
            dev = np.where(pos[None, :] <= e[:, None], dev, 0.0)
            best = max(best, float(np.max(dev.sum(axis=1) / cm[e + 1])))
        out[c] = best
    return out


# -- potentials ---------------------------------------------------------------

def _strict_ball_row(space, i):
    """``mu B(x_i, d(x_i, x_j))`` for all j (strict ball)."""
    if isinstance(space, UniformGrid1D):
        k = space._offsets(i) - 1
        return space._window_measure(i, k)
    ds, order, cm = space._sorted_row(i)
    first = np.searchsorted(ds, ds, side="left")
    row = np.empty(space.n)
    row[order] = cm[first]
    return row


def metric_potential(f, gamma, space) -> np.ndarray:
    """``sum_{y != x} f(y) mu_y / mu B(x, d(x, y))^{1-gamma} + mu_x^gamma f(x)``.

    The diagonal term is the ball of radius half the minimal spacing, i.e. the
    point itself.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    f, single = _batch(f, space)
    F = np.atleast_2d(f)
    out = np.zeros(F.shape, dtype=np.result_type(F, float))
    mu = space.masses
    for i in range(space.n):
        row = _strict_ball_row(space, i)
        row[i] = 1.0
        k = mu / row ** (1 - gamma)
        k[i] = mu[i] ** gamma
        out[:, i] = F @ k
    return out[0] if single else out


def _riesz_cell_kernel(alpha, h, n):
    m = np.arange(n, dtype=float)
    a = np.maximum(m - 0.5, 0.0) * h
    b = (m + 0.5) * h
    k = (b**alpha - a**alpha) / alpha
    k[0] = 2 * (0.5 * h) ** alpha / alpha
    return k


def riesz_potential(f, alpha, grid: UniformGrid1D, at=None) -> np.ndarray:
    """``int f(y) |x - y|^{alpha-1} dy`` for piecewise-constant ``f`` on the cells.

    The kernel is integrated exactly over every cell, so the result is exact for
    cellwise-constant data. ``at`` evaluates at arbitrary points instead of nodes.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1) on the line")
    if not isinstance(grid, UniformGrid1D) or grid.circle or not grid.lebesgue:
        raise TypeError("riesz_potential needs an interval grid with Lebesgue masses")
    f, single = _batch(f, grid)
    F = np.atleast_2d(f)
    h, n = grid.h, grid.n
    if at is None:
        k = _riesz_cell_kernel(alpha, h, n)
        kfull = np.concatenate((k[:0:-1], k))
        out = np.stack([np.convolve(row, kfull, mode="valid") for row in F])
    else:
        x = np.atleast_1d(np.asarray(at, dtype=float))
        dl = grid.nodes[None, :] - h / 2 - x[:, None]
        dr = dl + h
        right = np.abs(np.maximum(dr, 0.0)) ** alpha - np.maximum(dl, 0.0) ** alpha
        left = np.maximum(-dl, 0.0) ** alpha - np.maximum(-dr, 0.0) ** alpha
        inside = (np.abs(np.minimum(dl, 0.0)) ** alpha + np.maximum(dr, 0.0) ** alpha)
        K = np.where((dl < 0) & (dr > 0), inside, np.where(dl >= 0, right, left)) / alpha
        out = F @ K.T
        if np.ndim(at) == 0:
            out = out[:, 0]
    return out[0] if single else out


# -- singular integrals -------------------------------------------------------

def cauchy_singular(f, curve: CurveSpace, chunk=512) -> np.ndarray:
    """``(1/(pi i)) sum_{j != i} f_j dtau_j / (tau_j - t_i)`` with the diagonal node removed.

    ``dtau`` is the complex line element (unit tangent times arc mass).
    """
    if not isinstance(curve, CurveSpace):
        raise TypeError("cauchy_singular needs a curve space")
    f, single = _batch(f, curve)
    F = np.atleast_2d(f).astype(complex)
    z = curve.points
    dz = curve.line_element
    out = np.zeros(F.shape, dtype=complex)
    for s in range(0, curve.n, chunk):
        rows = np.arange(s, min(s + chunk, curve.n))
        diff = z[None, :] - z[rows, None]
        diff[np.arange(rows.size), rows] = np.inf
        K = dz[None, :] / diff
        out[:, rows] = F @ K.T
    out /= np.pi * 1j
    return out[0] if single else out


def coordinates(space):
    """Embedding used by analytic kernels: nodes, ``exp(i theta)`` on circles, curve points."""
    if isinstance(space, CurveSpace):
        return space.points
    if isinstance(space, UniformGrid1D):
        return np.exp(1j * space.nodes) if space.circle else space.nodes
    raise TypeError(f"space '{space.name}' has no coordinate embedding")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Singular kernel ``K(x, y)``.

    ``kind`` is ``"hilbert"`` (``1/(x - y)``), ``"riesz"`` (``|x - y|^{alpha - n}``),
    ``"cauchy"`` (``T(y) / (pi i (y - x))`` on curves) or ``"custom"`` (dense ``table``).
    """

    kind: str
    eps: float = 0.0
    alpha: float = 0.0
    smooth_alpha: float = 1.0
    n_dim: int = 1
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("hilbert", "riesz", "cauchy", "custom"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if not self.smooth_alpha > 0:
            raise ValueError("smoothness exponent must be positive")
        if self.kind == "custom" and self.table is None:
            raise ValueError("custom kernel needs a table")

    @classmethod
    def from_dict(cls, d):
        table = d.get("table")
        return cls(d["kind"], float(d.get("eps", 0.0)), float(d.get("alpha", 0.0)),
                   float(d.get("smooth_alpha", 1.0)), int(d.get("n_dim", 1)),
                   None if table is None else np.asarray(table, dtype=float))

    def rows(self, space, x_idx, y_idx=None):
        """Kernel block ``K(x_i, y_j)``; the diagonal ``x = y`` is set to zero."""
        x_idx = np.atleast_1d(x_idx)
        y_idx = np.arange(space.n) if y_idx is None else np.atleast_1d(y_idx)
        if self.kind == "custom":
            K = np.asarray(self.table)[np.ix_(x_idx, y_idx)].astype(complex)
        else:
            z = coordinates(space)
            diff = z[y_idx][None, :] - z[x_idx][:, None]
            zero = diff == 0
            diff = np.where(zero, 1.0, diff)
            if self.kind == "hilbert":
                K = -1.0 / diff
            elif self.kind == "riesz":
                K = np.abs(diff) ** (self.alpha - self.n_dim) + 0j
            else:
                if not isinstance(space, CurveSpace):
                    raise TypeError("cauchy kernel needs a curve space")
                K = space.tangents[y_idx][None, :] / (np.pi * 1j * diff)
            K = np.where(zero, 0.0, K)
        return K


def _as_real(out):
    return out.real if np.all(out.imag == 0) else out


def cz_apply(f, kernel: KernelSpec, space, chunk=512) -> OperatorReport:
    """``T_eps f(x) = sum_{d(x, y) > eps} K(x, y) f(y) mu_y``.

    Diagnostics report the size constant ``sup |K(x, y)| |x - y|^n`` over the
    pairs that enter the sum.
    """
    f, single = _batch(f, space)
    F = np.atleast_2d(f).astype(complex)
    out = np.zeros(F.shape, dtype=complex)
    mu = space.masses
    z = None if kernel.kind == "custom" else coordinates(space)
    size = 0.0
    for s in range(0, space.n, chunk):
        rows = np.arange(s, min(s + chunk, space.n))
        K = kernel.rows(space, rows)
        D = np.stack([space.distances_from(i) for i in rows])
        K = np.where(D > kernel.eps, K, 0.0)
        out[:, rows] = (F * mu) @ K.T
        if z is not None:
            dist = np.abs(z[None, :] - z[rows, None])
            size = max(size, float(np.max(np.abs(K) * dist**kernel.n_dim)))
    out = _as_real(out)
    return OperatorReport(out[0] if single else out, {"size": size})


def kernel_condition_check(kernel: KernelSpec, space, sample_count=200, seed=0,
                           family=None) -> dict:
    """Sampled constants of the size, x-smoothness, y-smoothness and L2 conditions.

    Triples ``(x, x', y)`` with ``0 < |x' - x| < |x - y| / 2`` are drawn from a
    seeded generator. The y-smoothness constant reuses each triple with the
    roles of the two variables exchanged, so symmetric (or antisymmetric)
    kernels give identical x- and y-constants.
    """
    if sample_count < 100:
        raise ValueError("sample_count must be at least 100")
    rng = np.random.default_rng(seed)
    z = coordinates(space) if kernel.kind != "custom" else np.arange(space.n, dtype=float)
    a_exp = kernel.smooth_alpha
    nd = kernel.n_dim

    def K(i, j):
        return complex(kernel.rows(space, i, j)[0, 0])

    size = bx = by = 0.0
    got = 0
    tries = 0
    while got < sample_count and tries < 100 * sample_count:
        tries += 1
        x, y = rng.integers(0, space.n, size=2)
        if x == y:
            continue
        dxy = abs(z[x] - z[y])
        cand = np.flatnonzero((np.abs(z - z[x]) < dxy / 2) & (np.arange(space.n) != x))
        if cand.size == 0:
            continue
        xp = int(rng.choice(cand))
        dxx = abs(z[xp] - z[x])
        got += 1
        size = max(size, abs(K(x, y)) * dxy**nd)
        bx = max(bx, abs(K(xp, y) - K(x, y)) * dxy ** (nd + a_exp) / dxx**a_exp)
        by = max(by, abs(K(y, xp) - K(y, x)) * dxy ** (nd + a_exp) / dxx**a_exp)
    if family is None:
        from .families import standard_family

        family = standard_family(space)[1]
    T = cz_apply(family, kernel, space).output
    l2 = np.sqrt(space.integrate(np.abs(T) ** 2) / space.integrate(np.abs(family) ** 2))
    return {"size": size, "x_smoothness": bx, "y_smoothness": by,
            "l2_bound": float(np.max(l2)), "samples": got}


def bmo_seminorm(b, space) -> float:
    return float(np.max(sharp_maximal(b, space)))


def commutator(b, kernel: KernelSpec, f, space, with_bmo=True) -> OperatorReport:
    """``[b, T] f = b T f - T(b f)`` with the truncated operator ``T``."""
    b = np.asarray(b)
    Tf = cz_apply(f, kernel, space).output
    Tbf = cz_apply(b * np.asarray(f), kernel, space).output
    diag = {"bmo": bmo_seminorm(b, space)} if with_bmo else {}
    return OperatorReport(b * Tf - Tbf, diag)


# -- pseudo-differential operators --------------------------------------------

def pseudodiff_apply(sigma, f, grid: UniformGrid1D) -> OperatorReport:
    """``sum_xi sigma(x_i, xi) c(xi) exp(i xi x_i)`` over the grid's integer frequencies.

    ``sigma(x, xi)`` must broadcast over a column of nodes and a row of
    frequencies. Diagnostics hold sampled ``sup |D^k_xi sigma| (1 + |xi|)^k``
    for ``k = 0, 1, 2`` from forward differences.
    """
    if not (isinstance(grid, UniformGrid1D) and grid.circle):
        raise TypeError("pseudodiff_apply needs a circle grid")
    xi = spectral.frequencies(grid)
    x = grid.nodes
    S = np.asarray(sigma(x[:, None], xi[None, :]), dtype=complex) * np.ones((grid.n, grid.n))
    if not np.all(np.isfinite(S)):
        raise ValueError("symbol has non-finite values")
    c = spectral.forward(f, grid)
    E = np.exp(1j * np.outer(x, xi))
    out = np.sum(S * E * c[None, :], axis=1)
    order = np.argsort(xi)
    xs = xi[order]
    Ss = S[:, order]
    diags = {}
    for k in range(3):
        d = np.diff(Ss, n=k, axis=1) if k else Ss
        w = (1 + np.abs(xs[: xs.size - k])) ** k
        diags[f"symbol_order{k}"] = float(np.max(np.abs(d) * w[None, :]))
    return OperatorReport(out, diags)
