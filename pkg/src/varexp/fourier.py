"""Trigonometric series on the circle grid: coefficients, partial sums, summability
means, Steklov modulus, series multipliers and continuous multipliers."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson

from . import spectral
from .exponent import sobolev_exponent
from .norms import norm
from .space import UniformGrid1D


class ResolutionWarning(UserWarning):
    """A scale parameter is below the grid spacing."""


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Real coefficients ``a_0..a_K`` and ``b_0..b_K`` (``b_0 = 0``); leading axes batch."""

    a: np.ndarray
    b: np.ndarray

    @property
    def K(self) -> int:
        return self.a.shape[-1] - 1

    def harmonics(self, grid) -> np.ndarray:
        """``A_k(x)`` for ``k = 0..K`` with ``A_0 = a_0 / 2``; shape ``(..., K+1, N)``."""
        C, S = _trig_tables(grid, self.K)
        a = self.a.copy()
        a[..., 0] *= 0.5
        return a[..., :, None] * C + self.b[..., :, None] * S


@lru_cache(maxsize=16)
def _trig_tables(grid, K):
    k = np.arange(K + 1)[:, None]
    return np.cos(k * grid.nodes[None, :]), np.sin(k * grid.nodes[None, :])


def _require_circle(grid):
    if not (isinstance(grid, UniformGrid1D) and grid.circle):
        raise TypeError("a circle grid is required")


def fourier_coeffs(f, grid) -> FourierSeries:
    """``a_k = (1/pi) sum f cos(k theta_i) 2pi/n`` and likewise ``b_k``, for ``k <= (n-1)//2``."""
    _require_circle(grid)
    f = np.asarray(f)
    if np.iscomplexobj(f):
        raise ValueError("trigonometric coefficients need a real function")
    K = (grid.n - 1) // 2
    c = spectral.forward(f.astype(float), grid)[..., : K + 1]
    a = 2 * c.real
    b = -2 * c.imag
    b[..., 0] = 0.0
    return FourierSeries(a, b)


def reconstruct(series: FourierSeries, grid) -> np.ndarray:
    return series.harmonics(grid).sum(axis=-2)


def _check_order(series, n):
    if not 0 <= n <= series.K:
        raise ValueError(f"order {n} outside 0..{series.K}")


def partial_sum(series, n, grid) -> np.ndarray:
    """``a_0/2 + sum_{k=1}^n A_k``."""
    _check_order(series, n)
    return series.harmonics(grid)[..., : n + 1, :].sum(axis=-2)


def majorant(series, grid, n_max=None) -> np.ndarray:
    """``max_{0 <= k <= n_max} |S_k|`` pointwise."""
    n_max = series.K if n_max is None else n_max
    _check_order(series, n_max)
    S = np.cumsum(series.harmonics(grid)[..., : n_max + 1, :], axis=-2)
    return np.abs(S).max(axis=-2)


def apply_series_multiplier(series, lam, grid) -> np.ndarray:
    """``lam_0 a_0/2 + sum lam_k A_k``; ``lam`` is zero beyond its length."""
    lam = np.asarray(lam)
    full = np.zeros(series.K + 1, dtype=lam.dtype)
    m = min(lam.size, series.K + 1)
    full[:m] = lam[:m]
    return np.einsum("k,...kn->...n", full, series.harmonics(grid))


def marcinkiewicz_constant(lam) -> float:
    """``max(sup |lam_k|, sup_j sum_{2^{j-1} <= k < 2^j} |lam_k - lam_{k+1}|)``.

    The sequence is zero beyond its length and ``|lam_0 - lam_1|`` is counted
    in the ``j = 1`` block.
    """
    lam = np.asarray(lam)
    if lam.size == 0:
        return 0.0
    ext = np.concatenate((lam, [0.0]))
    d = np.abs(np.diff(ext))
    best = float(np.max(np.abs(lam)))
    j = 1
    while 2 ** (j - 1) < lam.size:
        lo, hi = 2 ** (j - 1), min(2**j - 1, lam.size - 1)
        block = float(np.sum(d[lo:hi + 1]))
        if j == 1:
            block += float(d[0])
        best = max(best, block)
        j += 1
    return best


def lp_blocks(K):
    """Dyadic blocks: ``{0}``, then ``[2^{j-1}, 2^j - 1]`` clipped at ``K``."""
    blocks = [(0, 0)]
    j = 1
    while 2 ** (j - 1) <= K:
        blocks.append((2 ** (j - 1), min(2**j - 1, K)))
        j += 1
    return blocks


def littlewood_paley_square(series, grid) -> np.ndarray:
    A = series.harmonics(grid)
    total = np.zeros(A.shape[:-2] + A.shape[-1:])
    for lo, hi in lp_blocks(series.K):
        total += A[..., lo:hi + 1, :].sum(axis=-2) ** 2
    return np.sqrt(total)


def zygmund_weights(n):
    k = np.arange(n + 1)
    return 1 - (k / (n + 1)) ** 2


def cesaro_weights(n):
    k = np.arange(n + 1)
    return 1 - k / (n + 1)


def zygmund_mean(series, n, grid) -> np.ndarray:
    """``sum_{k=0}^n [1 - (k/(n+1))^2] A_k``."""
    _check_order(series, n)
    return apply_series_multiplier(series, zygmund_weights(n), grid)


def cesaro_mean(series, n, grid) -> np.ndarray:
    """``(1/(n+1)) sum_{k=0}^n S_k = sum_{k=0}^n (1 - k/(n+1)) A_k``."""
    _check_order(series, n)
    return apply_series_multiplier(series, cesaro_weights(n), grid)


def one_minus_sinc(t):
    """``1 - sin(t)/t`` without cancellation for small ``t``."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 1e-2
    ts = np.where(small, 1.0, t)
    t2 = t * t
    series = t2 / 6 - t2 * t2 / 120 + t2**3 / 5040
    return np.where(small, series, 1 - np.sin(ts) / ts)


def steklov_mean(f, h, grid) -> np.ndarray:
    """``(1/2h) int_{x-h}^{x+h} f`` for the cellwise-constant periodic extension of ``f``."""
    _require_circle(grid)
    if not 0 < h < np.pi:
        raise ValueError("h must lie in (0, pi)")
    if h < grid.h:
        warnings.warn(f"h={h:g} below grid spacing {grid.h:g}", ResolutionWarning, stacklevel=2)
    f = np.asarray(f, dtype=float)
    sp, n = grid.h, grid.n
    C = np.concatenate((np.zeros(f.shape[:-1] + (1,)), np.cumsum(f * sp, axis=-1)), axis=-1)
    total = C[..., -1:]

    def F(x):
        u = (x + np.pi) / sp
        wraps = np.floor(u / n)
        u = u - wraps * n
        j = np.minimum(np.floor(u).astype(int), n - 1)
        return wraps * total + C[..., j] + f[..., j] * (u - j) * sp

    return (F(grid.nodes + h) - F(grid.nodes - h)) / (2 * h)


def modulus(f, p, rho, delta, grid) -> float:
    """``max_{h in {delta, delta/2, delta/4, delta/8}} ||rho (f - tau_h f)||_{p(.)}``."""
    if not delta > grid.h:
        raise ValueError("delta must exceed the grid spacing")
    f = np.asarray(f, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        vals = [norm(f - steklov_mean(f, delta / 2**i, grid), p, rho, grid) for i in range(4)]
    if delta / 8 < grid.h:
        warnings.warn("modulus scales below grid spacing", ResolutionWarning, stacklevel=2)
    return max(vals)


def lambda_kn_zygmund(n) -> np.ndarray:
    """``(k/(n+1))^2 / (1 - sin(k/n)/(k/n))`` for ``k = 0..n``.

    Entry ``k = 0`` holds the limit ``6 (n/(n+1))^2``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = (k / (n + 1)) ** 2 / one_minus_sinc(k / n)
    lam[0] = 6 * (n / (n + 1)) ** 2
    return lam


def lambda_kn_cesaro(n) -> np.ndarray:
    """``(k/(n+1)) / (n (1 - sin(k/n)/(k/n)))`` for ``k = 1..n``; ``k = 0`` entry is 0."""
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = (k / (n + 1)) / (n * one_minus_sinc(k / n))
    lam[0] = 0.0
    return lam


# -- continuous multipliers ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymbolSpec:
    """Multiplier ``m(xi)``; ``domain`` is ``"real"`` or ``"positive"`` for condition checks."""

    fn: object
    domain: str = "real"
    name: str = "custom"
    meta: dict = field(default_factory=dict)

    def __call__(self, xi):
        return np.asarray(self.fn(np.asarray(xi, dtype=float)))


SYMBOLS = {
    "identity": SymbolSpec(lambda x: np.ones_like(x), name="identity"),
    "conjugate": SymbolSpec(lambda x: -1j * np.sign(x), name="conjugate"),
    "riesz_projection": SymbolSpec(lambda x: (x >= 0).astype(float), name="riesz_projection"),
    "ratio": SymbolSpec(lambda x: x / (1 + x), domain="positive", name="ratio"),
}


def continuous_multiplier(m, f, grid) -> np.ndarray:
    """Multiply discrete Fourier coefficients by ``m(xi)`` and transform back (complex output)."""
    spectral.require_periodic(grid)
    m = SYMBOLS[m] if isinstance(m, str) else m
    xi = spectral.frequencies(grid)
    return spectral.inverse(np.asarray(m(xi)) * spectral.forward(f, grid), grid)


def multiplier_condition_report(m, octaves=(-20, 20), per_octave=64) -> dict:
    """Sampled Mikhlin constants (orders 0 and 1), octave Hoermander integrals with
    ``s = 2`` and total variation on each dyadic interval."""
    m = SYMBOLS[m] if isinstance(m, str) else m
    signs = (1.0,) if m.domain == "positive" else (1.0, -1.0)
    j0, j1 = octaves
    sup0 = sup1 = horm = var = 0.0
    for s in signs:
        for j in range(j0, j1):
            x = s * np.geomspace(2.0**j, 2.0 ** (j + 1), per_octave + 1)
            step = np.abs(x) * 1e-6
            vals = m(x)
            deriv = (m(x + step) - m(x - step)) / (2 * step)
            sup0 = max(sup0, float(np.max(np.abs(vals))))
            sup1 = max(sup1, float(np.max(np.abs(x) * np.abs(deriv))))
            R = 2.0**j
            horm = max(horm, float(np.sqrt(R * simpson(np.abs(deriv) ** 2, x=np.abs(x)))))
            var = max(var, float(np.sum(np.abs(np.diff(vals)))))
    return {"mikhlin_order0": sup0, "mikhlin_order1": sup1, "mikhlin": max(sup0, sup1),
            "hormander": horm, "dyadic_variation": var}


def fractional_series_multiplier(alpha, measures, n) -> np.ndarray:
    """``m(k) = sum_{t < k} mass / (k - t)^alpha`` over the atoms attached to the dyadic
    interval containing ``k``, for ``k = 0..n`` (``m(0) = 0``).

    ``measures`` maps the dyadic index ``j`` (``2^j <= k < 2^{j+1}``) to a list
    of ``(t, mass)`` atoms, or is a callable of ``j``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    get = measures if callable(measures) else (lambda j: measures.get(j, ()))
    out = np.zeros(n + 1)
    for k in range(1, n + 1):
        j = k.bit_length() - 1
        total = 0.0
        for t, mass in get(j):
            if t == k:
                raise ValueError(f"atom at t={t} collides with lambda={k}; shift the atom")
            if t < k:
                total += mass / (k - t) ** alpha
        out[k] = total
    return out


def fractional_target_exponent(p, alpha):
    """Exponent ``q`` with ``1/q = 1/p - alpha``."""
    return sobolev_exponent(p, alpha, 1)
