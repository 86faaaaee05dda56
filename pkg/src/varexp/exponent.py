"""Variable exponents p(.) with 1 < p- <= p+ < inf and their log-Hoelder regularity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .space import UniformGrid1D


@dataclass(frozen=True, eq=False)
class VariableExponent:
    """Samples of an exponent function, optionally constant outside a ball.

    Parameters
    ----------
    values : array_like
        Exponent at each point.
    tail_constant : float, optional
        Value ``p_inf`` taken for ``d(x0, x) > tail_radius``.
    tail_radius : float, optional
    """

    values: np.ndarray
    tail_constant: float | None = None
    tail_radius: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("exponent samples must be a non-empty vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("exponent samples must be finite")
        if not v.min() > 1:
            raise ValueError(f"exponent needs p- > 1, got {v.min()}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if (self.tail_constant is None) != (self.tail_radius is None):
            raise ValueError("tail_constant and tail_radius must be given together")

    @property
    def p_minus(self) -> float:
        return float(self.values.min())

    @property
    def p_plus(self) -> float:
        return float(self.values.max())

    @property
    def is_constant(self) -> bool:
        return self.p_minus == self.p_plus

    def __len__(self):
        return self.values.size

    @classmethod
    def constant(cls, space_or_n, value):
        n = space_or_n if isinstance(space_or_n, int) else space_or_n.n
        return cls(np.full(n, float(value)))

    @classmethod
    def from_function(cls, space, fn, **tail):
        """Sample ``fn`` at grid nodes (or at normalized positions otherwise)."""
        x = space.nodes if isinstance(space, UniformGrid1D) else space.param
        return cls(np.broadcast_to(np.asarray(fn(x), dtype=float), (space.n,)), **tail)

    def check_tail(self, space, center=None) -> bool:
        """True when samples equal the tail constant beyond the tail radius."""
        if self.tail_constant is None:
            return True
        c = space.origin if center is None else center
        far = space.distances_from(c) > self.tail_radius
        return bool(np.all(self.values[far] == self.tail_constant))

    def scaled(self, factor: float) -> "VariableExponent":
        """Exponent ``p / factor`` (used for ``p~ = p/p0``)."""
        tail = None if self.tail_constant is None else self.tail_constant / factor
        return VariableExponent(self.values / factor, tail, self.tail_radius if tail else None)


def as_exponent(p, space) -> VariableExponent:
    if isinstance(p, VariableExponent):
        if len(p) != space.n:
            raise ValueError("exponent length does not match space")
        return p
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        return VariableExponent.constant(space, float(arr))
    if arr.shape != (space.n,):
        raise ValueError("exponent length does not match space")
    return VariableExponent(arr)


def dual_exponent(p: VariableExponent) -> VariableExponent:
    """Pointwise conjugate exponent ``p/(p-1)``."""
    tail = None if p.tail_constant is None else p.tail_constant / (p.tail_constant - 1)
    return VariableExponent(p.values / (p.values - 1), tail, p.tail_radius if tail else None)


@dataclass(frozen=True)
class WeakLipschitzResult:
    holds: bool
    best_A: float
    trend: tuple = field(default=())


def _best_A(values, space):
    best = 0.0
    if isinstance(space, UniformGrid1D):
        n, h = space.n, space.h
        mmax = min(int(np.floor(0.5 / h + 1e-12)), n // 2 if space.circle else n - 1)
        for m in range(1, mmax + 1):
            d = m * h
            if d > 0.5:
                break
            if space.circle:
                diff = np.abs(np.roll(values, -m) - values).max()
            else:
                diff = np.abs(values[m:] - values[:-m]).max()
            best = max(best, float(diff * np.log(1.0 / d)))
        return best
    for i in range(space.n):
        d = space.distances_from(i)
        mask = (d > 0) & (d <= 0.5)
        if np.any(mask):
            osc = np.abs(values[mask] - values[i]) * np.log(1.0 / d[mask])
            best = max(best, float(np.max(osc)))
    return best


def check_weak_lipschitz(p, space) -> WeakLipschitzResult:
    """Best constant ``A`` with ``|p(x)-p(y)| ln(1/d) <= A`` over pairs at distance <= 1/2.

    On a single finite space the constant is always finite, so ``holds`` is
    true. Pass a sequence of ``(p, space)`` pairs to :func:`weak_lipschitz_trend`
    for a refinement verdict.
    """
    p = as_exponent(p, space)
    return WeakLipschitzResult(True, _best_A(p.values, space))


def weak_lipschitz_trend(p_of_space, spaces, rel_growth=0.05) -> WeakLipschitzResult:
    """Refinement verdict: fails when ``best_A`` grows more than ``rel_growth`` over the sweep.

    ``p_of_space`` maps a space to its exponent (a callable) or is a fixed
    callable of the node coordinate evaluated by :meth:`VariableExponent.from_function`.
    """
    vals = []
    for sp in spaces:
        p = p_of_space(sp)
        if not isinstance(p, VariableExponent):
            p = as_exponent(p, sp)
        vals.append(_best_A(p.values, sp))
    first, last = vals[0], vals[-1]
    growth = (last - first) / first if first > 0 else (np.inf if last > 0 else 0.0)
    return WeakLipschitzResult(bool(growth < rel_growth), last, tuple(vals))


def sobolev_exponent(p, alpha, n_dim=1):
    """Pointwise ``q`` with ``1/q = 1/p - alpha/n_dim``; needs ``p+ < n_dim/alpha``."""
    vals = p.values if isinstance(p, VariableExponent) else np.asarray(p, dtype=float)
    if not np.all(vals * alpha < n_dim):
        raise ValueError("need p+ < n/alpha")
    q = vals * n_dim / (n_dim - alpha * vals)
    if isinstance(p, VariableExponent):
        return VariableExponent(q)
    return q
