"""Radial weights, Matuszewska-Orlicz indices, ZBS membership, Muckenhoupt checks
and the admissibility classes V and V^osc."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .exponent import VariableExponent, as_exponent
from .space import ball_sup

LN2 = np.log(2.0)


# -- factors ------------------------------------------------------------------

@dataclass(frozen=True)
class Power:
    """``t^beta``."""

    beta: float

    def log(self, logt):
        return self.beta * np.asarray(logt, dtype=float)

    def to_dict(self):
        return {"kind": "power", "beta": self.beta}


@dataclass(frozen=True)
class PowerLog:
    """``t^beta (1 + |ln t|)^gamma``; slowly varying correction to a power."""

    beta: float
    gamma: float

    def log(self, logt):
        logt = np.asarray(logt, dtype=float)
        return self.beta * logt + self.gamma * np.log1p(np.abs(logt))

    def to_dict(self):
        return {"kind": "powerlog", "beta": self.beta, "gamma": self.gamma}


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Positive factor given by samples, interpolated linearly in log-log coordinates.

    Outside the table the end segments are extended linearly.
    """

    t: tuple
    values: tuple

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.size < 2:
            raise ValueError("tabulated factor needs matching t/values of length >= 2")
        if np.any(t <= 0) or np.any(v <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("tabulated factor needs increasing positive t and positive values")
        object.__setattr__(self, "t", tuple(t))
        object.__setattr__(self, "values", tuple(v))

    def log(self, logt):
        x = np.log(self.t)
        y = np.log(self.values)
        u = np.asarray(logt, dtype=float)
        out = np.interp(u, x, y)
        lo_slope = (y[1] - y[0]) / (x[1] - x[0])
        hi_slope = (y[-1] - y[-2]) / (x[-1] - x[-2])
        out = np.where(u < x[0], y[0] + lo_slope * (u - x[0]), out)
        return np.where(u > x[-1], y[-1] + hi_slope * (u - x[-1]), out)

    def to_dict(self):
        return {"kind": "tabulated", "t": list(self.t), "values": list(self.values)}


def factor_from_dict(d):
    kind = d.get("kind")
    if kind == "power":
        return Power(float(d["beta"]))
    if kind == "powerlog":
        return PowerLog(float(d["beta"]), float(d["gamma"]))
    if kind == "tabulated":
        return Tabulated(tuple(d["t"]), tuple(d["values"]))
    raise ValueError(f"unknown factor kind {kind!r}")


def _eval_factor(factor, t):
    with np.errstate(divide="ignore"):
        return np.exp(factor.log(np.log(t)))


# -- weight specs -------------------------------------------------------------

@dataclass(frozen=True)
class Anchor:
    """Factor of ``d(x, x_k)``; the anchor is a point id or a coordinate."""

    factor: object
    point: int | None = None
    at: float | complex | None = None

    def __post_init__(self):
        if (self.point is None) == (self.at is None):
            raise ValueError("anchor needs exactly one of 'point' or 'at'")

    def distances(self, space):
        if self.point is not None:
            if not 0 <= self.point < space.n:
                raise ValueError(f"anchor point {self.point} outside the space")
            return space.distances_from(self.point)
        return space.distances_to_coordinate(self.at)

    def to_dict(self):
        d = {"factor": self.factor.to_dict()}
        d.update({"point": self.point} if self.point is not None else {"at": self.at})
        return d


@dataclass(frozen=True)
class WeightSpec:
    """Product of anchor factors times an optional factor of ``1 + d(x0, x)``."""

    anchors: tuple = ()
    infinity: Anchor | None = None

    def __post_init__(self):
        object.__setattr__(self, "anchors", tuple(self.anchors))
        keys = [(a.point, a.at) for a in self.anchors]
        if len(set(keys)) != len(keys):
            raise ValueError("anchor points must be distinct")

    @classmethod
    def from_dict(cls, d):
        def anchor(a):
            return Anchor(factor_from_dict(a["factor"]), a.get("point"), a.get("at"))

        inf = d.get("infinity")
        if inf is not None:
            inf = Anchor(factor_from_dict(inf["factor"]), inf.get("origin", inf.get("point")),
                         inf.get("at"))
        return cls(tuple(anchor(a) for a in d.get("anchors", [])), inf)

    def to_dict(self):
        d = {"anchors": [a.to_dict() for a in self.anchors]}
        if self.infinity is not None:
            inf = self.infinity.to_dict()
            if "point" in inf:
                inf["origin"] = inf.pop("point")
            d["infinity"] = inf
        return d

    @classmethod
    def power(cls, beta, *, point=None, at=None):
        return cls((Anchor(Power(float(beta)), point, at),))

    def betas(self):
        for a in self.anchors:
            if not isinstance(a.factor, Power):
                raise ValueError("this check needs Power factors only")
        return np.array([a.factor.beta for a in self.anchors])


def eval_weight(spec: WeightSpec, space) -> np.ndarray:
    """``rho(x) = prod_k w_k(d(x, x_k)) * w_0(1 + d(x0, x))``.

    A zero distance to an anchor is replaced by half the minimal spacing.
    """
    logw = np.zeros(space.n)
    eps = space.eps_min
    for a in spec.anchors:
        d = a.distances(space)
        logw += a.factor.log(np.log(np.where(d > 0, d, eps)))
    if spec.infinity is not None:
        logw += spec.infinity.factor.log(np.log1p(spec.infinity.distances(space)))
    return np.exp(logw)


def anchor_index(anchor: Anchor, space) -> int:
    """Point id of an anchor (nearest node for coordinate anchors)."""
    if anchor.point is not None:
        return int(anchor.point)
    return int(np.argmin(space.distances_to_coordinate(anchor.at)))


# -- Matuszewska-Orlicz indices -----------------------------------------------

@dataclass(frozen=True)
class WeightIndices:
    m: float
    M: float
    m_inf: float | None = None
    M_inf: float | None = None
    converged: bool = True
    estimation_grids: dict = field(default_factory=dict)


def _index_pair(factor, logh, logt):
    base = factor.log(logh)[:, None]
    moved = factor.log(logh[:, None] + logt[None, :])
    diff = moved - base
    m = float(np.max(diff.min(axis=0) / logt))
    M = float(np.max(diff.max(axis=0) / logt))
    return m, M


def _indices(factor, sign, j0, depth, n_h, n_t, t_max):
    def at_depth(J):
        j = np.geomspace(j0, J, n_h)
        tail = j[-max(1, n_h // 4):]
        logh = sign * tail * LN2
        logt = np.log(np.geomspace(1.0 + 1.0 / n_t, t_max, n_t))
        return _index_pair(factor, logh, logt)

    m1, M1 = at_depth(depth)
    m2, M2 = at_depth(2 * depth)
    converged = abs(m2 - m1) < 1e-3 and abs(M2 - M1) < 1e-3
    grids = {"j0": j0, "depth": 2 * depth, "n_h": n_h, "n_t": n_t, "t_max": t_max, "tail": 0.25}
    return m2, max(M2, m2), converged, grids


def mo_indices(factor, j0=4, depth=1 << 15, n_h=128, n_t=64, t_max=2.0**8) -> WeightIndices:
    """Indices as ``h -> 0`` from the deepest quarter of a log-spaced grid ``h = 2^-j``.

    Factors are evaluated through their logarithm, so very deep scales are
    representable. The estimate is repeated at twice the depth; ``converged``
    reports agreement within ``1e-3``.
    """
    m, M, conv, grids = _indices(factor, -1.0, j0, depth, n_h, n_t, t_max)
    return WeightIndices(m, M, converged=conv, estimation_grids=grids)


def mo_indices_infinity(factor, j0=4, depth=1 << 15, n_h=128, n_t=64,
                        t_max=2.0**8) -> WeightIndices:
    """Indices as ``h -> infinity`` on ``h = 2^j``; reported as ``m_inf``/``M_inf``."""
    m, M, conv, grids = _indices(factor, 1.0, j0, depth, n_h, n_t, t_max)
    return WeightIndices(m, M, m_inf=m, M_inf=M, converged=conv, estimation_grids=grids)


# -- Zygmund-Bary-Stechkin ----------------------------------------------------

@dataclass(frozen=True)
class ZbsResult:
    member: bool
    c_estimate: float
    integral_member: bool
    index_member: bool
    diverges_at_zero: bool
    indices: WeightIndices


def _scaled_integrals(factor, logh, logl, delta, depth):
    base = float(factor.log(logh))

    def first(s):
        return np.exp(float(factor.log(logh + s)) - base)

    def second(s):
        return np.exp(float(factor.log(logh + s)) - base - delta * s)

    i1 = quad(first, -depth, 0.0, limit=400)[0]
    i2 = quad(second, 0.0, logl - logh, limit=400)[0] if logl > logh else 0.0
    return i1, i2


def check_zbs(factor, delta, ell=1.0, n_h=40, depth=2000.0) -> ZbsResult:
    """Both defining integrals, normalized by ``v(h)`` and ``v(h)/h^delta``, over ``h = ell 2^-j``.

    Integrals run in ``u = ln t``. The first is computed at two truncation
    depths; growth between them flags divergence at zero. A finite constant is
    accepted when the normalized integrals stop growing over the deepest
    quarter of the grid.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    logl = np.log(ell)
    cs = []
    diverges = False
    for j in range(1, n_h + 1):
        logh = logl - j * LN2
        i1, i2 = _scaled_integrals(factor, logh, logl, delta, depth)
        i1b, _ = _scaled_integrals(factor, logh, logl, delta, 2 * depth)
        if i1b > i1 * (1 + 1e-6) + 1e-300:
            diverges = True
        cs.append(max(i1, i2))
    cs = np.asarray(cs)
    q = n_h // 4
    growing = cs[-1] > 1.05 * cs[-q - 1]
    integral_member = not diverges and not growing and bool(np.all(np.isfinite(cs)))
    idx = mo_indices(factor)
    index_member = 0 < idx.m <= idx.M < delta
    c = float(cs.max()) if integral_member else np.inf
    return ZbsResult(integral_member and index_member, c, integral_member, bool(index_member),
                     diverges, idx)


# -- admissibility classes ----------------------------------------------------

def _dims(dims):
    """Return (dim_lower, dim_inf_lower, dim_inf_upper) from a float or DimensionBounds."""
    if np.isscalar(dims):
        return float(dims), float(dims), float(dims)
    lo = float(dims.dim_lower)
    il = lo if getattr(dims, "dim_inf_lower", None) is None else float(dims.dim_inf_lower)
    iu = il if getattr(dims, "dim_inf_upper", None) is None else float(dims.dim_inf_upper)
    return lo, il, iu


@dataclass(frozen=True)
class ClassResult:
    member: bool
    margin: float
    details: dict = field(default_factory=dict)


def _p_at_anchors(spec, p, space):
    return np.array([p.values[anchor_index(a, space)] for a in spec.anchors])


def check_V_class(spec: WeightSpec, p, dims, space) -> ClassResult:
    """Power-weight window ``-dim/p(x_k) < beta_k < dim/p'(x_k)``, plus the sum
    condition on spaces flagged as truncations of unbounded models."""
    p = as_exponent(p, space)
    dim, dinf_lo, dinf_hi = _dims(dims)
    betas = spec.betas()
    pk = _p_at_anchors(spec, p, space)
    lower = -dim / pk
    upper = dim * (1 - 1 / pk)
    slack = np.minimum(betas - lower, upper - betas) if betas.size else np.array([np.inf])
    margin = float(slack.min())
    details = {"intervals": [(float(a), float(b)) for a, b in zip(lower, upper)]}
    if space.unbounded_model:
        if p.tail_constant is None:
            raise ValueError("unbounded model needs a tail exponent p_inf")
        pinf = p.tail_constant
        binf = spec.infinity.factor.beta if spec.infinity is not None else 0.0
        total = binf + float(betas.sum())
        lo, hi = -dinf_lo / pinf, dinf_lo - dinf_hi / pinf
        margin = min(margin, total - lo, hi - total)
        details["sum_interval"] = (lo, hi)
    if not np.isfinite(margin):
        margin = float("inf")
    return ClassResult(margin > 0, margin, details)


def check_V_osc_class(spec: WeightSpec, p, dims, space) -> ClassResult:
    """Index window ``-dim/p(x_k) < m(w_k) <= M(w_k) < dim/p'(x_k)`` per anchor and,
    on unbounded models, the window for the sums of infinity indices."""
    p = as_exponent(p, space)
    dim, dinf_lo, dinf_hi = _dims(dims)
    pk = _p_at_anchors(spec, p, space)
    margin = np.inf
    converged = True
    per_anchor = []
    for a, pa in zip(spec.anchors, pk):
        idx = mo_indices(a.factor)
        converged &= idx.converged
        lo, hi = -dim / pa, dim * (1 - 1 / pa)
        per_anchor.append({"m": idx.m, "M": idx.M, "interval": (lo, hi)})
        margin = min(margin, idx.m - lo, hi - idx.M)
    details = {"anchors": per_anchor}
    if space.unbounded_model:
        if p.tail_constant is None:
            raise ValueError("unbounded model needs a tail exponent p_inf")
        pinf = p.tail_constant
        facs = [a.factor for a in spec.anchors]
        if spec.infinity is not None:
            facs.append(spec.infinity.factor)
        inf_idx = [mo_indices_infinity(f) for f in facs]
        converged &= all(i.converged for i in inf_idx)
        sm = sum(i.m_inf for i in inf_idx)
        sM = sum(i.M_inf for i in inf_idx)
        delta_p = (dinf_hi - dinf_lo) / pinf
        lo, hi = -dinf_lo / pinf, dinf_lo * (1 - 1 / pinf) - delta_p
        margin = min(margin, sm - lo, hi - sM)
        details["sum_interval"] = (lo, hi)
        details["sums"] = (sm, sM)
    details["converged"] = bool(converged)
    return ClassResult(bool(margin > 0), float(margin), details)


def transfer_spec(spec: WeightSpec, p0: float) -> WeightSpec:
    """Spec of ``rho^{-p0}`` for a power-weight spec ``rho``."""
    anchors = tuple(Anchor(Power(-p0 * a.factor.beta), a.point, a.at) for a in spec.anchors)
    inf = spec.infinity
    if inf is not None:
        inf = Anchor(Power(-p0 * inf.factor.beta), inf.point, inf.at)
    return WeightSpec(anchors, inf)


# -- Muckenhoupt --------------------------------------------------------------

@dataclass(frozen=True)
class MuckenhouptReport:
    s: float
    constant: float
    holds_estimate: bool
    trend: tuple = ()


def _resolve(obj, space):
    return obj(space) if callable(obj) else obj


def muckenhoupt_constant(w, s, space) -> float:
    """Sup over all balls of ``avg(w) avg(w^{-1/(s-1)})^{s-1}``; for ``s = 1`` sup ``Mw / w``."""
    w = np.asarray(w, dtype=float)
    if not np.all(w > 0):
        raise ValueError("weight must be positive")
    if s < 1:
        raise ValueError("need s >= 1")
    if s == 1:
        from .operators import hl_maximal

        return float(np.max(hl_maximal(w, space) / w))
    sigma = w ** (-1.0 / (s - 1))

    def fn(meas, sums):
        return (sums[0] / meas) * (sums[1] / meas) ** (s - 1)

    return float(np.max(ball_sup(space, np.stack([w, sigma]), fn)))


def check_muckenhoupt(w, s, space, growth_tol=1.25) -> MuckenhouptReport:
    """A_s check on one space or a refinement sweep.

    ``w`` is an array (single space) or a callable ``space -> array``. With a
    sweep, ``holds_estimate`` requires each successive constant ratio to stay
    below ``growth_tol``.
    """
    spaces = space if isinstance(space, (list, tuple)) else [space]
    consts = [muckenhoupt_constant(_resolve(w, sp), s, sp) for sp in spaces]
    ratios = [b / a for a, b in zip(consts, consts[1:])]
    holds = all(np.isfinite(consts)) and all(r < growth_tol for r in ratios)
    return MuckenhouptReport(float(s), consts[-1], bool(holds), tuple(consts))


def theorem_erz_condition(rho, p, space) -> MuckenhouptReport:
    """Check ``rho^{p(.)}`` in ``A_{p-}``."""
    spaces = space if isinstance(space, (list, tuple)) else [space]

    def exps(sp):
        return as_exponent(_resolve(p, sp), sp)

    s = min(exps(sp).p_minus for sp in spaces)
    if not s > 1:
        raise ValueError("need p- > 1")

    def w(sp):
        return np.asarray(_resolve(rho, sp), dtype=float) ** exps(sp).values

    return check_muckenhoupt(w, s, spaces if len(spaces) > 1 else spaces[0])


def rem1_exponent(q: VariableExponent, q0: float):
    """``q1 = q (q+ - q0)/(q - q0)`` and ``s = q+/q0``."""
    if np.any(q.values == q0):
        raise ValueError("q(y) equals q0 at some point")
    if not q0 < q.p_minus:
        raise ValueError("need q0 < q-")
    qp = q.p_plus
    return q.values * (qp - q0) / (q.values - q0), qp / q0


def remark_rem1_condition(rho, q, q0, space) -> MuckenhouptReport:
    """Check ``rho^{q1(.)}`` in ``A_{q+/q0}``."""
    spaces = space if isinstance(space, (list, tuple)) else [space]
    qs = {id(sp): as_exponent(_resolve(q, sp), sp) for sp in spaces}
    s = max(rem1_exponent(qs[id(sp)], q0)[1] for sp in spaces)

    def w(sp):
        q1, _ = rem1_exponent(qs[id(sp)], q0)
        return np.asarray(_resolve(rho, sp), dtype=float) ** q1

    return check_muckenhoupt(w, s, spaces if len(spaces) > 1 else spaces[0])


def check_potential_weight(v, p0, q0, space) -> float:
    """Sup over balls of ``avg(v^q0)^{1/q0} avg(v^{-p0'})^{1/p0'}``."""
    v = np.asarray(v, dtype=float)
    p0d = p0 / (p0 - 1)

    def fn(meas, sums):
        return (sums[0] / meas) ** (1 / q0) * (sums[1] / meas) ** (1 / p0d)

    return float(np.max(ball_sup(space, np.stack([v**q0, v ** (-p0d)]), fn)))


__all__ = [
    "Power", "PowerLog", "Tabulated", "Anchor", "WeightSpec", "WeightIndices", "ZbsResult",
    "ClassResult", "MuckenhouptReport", "eval_weight", "mo_indices", "mo_indices_infinity",
    "check_zbs", "check_V_class", "check_V_osc_class", "check_muckenhoupt",
    "muckenhoupt_constant", "theorem_erz_condition", "remark_rem1_condition",
    "rem1_exponent", "transfer_spec", "check_potential_weight", "factor_from_dict",
    "anchor_index",
]
