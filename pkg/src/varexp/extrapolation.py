"""Off-diagonal extrapolation: exponent transfer, the Rubio de Francia majorant,
a step-by-step numerical trace of the extrapolation argument and weight windows."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .exponent import VariableExponent, as_exponent, dual_exponent
from .families import standard_family
from .norms import HOLDER_CONSTANT, norm
from .operators import hl_maximal
from .weights import _dims

SLACK_TOL = 1e-9


def _check_pair(p_minus, p_plus, p0, q0):
    if not 0 < p0 <= q0 < np.inf:
        raise ValueError(f"need 0 < p0 <= q0 < inf, got p0={p0}, q0={q0}")
    if not p0 < p_minus:
        raise ValueError(f"need p0 < p-, got p0={p0}, p-={p_minus}")
    if not 1 / p0 - 1 / p_plus < 1 / q0:
        raise ValueError(f"need 1/p0 - 1/p+ < 1/q0, got {1 / p0 - 1 / p_plus} >= {1 / q0}")


@dataclass(frozen=True, eq=False)
class ExtrapolationConfig:
    """Validated extrapolation parameters; ``p_tilde = p/p0`` and ``q_tilde = q/q0``."""

    p0: float
    q0: float
    p: VariableExponent
    rho: np.ndarray
    C0: float = 1.0
    K_terms: int | None = None

    def __post_init__(self):
        _check_pair(self.p.p_minus, self.p.p_plus, self.p0, self.q0)
        if not self.C0 >= 1:
            raise ValueError("C0 must be >= 1")

    @property
    def q(self) -> VariableExponent:
        return target_exponent(self.p, self.p0, self.q0)

    @property
    def p_tilde(self) -> VariableExponent:
        return self.p.scaled(self.p0)

    @property
    def q_tilde(self) -> VariableExponent:
        return self.q.scaled(self.q0)


def target_exponent(p, p0, q0) -> VariableExponent:
    """``1/q = 1/p - (1/p0 - 1/q0)`` pointwise."""
    p = p if isinstance(p, VariableExponent) else VariableExponent(np.atleast_1d(p))
    _check_pair(p.p_minus, p.p_plus, p0, q0)
    if p0 == q0:
        return p
    q = p.values * p0 * q0 / (p0 * q0 - p.values * (q0 - p0))
    tail = None
    if p.tail_constant is not None:
        pt = p.tail_constant
        tail = pt * p0 * q0 / (p0 * q0 - pt * (q0 - p0))
    return VariableExponent(q, tail, p.tail_radius if tail is not None else None)


def dual_q_tilde(p, p0, q0) -> VariableExponent:
    """``(q/q0)'``, the exponent of the dual pairing used throughout the argument."""
    return dual_exponent(target_exponent(p, p0, q0).scaled(q0))


# -- Rubio de Francia ---------------------------------------------------------

def default_terms(C0, rel=1e-10) -> int:
    """Smallest ``K`` with ``(2C0)^{-K} 2C0/(2C0-1) < rel``."""
    r = 2.0 * C0
    return int(np.ceil((np.log(r / (r - 1)) - np.log(rel)) / np.log(r))) + 1


def rubio_de_francia(phi, C0, K_terms=None, space=None) -> dict:
    """``S phi = sum_{k<K} (2C0)^{-k} M^k phi`` with a certified tail bound.

    ``phi`` may be a batch ``(m, N)``. Once every row of ``M^k phi`` is constant
    the remaining geometric series is summed exactly and the tail is zero.
    """
    if not C0 >= 1:
        raise ValueError("C0 must be >= 1")
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        raise ValueError("phi must be non-negative")
    r = 2.0 * C0
    K = default_terms(C0) if K_terms is None else int(K_terms)
    sup = float(np.max(phi)) if phi.size else 0.0
    term = phi.copy()
    total = phi.copy()
    tail = sup * r ** (-K) * r / (r - 1)
    k_used = K
    for k in range(1, K):
        spread = np.ptp(term, axis=-1)
        if np.all(spread <= 1e-14 * np.max(np.abs(term), axis=-1, initial=0.0)):
            total = total + term * r ** (-(k - 1)) * (1 / (r - 1))
            tail, k_used = 0.0, k
            break
        term = hl_maximal(term, space)
        total = total + term * r ** (-k)
    return {"Sphi": total, "tail_bound": float(tail), "terms": k_used}


def verify_rdf_properties(phi, Sphi, C0, q_tilde_dual, rho, q0, space, tail_bound=0.0) -> dict:
    """Pointwise domination, weighted norm doubling and the A_1 bound for ``S phi``.

    Property 3 allows ``2 C0 tail_bound`` plus rounding: the truncated sum
    misses at most that much of ``M(S phi)``.
    """
    phi = np.asarray(phi, dtype=float)
    Sphi = np.asarray(Sphi, dtype=float)
    w = np.asarray(rho, dtype=float) ** (-q0)
    p1 = bool(np.all(phi <= Sphi))
    lhs = norm(Sphi, q_tilde_dual, w, space)
    rhs = 2 * norm(phi, q_tilde_dual, w, space)
    MS = hl_maximal(Sphi, space)
    allowance = 2 * C0 * tail_bound + 1e-12 * float(np.max(Sphi))
    excess = float(np.max(MS - 2 * C0 * Sphi))
    a1 = float(np.max(MS / Sphi)) if np.all(Sphi > 0) else np.inf
    return {
        "domination": {"pass": p1, "slack": float(np.min(Sphi - phi))},
        "norm_doubling": {"pass": bool(lhs <= rhs * (1 + 1e-12)), "lhs": lhs, "rhs": rhs},
        "a1_bound": {"pass": bool(excess <= allowance), "excess": excess,
                     "allowance": allowance, "a1_constant": a1},
    }


def default_trials(space, seed=0):
    """Non-negative trial functions: the constant 1 and ``|f|`` over the standard family."""
    _, fam = standard_family(space, seed)
    fam = np.abs(fam)
    fam = fam[np.max(fam, axis=1) > 0]
    return np.vstack([np.ones(space.n), fam])


def estimate_C0(p, rho, p0, q0, space, trial_family=None, safety=1.5) -> float:
    """``safety * max ||rho^{-q0} M phi|| / ||rho^{-q0} phi||`` in ``(q/q0)'``, floored at 1.

    Trials with zero norm are skipped.
    """
    p = as_exponent(p, space)
    qtd = dual_q_tilde(p, p0, q0)
    w = np.asarray(rho if rho is not None else np.ones(space.n), dtype=float) ** (-q0)
    trials = default_trials(space) if trial_family is None else np.atleast_2d(trial_family)
    trials = np.abs(np.asarray(trials, dtype=float))
    keep = np.max(trials, axis=1) > 0
    if not np.any(keep):
        raise ValueError("trial family has no nonzero member")
    trials = trials[keep]
    Mt = hl_maximal(trials, space)
    best = max(norm(m, qtd, w, space) / norm(t, qtd, w, space) for t, m in zip(trials, Mt))
    return max(1.0, safety * best)


# -- proof trace --------------------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    step: str
    lhs: float
    rhs: float
    slack: float
    passed: bool


def _record(step, lhs, rhs, tol=SLACK_TOL):
    scale = max(abs(lhs), abs(rhs))
    slack = (rhs - lhs) / scale if scale > 0 else 0.0
    return StepRecord(step, float(lhs), float(rhs), float(slack), bool(slack >= -tol))


@dataclass(frozen=True)
class ProofTrace:
    steps: tuple
    final_ratio: float
    c0: float
    bound: float
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    @property
    def failed_steps(self) -> tuple:
        return tuple(s.step for s in self.steps if not s.passed)

    def to_dict(self):
        return {"steps": [asdict(s) for s in self.steps], "final_ratio": self.final_ratio,
                "c0": self.c0, "bound": self.bound, "passed": self.passed, "meta": self.meta}


def extremal_h(f, p, rho, p0, q0, space):
    """Near-extremal dual element for ``||(rho f)^{q0}||`` in ``q/q0``.

    Returns ``rho^{q0} G`` with ``G = (F/||F||)^{q_tilde - 1}``, ``F = (rho |f|)^{q0}``.
    """
    q = target_exponent(as_exponent(p, space), p0, q0)
    qt = q.scaled(q0).values
    F = (np.asarray(rho, dtype=float) * np.abs(f)) ** q0
    nF = norm(F, qt, None, space)
    G = (F / nF) ** (qt - 1) if nF > 0 else np.ones(space.n)
    return np.asarray(rho, dtype=float) ** q0 * G


def trace_extrapolation(f, g, p, rho, p0, q0, h, c0_claim, space, C0=None, Sh=None) -> ProofTrace:
    """Numerically replay the extrapolation chain for one pair ``(f, g)``.

    Steps, in order: ``domination`` (h <= S h), ``hypothesis`` (the assumed
    weighted inequality with ``w = S h``), ``holder``, ``exponent_identity``
    and ``norm_doubling``. Slack is relative, ``(rhs - lhs) / max(|lhs|, |rhs|)``.
    ``h`` is renormalized so that ``||h rho^{-q0}||`` in ``(q/q0)'`` equals 1.
    A precomputed ``Sh`` must belong to the normalized ``h``.
    """
    p = as_exponent(p, space)
    rho = np.asarray(rho if rho is not None else np.ones(space.n), dtype=float)
    f = np.abs(np.asarray(f, dtype=float))
    g = np.abs(np.asarray(g, dtype=float))
    q = target_exponent(p, p0, q0)
    qtd = dual_exponent(q.scaled(q0))
    ptd = dual_exponent(p.scaled(p0))
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("h must be non-negative")
    nh = norm(h, qtd, rho ** (-q0), space)
    if not nh > 0 or not np.isfinite(nh):
        raise ValueError("h cannot be normalized")
    h = h / nh
    if C0 is None:
        C0 = estimate_C0(p, rho, p0, q0, space)
    if Sh is None:
        Sh = rubio_de_francia(h, C0, space=space)["Sphi"]

    I_h = space.integrate(f**q0 * h)
    I_Sh = space.integrate(f**q0 * Sh)
    J = space.integrate(g**p0 * Sh ** (p0 / q0))
    steps = [_record("domination", I_h, I_Sh),
             _record("hypothesis", I_Sh, c0_claim**q0 * J ** (q0 / p0))]

    g_norm = norm(g, p, rho, space)
    B = norm(rho ** (-p0) * Sh ** (p0 / q0), ptd, None, space)
    steps.append(_record("holder", J, HOLDER_CONSTANT * g_norm**p0 * B))

    D = norm(Sh, qtd, rho ** (-q0), space)
    lhs4 = B ** (q0 / p0)
    rec = _record("exponent_identity", lhs4, D, tol=1e-10)
    exact = abs(lhs4 - D) <= 1e-10 * max(abs(lhs4), abs(D))
    steps.append(StepRecord(rec.step, rec.lhs, rec.rhs, rec.slack, bool(exact)))
    steps.append(_record("norm_doubling", D, 2.0))

    f_norm = norm(f, q, rho, space)
    ratio = f_norm / g_norm if g_norm > 0 else np.inf
    bound = c0_claim * (HOLDER_CONSTANT * 2.0) ** (1 / p0) * 2.0 ** (1 / q0)
    return ProofTrace(tuple(steps), float(ratio), float(c0_claim), float(bound),
                      {"C0": float(C0), "p0": p0, "q0": q0})


def sweep_c0(pairs, p0, q0, w, space, safety=1.05) -> float:
    """Smallest ``c0`` (times ``safety``) making the weighted hypothesis hold for all pairs.

    The weight is ``w``.
    """
    best = 0.0
    for f, g in pairs:
        num = space.integrate(np.abs(f) ** q0 * w) ** (1 / q0)
        den = space.integrate(np.abs(g) ** p0 * w ** (p0 / q0)) ** (1 / p0)
        if den > 0:
            best = max(best, num / den)
    return safety * best


# -- weight windows -----------------------------------------------------------

def weight_window(p_at_anchors, dims, p0, q0, mode="partI", p_inf=None, p_minus=None) -> dict:
    """Admissible open intervals for ``(m(w_k), M(w_k))`` at each anchor.

    ``partI`` keeps the ``1/p0'`` term; ``partII`` drops it and uses ``p-`` in
    ``delta``. With ``p_inf`` given, the interval for the index sums
    (infinity factor included) is added. Empty intervals are reported.
    """
    if mode not in ("partI", "partII"):
        raise ValueError("mode must be 'partI' or 'partII'")
    pk = np.atleast_1d(np.asarray(p_at_anchors, dtype=float))
    dim, dinf_lo, dinf_hi = _dims(dims)
    gamma = 1 / p0 - 1 / q0
    p0d_term = 0.0 if mode == "partII" else 1 - 1 / p0
    intervals = [(float((gamma - 1 / v) * dim), float((1 - 1 / v - p0d_term) * dim)) for v in pk]
    out = {"gamma": gamma, "mode": mode, "intervals": intervals,
           "empty": [bool(lo >= hi) for lo, hi in intervals]}
    if p_inf is not None:
        base = p0 if mode == "partI" else (p_minus if p_minus is not None else float(pk.min()))
        delta = (dinf_hi - dinf_lo) * (1 / base - 1 / p_inf)
        lo = delta + (gamma - 1 / p_inf) * dim
        hi = (1 - 1 / p_inf - p0d_term) * dim
        out.update({"delta": delta, "sum_interval": (lo, hi), "sum_empty": bool(lo >= hi)})
    return out
