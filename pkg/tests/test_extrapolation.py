import numpy as np
import pytest

from varexp.dims import DimensionBounds
from varexp.exponent import VariableExponent
from varexp.extrapolation import (ExtrapolationConfig, default_terms, dual_q_tilde, estimate_C0,
                                  extremal_h, rubio_de_francia, sweep_c0, target_exponent,
                                  trace_extrapolation, verify_rdf_properties, weight_window)
from varexp.families import standard_family
from varexp.norms import norm
from varexp.operators import hl_maximal
from varexp.space import build_interval_grid


@pytest.fixture(scope="module")
def g():
    return build_interval_grid(0, 1, 256)


# -- exponents ----------------------------------------------------------------

def test_target_exponent_examples():
    q = target_exponent(VariableExponent(np.full(4, 2.0)), 1.5, 3.0)
    assert np.all(q.values == 6.0)
    p = VariableExponent(np.array([2.0, 2.5, 3.0]))
    assert target_exponent(p, 1.5, 1.5) is p


def test_target_exponent_variable():
    g = build_interval_grid(0, 0.5, 1024)
    p = VariableExponent.from_function(g, lambda x: 2 + x)
    q = target_exponent(p, 1.5, 3.0)
    np.testing.assert_allclose(1 / q.values, 1 / p.values - 1 / 3, rtol=1e-14)
    assert q.values[0] == pytest.approx(6.0, rel=1e-3)


@pytest.mark.parametrize("p_vals,p0,q0,clause", [
    ([2.0, 3.0], 1.5, 3.0, "1/p0 - 1/p+"),
    ([2.0], 2.0, 3.0, "p0 < p-"),
    ([2.0], 1.5, 1.2, "p0 <= q0"),
])
def test_target_exponent_reports_clause(p_vals, p0, q0, clause):
    with pytest.raises(ValueError, match=clause.replace("+", r"\+")):
        target_exponent(VariableExponent(np.array(p_vals)), p0, q0)


def test_config_properties(g):
    p = VariableExponent.constant(g, 2.0)
    cfg = ExtrapolationConfig(1.5, 3.0, p, np.ones(g.n))
    assert np.allclose(cfg.q.values, 6.0)
    assert np.allclose(cfg.p_tilde.values, 2 / 1.5)
    assert np.allclose(cfg.q_tilde.values, 2.0)
    with pytest.raises(ValueError):
        ExtrapolationConfig(1.5, 3.0, p, np.ones(g.n), C0=0.5)


# -- Rubio de Francia ---------------------------------------------------------

def test_rdf_constant(g):
    r = rubio_de_francia(np.ones(g.n), 1.0, space=g)
    assert np.max(np.abs(r["Sphi"] - 2.0)) < 1e-10
    c, C0 = 0.7, 2.5
    r = rubio_de_francia(np.full(g.n, c), C0, space=g)
    np.testing.assert_allclose(r["Sphi"], c * 2 * C0 / (2 * C0 - 1), rtol=1e-12)
    with pytest.raises(ValueError):
        rubio_de_francia(-np.ones(g.n), 1.0, space=g)


def test_rdf_truncation(g):
    phi = (g.nodes < 0.3).astype(float)
    a = rubio_de_francia(phi, 1.0, K_terms=40, space=g)["Sphi"]
    b = rubio_de_francia(phi, 1.0, K_terms=60, space=g)["Sphi"]
    assert np.max(np.abs(a - b)) < 1e-10
    r = rubio_de_francia(phi, 1.0, space=g)
    assert r["tail_bound"] < 1e-10 * phi.max()


def test_default_terms():
    for C0 in (1.0, 1.7, 5.0):
        K = default_terms(C0)
        r = 2 * C0
        assert r ** (-K) * r / (r - 1) < 1e-10


def test_rdf_properties(g):
    p = VariableExponent.from_function(g, lambda x: 2 + 0.5 * x)
    rho = np.abs(g.nodes - 0.5) ** 0.2
    C0 = estimate_C0(p, rho, 1.5, 1.5, g)
    qtd = dual_q_tilde(p, 1.5, 1.5)
    _, fam = standard_family(g)
    for phi in np.abs(fam):
        r = rubio_de_francia(phi, C0, space=g)
        rep = verify_rdf_properties(phi, r["Sphi"], C0, qtd, rho, 1.5, g, r["tail_bound"])
        assert rep["domination"]["pass"]
        assert rep["norm_doubling"]["pass"]
        assert rep["a1_bound"]["pass"]
        assert np.all(r["Sphi"] >= hl_maximal(phi, g) / (2 * C0) - 1e-12)


def test_rdf_properties_constant(g):
    qtd = VariableExponent.constant(g, 2.0)
    r = rubio_de_francia(np.ones(g.n), 1.0, space=g)
    rep = verify_rdf_properties(np.ones(g.n), r["Sphi"], 1.0, qtd, np.ones(g.n), 1.0, g)
    assert rep["a1_bound"]["a1_constant"] == pytest.approx(1.0)
    assert rep["norm_doubling"]["lhs"] == pytest.approx(rep["norm_doubling"]["rhs"])


def test_estimate_C0(g):
    p = VariableExponent.constant(g, 2.0)
    assert estimate_C0(p, None, 1.0, 1.0, g, trial_family=[np.ones(g.n)]) == pytest.approx(1.5)
    _, fam = standard_family(g)
    small = estimate_C0(p, None, 1.0, 1.0, g, trial_family=np.abs(fam[:5]))
    big = estimate_C0(p, None, 1.0, 1.0, g, trial_family=np.abs(fam))
    assert small <= big
    full = estimate_C0(p, None, 1.0, 1.0, g)
    assert 1.5 <= full <= 1.5 * 4
    with pytest.raises(ValueError):
        estimate_C0(p, None, 1.0, 1.0, g, trial_family=[np.zeros(g.n)])


# -- proof trace --------------------------------------------------------------

def test_trace_identity_pair(g):
    p = VariableExponent.constant(g, 2.0)
    rho = np.ones(g.n)
    f = 1 + np.sin(5 * g.nodes) ** 2
    h = extremal_h(f, p, rho, 1.5, 1.5, g)
    tr = trace_extrapolation(f, f, p, rho, 1.5, 1.5, h, 1.0, g)
    assert tr.passed
    assert tr.final_ratio == pytest.approx(1.0)
    assert min(s.slack for s in tr.steps) >= -1e-9
    assert [s.step for s in tr.steps] == ["domination", "hypothesis", "holder",
                                         "exponent_identity", "norm_doubling"]
    d = tr.to_dict()
    assert d["passed"] and len(d["steps"]) == 5


def test_trace_exponent_identity_exact(g):
    p = VariableExponent.constant(g, 2.0)
    rho = np.abs(g.nodes - 0.3) ** 0.1
    f = np.exp(g.nodes)
    h = extremal_h(f, p, rho, 1.5, 3.0, g)
    tr = trace_extrapolation(f, f, p, rho, 1.5, 3.0, h, 10.0, g)
    step = dict((s.step, s) for s in tr.steps)["exponent_identity"]
    assert abs(step.lhs - step.rhs) <= 1e-10 * max(step.lhs, step.rhs)


def test_trace_maximal_pairs_and_halved_claim(g):
    p = VariableExponent.from_function(g, lambda x: 2 + 0.5 * x)
    rho = np.abs(g.nodes - 0.5) ** 0.2
    p0 = q0 = 1.5
    C0 = estimate_C0(p, rho, p0, q0, g)
    _, fam = standard_family(g)
    gs = np.abs(fam[:6])
    pairs = list(zip(hl_maximal(gs, g), gs))
    for Mg, gg in pairs:
        h = extremal_h(Mg, p, rho, p0, q0, g)
        Sh = rubio_de_francia(h / norm(h, dual_q_tilde(p, p0, q0), rho ** (-q0), g), C0,
                              space=g)["Sphi"]
        c0 = sweep_c0([(Mg, gg)], p0, q0, Sh, g)
        tr = trace_extrapolation(Mg, gg, p, rho, p0, q0, h, c0, g, C0=C0, Sh=Sh)
        assert tr.passed, tr.failed_steps
        assert tr.final_ratio <= tr.bound
        bad = trace_extrapolation(Mg, gg, p, rho, p0, q0, h, c0 / 2, g, C0=C0, Sh=Sh)
        assert bad.failed_steps == ("hypothesis",)


def test_trace_rejects_bad_h(g):
    p = VariableExponent.constant(g, 2.0)
    f = np.ones(g.n)
    with pytest.raises(ValueError):
        trace_extrapolation(f, f, p, None, 1.5, 1.5, np.zeros(g.n), 1.0, g)
    with pytest.raises(ValueError):
        trace_extrapolation(f, f, p, None, 1.5, 1.5, -np.ones(g.n), 1.0, g)


# -- weight windows -----------------------------------------------------------

def test_weight_window_examples():
    dims = DimensionBounds(1.0)
    w = weight_window([2.0], dims, 4 / 3, 2.0, mode="partII")
    assert w["gamma"] == pytest.approx(0.25)
    assert w["intervals"][0] == pytest.approx((-0.25, 0.5))
    v = weight_window([3.0], dims, 1.5, 1.5, mode="partII")
    assert v["intervals"][0] == pytest.approx((-1 / 3, 2 / 3))
    part1 = weight_window([2.0], dims, 1.5, 3.0, mode="partI")
    gamma = part1["gamma"]
    assert part1["intervals"][0] == pytest.approx((gamma - 0.5, 1 / 6))
    assert not part1["empty"][0]
    # gamma >= 1 leaves no room in the partII window
    assert weight_window([2.0], dims, 0.5, 10.0, mode="partII")["empty"] == [True]
    with pytest.raises(ValueError):
        weight_window([2.0], dims, 1.5, 3.0, mode="other")


def test_weight_window_sum_interval():
    dims = DimensionBounds(1.0, 1.0, 1.0)
    w = weight_window([2.0, 2.5], dims, 1.5, 1.5, mode="partI", p_inf=2.0)
    assert w["delta"] == pytest.approx(0.0)
    lo, hi = w["sum_interval"]
    assert (lo, hi) == pytest.approx((-0.5, 0.5 - 1 / 3))
