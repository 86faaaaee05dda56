import numpy as np
import pytest
from scipy.integrate import quad

from varexp.fourier import continuous_multiplier
from varexp.operators import (KernelSpec, cauchy_singular, commutator, cz_apply,
                              fractional_maximal, hl_maximal, iterated_maximal,
                              kernel_condition_check, metric_potential, pseudodiff_apply,
                              riesz_potential, sharp_maximal, vector_maximal)
from varexp.space import build_carleson_curve, build_circle_grid, build_interval_grid


def brute_maximal(f, space):
    out = np.empty(space.n)
    for i in range(space.n):
        d = space.distances_from(i)
        best = 0.0
        for r in np.unique(d):
            m = d <= r
            best = max(best, np.sum(np.abs(f[m]) * space.masses[m]) / np.sum(space.masses[m]))
        out[i] = best
    return out


@pytest.fixture(scope="module")
def unit():
    return build_interval_grid(0, 1, 64)


# -- maximal operators --------------------------------------------------------

def test_maximal_constant(unit):
    np.testing.assert_allclose(hl_maximal(np.full(unit.n, -3.0), unit), 3.0, rtol=1e-14)


def test_maximal_unit_mass_matches_brute_force(unit):
    f = np.zeros(unit.n)
    f[20] = 1 / unit.h
    np.testing.assert_allclose(hl_maximal(f, unit), brute_maximal(f, unit), rtol=1e-12)


def test_maximal_random_matches_brute_force():
    rng = np.random.default_rng(0)
    for space in (build_circle_grid(32), build_interval_grid(-1, 1, 33, density=np.abs)):
        f = rng.standard_normal(space.n)
        np.testing.assert_allclose(hl_maximal(f, space), brute_maximal(f, space), rtol=1e-12)


def test_maximal_half_circle_indicator():
    g = build_circle_grid(256)
    f = (g.nodes < 0).astype(float)
    assert np.all(hl_maximal(f, g) >= 0.5 - 1e-12)


def test_iterated_maximal(unit):
    f = np.sin(7 * unit.nodes)
    np.testing.assert_array_equal(iterated_maximal(f, 0, unit), np.abs(f))
    np.testing.assert_allclose(iterated_maximal(np.ones(unit.n), 3, unit), 1.0)
    np.testing.assert_array_equal(iterated_maximal(f, 2, unit),
                                  hl_maximal(hl_maximal(f, unit), unit))
    with pytest.raises(ValueError):
        iterated_maximal(f, -1, unit)


def test_fractional_maximal():
    g = build_circle_grid(128)
    np.testing.assert_allclose(fractional_maximal(np.ones(g.n), 0.3, g), (2 * np.pi) ** 0.3,
                               rtol=1e-12)
    f = np.random.default_rng(1).standard_normal(g.n)
    assert np.all(fractional_maximal(f, 0.3, g)
                  <= g.total_measure**0.3 * hl_maximal(f, g) * (1 + 1e-12))
    with pytest.raises(ValueError):
        fractional_maximal(f, 1.0, g)


def test_vector_maximal(unit):
    a = (unit.nodes < 0.3).astype(float)
    b = np.cos(5 * unit.nodes)
    np.testing.assert_allclose(vector_maximal([a], 2.0, unit), hl_maximal(a, unit))
    np.testing.assert_allclose(vector_maximal([a, a], 1.0, unit), 2 * hl_maximal(a, unit))
    direct = np.sqrt(hl_maximal(a, unit) ** 2 + hl_maximal(b, unit) ** 2)
    np.testing.assert_allclose(vector_maximal([a, b], 2.0, unit), direct, rtol=1e-14)
    with pytest.raises(ValueError):
        vector_maximal([], 2.0, unit)


def test_sharp_maximal():
    g = build_interval_grid(0, 1, 128)
    assert np.allclose(sharp_maximal(np.full(g.n, 2.5), g), 0.0, atol=1e-14)
    chi = (g.nodes < 0.5).astype(float)
    s = sharp_maximal(chi, g)
    assert np.all(s <= 0.5 + 1e-12)
    assert s.max() == pytest.approx(0.5)
    f = np.random.default_rng(2).standard_normal(g.n)
    assert np.all(sharp_maximal(f, g) <= 2 * hl_maximal(f, g) + 1e-12)


# -- potentials ---------------------------------------------------------------

def test_metric_potential_circle_constant():
    g = build_circle_grid(4096)
    v = metric_potential(np.ones(g.n), 0.5, g)
    np.testing.assert_allclose(v, 2 * np.sqrt(2 * np.pi), rtol=2e-3)
    assert np.all(metric_potential(np.zeros(g.n), 0.5, g) == 0)


def test_metric_potential_refinement():
    coarse, fine = build_circle_grid(512), build_circle_grid(4096)

    def f(t):
        return np.cos(t) + 0.5 * np.sin(3 * t)

    a = metric_potential(f(coarse.nodes), 0.5, coarse)
    b = metric_potential(f(fine.nodes), 0.5, fine)
    b_on_coarse = np.interp(coarse.nodes, fine.nodes, b, period=2 * np.pi)
    assert np.max(np.abs(a - b_on_coarse)) <= 1e-2 * np.max(np.abs(b))


def test_riesz_closed_forms():
    g = build_interval_grid(0, 1, 64)
    one = np.ones(g.n)
    assert riesz_potential(one, 0.5, g, at=2.0) == pytest.approx(2 * (np.sqrt(2) - 1), rel=1e-13)
    assert riesz_potential(one, 0.5, g, at=0.5) == pytest.approx(2 * np.sqrt(2), rel=1e-13)
    assert np.all(riesz_potential(np.zeros(g.n), 0.5, g) == 0)


def test_riesz_nodes_match_pointwise():
    g = build_interval_grid(-1, 1, 50)
    f = np.exp(g.nodes)
    np.testing.assert_allclose(riesz_potential(f, 0.3, g), riesz_potential(f, 0.3, g, at=g.nodes),
                               rtol=1e-12)


def test_riesz_refinement_order():
    x0 = 0.3
    exact = quad(lambda y: np.sin(3 * y) * abs(x0 - y) ** -0.5, 0, 1, points=[x0], limit=200)[0]
    ns = np.array([64, 256, 1024, 4096])
    err = []
    for n in ns:
        g = build_interval_grid(0, 1, int(n))
        err.append(abs(riesz_potential(np.sin(3 * g.nodes), 0.5, g, at=x0) - exact))
    order = -np.polyfit(np.log(ns), np.log(err), 1)[0]
    assert order >= 1


def test_riesz_rejects():
    with pytest.raises(ValueError):
        riesz_potential(np.ones(8), 1.0, build_interval_grid(0, 1, 8))
    with pytest.raises(TypeError):
        riesz_potential(np.ones(8), 0.5, build_circle_grid(8))


# -- singular integrals -------------------------------------------------------

@pytest.fixture(scope="module")
def curve():
    return build_carleson_curve("circle", 1024)


def test_cauchy_examples(curve):
    th = np.angle(curve.points)
    assert np.max(np.abs(cauchy_singular(np.cos(th), curve) - 1j * np.sin(th))) < 1e-2
    assert np.max(np.abs(cauchy_singular(np.ones(curve.n), curve) - 1)) < 1e-2
    assert np.all(cauchy_singular(np.zeros(curve.n), curve) == 0)


@pytest.mark.parametrize("k", [-4, -3, -1, 0, 1, 2, 4])
def test_cauchy_spectral(curve, k):
    e = np.exp(1j * k * np.angle(curve.points))
    sign = 1 if k >= 0 else -1
    assert np.max(np.abs(cauchy_singular(e, curve) - sign * e)) < 1e-2


def test_cz_cauchy_kernel_matches_cauchy(curve):
    f = np.cos(3 * np.angle(curve.points))
    out = cz_apply(f, KernelSpec("cauchy"), curve).output
    np.testing.assert_allclose(out, cauchy_singular(f, curve), atol=1e-10)
    assert np.all(cz_apply(np.zeros(curve.n), KernelSpec("cauchy"), curve).output == 0)


def test_cz_riesz_size_constant():
    g = build_interval_grid(0, 1, 64)
    rep = cz_apply(np.ones(g.n), KernelSpec("riesz", alpha=0.0), g)
    assert rep.diagnostics["size"] == pytest.approx(1.0, rel=1e-12)


def test_kernel_conditions_hilbert():
    g = build_interval_grid(0, 1, 256)
    d = kernel_condition_check(KernelSpec("hilbert"), g)
    assert d["size"] == pytest.approx(1.0, rel=1e-12)
    assert d["x_smoothness"] <= 2
    assert d["x_smoothness"] == pytest.approx(d["y_smoothness"], rel=1e-12)
    r = kernel_condition_check(KernelSpec("riesz", alpha=0.5), g)
    assert r["x_smoothness"] == pytest.approx(r["y_smoothness"], rel=1e-12)
    with pytest.raises(ValueError):
        kernel_condition_check(KernelSpec("hilbert"), g, sample_count=10)


def test_commutator():
    g = build_interval_grid(0, 1, 128)
    rng = np.random.default_rng(5)
    b, f = rng.standard_normal((2, g.n))
    K = KernelSpec("hilbert")
    assert np.allclose(commutator(np.full(g.n, 2.0), K, f, g).output, 0, atol=1e-12)
    assert np.all(commutator(b, K, np.zeros(g.n), g, with_bmo=False).output == 0)
    x = g.nodes
    D = x[:, None] - x[None, :]
    np.fill_diagonal(D, np.inf)
    T = g.h / D
    expected = b * (T @ f) - T @ (b * f)
    np.testing.assert_allclose(commutator(b, K, f, g, with_bmo=False).output, expected,
                               atol=1e-10)


def test_pseudodiff():
    g = build_circle_grid(64)
    f = np.cos(g.nodes) + 0.3 * np.sin(4 * g.nodes)
    rep = pseudodiff_apply(lambda x, xi: np.ones_like(x * xi), f, g)
    assert np.max(np.abs(rep.output - f)) < 1e-10

    def m(xi):
        return -1j * np.sign(xi)

    out = pseudodiff_apply(lambda x, xi: m(xi) + 0 * x, f, g).output
    np.testing.assert_allclose(out, continuous_multiplier(m, f, g), atol=1e-12)
    out = pseudodiff_apply(lambda x, xi: np.exp(1j * x) + 0 * xi, f, g).output
    np.testing.assert_allclose(out, np.exp(1j * g.nodes) * f, atol=1e-12)
    with pytest.raises(TypeError):
        pseudodiff_apply(lambda x, xi: 1.0, np.ones(8), build_interval_grid(0, 1, 8))
