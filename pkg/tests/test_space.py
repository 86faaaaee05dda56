import json

import numpy as np
import pytest

from varexp.exponent import (VariableExponent, check_weak_lipschitz, dual_exponent,
                             weak_lipschitz_trend)
from varexp.space import (DiscreteMeasureSpace, annulus_report, build_carleson_curve,
                          build_circle_grid, build_interval_grid, load_custom_space)


def test_interval_grid_small():
    g = build_interval_grid(0, 1, 4)
    np.testing.assert_allclose(g.nodes, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(g.masses, 0.25)
    g = build_interval_grid(-1, 1, 2)
    np.testing.assert_allclose(g.nodes, [-0.5, 0.5])
    np.testing.assert_allclose(g.masses, 1.0)


def test_interval_total_measure():
    g = build_interval_grid(0, 1, 1000)
    assert abs(g.total_measure - 1.0) < 1e-14
    assert np.all(np.diff(g.nodes) > 0)


@pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 8), (0, np.inf, 8)])
def test_interval_grid_rejects(args):
    with pytest.raises(ValueError):
        build_interval_grid(*args)


def test_circle_grid():
    g = build_circle_grid(4)
    assert g.distances_from(0)[2] == pytest.approx(np.pi)
    g8 = build_circle_grid(8)
    assert g8.total_measure == pytest.approx(2 * np.pi)
    idx, _ = g8.ball(0, 2 * np.pi / 8 + 1e-9)
    assert len(idx) == 3
    with pytest.raises(ValueError):
        build_circle_grid(3)


def test_circle_ball_matches_enumeration():
    g = build_circle_grid(8)
    idx, meas = g.ball(3, 1.0)
    theta = g.nodes
    d = np.abs(theta - theta[3])
    d = np.minimum(d, 2 * np.pi - d)
    expected = np.flatnonzero(d < 1.0)
    assert sorted(idx) == list(expected)
    assert meas == pytest.approx(expected.size * 2 * np.pi / 8)


def test_ball_extremes():
    g = build_interval_grid(0, 1, 16)
    idx, meas = g.ball(5, 2.0)
    assert len(idx) == 16 and meas == pytest.approx(1.0)
    idx, meas = g.ball(5, g.h / 2)
    assert list(idx) == [5] and meas == pytest.approx(g.h)
    with pytest.raises(ValueError):
        g.ball(0, 0.0)


def test_ball_monotone():
    g = build_interval_grid(0, 1, 64)
    radii = np.linspace(0.001, 1.2, 200)
    m = g.ball_measure(20, radii)
    assert np.all(np.diff(m) >= 0)
    small = set(g.ball(20, 0.1)[0])
    assert small <= set(g.ball(20, 0.3)[0])


def test_curves():
    c = build_carleson_curve("circle", 360)
    assert abs(c.total_measure - 2 * np.pi) < 1e-6
    e = build_carleson_curve("ellipse", 360, a=1.0, b=1.0)
    np.testing.assert_allclose(e.points, c.points, atol=1e-12)
    sq = build_carleson_curve("polygon", 400, vertices=[(0, 0), (1, 0), (1, 1), (0, 1)])
    assert abs(sq.total_measure - 4.0) < 1e-6
    with pytest.raises(ValueError):
        build_carleson_curve("polygon", 400, vertices=[(0, 0), (1, 1), (1, 0), (0, 1)])


def test_integration_linear_and_midpoint():
    g = build_interval_grid(0, 2, 50)
    f, h = np.sin(g.nodes), g.nodes**2
    lhs = g.integrate(3 * f - 2 * h)
    assert lhs == pytest.approx(3 * g.integrate(f) - 2 * g.integrate(h), rel=1e-12)
    assert g.integrate(h) == pytest.approx(np.sum(g.nodes**2) * g.h, rel=1e-15)


def test_custom_space_roundtrip(tmp_path):
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    data = {"n": 3, "distances": D.ravel().tolist(), "masses": [1, 2, 3]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(data))
    s = load_custom_space(path)
    assert s.kappa == pytest.approx(1.0)
    assert s.total_measure == 6
    idx, meas = s.ball(1, 1.5)
    assert sorted(idx) == [0, 1, 2] and meas == 6
    with pytest.raises(ValueError):
        load_custom_space(dict(data, kappa_hint=0.5))


def test_custom_space_quasi_metric():
    D = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    s = DiscreteMeasureSpace(np.ones(3), D)
    assert s.kappa == pytest.approx(2.5)
    with pytest.raises(ValueError):
        DiscreteMeasureSpace(np.array([1.0, -1.0]), np.array([[0, 1], [1, 0]]))


def test_annulus_report_grid_has_no_gaps():
    rep = annulus_report(build_interval_grid(0, 1, 256), 0)
    assert rep["empty"] == 0 and rep["scales"] > 0


# -- exponents ----------------------------------------------------------------

def test_exponent_bounds():
    with pytest.raises(ValueError):
        VariableExponent(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        VariableExponent(np.array([2.0, np.inf]))
    p = VariableExponent(np.array([1.5, 3.0]))
    assert (p.p_minus, p.p_plus) == (1.5, 3.0)


def test_dual_exponent_examples():
    g = build_interval_grid(0, 1, 4)
    assert np.allclose(dual_exponent(VariableExponent.constant(g, 2.0)).values, 2.0)
    assert np.allclose(dual_exponent(VariableExponent.constant(g, 4 / 3)).values, 4.0)
    assert dual_exponent(VariableExponent(np.array([3.0]))).values[0] == pytest.approx(1.5)


def test_tail_constant_check():
    g = build_interval_grid(-4, 4, 64, unbounded_model=True)
    v = np.where(np.abs(g.nodes) > 2, 2.5, 2 + 0.1 * g.nodes**2)
    p = VariableExponent(v, 2.5, 2.0)
    assert p.check_tail(g, int(np.argmin(np.abs(g.nodes))))


def test_weak_lipschitz_constant():
    g = build_interval_grid(0, 1, 64)
    assert check_weak_lipschitz(VariableExponent.constant(g, 2.0), g).best_A == 0.0


def test_weak_lipschitz_affine_tends_to_inverse_e():
    g = build_interval_grid(0, 1, 4096)
    res = check_weak_lipschitz(VariableExponent.from_function(g, lambda x: 2 + x), g)
    assert res.holds
    assert abs(res.best_A - 1 / np.e) < 1e-3


def test_weak_lipschitz_step_fails_under_refinement():
    spaces = [build_interval_grid(0, 1, n) for n in (64, 256, 1024)]

    def step(sp):
        return VariableExponent.from_function(sp, lambda x: 2 + (x > 0.5))

    res = weak_lipschitz_trend(step, spaces)
    assert not res.holds
    assert res.trend[-1] > res.trend[0] * 1.3

    smooth = weak_lipschitz_trend(
        lambda sp: VariableExponent.from_function(sp, lambda x: 2 + x), spaces)
    assert smooth.holds
