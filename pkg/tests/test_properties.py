import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from varexp.exponent import VariableExponent, dual_exponent
from varexp.extrapolation import rubio_de_francia
from varexp.fourier import fourier_coeffs
from varexp.norms import modular, norm, verify_holder
from varexp.operators import hl_maximal, riesz_potential
from varexp.space import build_circle_grid, build_interval_grid

N = 48
G = build_interval_grid(0, 1, N)
C = build_circle_grid(N)
values = arrays(np.float64, N, elements=st.floats(-50, 50, allow_subnormal=False))
positive = arrays(np.float64, N, elements=st.floats(0, 50, allow_subnormal=False))
exponents = st.builds(lambda a, b: VariableExponent(a + b * G.nodes ** 2),
                      st.floats(1.05, 4.0), st.floats(0.0, 3.0))
weights = st.builds(lambda c, beta: c * np.abs(G.nodes - 0.37) ** beta,
                    st.floats(0.1, 10.0), st.floats(-0.4, 0.8))
prop = settings(max_examples=60, deadline=None)


def _nonzero(f):
    return np.max(np.abs(f)) > 1e-6


@prop
@given(values, exponents, weights, st.floats(-20, 20).filter(lambda c: abs(c) > 1e-3))
def test_norm_homogeneous(f, p, rho, c):
    expected = abs(c) * norm(f, p, rho, G)
    assert norm(c * f, p, rho, G) == pytest.approx(expected, rel=1e-9, abs=1e-300)


@prop
@given(values, values, exponents, weights)
def test_norm_triangle(f, g, p, rho):
    assert norm(f + g, p, rho, G) <= (norm(f, p, rho, G) + norm(g, p, rho, G)) * (1 + 1e-9)


@prop
@given(values, exponents, weights)
def test_unit_modular(f, p, rho):
    if not _nonzero(f):
        return
    n = norm(f, p, rho, G)
    assert modular(f / n, p, rho, G, 1.0) == pytest.approx(1.0, abs=1e-8)


@prop
@given(positive, positive, exponents)
def test_norm_monotone(f, extra, p):
    assert norm(f, p, None, G) <= norm(f + extra, p, None, G) * (1 + 1e-12)


@prop
@given(values, values, exponents)
def test_holder_constant_two(f, g, p):
    assert verify_holder(f, g, p, None, G)["ratio"] <= 1 + 1e-9


@given(exponents)
def test_dual_involution(p):
    np.testing.assert_allclose(dual_exponent(dual_exponent(p)).values, p.values, rtol=1e-12)


@prop
@given(values, values, st.floats(-5, 5))
def test_maximal_sublinear_and_homogeneous(f, g, c):
    for space in (G, C):
        Mf, Mg = hl_maximal(f, space), hl_maximal(g, space)
        assert np.all(Mf >= np.abs(f) * (1 - 1e-12))
        assert np.all(hl_maximal(f + g, space) <= (Mf + Mg) * (1 + 1e-12) + 1e-12)
        np.testing.assert_allclose(hl_maximal(c * f, space), abs(c) * Mf, rtol=1e-12, atol=1e-300)


@settings(max_examples=25, deadline=None)
@given(positive, st.floats(1.0, 4.0), st.floats(0.01, 100))
def test_rdf_scale_linear_and_dominating(phi, C0, c):
    a = rubio_de_francia(phi, C0, space=G)["Sphi"]
    b = rubio_de_francia(c * phi, C0, space=G)["Sphi"]
    np.testing.assert_allclose(b, c * a, rtol=1e-12, atol=1e-300)
    assert np.all(a >= phi)


@prop
@given(positive, positive, st.floats(0.1, 0.9))
def test_riesz_positive_linear(f, g, alpha):
    If, Ig = riesz_potential(f, alpha, G), riesz_potential(g, alpha, G)
    assert np.all(If >= 0)
    np.testing.assert_allclose(riesz_potential(f + 2 * g, alpha, G), If + 2 * Ig,
                               rtol=1e-10, atol=1e-10)


@prop
@given(arrays(np.float64, (2, 9), elements=st.floats(-3, 3)))
def test_parseval_band_limited(coef):
    t = C.nodes
    k = np.arange(9)
    f = coef[0] @ np.cos(np.outer(k, t)) + coef[1, 1:] @ np.sin(np.outer(k[1:], t))
    s = fourier_coeffs(f, C)
    rhs = np.pi * (s.a[0] ** 2 / 2 + np.sum(s.a[1:] ** 2 + s.b[1:] ** 2))
    assert C.integrate(f**2) == pytest.approx(rhs, rel=1e-10, abs=1e-10)
