import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solitoncrb.quadrature import gauss_legendre, panel_rule, panels_for


@pytest.mark.parametrize("order", [2, 8, 16])
def test_exact_for_polynomials(order):
    x, w = gauss_legendre(order)
    for deg in range(2 * order):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert np.dot(w, x**deg) == pytest.approx(exact, abs=1e-14)


def test_rule_is_read_only():
    x, _ = gauss_legendre(4)
    with pytest.raises(ValueError):
        x[0] = 0.0


@given(k=st.floats(0.1, 60.0), width=st.floats(0.1, 5.0))
def test_panelled_plane_wave(k, width):
    edges = np.array([0.0, width, 2 * width])
    x, w = panel_rule(edges, order=16, panels=panels_for(width, k))
    got = np.sum(np.exp(1j * k * x) * w, axis=1)
    exact = (np.exp(1j * k * edges[1:]) - np.exp(1j * k * edges[:-1])) / (1j * k)
    assert np.allclose(got, exact, rtol=0, atol=1e-12 * width)
