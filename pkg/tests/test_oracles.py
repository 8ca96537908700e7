import numpy as np
import pytest

from usvswarm.oracles import central_gradient, grounded_laplacian_rate, simplex_grid, simplex_grid_distance


def test_simplex_grid_rows_sum_to_one():
    g = simplex_grid(3, 4)
    assert len(g) == 15
    assert np.allclose(g.sum(axis=1), 1.0) and g.min() >= 0


def test_square_example_refined():
    d, lam = simplex_grid_distance((2, 0.5), [(0, 0), (1, 0), (1, 1), (0, 1)])
    assert d == pytest.approx(1.0, abs=1e-4)
    assert lam.sum() == pytest.approx(1.0) and lam.min() >= -1e-12


def test_gradient_of_quadratic():
    g = central_gradient(lambda z: float(np.sum(z ** 2)), np.array([[1.0, -2.0]]))
    assert np.allclose(g, [[2.0, -4.0]], atol=1e-8)


def test_line_graph_rate():
    # eigenvalues of [[2,-1,0],[-1,2,-1],[0,-1,1]]: smallest is 2 - 2cos(pi/7)
    rate = grounded_laplacian_rate([(0, 1), (1, 2)], 3, [0], 0.5)
    assert rate == pytest.approx(0.5 * (2 - 2 * np.cos(np.pi / 7)))
