import numpy as np
import pytest

from grenlab.quadrature import adaptive_quad, adaptive_quad_batch, bisect_root, bisect_root_vec


def test_polynomial_exact():
    assert adaptive_quad(lambda x: 3.0 * x ** 2, 0.0, 1.0) == pytest.approx(1.0, abs=1e-13)


def test_smooth_transcendental():
    got = adaptive_quad(np.exp, 0.0, 1.0, 1e-13)
    assert got == pytest.approx(np.e - 1.0, abs=1e-12)


def test_endpoint_algebraic_singularity():
    # integral of |x|^{1.5} on [0, 1] = 0.4; fractional-power endpoint
    got = adaptive_quad(lambda x: np.abs(x) ** 1.5, 0.0, 1.0, 1e-11)
    assert got == pytest.approx(0.4, abs=1e-10)


def test_interior_kink_via_split_intervals():
    # |x - 0.3| integrated piecewise: exact value 0.29
    got = adaptive_quad_batch(
        lambda x: np.abs(x - 0.3), np.array([0.0, 0.3]), np.array([0.3, 1.0]), 1e-12
    )
    assert got == pytest.approx(0.5 * 0.3 ** 2 + 0.5 * 0.7 ** 2, abs=1e-11)


def test_batch_empty_and_degenerate():
    assert adaptive_quad_batch(lambda x: x, np.array([]), np.array([]), 1e-10) == 0.0
    assert adaptive_quad_batch(lambda x: x, np.array([0.5]), np.array([0.5]), 1e-10) == 0.0


def test_bisect_root_scalar():
    r = bisect_root(lambda x: x ** 2 - 2.0, 0.0, 2.0, 1e-13)
    assert r == pytest.approx(np.sqrt(2.0), abs=1e-12)
    with pytest.raises(ValueError):
        bisect_root(lambda x: x + 1.0, 0.0, 1.0)


def test_bisect_root_vec():
    targets = np.array([0.1, 0.5, 0.9])
    roots = bisect_root_vec(lambda x: x - targets, np.zeros(3), np.ones(3), 1e-13)
    assert np.allclose(roots, targets, atol=1e-12)
