import numpy as np
import pytest

from apps.backend.fracvar.lib.reference import quadratic_reference, reference_curve, reference_quadrature_ex1


@pytest.mark.parametrize("t", [1.0, 0.5, 0.1])
def test_quadrature_schemes_agree(t):
    sub = reference_quadrature_ex1(t, "substitution")
    alg = reference_quadrature_ex1(t, "algebraic")
    assert sub == pytest.approx(alg, abs=1e-7)


def test_reference_hits_right_boundary_value():
    assert reference_quadrature_ex1(1.0) == pytest.approx(1.0, abs=1e-8)


def test_reference_is_increasing_and_vanishes_at_origin():
    t = np.linspace(0.0, 1.0, 11)
    y = reference_curve("ex1_quadrature", t)
    assert y[0] == 0.0
    assert np.all(np.diff(y) > 0)
    assert reference_quadrature_ex1(1e-8) < 1e-5


@pytest.mark.parametrize("t", [0.0, -0.5, 1.2])
def test_reference_domain(t):
    with pytest.raises(ValueError):
        reference_quadrature_ex1(t)


def test_unknown_scheme_and_curve():
    with pytest.raises(ValueError):
        reference_quadrature_ex1(0.5, "trapezoid")
    with pytest.raises(ValueError):
        reference_curve("cubic", np.array([0.5]))


def test_quadratic_reference():
    assert quadratic_reference(0.5) == 0.125
    assert quadratic_reference(0.0) == 0.0
    np.testing.assert_allclose(reference_curve("quadratic", np.array([0.0, 0.25, 1.0])), [0.0, 0.09375, 0.0])
