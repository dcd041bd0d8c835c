from fractions import Fraction

import numpy as np
import pytest

from liesym.ansatz import (GeneratorCoefficients, JetPolynomial,
                           evaluate_prolonged, monomial_ansatz,
                           prolong_ansatz, render_generator, total_derivative)
from liesym.errors import OrderOverflowError
from liesym.jetspace import JetLayout

X, U, UX, UXX = (JetPolynomial.variable(i) for i in range(4))


def test_polynomial_arithmetic():
    assert (X + U) * (X - U) == X * X - U * U
    assert (2 * X - X) == X
    assert (X - X).is_zero and not (X - X)
    assert (X * U * U).degree() == 3
    assert (X * U * U).coefficient({0: 1, 1: 2}) == 1
    assert (3 - X).coefficient(()) == 3
    assert (X * U + 0.5 * U).variables() == [0, 1]
    assert (0.5 * U).coefficient({1: 1}) == Fraction(1, 2)


def test_polynomial_diff_and_evaluate():
    f = X * X * U - 3 * UX
    assert f.diff(0) == 2 * X * U
    assert f.diff(2) == JetPolynomial.constant(-3)
    assert f.diff(3).is_zero
    z = np.array([[2., 5., 1.], [1., 1., 0.]])
    np.testing.assert_allclose(f.evaluate(z), [17., 1.])


def test_polynomial_text():
    names = ['x', 'u', 'u_x']
    assert (UX - 2 * U * UX * UX).to_text(names) == 'u_x - 2 * u u_x^2'
    assert JetPolynomial().to_text() == '0'
    assert (-X).to_text(names) == '-x'


def test_total_derivative():
    layout = JetLayout(d=1, m=1, p=1)
    assert total_derivative(U, 0, layout) == UX
    assert total_derivative(X * U, 0, layout) == U + X * UX
    assert total_derivative(X * X, 0, layout) == 2 * X
    with pytest.raises(OrderOverflowError):
        total_derivative(UX, 0, layout)
    assert total_derivative(UX, 0, layout, extended=True) == UXX
    with pytest.raises(ValueError):
        total_derivative(U, 1, layout)


def test_total_derivative_two_variables():
    layout = JetLayout(d=2, m=1, p=2)
    t, x, u, u_t, u_x = (JetPolynomial.variable(i) for i in range(5))
    u_tx = JetPolynomial.variable(6)
    assert total_derivative(u_t, 1, layout) == u_tx
    assert total_derivative(u_x, 0, layout) == u_tx
    assert total_derivative(t * u, 1, layout) == t * u_x


def test_ansatz_sizes():
    fixed = JetLayout(d=1, m=1)
    assert monomial_ansatz(fixed, 1).K == 6
    assert monomial_ansatz(fixed, 2).kappa == 6
    family = JetLayout(d=2, m=1, n_constants=1)
    assert monomial_ansatz(family, 1).K == 6
    assert monomial_ansatz(family, 1, include_constants=True).K == 12
    sl = JetLayout(d=3, m=2, n_constants=2)
    assert monomial_ansatz(sl, 1).K == 12
    with pytest.raises(ValueError):
        monomial_ansatz(fixed, -1)


def test_column_labels_linear_ode():
    basis = monomial_ansatz(JetLayout(d=1, m=1), 1)
    assert [basis.column_label(c) for c in range(6)] == [
        '∂x', 'x ∂x', 'u ∂x', '∂u', 'x ∂u', 'u ∂u']
    assert basis.split(4) == (1, 1)
    assert basis.column(1, 1) == 4
    with pytest.raises(ValueError):
        basis.split(6)


def test_column_labels_heat(heat_names):
    basis = monomial_ansatz(JetLayout(d=2, m=1), 1)
    assert basis.column_label(1, heat_names) == 't ∂t'
    assert basis.column_label(6, heat_names) == 'x ∂x'
    assert basis.column_label(11, heat_names) == 'u ∂u'
    degree2 = monomial_ansatz(JetLayout(d=2, m=1), 2)
    assert degree2.monomial_text(4, heat_names) == 't^2'
    assert degree2.monomial_text(5, heat_names) == 't*x'


def test_prolongation_of_linear_ode_fields():
    layout = JetLayout(d=1, m=1, p=1)
    basis = monomial_ansatz(layout, 1)
    L = prolong_ansatz(basis, layout, 1)
    assert L.shape == (3, 6)
    assert L.component(0, (1,), 0).is_zero
    assert L.component(0, (1,), 1) == -UX
    assert L.component(0, (1,), 2) == -UX * UX
    assert L.component(0, (1,), 4) == JetPolynomial.constant(1)
    assert L.component(0, (1,), 5) == UX
    assert L.entry(0, 2) == U
    assert L.entry(1, 3) == JetPolynomial.constant(1)


def test_second_prolongation_of_u_dx():
    layout = JetLayout(d=1, m=1, p=2)
    L = prolong_ansatz(monomial_ansatz(layout, 1), layout, 2)
    # u d/dx: eta_xx = -3 u_x u_xx
    assert L.component(0, (2,), 2) == -3 * UX * UXX


def test_heat_time_scaling_prolongation():
    layout = JetLayout(d=2, m=1, p=2)
    L = prolong_ansatz(monomial_ansatz(layout, 1), layout, 2)
    u_t = JetPolynomial.variable(3)
    u_tt = JetPolynomial.variable(5)
    assert L.component(0, (1, 0), 1) == -u_t
    assert L.component(0, (2, 0), 1) == -2 * u_tt
    assert L.component(0, (0, 2), 1).is_zero


def test_order_zero_prolongation():
    layout = JetLayout(d=1, m=1, p=0)
    L = prolong_ansatz(monomial_ansatz(layout, 1), layout, 0)
    assert L.shape == (2, 6)
    np.testing.assert_allclose(L.evaluate(np.array([2., 3.])),
                               [[1, 2, 3, 0, 0, 0], [0, 0, 0, 1, 2, 3]])


def test_evaluate_matches_symbolic(rng):
    layout = JetLayout(d=2, m=1, p=2)
    L = prolong_ansatz(monomial_ansatz(layout, 2), layout, 2)
    z = rng.normal(size=(5, 8))
    values = evaluate_prolonged(L, z)
    assert values.shape == (5, 8, L.basis.K)
    for r, c in [(3, 4), (7, 20), (5, 29)]:
        np.testing.assert_allclose(values[:, r, c], L.entry(r, c).evaluate(z),
                                   rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(L.evaluate(z[0]), values[0])
    with pytest.raises(ValueError):
        L.evaluate(np.zeros(7))


def test_generator_component():
    layout = JetLayout(d=1, m=1, p=1)
    L = prolong_ansatz(monomial_ansatz(layout, 1), layout, 1)
    c = [1, 0, 0, 0, 0, 1]
    assert L.generator_component(2, c) == UX
    with pytest.raises(ValueError):
        L.generator_component(2, [1, 0])


def test_prolongation_rejects_foreign_layout():
    basis = monomial_ansatz(JetLayout(d=1, m=1), 1)
    with pytest.raises(ValueError):
        prolong_ansatz(basis, JetLayout(d=2, m=1), 1)
    with pytest.raises(ValueError):
        prolong_ansatz(basis, JetLayout(d=1, m=1), -1)


def test_prolonged_text():
    layout = JetLayout(d=1, m=1, p=1)
    text = prolong_ansatz(monomial_ansatz(layout, 1), layout, 1).to_text()
    assert 'u_x | u ∂x | -u_x^2' in text.splitlines()


def test_render_generator():
    basis = monomial_ansatz(JetLayout(d=1, m=1), 1)
    assert render_generator(np.array([1., 0, 0, 0, 0, 1.]), basis) == \
        '0.7071 ∂x + 0.7071 u ∂u'
    assert render_generator(np.array([-2., 0, 0, 0, 0, 0]), basis) == '∂x'
    assert render_generator(np.zeros(6), basis) == '0'
    assert render_generator(np.array([0, 1., 0, 0, 0, -1.]), basis,
                            names=['t', 'y']) == '0.7071 t ∂t - 0.7071 y ∂y'


def test_generator_coefficients_normalised():
    basis = monomial_ansatz(JetLayout(d=1, m=1), 1)
    g = GeneratorCoefficients.from_vector([0, 0, -3., 0, 4., 0], basis)
    np.testing.assert_allclose(g.c, [0, 0, 0.6, 0, -0.8, 0])
    assert g.norm == pytest.approx(5.)
    assert g.render() == '0.6 u ∂x - 0.8 x ∂u'
