import numpy as np
import pytest

from liesym.ansatz import monomial_ansatz, prolong_ansatz
from liesym.invariance import principal_angles
from liesym.oracles import (AnalyticFamily, analytic_jet, central_weights,
                            exact_tangents, flow_prolongation_oracle,
                            residual_nullspace_oracle)


@pytest.fixture
def exp_family():
    return AnalyticFamily('linear_ode', fixed={'C': 1.})


def test_analytic_family_axes():
    family = AnalyticFamily('stuart_landau', fixed={'C2': 1.})
    assert family.axes == ['t', 'C1']
    assert family.n_constants == 1
    assert family.names == ['t', 'C1', 'x', 'y']
    layout = family.layout(2)
    assert (layout.d, layout.m, layout.n_constants) == (2, 2, 1)


def test_exact_jet_of_exponential(exp_family):
    values = exp_family.evaluate(np.array([[0.5], [-1.]]), 2)
    np.testing.assert_allclose(values, np.exp([[0.5] * 3, [-1.] * 3]))


def test_exact_jet_solves_heat():
    family = AnalyticFamily('heat')
    points = np.array([[1.5, 1.2], [1.1, 1.9]])
    u, u_t, u_x, u_tt, u_tx, u_xx = family.evaluate(points, 2).T
    np.testing.assert_allclose(u_t, u_xx, rtol=1e-12)
    np.testing.assert_allclose(u_x, -points[:, 1] / (2 * points[:, 0]) * u)


def test_family_domain_and_shape():
    family = AnalyticFamily('heat')
    with pytest.raises(ValueError):
        family.evaluate(np.array([[0., 1.]]), 1)
    with pytest.raises(ValueError):
        family.evaluate(np.array([[1.]]), 1)


def test_analytic_jet_cloud(exp_family):
    jet = analytic_jet(exp_family, np.linspace(-1, 0, 5)[:, None], 1).cloud
    assert jet.level == 1 and jet.column_names == ['x', 'u', 'u_x']


def test_exact_tangents(exp_family):
    T = exact_tangents(exp_family, np.array([[0.]]), 1)
    np.testing.assert_allclose(T[0, :, 0], [1., 1., 1.])


def test_linear_ode_curve_symmetry(exp_family):
    basis = monomial_ansatz(exp_family.layout(1), 1)
    report = residual_nullspace_oracle(exp_family, basis, 1, n_per_axis=40)
    assert report.nullity == 1
    expected = np.array([1., 0, 0, 0, 0, 1.]) / np.sqrt(2)
    assert principal_angles(report.basis, expected).max_sine < 1e-8
    assert report.render(basis, names=exp_family.names) == [
        '0.7071 ∂x + 0.7071 u ∂u']


def test_heat_kernel_symmetry():
    family = AnalyticFamily('heat')
    basis = monomial_ansatz(family.layout(2), 1)
    report = residual_nullspace_oracle(family, basis, 2, n_per_axis=10)
    assert report.nullity == 1
    expected = np.zeros(12)
    expected[[1, 6, 11]] = [2., 1., -1.]
    expected /= np.linalg.norm(expected)
    assert principal_angles(report.basis, expected).max_sine < 1e-8


def test_transport_symmetries():
    family = AnalyticFamily('transport')
    basis = monomial_ansatz(family.layout(1), 1)
    report = residual_nullspace_oracle(family, basis, 1, n_per_axis=10)
    assert report.nullity == 4
    expected = np.zeros((12, 4))
    for j in range(4):
        expected[j, j], expected[4 + j, j] = 1., -1.
    expected /= np.sqrt(2)
    assert principal_angles(report.basis, expected).max_sine < 1e-8


def test_central_weights():
    np.testing.assert_allclose(central_weights(1, [-1, 0, 1]), [-0.5, 0, 0.5],
                               atol=1e-15)
    np.testing.assert_allclose(central_weights(2, [-1, 0, 1]), [1, -2, 1],
                               atol=1e-14)
    with pytest.raises(ValueError):
        central_weights(3, [-1, 0, 1])


@pytest.mark.parametrize('c', [
    [1., 0, 0, 0, 0, 1.],
    [0, 1., 0, 0.5, 0, 0],
    [0, 0, 0, 0, 1., -0.3],
])
def test_flow_matches_prolongation_formula(exp_family, c):
    p = 2
    layout = exp_family.layout(p)
    basis = monomial_ansatz(layout, 1)
    x0 = np.array([0.3])
    z = analytic_jet(exp_family, x0[None], p).cloud.data[0]
    formula = prolong_ansatz(basis, layout, p).evaluate(z) @ np.asarray(c)
    flowed = flow_prolongation_oracle(np.asarray(c), basis, exp_family, x0, p)
    np.testing.assert_allclose(flowed, formula, rtol=1e-6, atol=1e-6)


def test_flow_of_a_nonlinear_field(exp_family):
    p = 1
    layout = exp_family.layout(p)
    basis = monomial_ansatz(layout, 2)
    c = np.zeros(basis.K)
    c[basis.column(0, 3)] = 0.5      # x^2 d/dx
    c[basis.column(1, 5)] = 1.       # u^2 d/du
    x0 = np.array([-0.4])
    z = analytic_jet(exp_family, x0[None], p).cloud.data[0]
    formula = prolong_ansatz(basis, layout, p).evaluate(z) @ c
    flowed = flow_prolongation_oracle(c, basis, exp_family, x0, p)
    np.testing.assert_allclose(flowed, formula, rtol=1e-5, atol=1e-6)


def test_flow_step_check(exp_family):
    basis = monomial_ansatz(exp_family.layout(1), 1)
    c = np.array([0, 1., 0, 0, 0, 0])
    with pytest.raises(ValueError, match='too large'):
        flow_prolongation_oracle(c, basis, exp_family, np.array([0.3]), 1,
                                 s=1., check_tol=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize('system, fixed, p', [
    ('linear_ode', {'C': 1.}, 2),
    ('stuart_landau', {'C1': 0., 'C2': 1.}, 1),
    ('transport', {}, 1),
    ('heat', {}, 2),
])
def test_flow_matches_formula_on_random_fields(system, fixed, p):
    family = AnalyticFamily(system, fixed=fixed)
    layout = family.layout(p)
    basis = monomial_ansatz(layout, 1)
    prolonged = prolong_ansatz(basis, layout, p)
    rng = np.random.default_rng(17)
    lo, hi = np.array([family.system.default_ranges[a] for a in family.axes]).T
    for case in range(50):
        c = rng.normal(size=basis.K)
        x0 = rng.uniform(lo + (hi - lo) / 4, hi - (hi - lo) / 4)
        z = analytic_jet(family, x0[None], p).cloud.data[0]
        formula = prolonged.evaluate(z) @ c
        flowed = flow_prolongation_oracle(c, basis, family, x0, p)
        scale = max(1., np.abs(formula).max())
        np.testing.assert_allclose(flowed, formula, rtol=1e-5, atol=1e-5 * scale,
                                   err_msg=f'{system} case {case}: x0={x0}')
