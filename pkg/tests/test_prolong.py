import numpy as np
import pytest

from liesym.errors import DegenerateFractionError, LevelExhaustedError
from liesym.jetspace import JetLayout
from liesym.prolong import (ProlongedCloud, chain_rule_batch,
                            derivatives_at_point, prolongate, prolongate_once)
from liesym.tangent import GmlsParams, TangentFrame


def test_first_derivative_of_exponential(exp_curve):
    lifted = prolongate(exp_curve, 1, GmlsParams(k=10, degree=3))
    data = lifted.cloud.data
    assert lifted.cloud.level == 1
    assert lifted.cloud.column_names == ['x', 'u', 'u_x']
    error = np.abs(data[:, 2] - data[:, 1])
    assert np.median(error) < 1e-4
    assert np.max(error) < 1e-2
    assert lifted.n_dropped == 0
    np.testing.assert_array_equal(lifted.kept, np.arange(400))


def test_second_derivative_of_sine(sin_curve):
    lifted = prolongate(sin_curve, 2, GmlsParams(k=12, degree=4))
    x, y, y_x, y_xx = lifted.cloud.data.T
    interior = (x > 0.3) & (x < np.pi - 0.3)
    assert np.max(np.abs(y_x[interior] - np.cos(x[interior]))) < 1e-5
    assert np.max(np.abs(y_xx[interior] + np.sin(x[interior]))) < 1e-2
    diagnostics = lifted.diagnostics
    assert list(diagnostics.columns) == ['level', 'row', 'cond', 'chart_cond',
                                         'gmls_iterations', 'converged',
                                         'degenerate']
    assert (diagnostics['chart_cond'] < GmlsParams().chart_cond).all()
    assert sorted(diagnostics['level'].unique()) == [1, 2]


def test_lower_columns_are_untouched(exp_curve):
    lifted = prolongate(exp_curve, 2, GmlsParams(k=10, degree=3))
    np.testing.assert_array_equal(lifted.cloud.data[:, :2],
                                  exp_curve.data[lifted.kept])


def test_prolongate_to_current_level_is_a_copy(exp_curve):
    lifted = prolongate(exp_curve, 0, GmlsParams(k=10, degree=3))
    np.testing.assert_array_equal(lifted.cloud.data, exp_curve.data)
    assert lifted.diagnostics.empty and lifted.n_dropped == 0


def test_prolongate_below_level(exp_curve):
    lifted = prolongate(exp_curve, 1, GmlsParams(k=10, degree=3))
    with pytest.raises(ValueError):
        prolongate(lifted.cloud, 0, GmlsParams(k=10, degree=3))


def test_level_exhausted(exp_curve):
    with pytest.raises(LevelExhaustedError, match='level exhausted'):
        prolongate_once(exp_curve, GmlsParams(k=10, degree=3))


def test_degenerate_fraction(exp_curve):
    # cond(A) >= 1 always, so every point is flagged
    with pytest.raises(DegenerateFractionError):
        prolongate_once(exp_curve.with_layout_order(1),
                        GmlsParams(k=10, degree=3), cond_threshold=0.5)


def test_chain_rule_on_exact_tangents():
    # u = x y at (x, y) = (2, 3): u_x = 3, u_y = 2, u_xy = 1
    layout = JetLayout(d=2, m=1, p=2)
    T = np.array([[1., 0.], [0., 1.], [3., 2.], [0., 1.], [1., 0.]])
    new, X, cond, degenerate = chain_rule_batch(T[None], layout, 1)
    np.testing.assert_allclose(new[0], [0., 1., 0.], atol=1e-15)
    assert not degenerate[0] and cond[0] == pytest.approx(1.)


def test_mixed_derivatives_are_averaged():
    layout = JetLayout(d=2, m=1, p=2)
    # inconsistent frame: d(u_x)/dy = 1 but d(u_y)/dx = 3
    T = np.array([[1., 0.], [0., 1.], [0., 0.], [0., 1.], [3., 0.]])
    new, _, _, _ = chain_rule_batch(T[None], layout, 1)
    np.testing.assert_allclose(new[0], [0., 2., 0.])


def test_derivatives_at_point():
    layout = JetLayout(d=1, m=1, p=1)
    frame = TangentFrame(T=np.array([[1.], [3.]]) / np.sqrt(10),
                         Nrm=np.array([[-3.], [1.]]) / np.sqrt(10),
                         base_index=0)
    new, system = derivatives_at_point(frame, layout, 0)
    np.testing.assert_allclose(new, [3.])
    np.testing.assert_allclose(system.A @ system.X, system.B)
    assert not system.degenerate


def test_vertical_tangent_is_degenerate():
    layout = JetLayout(d=1, m=1, p=1)
    frame = TangentFrame(T=np.array([[0.], [1.]]), Nrm=np.array([[1.], [0.]]),
                         base_index=0)
    new, system = derivatives_at_point(frame, layout, 0)
    assert system.degenerate and np.isnan(new).all()


def test_frame_shape_check():
    frame = TangentFrame(T=np.ones((3, 1)), Nrm=np.ones((3, 2)), base_index=0)
    with pytest.raises(ValueError):
        derivatives_at_point(frame, JetLayout(d=1, m=1, p=1), 0)


def test_prolonged_cloud_defaults(exp_curve):
    wrapped = ProlongedCloud(cloud=exp_curve)
    assert wrapped.n_dropped == 0
    assert len(wrapped.kept) == exp_curve.n_points
