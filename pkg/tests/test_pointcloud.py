import numpy as np
import pytest

from liesym.errors import CSVFormatError
from liesym.jetspace import JetLayout
from liesym.pointcloud import (ColumnRole, PointCloud, RoleKind, family_spec,
                               load_csv, sample_heat, sample_linear_ode,
                               sample_stuart_landau, sample_transport,
                               sample_system, save_csv, uniform_draws)


def test_linear_ode_family():
    cloud = sample_system(family_spec('linear_ode', counts={'x': 10, 'C': 5}))
    assert cloud.n_points == 50
    assert (cloud.layout.d, cloud.layout.m, cloud.layout.n_constants) == (2, 1, 1)
    assert cloud.names == ['x', 'C', 'u']
    x, C, u = cloud.data.T
    np.testing.assert_allclose(u, C * np.exp(x), rtol=1e-14)
    assert np.all((x >= -1) & (x < 1)) and np.all((C >= 1) & (C < 2))


def test_fixed_constant_reduces_d():
    cloud = sample_linear_ode(family_spec('linear_ode', counts={'x': 20},
                                          fixed={'C': 1.}))
    assert cloud.layout.d == 1 and cloud.layout.n_constants == 0
    np.testing.assert_allclose(cloud.data[:, 1], np.exp(cloud.data[:, 0]))


def test_single_draw_constant_is_fixed():
    cloud = sample_system(family_spec('linear_ode', counts={'x': 20, 'C': 1}))
    assert cloud.layout.d == 1
    ratio = cloud.data[:, 1] / np.exp(cloud.data[:, 0])
    np.testing.assert_allclose(ratio, ratio[0])


def test_sampling_is_deterministic():
    spec = family_spec('heat', counts={'t': 12, 'x': 9}, seed=7)
    a, b = sample_heat(spec), sample_heat(spec)
    np.testing.assert_array_equal(a.data, b.data)
    c = sample_heat(spec.with_seed(8))
    assert not np.array_equal(a.data, c.data)


def test_grid_and_iid_modes():
    grid = sample_system(family_spec('transport', counts={'t': 6, 'x': 5}))
    iid = sample_system(family_spec('transport', counts={'t': 6, 'x': 5},
                                    mode='iid'))
    assert grid.n_points == iid.n_points == 30
    assert len(np.unique(grid.data[:, 0])) == 6
    assert len(np.unique(iid.data[:, 0])) == 30
    with pytest.raises(ValueError):
        sample_system(family_spec('transport', mode='sobol'))


def test_uniform_draws_prefix():
    long = uniform_draws(5, 0, 10, 0., 1.)
    np.testing.assert_array_equal(uniform_draws(5, 0, 4, 0., 1.), long[:4])
    assert not np.array_equal(uniform_draws(5, 1, 10, 0., 1.), long)


def test_sampling_errors():
    with pytest.raises(ValueError):
        sample_system(family_spec('heat', ranges={'t': (-1., 1.)}))
    with pytest.raises(ValueError):
        sample_system(family_spec('heat', ranges={'x': (1., 1.)}))
    with pytest.raises(ValueError):
        sample_heat(family_spec('transport'))


def test_stuart_landau_columns():
    cloud = sample_system(family_spec('stuart_landau',
                                      counts={'t': 5, 'C1': 4, 'C2': 3}))
    assert cloud.names == ['t', 'C1', 'C2', 'x', 'y']
    assert cloud.tokens == ['x1', 'C1', 'C2', 'u1', 'u2']


def test_duplicate_rows_rejected():
    data = np.array([[0., 1.], [0.5, 2.], [0., 1.]])
    with pytest.raises(ValueError, match='Duplicated rows'):
        PointCloud(data, JetLayout(d=1, m=1))


def test_shape_checks():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((4, 3)), JetLayout(d=1, m=1))
    with pytest.raises(ValueError):
        PointCloud(np.zeros((4, 2)), JetLayout(d=1, m=1, p=0), level=1)


def test_role_tokens():
    cloud = PointCloud(np.arange(10.).reshape(2, 5), JetLayout(d=2, m=1, p=1),
                       level=1)
    assert cloud.tokens == ['x1', 'x2', 'u1', 'u1_J(1,0)', 'u1_J(0,1)']
    role = ColumnRole.from_token('u2_J(0,2,1)')
    assert role == ColumnRole(RoleKind.JET, 1, (0, 2, 1))
    with pytest.raises(CSVFormatError):
        ColumnRole.from_token('v1')


def test_drop_rows():
    cloud = PointCloud(np.arange(10.).reshape(5, 2), JetLayout(d=1, m=1))
    reduced, kept = cloud.drop_rows([1, 3])
    np.testing.assert_array_equal(kept, [0, 2, 4])
    np.testing.assert_array_equal(reduced.data, cloud.data[[0, 2, 4]])


def test_csv_roundtrip(tmp_path):
    cloud = sample_system(family_spec('stuart_landau',
                                      counts={'t': 5, 'C1': 4, 'C2': 3},
                                      seed=11))
    path = tmp_path / 'sl.csv'
    save_csv(cloud, path)
    loaded = load_csv(path)
    np.testing.assert_array_equal(loaded.data, cloud.data)
    assert loaded.layout == cloud.layout
    assert loaded.names == cloud.names
    assert loaded.seed == 11
    assert path.read_text().splitlines()[0].startswith('# liesym v1')


def test_csv_is_byte_stable(tmp_path):
    cloud = sample_system(family_spec('heat', counts={'t': 4, 'x': 4}))
    save_csv(cloud, tmp_path / 'a.csv')
    save_csv(load_csv(tmp_path / 'a.csv'), tmp_path / 'b.csv')
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()


@pytest.mark.parametrize('content', [
    'x1,u1\n0,1\n',
    '# liesym v1; d=1; m=1\nx1,u1\n0,1\n',
    '# liesym v1; d=1; m=1; p=0; level=0\nx1,u2\n0,1\n',
    '# liesym v1; d=1; m=1; p=0; level=0\nx1,u1\n0,1\n0,1\n',
    '# liesym v1; d=1; m=1; p=0; level=0\nx1,u1\n0,1\n2\n',
    '# liesym v1; d=1; m=1; p=0; level=0\nx1,u1\n',
])
def test_malformed_csv(tmp_path, content):
    path = tmp_path / 'bad.csv'
    path.write_text(content)
    with pytest.raises(CSVFormatError):
        load_csv(path)


def test_properties_str(exp_curve):
    text = exp_curve.get_properties_str()
    assert 'Points: 400' in text
    assert 'linear_ode' in text


def test_transport_and_limit_cycle_samplers():
    cloud = sample_transport(family_spec('transport', counts={'t': 6, 'x': 5}))
    t, x, u = cloud.data.T
    np.testing.assert_allclose(u, np.sin(t + x), rtol=1e-14, atol=1e-15)
    circle = sample_stuart_landau(family_spec(
        'stuart_landau', counts={'t': 20}, fixed={'C1': 0., 'C2': 1.}))
    assert circle.layout.d == 1 and circle.n_points == 20
    np.testing.assert_allclose(np.hypot(*circle.data[:, 1:].T), 1., rtol=1e-12)
    with pytest.raises(ValueError, match='Expected a transport'):
        sample_transport(family_spec('heat'))
