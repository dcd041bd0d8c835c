import numpy as np
import pandas as pd
import pytest

from liesym.ansatz import monomial_ansatz
from liesym.jetspace import JetLayout
from liesym.invariance import (NullityPolicy, assemble, canonical_basis,
                               nullspace, pointwise_block, pointwise_blocks,
                               principal_angles, restrict_normals,
                               theoretical_rate)
from liesym.oracles import AnalyticFamily, residual_nullspace_oracle


def _rank_deficient(rng, K=6, cols=200, null=((0,), (5,))):
    N = np.zeros((K, len(null)))
    for j, rows in enumerate(null):
        N[list(rows), j] = 1.
    N, _ = np.linalg.qr(N)
    A = rng.normal(size=(K, cols))
    return A - N @ (N.T @ A), N


def test_restrict_normals():
    Nrm = np.zeros((1, 3, 2))
    Nrm[0, 1, 0] = Nrm[0, 2, 1] = 1.
    S = restrict_normals(Nrm, np.array([False, False, True]))
    assert S.shape == (1, 3, 1)
    np.testing.assert_allclose(np.abs(S[0, :, 0]), [0, 1, 0], atol=1e-15)


def test_restrict_normals_generic(rng):
    Q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    Nrm = Q[None, :, 2:]
    mask = np.array([False, True, False, False, False])
    S = restrict_normals(Nrm, mask)
    assert S.shape == (1, 5, 2)
    np.testing.assert_allclose(S[0, mask], 0, atol=1e-14)
    np.testing.assert_allclose(S[0].T @ S[0], np.eye(2), atol=1e-14)
    # still inside the original normal space
    np.testing.assert_allclose(Nrm[0] @ (Nrm[0].T @ S[0]), S[0], atol=1e-14)


def test_restrict_normals_empty():
    with pytest.raises(ValueError, match='empty normal space'):
        restrict_normals(np.zeros((1, 3, 1)), np.array([False, True, True]))


def test_pointwise_blocks(rng):
    L = rng.normal(size=(4, 5, 6))
    S = rng.normal(size=(4, 5, 2))
    blocks = pointwise_blocks(L, S)
    assert blocks.shape == (4, 6, 2)
    np.testing.assert_allclose(blocks[2], pointwise_block(L[2], S[2]))
    with pytest.raises(ValueError):
        pointwise_block(L[0], S[0, :4])


def test_assemble(rng):
    blocks = [rng.normal(size=(3, 2)), rng.normal(size=(3, 4))]
    system = assemble(blocks)
    assert system.P.shape == (3, 6)
    np.testing.assert_array_equal(system.offsets, [0, 2, 6])
    assert system.n_blocks == 2 and system.K == 3
    np.testing.assert_array_equal(system.block(1), blocks[1])
    normed = assemble(blocks, normalize=True)
    np.testing.assert_allclose(np.linalg.norm(normed.P, axis=0), 1.)
    with pytest.raises(ValueError):
        assemble([])
    with pytest.raises(ValueError):
        assemble([np.zeros((3, 2)), np.zeros((4, 2))])


def test_policies():
    sigma = np.array([1., 0.5, 1e-3, 1e-9])
    assert NullityPolicy().detect(sigma) == 1
    assert NullityPolicy(threshold=1e-2).detect(sigma) == 2
    assert NullityPolicy('gap').detect(sigma) == 1
    assert NullityPolicy('gap').detect(np.array([1., 0.5, 0.2])) == 0
    assert NullityPolicy('fixed', nullity=3).detect(sigma) == 3
    with pytest.raises(ValueError):
        NullityPolicy('fixed', nullity=5).detect(sigma)
    with pytest.raises(ValueError):
        NullityPolicy('largest')
    with pytest.raises(ValueError):
        NullityPolicy('fixed')


def test_policy_strings():
    policy = NullityPolicy.from_string('fixed:2')
    assert policy.kind == 'fixed' and policy.nullity == 2
    assert policy.to_string() == 'fixed:2'
    assert NullityPolicy.from_string('gap').to_string() == 'gap'
    with pytest.raises(ValueError):
        NullityPolicy.from_string('fixed:two')


@pytest.mark.parametrize('method', ['svd', 'gram', 'auto'])
def test_nullspace_recovers_known_kernel(rng, method):
    P, N = _rank_deficient(rng)
    report = nullspace(P, method=method)
    assert report.nullity == 2
    assert report.K == 6
    assert principal_angles(report.basis, N).max_sine < 1e-6
    assert report.gap_ratio > 1e5
    assert np.all(np.diff(report.singular_values) <= 1e-12)


def test_auto_method_choice(rng):
    P, _ = _rank_deficient(rng, cols=200)
    assert nullspace(P).method == 'gram'
    P, _ = _rank_deficient(rng, cols=10)
    assert nullspace(P).method == 'svd'
    with pytest.raises(ValueError):
        nullspace(P, method='qr')


def test_few_columns_pad_the_spectrum(rng):
    P = rng.normal(size=(5, 2))
    report = nullspace(P, method='svd')
    assert report.nullity == 3
    np.testing.assert_array_equal(report.singular_values[2:], 0.)


def test_zero_matrix_is_degenerate():
    report = nullspace(np.zeros((4, 10)))
    assert report.degenerate and report.nullity == 4
    assert np.isnan(report.gap_ratio)


def test_full_rank_has_no_nullspace(rng):
    report = nullspace(rng.normal(size=(4, 50)))
    assert report.nullity == 0
    assert report.basis.shape == (4, 0)


def test_canonical_basis():
    e = np.eye(6)
    rotated = np.column_stack([e[0] + e[5], e[0] - e[5]]) / np.sqrt(2)
    canon = canonical_basis(rotated)
    np.testing.assert_allclose(canon, e[:, [0, 5]], atol=1e-12)
    single = canonical_basis(-(e[:, [1]] + e[:, [3]]))
    np.testing.assert_allclose(single[:, 0], (e[1] + e[3]) / np.sqrt(2))


def test_render_and_spectrum(rng, tmp_path):
    P, _ = _rank_deficient(rng)
    report = nullspace(P)
    basis = monomial_ansatz(JetLayout(d=1, m=1), 1)
    assert report.render(basis) == ['∂x', 'u ∂u']
    df = report.get_spectrum_df()
    assert list(df.columns) == ['index', 'sigma', 'relative', 'in_nullspace']
    assert list(df['in_nullspace']) == [False] * 4 + [True] * 2
    report.to_csv(tmp_path / 'spectrum.csv')
    loaded = pd.read_csv(tmp_path / 'spectrum.csv')
    np.testing.assert_array_equal(loaded['sigma'], df['sigma'])
    assert 'Nullity: 2' in report.get_properties_str()


def test_plots(rng):
    P, _ = _rank_deficient(rng)
    report = nullspace(P)
    fig, ax = report.plot_spectrum()
    assert len(ax.lines) >= 2
    fig, ax = report.plot_nullspace()
    assert len(ax.patches) == 12


def test_principal_angles():
    e = np.eye(3)
    assert principal_angles(e[:, :2], e[:, :2]).max_sine == pytest.approx(0, abs=1e-15)
    assert principal_angles(e[:, [0]], e[:, [1]]).max_sine == pytest.approx(1)
    theta = 1e-7
    v = np.cos(theta) * e[0] + np.sin(theta) * e[1]
    assert principal_angles(e[0], v).max_sine == pytest.approx(np.sin(theta), rel=1e-6)
    sines = principal_angles(e[:, :2], np.column_stack([e[0], v + e[2]]) /
                             np.array([1., np.linalg.norm(v + e[2])])).sines
    assert np.all(np.diff(sines) >= 0)
    with pytest.raises(ValueError):
        principal_angles(e[:, :2], e[:, :1])


def test_theoretical_rate():
    assert theoretical_rate(100, 3, 1) == pytest.approx(100 * (np.log(100) / 100)**3)
    with pytest.raises(ValueError):
        theoretical_rate(1, 3, 1)


def test_gram_route_agrees_with_svd(rng):
    for cols in (30, 200, 1000, 5000):
        for null in (((0,),), ((0,), (5,)), ((1, 2), (3,), (4, 0))):
            P, N = _rank_deficient(rng, cols=cols, null=null)
            P *= 10.**rng.uniform(-3, 3)
            gram, svd = nullspace(P, method='gram'), nullspace(P, method='svd')
            scale = svd.singular_values[0]
            np.testing.assert_allclose(gram.singular_values, svd.singular_values,
                                       rtol=0, atol=1e-10 * scale)
            r = len(null)
            assert gram.nullity == svd.nullity == r
            assert np.all(gram.singular_values[-r:] <= 1e-10 * scale)
            assert principal_angles(gram.trailing_basis(r),
                                    svd.trailing_basis(r)).max_sine <= 1e-10
            assert principal_angles(gram.basis, N).max_sine <= 1e-10


@pytest.mark.parametrize('method', ['svd', 'gram'])
def test_exact_linear_ode_jets_have_a_clean_kernel(method):
    family = AnalyticFamily('linear_ode')
    basis = monomial_ansatz(family.layout(1), 1)
    report = residual_nullspace_oracle(family, basis, 1, n_per_axis=40,
                                       method=method)
    sigma = report.singular_values
    assert report.method == method
    assert report.nullity == 2
    assert np.all(sigma[-2:] <= 1e-10 * sigma[0])
    expected = np.zeros((6, 2))
    expected[0, 0] = expected[5, 1] = 1.
    assert principal_angles(report.basis, expected).max_sine < 1e-8
