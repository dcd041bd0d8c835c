import numpy as np
import pytest

from liesym.neighbors import knn, knn_bruteforce


def test_knn_matches_bruteforce(rng):
    data = rng.normal(size=(300, 3))
    tree, brute = knn(data, 8), knn_bruteforce(data, 8)
    np.testing.assert_array_equal(tree.indices, brute.indices)
    np.testing.assert_allclose(tree.distances, brute.distances)


def test_self_first_and_sorted(rng):
    data = rng.uniform(size=(100, 2))
    table = knn(data, 6)
    np.testing.assert_array_equal(table.indices[:, 0], np.arange(100))
    assert np.all(table.distances[:, 0] == 0)
    assert np.all(np.diff(table.distances, axis=1) >= 0)
    assert table.metric == 'sqeuclidean'


def test_ties_broken_by_index():
    data = np.arange(10.)[:, None]
    table = knn(data, 2)
    # 4 and 6 are both at distance 1 from 5
    assert table.indices[5, 1] == 4
    np.testing.assert_array_equal(table.indices, knn_bruteforce(data, 2).indices)


def test_grid_with_many_ties():
    g = np.arange(6.)
    data = np.column_stack([a.ravel() for a in np.meshgrid(g, g)])
    np.testing.assert_array_equal(knn(data, 5).indices,
                                  knn_bruteforce(data, 5).indices)


def test_high_dimension_uses_bruteforce(rng):
    data = rng.normal(size=(60, 20))
    np.testing.assert_array_equal(knn(data, 4).indices,
                                  knn_bruteforce(data, 4).indices)


def test_k_equal_to_n(rng):
    data = rng.normal(size=(7, 2))
    table = knn(data, 7)
    assert sorted(table.indices[0]) == list(range(7))


def test_invalid_k(rng):
    data = rng.normal(size=(5, 2))
    with pytest.raises(ValueError):
        knn(data, 6)
    with pytest.raises(ValueError):
        knn_bruteforce(data, 0)


def test_accepts_point_clouds(exp_curve):
    table = knn(exp_curve, 4, workers=2)
    assert table.indices.shape == (400, 4)


def test_knn_matches_bruteforce_on_random_clouds():
    rng = np.random.default_rng(2024)
    for trial in range(200):
        k = int(rng.integers(1, 41))
        n = int(rng.integers(max(k, 2), 1001))
        D = int(rng.integers(1, 11))
        data = rng.normal(size=(n, D))
        if trial % 4 == 0:
            # coarse coordinates give many equidistant neighbours
            data = np.unique(np.round(data, 1), axis=0)
            k = min(k, len(data))
        tree, brute = knn(data, k), knn_bruteforce(data, k)
        np.testing.assert_array_equal(tree.indices, brute.indices,
                                      err_msg=f'cloud {trial}: n={n}, D={D}, k={k}')
        np.testing.assert_array_equal(tree.indices[:, 0], np.arange(len(data)))


def test_permuting_rows_permutes_the_table(rng):
    data = rng.normal(size=(400, 3))
    perm = rng.permutation(400)
    table = knn(data, 12)
    permuted = knn(data[perm], 12)
    np.testing.assert_array_equal(perm[permuted.indices], table.indices[perm])
    np.testing.assert_allclose(permuted.distances, table.distances[perm])
