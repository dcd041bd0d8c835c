"""Exact k-nearest-neighbour tables over point clouds.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import KDTree

logger = logging.getLogger(__name__)

# Above this ambient dimension trees stop paying off.
TREE_MAX_DIM = 16
# Budget of floats held by one block of the brute-force search.
BLOCK_FLOATS = 4_000_000
TIE_RTOL = 1e-12


@dataclass
class NeighborTable:
    """k nearest neighbours of every row of a cloud.

    Attributes:
        indices (np.ndarray): N x k row indices; column 0 is the row itself
            and distances are non-decreasing along each row.
        distances (np.ndarray): N x k squared Euclidean distances.
        k (int): neighbours per row.
        metric (str): always 'sqeuclidean'.
    """
    indices: np.ndarray
    distances: np.ndarray
    k: int
    metric: str = 'sqeuclidean'


def _as_array(cloud) -> np.ndarray:
    return np.asarray(getattr(cloud, 'data', cloud), dtype=float)


def _check_k(n: int, k: int) -> None:
    if k < 1:
        raise ValueError(f'k must be at least 1, got {k}.')
    if k > n:
        raise ValueError(f'Cannot find k={k} neighbours among {n} points.')


def _squared_distances(data: np.ndarray, rows: np.ndarray,
                       candidates: np.ndarray) -> np.ndarray:
    diff = data[candidates] - data[rows][:, None, :]
    return np.sum(diff * diff, axis=-1)


def _bruteforce_rows(data: np.ndarray, rows: np.ndarray, k: int):
    n, D = data.shape
    block = max(1, BLOCK_FLOATS // max(1, n*D))
    indices = np.empty((len(rows), k), dtype=np.int64)
    distances = np.empty((len(rows), k))
    all_rows = np.arange(n)
    for start in range(0, len(rows), block):
        chunk = rows[start:start + block]
        dist = _squared_distances(data, chunk,
                                  np.broadcast_to(all_rows, (len(chunk), n)))
        order = np.argsort(dist, axis=1, kind='stable')[:, :k]
        indices[start:start + len(chunk)] = order
        distances[start:start + len(chunk)] = np.take_along_axis(dist, order, 1)
    return indices, distances


def knn_bruteforce(cloud, k: int) -> NeighborTable:
    """All-pairs k-nearest-neighbour search, O(D N^2).

    Ties are broken by the smaller row index. Used as the reference for
    `knn` and as its fallback in high ambient dimension.

    Args:
        cloud (PointCloud or np.ndarray): the samples.
        k (int): neighbours per row, self included.

    Raises:
        ValueError: if k > N.
    """
    data = _as_array(cloud)
    _check_k(len(data), k)
    indices, distances = _bruteforce_rows(data, np.arange(len(data)), k)
    return NeighborTable(indices=indices, distances=distances, k=k)


def knn(cloud, k: int, workers: int = 1) -> NeighborTable:
    """Exact k-nearest-neighbour search.

    Uses a KD-tree when the ambient dimension is at most 16 and blocked
    brute force above. The result is identical to `knn_bruteforce`: tree
    candidates are re-ranked with the same squared distances and rows with
    a tie at the k-th neighbour are recomputed by brute force.

    Args:
        cloud (PointCloud or np.ndarray): the samples.
        k (int): neighbours per row, self included.
        workers (int, optional): threads for the tree query. Defaults to 1.

    Raises:
        ValueError: if k > N.
    """
    data = _as_array(cloud)
    n, D = data.shape
    _check_k(n, k)
    if D > TREE_MAX_DIM:
        logger.debug('Ambient dimension %d, using brute-force neighbours.', D)
        return knn_bruteforce(data, k)

    n_query = min(k + 1, n)
    _, candidates = KDTree(data).query(data, k=n_query, workers=workers)
    candidates = np.asarray(candidates, dtype=np.int64).reshape(n, n_query)
    rows = np.arange(n)
    dist = _squared_distances(data, rows, candidates)
    order = np.lexsort((candidates, dist), axis=-1)
    candidates = np.take_along_axis(candidates, order, 1)
    dist = np.take_along_axis(dist, order, 1)

    indices, distances = candidates[:, :k].copy(), dist[:, :k].copy()
    if n_query > k:
        kth, next_ = dist[:, k - 1], dist[:, k]
        tied = np.flatnonzero(next_ - kth <= TIE_RTOL * np.maximum(next_, 1e-300))
        if len(tied) > 0:
            logger.debug('Recomputing %d rows with a tie at neighbour %d.',
                         len(tied), k)
            indices[tied], distances[tied] = _bruteforce_rows(data, tied, k)
    return NeighborTable(indices=indices, distances=distances, k=k)
