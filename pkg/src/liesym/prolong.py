"""Prolongation of point clouds into jet space.

At level k every point gets a refined tangent frame T (D_k x d). Writing
the frame columns as derivatives of the embedding along intrinsic
coordinates, the independent rows give A = T[:d].T and the rows of the
order-k coordinates give B; the chain rule A X = B yields
X[j, q] = d q / d x_j, which are the order-(k+1) coordinates.
"""

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from liesym.errors import DegenerateFractionError, LevelExhaustedError
from liesym.jetspace import (JetLayout, add_index, coordinate_offset,
                             jet_dimension)
from liesym.neighbors import knn
from liesym.pointcloud import PointCloud
from liesym.tangent import GmlsParams, TangentFrame, gmls_frames

logger = logging.getLogger(__name__)

COND_THRESHOLD = 1e8
MAX_DEGENERATE_FRACTION = 0.01


@dataclass
class ChainRuleSystem:
    """Chain-rule system A X = B at one point.

    Attributes:
        A (np.ndarray): d x d block, A[c, j] = d x_j / d s_c.
        B (np.ndarray): d x m_k block, B[c, q] = d q / d s_c.
        X (np.ndarray): d x m_k solution, X[j, q] = d q / d x_j; NaN when
            the point is degenerate.
        cond (float): condition number of A.
        degenerate (bool): cond above the threshold.
    """
    A: np.ndarray
    B: np.ndarray
    X: np.ndarray
    cond: float
    degenerate: bool


@dataclass
class ProlongedCloud:
    """A cloud lifted by one or more levels.

    Attributes:
        cloud (PointCloud): the lifted cloud; rows of degenerate points are
            removed, the other columns below the new level are unchanged.
        diagnostics (pd.DataFrame): one row per input point and level with
            columns level, row, cond, chart_cond, gmls_iterations, converged,
            degenerate.
        kept (np.ndarray): for every row of `cloud`, its row in the cloud
            the lifting started from.
    """
    cloud: PointCloud
    diagnostics: pd.DataFrame = field(default_factory=pd.DataFrame)
    kept: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kept is None:
            self.kept = np.arange(self.cloud.n_points)

    @property
    def n_dropped(self) -> int:
        if self.diagnostics.empty:
            return 0
        return int(self.diagnostics['degenerate'].sum())


@lru_cache(maxsize=None)
def _lift_map(layout: JetLayout, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Columns of the order-k quantities, and the averaging matrix W with
    new = X.reshape(d * n_q) @ W for the order-(k+1) coordinates."""
    d, m = layout.d, layout.m
    sources = layout.level_ordering(k) if k > 0 else [(b, (0,) * d)
                                                      for b in range(m)]
    targets = layout.level_ordering(k + 1)
    target_pos = {pair: i for i, pair in enumerate(targets)}
    source_cols = np.array([coordinate_offset(layout, b, J) for b, J in sources])
    W = np.zeros((d * len(sources), len(targets)))
    for q, (b, J) in enumerate(sources):
        for j in range(d):
            W[j * len(sources) + q, target_pos[(b, add_index(J, j))]] = 1.
    W /= W.sum(axis=0, keepdims=True)
    return source_cols, W


def chain_rule_batch(T: np.ndarray, layout: JetLayout, k: int,
                     cond_threshold: float = COND_THRESHOLD):
    """Order-(k+1) coordinates from a stack of tangent frames.

    Args:
        T (np.ndarray): n x D_k x d tangent frames at level k.
        layout (JetLayout): layout with p > k.
        k (int): level of the frames.
        cond_threshold (float, optional): points with cond(A) above it are
            degenerate. Defaults to 1e8.

    Returns:
        tuple: (n x n_new new coordinates, NaN for degenerate points;
            n x d x m_k solutions X; condition numbers; degenerate mask).
    """
    d = layout.d
    source_cols, W = _lift_map(layout.with_order(max(layout.p, k + 1)), k)
    A = T[:, :d, :].transpose(0, 2, 1)
    B = T[:, source_cols, :].transpose(0, 2, 1)
    with np.errstate(all='ignore'):
        cond = np.linalg.cond(A)
    degenerate = ~np.isfinite(cond) | (cond > cond_threshold)
    X = np.full(B.shape, np.nan)
    if np.any(~degenerate):
        X[~degenerate] = np.linalg.solve(A[~degenerate], B[~degenerate])
    new = X.reshape(len(X), -1) @ W
    return new, X, cond, degenerate


def derivatives_at_point(frame: TangentFrame, layout: JetLayout, k: int,
                         cond_threshold: float = COND_THRESHOLD
                         ) -> Tuple[np.ndarray, ChainRuleSystem]:
    """Order-(k+1) coordinates at one point from its level-k frame.

    Every order-k quantity q (the dependents when k = 0, the u_{b,J} with
    |J| = k otherwise) is differentiated along every x_j; contributions
    landing on the same multi-index are averaged.

    Returns:
        tuple: (new coordinates in layout order, the chain-rule system).
            A degenerate point returns NaN values and a flagged system.
    """
    if frame.T.shape != (jet_dimension(layout.with_order(max(layout.p, k)), k),
                         layout.d):
        raise ValueError(f'Frame of shape {frame.T.shape} does not live at '
                         f'level {k} of a layout with d={layout.d}.')
    new, X, cond, degenerate = chain_rule_batch(frame.T[None], layout, k,
                                                cond_threshold)
    d = layout.d
    source_cols, _ = _lift_map(layout.with_order(max(layout.p, k + 1)), k)
    system = ChainRuleSystem(A=frame.T[:d, :].T.copy(),
                             B=frame.T[source_cols, :].T.copy(),
                             X=X[0], cond=float(cond[0]),
                             degenerate=bool(degenerate[0]))
    return new[0], system


def prolongate_once(cloud: PointCloud, params: GmlsParams, workers: int = 1,
                    cond_threshold: float = COND_THRESHOLD,
                    max_degenerate_fraction: float = MAX_DEGENERATE_FRACTION
                    ) -> ProlongedCloud:
    """Lift a cloud from level k to level k + 1.

    Per point: SVD frame, GMLS refinement, chain rule. Points with a
    degenerate stencil or an ill-conditioned chain rule are dropped.

    Args:
        cloud (PointCloud): cloud at level k < cloud.layout.p.
        params (GmlsParams): GMLS parameters of this stage.
        workers (int, optional): threads for the neighbour search.
        cond_threshold (float, optional): limit on cond(A). Defaults to 1e8.
        max_degenerate_fraction (float, optional): fail above this fraction
            of dropped points. Defaults to 0.01.

    Raises:
        LevelExhaustedError: if the cloud is already at level layout.p.
        DegenerateFractionError: if too many points are degenerate.
    """
    k, layout = cloud.level, cloud.layout
    if k >= layout.p:
        raise LevelExhaustedError(f'level exhausted: cloud is at level {k} and '
                                  f'its layout stops at order {layout.p}.')
    start = time.perf_counter()
    table = knn(cloud, params.k, workers=workers)
    batch = gmls_frames(cloud, table, layout.d, params)
    new, _, cond, bad_chain = chain_rule_batch(batch.T, layout, k,
                                               cond_threshold)
    degenerate = batch.degenerate | bad_chain
    diagnostics = pd.DataFrame({'level': k + 1,
                                'row': np.arange(cloud.n_points),
                                'cond': cond,
                                'chart_cond': batch.chart_cond,
                                'gmls_iterations': batch.iterations,
                                'converged': batch.converged,
                                'degenerate': degenerate})

    n_bad = int(degenerate.sum())
    if n_bad > max_degenerate_fraction * cloud.n_points:
        raise DegenerateFractionError(
            f'{n_bad} of {cloud.n_points} points are degenerate at level '
            f'{k + 1}, above the allowed fraction {max_degenerate_fraction}. '
            f'Degenerate rows: {np.flatnonzero(degenerate)[:20].tolist()}')
    if n_bad > 0:
        logger.warning('Dropping %d degenerate points at level %d.', n_bad,
                       k + 1)
    kept = np.flatnonzero(~degenerate)
    data = np.hstack([cloud.data[kept], new[kept]])
    lifted = PointCloud(data, layout, k + 1, seed=cloud.seed, names=cloud.names,
                        system=cloud.system, check_duplicates=False)
    logger.info('Lifted %d points from level %d to %d.', len(kept), k, k + 1)
    logger.debug('Level %d took %.2f s.', k + 1, time.perf_counter() - start)
    return ProlongedCloud(cloud=lifted, diagnostics=diagnostics, kept=kept)


def prolongate(cloud: PointCloud, p: int, params: GmlsParams, workers: int = 1,
               cond_threshold: float = COND_THRESHOLD,
               max_degenerate_fraction: float = MAX_DEGENERATE_FRACTION
               ) -> ProlongedCloud:
    """Lift a cloud to level p, one level at a time.

    The layout of the returned cloud holds order p. Diagnostics of the
    levels are concatenated; their `row` column refers to the input of the
    level they belong to.

    Raises:
        ValueError: if p is below the current level.
    """
    if p < cloud.level:
        raise ValueError(f'Cannot prolongate a level-{cloud.level} cloud down '
                         f'to level {p}.')
    current = cloud.with_layout_order(max(p, cloud.layout.p))
    kept = np.arange(cloud.n_points)
    reports = []
    while current.level < p:
        step = prolongate_once(current, params, workers=workers,
                               cond_threshold=cond_threshold,
                               max_degenerate_fraction=max_degenerate_fraction)
        reports.append(step.diagnostics)
        kept = kept[step.kept]
        current = step.cloud
    diagnostics = (pd.concat(reports, ignore_index=True) if reports
                   else pd.DataFrame(columns=['level', 'row', 'cond',
                                              'chart_cond', 'gmls_iterations',
                                              'converged', 'degenerate']))
    return ProlongedCloud(cloud=current, diagnostics=diagnostics, kept=kept)
