"""Tangent and normal frames of point clouds.

Frames start from the SVD of the neighbour differences and are refined by
iterated polynomial charts (GMLS): fit the normal displacements as a
polynomial of the tangent coordinates, tilt the frame by the fitted slope at
the base point, re-orthonormalise and refit until the slope vanishes.

The batched routines work on stacks of stencils with numpy's stacked linear
algebra; the single-point functions are thin wrappers over them.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Optional, Tuple

import numpy as np

from liesym.errors import DegenerateStencilError
from liesym.jetspace import MultiIndex, multi_indices
from liesym.neighbors import NeighborTable

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-12
CHUNK_POINTS = 2048
CHART_COND_THRESHOLD = 1e6
# Sine of the angle between the SVD tangent and the refined one.
MAX_FRAME_DRIFT = 0.5


@dataclass
class GmlsParams:
    """Parameters of a GMLS stage.

    Attributes:
        k (int): stencil size, the point itself included.
        degree (int): polynomial degree of the local charts.
        stop_tol (float): refinement stops once ||Dpi(0)||_2 <= stop_tol.
        max_iter (int): refinement cap; frames still moving are flagged.
        refine (bool): iterate the charts. Without it the SVD frame is kept.
        chart_cond (float): stencils whose scaled Vandermonde matrix has a
            larger condition number are degenerate.
    """
    k: int = 20
    degree: int = 4
    stop_tol: float = 1e-12
    max_iter: int = 20
    refine: bool = True
    chart_cond: float = CHART_COND_THRESHOLD

    def n_basis(self, d: int) -> int:
        """Number Y = C(degree + d, d) of chart monomials."""
        return comb(self.degree + d, d)

    def validate(self, d: int) -> None:
        """Check the parameters for a manifold of dimension d.

        Raises:
            ValueError: if k <= C(degree + d, d), if refinement is asked with
                degree < 2, if max_iter < 1 or if chart_cond <= 1.
        """
        if self.degree < 0:
            raise ValueError(f'Chart degree must be >= 0, got {self.degree}.')
        Y = self.n_basis(d)
        if self.k <= Y:
            raise ValueError(f'Stencil size k={self.k} must exceed '
                             f'C(l+d, d) = {Y} for degree l={self.degree} '
                             f'and d={d}.')
        if not self.chart_cond > 1:
            raise ValueError(f'chart_cond must be > 1, got {self.chart_cond}.')
        if self.refine and self.degree < 2:
            raise ValueError('GMLS refinement needs a chart degree of at least '
                             f'2, got {self.degree}.')
        if self.max_iter < 1:
            raise ValueError(f'max_iter must be >= 1, got {self.max_iter}.')


@dataclass
class TangentFrame:
    """Orthonormal tangent (T, D x d) and normal (Nrm, D x (D-d)) bases at
    one point of a cloud."""
    T: np.ndarray
    Nrm: np.ndarray
    base_index: int
    singular_values: Optional[np.ndarray] = None
    degenerate: bool = False
    converged: bool = True


@lru_cache(maxsize=None)
def chart_basis(d: int, degree: int) -> Tuple[MultiIndex, ...]:
    """Exponents of the chart monomials, graded-lex, all orders <= degree."""
    return tuple(J for r in range(degree + 1) for J in multi_indices(d, r))


@dataclass
class LocalChart:
    """Polynomial graph s = pi(tau) of the manifold over a tangent frame.

    Attributes:
        coeffs (np.ndarray): Y x (D-d) coefficients, one row per monomial
            of `chart_basis(d, degree)`.
        degree (int): polynomial degree.
        d (int): number of tangent coordinates.
        residual (float): least-squares residual of the fit.
        scale (float): stencil radius used to condition the fit.
        base_index (int): row of the cloud the chart belongs to.
    """
    coeffs: np.ndarray
    degree: int
    d: int
    residual: float = 0.0
    scale: float = 1.0
    base_index: int = -1

    @property
    def exponents(self) -> Tuple[MultiIndex, ...]:
        return chart_basis(self.d, self.degree)

    def evaluate(self, tau: np.ndarray) -> np.ndarray:
        """Chart value pi(tau) for one tau (d,) or a stack (..., d)."""
        tau = np.asarray(tau, dtype=float)
        return vandermonde(tau, self.exponents) @ self.coeffs


def vandermonde(tau: np.ndarray, exponents) -> np.ndarray:
    """Monomials tau^gamma for every exponent, on the last axis."""
    E = np.asarray(exponents, dtype=float)
    return np.prod(tau[..., None, :] ** E, axis=-1)


def chart_jacobian(chart: LocalChart, tau) -> np.ndarray:
    """Analytic Jacobian Dpi(tau), a (D-d) x d matrix.

    At tau = 0 it equals the transposed degree-1 block of the coefficients.
    """
    tau = np.asarray(tau, dtype=float).reshape(chart.d)
    E = np.asarray(chart.exponents, dtype=float)
    jac = np.zeros((chart.coeffs.shape[1], chart.d))
    for j in range(chart.d):
        lowered = E.copy()
        lowered[:, j] -= 1
        has_j = E[:, j] > 0
        lowered[~has_j] = 0
        weights = np.where(has_j, E[:, j] * np.prod(tau ** lowered, axis=1), 0.)
        jac[:, j] = weights @ chart.coeffs
    return jac


def _stencil_differences(data: np.ndarray, table: NeighborTable,
                         rows: np.ndarray) -> np.ndarray:
    return data[table.indices[rows]] - data[rows][:, None, :]


def _svd_init(diffs: np.ndarray, d: int):
    U, s, _ = np.linalg.svd(diffs.transpose(0, 2, 1), full_matrices=True)
    degenerate = ~(s[:, d - 1] > RANK_RTOL * s[:, 0])
    return U[:, :, :d].copy(), U[:, :, d:].copy(), s, degenerate


def _fit_charts(diffs: np.ndarray, T: np.ndarray, Nrm: np.ndarray,
                exponents, max_cond: float = CHART_COND_THRESHOLD):
    """Least-squares charts of a stack of stencils, solved by QR.

    tau is divided by the stencil radius h before building the Vandermonde
    matrix and the coefficients are rescaled by h^-|gamma| afterwards. A
    stencil is usable when the scaled matrix has a condition number below
    `max_cond`.

    Returns:
        tuple: (coeffs, residual, ok, h, cond).
    """
    tau = diffs @ T
    s = diffs @ Nrm
    h = np.max(np.linalg.norm(tau, axis=2), axis=1)
    h = np.where(h > 0, h, 1.)
    V = vandermonde(tau / h[:, None, None], exponents)
    sv = np.linalg.svd(V, compute_uv=False)
    with np.errstate(divide='ignore', invalid='ignore'):
        cond = np.where(sv[:, -1] > RANK_RTOL * sv[:, 0], sv[:, 0] / sv[:, -1],
                        np.inf)
    ok = cond < max_cond

    n, Y, codim = len(diffs), len(exponents), s.shape[2]
    coeffs = np.full((n, Y, codim), np.nan)
    residual = np.full(n, np.nan)
    if np.any(ok):
        Q, R = np.linalg.qr(V[ok])
        scaled = np.linalg.solve(R, Q.transpose(0, 2, 1) @ s[ok])
        residual[ok] = np.linalg.norm(s[ok] - V[ok] @ scaled, axis=(1, 2))
        orders = np.asarray([sum(g) for g in exponents], dtype=float)
        coeffs[ok] = scaled / h[ok][:, None, None] ** orders[None, :, None]
    return coeffs, residual, ok, h, cond


@dataclass
class FrameBatch:
    """Frames and charts of many points of one cloud.

    Arrays are indexed like `rows`. Charts are NaN for degenerate points.
    """
    rows: np.ndarray
    T: np.ndarray
    Nrm: np.ndarray
    coeffs: np.ndarray
    singular_values: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    degenerate: np.ndarray
    chart_cond: Optional[np.ndarray] = None

    def frame(self, j: int) -> TangentFrame:
        return TangentFrame(T=self.T[j], Nrm=self.Nrm[j],
                            base_index=int(self.rows[j]),
                            singular_values=self.singular_values[j],
                            degenerate=bool(self.degenerate[j]),
                            converged=bool(self.converged[j]))


def _gmls_chunk(diffs: np.ndarray, d: int, params: GmlsParams):
    n, _, D = diffs.shape
    exponents = chart_basis(d, params.degree)
    T, Nrm, sv, degenerate = _svd_init(diffs, d)
    coeffs = np.full((n, len(exponents), D - d), np.nan)
    residual = np.full(n, np.nan)
    iterations = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    chart_cond = np.full(n, np.nan)
    if D == d:
        converged[~degenerate] = True
        return (T, Nrm, coeffs, sv, residual, iterations, converged, degenerate,
                chart_cond)

    initial_normals = Nrm.copy()
    active = np.flatnonzero(~degenerate)
    for it in range(1, params.max_iter + 1):
        if len(active) == 0:
            break
        B, res, ok, _, cond = _fit_charts(diffs[active], T[active],
                                          Nrm[active], exponents,
                                          params.chart_cond)
        chart_cond[active] = cond
        degenerate[active[~ok]] = True
        active, B, res = active[ok], B[ok], res[ok]
        coeffs[active], residual[active], iterations[active] = B, res, it
        if len(active) == 0:
            break
        if not params.refine:
            converged[active] = True
            break

        slope = B[:, 1:d + 1, :].transpose(0, 2, 1)
        done = np.linalg.norm(slope, ord=2, axis=(1, 2)) <= params.stop_tol
        converged[active[done]] = True
        active, slope = active[~done], slope[~done]
        if it == params.max_iter or len(active) == 0:
            break
        Q, _ = np.linalg.qr(T[active] + Nrm[active] @ slope, mode='complete')
        T[active], Nrm[active] = Q[:, :, :d], Q[:, :, d:]

    fitted = np.flatnonzero(~degenerate)
    if len(fitted) > 0:
        drift = np.linalg.norm(initial_normals[fitted].transpose(0, 2, 1)
                               @ T[fitted], ord=2, axis=(1, 2))
        degenerate[fitted[drift > MAX_FRAME_DRIFT]] = True
    return (T, Nrm, coeffs, sv, residual, iterations, converged, degenerate,
            chart_cond)


def gmls_frames(cloud, table: NeighborTable, d: int, params: GmlsParams,
                rows: Optional[np.ndarray] = None) -> FrameBatch:
    """Refined frames and charts for many points.

    Only points whose chart slope is still above the tolerance are
    iterated. Points whose stencil has rank below d, whose scaled
    Vandermonde matrix has a condition number above `params.chart_cond`
    or whose refined tangent turned away from the SVD one by more than
    MAX_FRAME_DRIFT (as a sine) are marked degenerate.

    Args:
        cloud (PointCloud or np.ndarray): the samples.
        table (NeighborTable): neighbours of every row of the cloud.
        d (int): manifold dimension.
        params (GmlsParams): stage parameters.
        rows (np.ndarray, optional): rows to process. Defaults to all.

    Returns:
        FrameBatch: frames, charts and per-point diagnostics.
    """
    data = np.asarray(getattr(cloud, 'data', cloud), dtype=float)
    params.validate(d)
    if table.k > len(data) or table.k != params.k:
        raise ValueError(f'Neighbour table has k={table.k}, parameters ask '
                         f'for k={params.k}.')
    rows = np.arange(len(data)) if rows is None else np.asarray(rows, dtype=int)
    if len(rows) == 0:
        raise ValueError('No rows to build frames for.')
    parts = []
    for start in range(0, len(rows), CHUNK_POINTS):
        chunk = rows[start:start + CHUNK_POINTS]
        parts.append(_gmls_chunk(_stencil_differences(data, table, chunk),
                                 d, params))
    (T, Nrm, coeffs, sv, residual, iterations, converged, degenerate,
     chart_cond) = (np.concatenate(arrays) for arrays in zip(*parts))

    unconverged = int(np.sum(~converged & ~degenerate))
    if params.refine and unconverged > 0:
        logger.warning('%d of %d frames did not reach ||Dpi(0)|| <= %.1e in '
                       '%d iterations.', unconverged, len(rows),
                       params.stop_tol, params.max_iter)
    if np.any(degenerate):
        logger.warning('%d of %d stencils are degenerate.',
                       int(np.sum(degenerate)), len(rows))
    return FrameBatch(rows=rows, T=T, Nrm=Nrm, coeffs=coeffs,
                      singular_values=sv, residual=residual,
                      iterations=iterations, converged=converged,
                      degenerate=degenerate, chart_cond=chart_cond)


def svd_frame(cloud, table: NeighborTable, i: int, d: int) -> TangentFrame:
    """First-order frame of row i from the SVD of its neighbour differences.

    A stencil whose differences have rank below d is flagged degenerate; the
    caller may retry with a larger k.

    Raises:
        ValueError: if table.k <= d.
    """
    if table.k <= d:
        raise ValueError(f'A frame of dimension {d} needs k > {d} neighbours, '
                         f'got k={table.k}.')
    data = np.asarray(getattr(cloud, 'data', cloud), dtype=float)
    diffs = _stencil_differences(data, table, np.array([i]))
    T, Nrm, s, degenerate = _svd_init(diffs, d)
    return TangentFrame(T=T[0], Nrm=Nrm[0], base_index=i,
                        singular_values=s[0], degenerate=bool(degenerate[0]))


def fit_chart(frame: TangentFrame, cloud, table: NeighborTable, i: int,
              params: GmlsParams) -> LocalChart:
    """Least-squares polynomial chart of row i over the given frame.

    Raises:
        DegenerateStencilError: if the Vandermonde matrix of the stencil is
            ill-conditioned (above `params.chart_cond`).
    """
    data = np.asarray(getattr(cloud, 'data', cloud), dtype=float)
    d = frame.T.shape[1]
    exponents = chart_basis(d, params.degree)
    if table.k <= len(exponents):
        raise ValueError(f'k={table.k} neighbours cannot determine '
                         f'{len(exponents)} chart coefficients.')
    diffs = _stencil_differences(data, table, np.array([i]))
    coeffs, residual, ok, h, cond = _fit_charts(
        diffs, frame.T[None], frame.Nrm[None], exponents, params.chart_cond)
    if not ok[0]:
        raise DegenerateStencilError(
            f'Ill-conditioned Vandermonde matrix (cond {cond[0]:.3g}) for the '
            f'stencil of row {i} (k={table.k}, degree={params.degree}); '
            'increase k or check the data.')
    return LocalChart(coeffs=coeffs[0], degree=params.degree, d=d,
                      residual=float(residual[0]), scale=float(h[0]),
                      base_index=i)


def gmls_refine(cloud, table: NeighborTable, i: int, d: int,
                params: GmlsParams) -> Tuple[TangentFrame, LocalChart, int]:
    """Refined frame and chart of row i.

    Returns:
        tuple: (frame, chart fitted in that frame, number of chart fits).
            frame.converged is False when max_iter was reached.

    Raises:
        DegenerateStencilError: if the stencil cannot support the fit.
    """
    batch = gmls_frames(cloud, table, d, params, rows=np.array([i]))
    if batch.degenerate[0]:
        raise DegenerateStencilError(f'Degenerate stencil at row {i} '
                                     f'(k={table.k}).')
    chart = LocalChart(coeffs=batch.coeffs[0], degree=params.degree, d=d,
                       residual=float(batch.residual[0]), base_index=i)
    return batch.frame(0), chart, int(batch.iterations[0])

