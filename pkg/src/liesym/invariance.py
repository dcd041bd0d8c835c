"""Discretised invariance condition c^T P = 0 and its numerical nullspace.

Each point i contributes the block p_i = L_i^T S_i, where L_i is the
prolonged ansatz evaluated at the jet point and S_i holds normals of the
solution manifold. Generators are the left null vectors of the stacked
K x N(D_p - d) matrix P.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import scipy.linalg

from liesym.ansatz import (AnsatzBasis, GeneratorCoefficients,
                           ProlongedAnsatz, render_generator)
from liesym.errors import DegenerateFractionError
from liesym.jetspace import JetLayout
from liesym.neighbors import knn
from liesym.pointcloud import PointCloud
from liesym.prolong import MAX_DEGENERATE_FRACTION, ProlongedCloud
from liesym.tangent import GmlsParams, gmls_frames

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e-5
DEFAULT_GAP_FLOOR = 1e-2
# The Gram route is used when P has more than this many columns per row.
GRAM_COLUMN_FACTOR = 4


@dataclass
class NormalBundle:
    """Normals S_i of the solution manifold at every kept jet point.

    Attributes:
        S (np.ndarray): N x D_p x q orthonormal normal frames.
        T (np.ndarray): N x D_p x d refined tangent frames.
        rows (np.ndarray): row of every frame in the jet cloud it came from.
        layout (JetLayout): layout of the jet cloud.
        restricted (bool): whether the normals were restricted to have no
            component along the free-constant coordinates.
    """
    S: np.ndarray
    T: np.ndarray
    rows: np.ndarray
    layout: JetLayout
    restricted: bool = False

    @property
    def n_points(self) -> int:
        return len(self.S)

    @property
    def n_normals(self) -> int:
        return self.S.shape[2]


def restrict_normals(Nrm: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Normals with zero component along the masked coordinates.

    The result spans the vectors of span(Nrm) orthogonal to every masked
    unit vector, which are the normals of the manifold projected onto the
    unmasked coordinates.

    Args:
        Nrm (np.ndarray): N x D x q orthonormal normal frames.
        mask (np.ndarray): D booleans, the coordinates to remove.

    Returns:
        np.ndarray: N x D x (q - mask.sum()) orthonormal frames.

    Raises:
        ValueError: with "empty normal space" if nothing is left.
    """
    mask = np.asarray(mask, dtype=bool)
    n_c = int(mask.sum())
    q = Nrm.shape[2]
    if q - n_c <= 0:
        raise ValueError(f'empty normal space: {q} normals per point and '
                         f'{n_c} free-constant coordinates to remove.')
    if n_c == 0:
        return Nrm.copy()
    M = Nrm[:, mask, :]
    _, _, Vh = np.linalg.svd(M, full_matrices=True)
    return Nrm @ Vh[:, n_c:, :].transpose(0, 2, 1)


def normals(jet_cloud: Union[ProlongedCloud, PointCloud], params: GmlsParams,
            include_constants: bool = False, workers: int = 1,
            max_degenerate_fraction: float = MAX_DEGENERATE_FRACTION
            ) -> NormalBundle:
    """Refined tangent frames of the jet cloud and their normals.

    When the ansatz does not contain the free constants, the normals are
    restricted to the constant-free coordinates, leaving
    (D_p - d) - n_c of them per point.

    Args:
        jet_cloud (ProlongedCloud or PointCloud): cloud at level p.
        params (GmlsParams): parameters of this stage, which may differ from
            the prolongation ones.
        include_constants (bool, optional): keep the full normal bundle.
            Defaults to False.
        workers (int, optional): threads for the neighbour search.
        max_degenerate_fraction (float, optional): Defaults to 0.01.

    Raises:
        ValueError: "empty normal space" when there are no normals.
        DegenerateFractionError: if too many stencils are degenerate.
    """
    cloud = getattr(jet_cloud, 'cloud', jet_cloud)
    layout = cloud.layout.with_order(cloud.level)
    d, D = layout.d, cloud.dim
    restrict = not include_constants and layout.n_constants > 0
    n_removed = int(layout.constant_mask(cloud.level).sum()) if restrict else 0
    if D - d - n_removed <= 0:
        raise ValueError(f'empty normal space: the jet space has dimension '
                         f'{D}, the manifold {d}, and {n_removed} '
                         'free-constant coordinates are removed.')

    table = knn(cloud, params.k, workers=workers)
    batch = gmls_frames(cloud, table, d, params)
    n_bad = int(batch.degenerate.sum())
    if n_bad > max_degenerate_fraction * cloud.n_points:
        raise DegenerateFractionError(
            f'{n_bad} of {cloud.n_points} normal frames are degenerate, above '
            f'the allowed fraction {max_degenerate_fraction}.')
    if n_bad > 0:
        logger.warning('Dropping %d points with degenerate normal frames.',
                       n_bad)
    kept = np.flatnonzero(~batch.degenerate)
    S = batch.Nrm[kept]
    if restrict:
        S = restrict_normals(S, layout.constant_mask(cloud.level))
    logger.info('Normals: %d points, %d normals each.', len(kept), S.shape[2])
    return NormalBundle(S=S, T=batch.T[kept], rows=kept, layout=layout,
                        restricted=restrict)


def pointwise_block(Li: np.ndarray, Si: np.ndarray) -> np.ndarray:
    """p_i = L_i^T S_i.

    Args:
        Li (np.ndarray): D_p x K evaluated prolonged ansatz.
        Si (np.ndarray): D_p x q normals.

    Returns:
        np.ndarray: K x q block.

    Raises:
        ValueError: on non-conforming shapes.
    """
    Li, Si = np.asarray(Li, dtype=float), np.asarray(Si, dtype=float)
    if Li.ndim != 2 or Si.ndim != 2 or Li.shape[0] != Si.shape[0]:
        raise ValueError(f'Cannot form L^T S from shapes {Li.shape} and '
                         f'{Si.shape}.')
    return Li.T @ Si


def pointwise_blocks(L: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Stacked version of `pointwise_block`: N x K x q from N x D x K and
    N x D x q."""
    L, S = np.asarray(L, dtype=float), np.asarray(S, dtype=float)
    if L.ndim != 3 or S.ndim != 3 or L.shape[:2] != S.shape[:2]:
        raise ValueError(f'Cannot form L^T S from shapes {L.shape} and '
                         f'{S.shape}.')
    return L.transpose(0, 2, 1) @ S


@dataclass
class StackedSystem:
    """Horizontally stacked invariance blocks.

    Attributes:
        P (np.ndarray): K x (sum of block widths) matrix.
        offsets (np.ndarray): first column of every block, plus the total
            width as a final entry.
        provenance (dict): free-form description of where P came from.
    """
    P: np.ndarray
    offsets: np.ndarray
    provenance: Dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.P.shape[0]

    @property
    def n_blocks(self) -> int:
        return len(self.offsets) - 1

    def block(self, i: int) -> np.ndarray:
        return self.P[:, self.offsets[i]:self.offsets[i + 1]]


def assemble(blocks, normalize: bool = False,
             provenance: Optional[Dict] = None) -> StackedSystem:
    """Concatenate the pointwise blocks in point order.

    Args:
        blocks (list or np.ndarray): K x q_i blocks, or an N x K x q array.
        normalize (bool, optional): scale every nonzero column of every block
            to unit norm. Defaults to False.
        provenance (dict, optional): recorded on the result.

    Raises:
        ValueError: with no blocks or blocks of different K.
    """
    blocks = [np.asarray(b, dtype=float) for b in blocks]
    if len(blocks) == 0:
        raise ValueError('Cannot assemble an invariance system from no blocks.')
    Ks = {b.shape[0] if b.ndim == 2 else -1 for b in blocks}
    if len(Ks) != 1 or -1 in Ks:
        raise ValueError(f'Blocks must all be K x q matrices with the same K, '
                         f'got row counts {sorted(Ks)}.')
    if normalize:
        scaled = []
        for b in blocks:
            norms = np.linalg.norm(b, axis=0)
            scaled.append(b / np.where(norms > 0, norms, 1.))
        blocks = scaled
    widths = np.array([b.shape[1] for b in blocks])
    offsets = np.concatenate([[0], np.cumsum(widths)])
    return StackedSystem(P=np.hstack(blocks), offsets=offsets,
                         provenance=dict(provenance or {}))


def build_system(jet_cloud: Union[ProlongedCloud, PointCloud],
                 prolonged: ProlongedAnsatz, bundle: NormalBundle,
                 normalize: bool = False) -> StackedSystem:
    """Evaluate the prolonged ansatz at the kept jet points and assemble P."""
    cloud = getattr(jet_cloud, 'cloud', jet_cloud)
    if cloud.dim != prolonged.shape[0]:
        raise ValueError(f'The jet cloud has {cloud.dim} coordinates, the '
                         f'prolonged ansatz {prolonged.shape[0]} rows.')
    L = prolonged.evaluate(cloud.data[bundle.rows])
    blocks = pointwise_blocks(L, bundle.S)
    provenance = {'n_points': int(bundle.n_points),
                  'normals_per_point': int(bundle.n_normals),
                  'K': int(prolonged.basis.K),
                  'degree': int(prolonged.basis.degree),
                  'p': int(prolonged.p),
                  'seed': cloud.seed}
    return assemble(blocks, normalize=normalize, provenance=provenance)


@dataclass
class NullityPolicy:
    """How the nullity is read off a spectrum.

    Attributes:
        kind (str): 'threshold' (sigma_i < threshold * sigma_1), 'gap'
            (largest log-gap among the singular values below floor * sigma_1)
            or 'fixed'.
        threshold (float): relative threshold. Defaults to 1e-5.
        floor (float): relative floor of the gap policy. Defaults to 1e-2.
        nullity (int, optional): nullity of the fixed policy.
    """
    kind: str = 'threshold'
    threshold: float = DEFAULT_THRESHOLD
    floor: float = DEFAULT_GAP_FLOOR
    nullity: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ('threshold', 'gap', 'fixed'):
            raise ValueError(f'Unknown nullity policy {self.kind!r}. Use '
                             "'threshold', 'gap' or 'fixed'.")
        if self.kind == 'fixed' and (self.nullity is None or self.nullity < 0):
            raise ValueError('The fixed policy needs a non-negative nullity.')
        if self.threshold <= 0 or self.floor <= 0:
            raise ValueError('Threshold and floor must be positive.')

    @classmethod
    def from_string(cls, text: str, threshold: float = DEFAULT_THRESHOLD
                    ) -> 'NullityPolicy':
        """Parse 'threshold', 'gap' or 'fixed:<r>'."""
        if text.startswith('fixed'):
            _, _, r = text.partition(':')
            if not r.strip().isdigit():
                raise ValueError(f"Fixed policy needs 'fixed:<r>', got {text!r}.")
            return cls(kind='fixed', nullity=int(r), threshold=threshold)
        return cls(kind=text, threshold=threshold)

    def to_string(self) -> str:
        return f'fixed:{self.nullity}' if self.kind == 'fixed' else self.kind

    def detect(self, sigma: np.ndarray) -> int:
        K = len(sigma)
        if self.kind == 'fixed':
            if self.nullity > K:
                raise ValueError(f'Fixed nullity {self.nullity} exceeds K={K}.')
            return int(self.nullity)
        if self.kind == 'threshold':
            return int(np.sum(sigma < self.threshold * sigma[0]))
        tiny = np.finfo(float).tiny
        logs = np.log(np.maximum(sigma, tiny))
        candidates = [j for j in range(K - 1)
                      if sigma[j + 1] < self.floor * sigma[0]]
        if len(candidates) == 0:
            return 0
        j = max(candidates, key=lambda i: logs[i] - logs[i + 1])
        return K - (j + 1)


def canonical_basis(basis: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """A readable basis of the same span.

    Pivoted QR picks r well-conditioned coordinates; the basis is then
    reduced so those coordinates form an identity block, and every column
    is normalised with a positive first significant entry. For span{e0, e5}
    this returns e0 and e5 instead of an arbitrary rotation.

    Args:
        basis (np.ndarray): K x r basis.
        tol (float, optional): entries below it are set to zero.

    Returns:
        np.ndarray: K x r basis with unit columns (not orthogonal in general).
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] == 0:
        return basis.reshape(len(basis), -1).copy()
    r = basis.shape[1]
    _, _, piv = scipy.linalg.qr(basis.T, pivoting=True, mode='economic')
    pivots = np.sort(piv[:r])
    reduced = basis @ np.linalg.inv(basis[pivots])
    reduced[np.abs(reduced) < tol] = 0.
    reduced /= np.linalg.norm(reduced, axis=0, keepdims=True)
    for j in range(r):
        significant = np.flatnonzero(np.abs(reduced[:, j]) > tol)
        if len(significant) > 0 and reduced[significant[0], j] < 0:
            reduced[:, j] *= -1
    return reduced


@dataclass
class SpectralReport:
    """Singular spectrum of P and its detected nullspace.

    Attributes:
        singular_values (np.ndarray): K values, non-increasing, padded with
            zeros when P has fewer than K columns.
        vectors (np.ndarray): K x K left singular vectors in the same order.
        nullity (int): detected r.
        policy (NullityPolicy): the policy used.
        gap_ratio (float): sigma_{K-r} / sigma_{K-r+1}, NaN for r = 0 or K.
        method (str): 'gram' or 'svd'.
        degenerate (bool): P is identically zero.
    """
    singular_values: np.ndarray
    vectors: np.ndarray
    nullity: int
    policy: NullityPolicy
    gap_ratio: float
    method: str
    degenerate: bool = False

    @property
    def K(self) -> int:
        return len(self.singular_values)

    @property
    def threshold(self) -> float:
        return self.policy.threshold

    @property
    def basis(self) -> np.ndarray:
        """K x r orthonormal basis of the detected nullspace."""
        return self.trailing_basis(self.nullity)

    def trailing_basis(self, r: int) -> np.ndarray:
        """Singular vectors of the r smallest singular values."""
        if not 0 <= r <= self.K:
            raise ValueError(f'Cannot take {r} trailing vectors out of {self.K}.')
        return self.vectors[:, self.K - r:]

    def generators(self, ansatz: AnsatzBasis) -> List[GeneratorCoefficients]:
        """Canonical generator coefficients spanning the nullspace."""
        canon = canonical_basis(self.basis)
        return [GeneratorCoefficients.from_vector(canon[:, j], ansatz)
                for j in range(canon.shape[1])]

    def render(self, ansatz: AnsatzBasis,
               names: Optional[Sequence[str]] = None) -> List[str]:
        """Rendered generators, one string each."""
        return [render_generator(g, ansatz, names=names)
                for g in self.generators(ansatz)]

    def get_spectrum_df(self) -> pd.DataFrame:
        """One row per singular value: index, sigma, relative, in_nullspace."""
        sigma = self.singular_values
        with np.errstate(divide='ignore', invalid='ignore'):
            relative = sigma / sigma[0] if sigma[0] > 0 else np.full(self.K, np.nan)
        return pd.DataFrame({'index': np.arange(1, self.K + 1),
                             'sigma': sigma,
                             'relative': relative,
                             'in_nullspace': np.arange(self.K) >= self.K - self.nullity})

    def to_csv(self, path) -> None:
        self.get_spectrum_df().to_csv(path, index=False, float_format='%.17g',
                                      lineterminator='\n')

    def get_properties_str(self) -> str:
        main_string = 'Spectral report\n'
        main_string += '--------------------------------------------\n'
        main_string += f'K: {self.K}\n'
        main_string += f'Method: {self.method}\n'
        main_string += f'Policy: {self.policy.to_string()} (threshold {self.threshold:.1e})\n'
        main_string += f'Nullity: {self.nullity}\n'
        main_string += f'Gap ratio: {self.gap_ratio:.4g}\n'
        main_string += 'Singular values: ' + ', '.join(
            f'{s:.3e}' for s in self.singular_values)
        if self.degenerate:
            main_string += '\nWARNING: P is identically zero.'
        return main_string

    def print_properties(self) -> None:
        """Print the spectrum summary
        """
        print(self.get_properties_str())

    def plot_spectrum(self, figax: tuple = None):
        """Semilog plot of the relative singular values with the threshold.

        Args:
            figax (tuple, optional): figure and axis objects to draw in.
                Defaults to None.

        Returns:
            tuple: figure and axis objects
        """
        if figax is None:
            fig, ax = plt.subplots(figsize=(6, 4))
        else:
            fig, ax = figax
        df = self.get_spectrum_df()
        inside = df['in_nullspace']
        ax.semilogy(df['index'][~inside], df['relative'][~inside], 'o',
                    color='C0', label='range')
        ax.semilogy(df['index'][inside], df['relative'][inside], 'o',
                    color='C3', label='nullspace')
        if self.policy.kind == 'threshold':
            ax.axhline(self.threshold, color='k', ls='--', lw=1,
                       label='threshold')
        ax.set_xlabel('$i$')
        ax.set_ylabel(r'$\sigma_i / \sigma_1$')
        ax.legend()
        return fig, ax

    def plot_nullspace(self, figax: tuple = None, canonical: bool = True):
        """Bar plot of the nullspace basis vectors.

        Args:
            figax (tuple, optional): figure and axis objects to draw in.
                Defaults to None.
            canonical (bool, optional): plot the canonical basis instead of
                the singular vectors. Defaults to True.

        Returns:
            tuple: figure and axis objects
        """
        if figax is None:
            fig, ax = plt.subplots(figsize=(6, 4))
        else:
            fig, ax = figax
        basis = canonical_basis(self.basis) if canonical else self.basis
        r = basis.shape[1]
        width = 0.8 / max(r, 1)
        for j in range(r):
            ax.bar(np.arange(self.K) + (j - (r - 1) / 2) * width, basis[:, j],
                   width=width, label=f'generator {j + 1}')
        ax.set_xticks(np.arange(self.K))
        ax.set_xticklabels([f'$c_{{{i}}}$' for i in range(self.K)])
        ax.axhline(0, color='k', lw=0.5)
        if r > 0:
            ax.legend()
        return fig, ax


def _spectrum(P: np.ndarray, method: str):
    K, cols = P.shape
    if method == 'auto':
        method = 'gram' if cols > GRAM_COLUMN_FACTOR * K else 'svd'
    if method == 'gram':
        # P^T = Q R, so P P^T = R^T R and P shares its spectrum and left
        # singular vectors with R^T
        R = np.linalg.qr(P.T, mode='r')
        _, s, Vh = np.linalg.svd(R, full_matrices=True)
        sigma = np.zeros(K)
        sigma[:len(s)] = s
        return sigma, Vh.T, method
    if method == 'svd':
        U, s, _ = np.linalg.svd(P, full_matrices=True)
        sigma = np.zeros(K)
        sigma[:len(s)] = s
        return sigma, U, method
    raise ValueError(f"Unknown nullspace method {method!r}. Use 'auto', "
                     "'gram' or 'svd'.")


def nullspace(system: Union[StackedSystem, np.ndarray],
              policy: Optional[NullityPolicy] = None,
              method: str = 'auto') -> SpectralReport:
    """Numerical left nullspace of P.

    Args:
        system (StackedSystem or np.ndarray): P, K x columns.
        policy (NullityPolicy, optional): Defaults to a relative threshold
            of 1e-5.
        method (str, optional): 'gram' (SVD of the K x K triangular factor
            R of the Gram matrix P P^T = R^T R, from a QR of P^T), 'svd'
            (direct SVD) or 'auto', which takes the Gram route when P has
            more than 4K columns.

    Returns:
        SpectralReport: spectrum, nullity and singular vectors.
    """
    P = np.asarray(getattr(system, 'P', system), dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise ValueError(f'P must be a non-empty K x columns matrix, got shape '
                         f'{P.shape}.')
    policy = policy or NullityPolicy()
    sigma, vectors, method = _spectrum(P, method)
    K = len(sigma)
    degenerate = not sigma[0] > 0
    if degenerate:
        logger.warning('P is identically zero: every ansatz field passes the '
                       'invariance test, the input is degenerate.')
        nullity = K
    else:
        nullity = policy.detect(sigma)
    if 0 < nullity < K:
        with np.errstate(divide='ignore'):
            gap_ratio = float(sigma[K - nullity - 1] / sigma[K - nullity])
    else:
        gap_ratio = float('nan')
    logger.info('Nullspace: nullity %d of K=%d (gap ratio %.3g).', nullity, K,
                gap_ratio)
    return SpectralReport(singular_values=sigma, vectors=vectors,
                          nullity=int(nullity), policy=policy,
                          gap_ratio=gap_ratio, method=method,
                          degenerate=degenerate)


@dataclass
class SubspaceAngle:
    """Principal angles between two subspaces.

    Attributes:
        sines (np.ndarray): sines of the principal angles, non-decreasing.
    """
    sines: np.ndarray

    @property
    def max_sine(self) -> float:
        """||sin Theta||_2."""
        return float(self.sines[-1]) if len(self.sines) > 0 else 0.


def principal_angles(U: np.ndarray, V: np.ndarray) -> SubspaceAngle:
    """Sines of the principal angles between span(U) and span(V).

    Cosines are the singular values of U^T V; the sines are computed from
    the component of V orthogonal to U, which keeps small angles accurate.

    Args:
        U (np.ndarray): K x r orthonormal basis.
        V (np.ndarray): K x r orthonormal basis.

    Raises:
        ValueError: if the shapes differ.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float).T).T
    V = np.atleast_2d(np.asarray(V, dtype=float).T).T
    if U.shape != V.shape:
        raise ValueError(f'Subspaces of shapes {U.shape} and {V.shape} cannot '
                         'be compared.')
    if U.shape[1] == 0:
        return SubspaceAngle(sines=np.zeros(0))
    residual = V - U @ (U.T @ V)
    sines = np.linalg.svd(residual, compute_uv=False)[:U.shape[1]]
    return SubspaceAngle(sines=np.sort(np.clip(sines, 0., 1.)))


def theoretical_rate(N: float, ell: int, d: int) -> float:
    """Reference convergence curve N (log N / N)^(ell / d).

    Raises:
        ValueError: if N < 2.
    """
    if N < 2:
        raise ValueError(f'The rate needs N >= 2, got {N}.')
    return float(N * (np.log(N) / N)**(ell / d))
