"""Brute-force references for the pipeline.

None of these are used by the discovery pipeline itself: they provide exact
jet data from the closed forms, a prolongation obtained by flowing a
generator and differentiating numerically, and the nullspace of the
invariance system built from exact data. Tests and the reference nullspaces
of the benchmarks rely on them.
"""

import logging
from functools import lru_cache
from math import factorial
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import scipy.linalg
import sympy as sp
from scipy.integrate import solve_ivp
from scipy.optimize import root

from liesym.ansatz import AnsatzBasis, prolong_ansatz
from liesym.invariance import (NullityPolicy, SpectralReport, assemble,
                               nullspace, pointwise_blocks, restrict_normals)
from liesym.jetspace import (JetLayout, add_index, coordinate_offset,
                             jet_dimension)
from liesym.pointcloud import PointCloud
from liesym.prolong import ProlongedCloud
from liesym.systems import DESystem, load_system

logger = logging.getLogger(__name__)

ORACLE_THRESHOLD = 1e-9


class AnalyticFamily():
    """Closed-form family with exact partial derivatives of every order.

    The free axes (true independents and the constants that are not fixed)
    are the augmented independent variables, in the column order used by
    the samplers.
    """

    def __init__(self, system, fixed: Optional[Mapping[str, float]] = None):
        """AnalyticFamily class

        Args:
            system (str or DESystem): the family.
            fixed (dict, optional): values of fixed constants. Defaults to
                the family's default fixed constants.
        """
        self.system: DESystem = load_system(system)
        self.fixed = dict(self.system.default_fixed if fixed is None else fixed)
        self.axes = [a for a in self.system.axes if a not in self.fixed]
        self.n_constants = len([a for a in self.system.constants
                                if a not in self.fixed])
        self.names = self.axes + list(self.system.dependents)

    def layout(self, p: int) -> JetLayout:
        return JetLayout(d=len(self.axes), m=len(self.system.dependents), p=p,
                         n_constants=self.n_constants)

    def _symbols(self):
        symbols = {a: sp.Symbol(a) for a in self.system.axes}
        solution = [expr.subs({symbols[a]: v for a, v in self.fixed.items()})
                    for expr in self.system.sympy_solution(symbols)]
        return [symbols[a] for a in self.axes], solution

    def expressions(self, p: int) -> List[sp.Expr]:
        """u_{b,J} for every dependent coordinate up to order p."""
        return list(_expressions(self, p))

    def evaluate(self, points: np.ndarray, p: int) -> np.ndarray:
        """Dependent coordinates up to order p at N x d points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != len(self.axes):
            raise ValueError(f'Expected points with {len(self.axes)} '
                             f'coordinates ({self.axes}), got {points.shape[1]}.')
        values = {a: points[:, i] for i, a in enumerate(self.axes)}
        values.update({a: np.full(len(points), v) for a, v in self.fixed.items()})
        self.system.check_domain(values)
        columns = _evaluator(self, p)(*points.T)
        return np.column_stack(np.broadcast_arrays(*columns, points[:, 0])[:-1])

    def base(self, x: np.ndarray) -> np.ndarray:
        """u at one point of the augmented independents."""
        return self.evaluate(np.asarray(x, dtype=float)[None], 0)[0]

    def grid(self, n_per_axis: int,
             ranges: Optional[Mapping[str, Sequence[float]]] = None) -> np.ndarray:
        """Regular grid over the default sampling box of the free axes."""
        ranges = {**self.system.default_ranges, **(ranges or {})}
        axes = [np.linspace(*ranges[a], n_per_axis) for a in self.axes]
        return np.column_stack([g.ravel() for g in
                                np.meshgrid(*axes, indexing='ij')])


@lru_cache(maxsize=None)
def _expressions(family: AnalyticFamily, p: int):
    symbols, solution = family._symbols()
    exprs = []
    for b, J in family.layout(p).ordering():
        spec = [(s, k) for s, k in zip(symbols, J) if k]
        exprs.append(sp.diff(solution[b], *spec) if spec else solution[b])
    return tuple(exprs)


@lru_cache(maxsize=None)
def _evaluator(family: AnalyticFamily, p: int):
    symbols, _ = family._symbols()
    return sp.lambdify(symbols, list(_expressions(family, p)), 'numpy')


def analytic_jet(family: AnalyticFamily, points: np.ndarray,
                 p: int) -> ProlongedCloud:
    """Exact jet cloud at level p.

    Args:
        family (AnalyticFamily): the closed form.
        points (np.ndarray): N x d augmented independent values.
        p (int): level.

    Raises:
        ValueError: for points outside the domain of the closed form.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    data = np.hstack([points, family.evaluate(points, p)])
    cloud = PointCloud(data, family.layout(p), level=p, names=family.names,
                       system=family.system.name, check_duplicates=False)
    return ProlongedCloud(cloud=cloud)


def exact_tangents(family: AnalyticFamily, points: np.ndarray,
                   p: int) -> np.ndarray:
    """N x D_p x d exact tangent vectors of the level-p jet manifold.

    Column j is e_j in the independent block plus u_{b,J+e_j} in the
    dependent rows; it needs the order-(p+1) jet.
    """
    layout = family.layout(p)
    upper = family.layout(p + 1)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    jets = family.evaluate(points, p + 1)
    d = layout.d
    T = np.zeros((len(points), jet_dimension(layout), d))
    for j in range(d):
        T[:, j, j] = 1.
        for row, (b, J) in enumerate(layout.ordering(), start=d):
            T[:, row, j] = jets[:, coordinate_offset(upper, b, add_index(J, j)) - d]
    return T


def residual_nullspace_oracle(family: AnalyticFamily, basis: AnsatzBasis,
                              p: int, points: Optional[np.ndarray] = None,
                              n_per_axis: int = 12,
                              threshold: float = ORACLE_THRESHOLD,
                              method: str = 'svd'
                              ) -> SpectralReport:
    """Nullspace of the invariance system assembled from exact jet data.

    Args:
        family (AnalyticFamily): the closed form.
        basis (AnsatzBasis): the ansatz, on `family.layout(p)`.
        p (int): prolongation order.
        points (np.ndarray, optional): N x d evaluation points. Defaults to
            a regular grid over the sampling box.
        n_per_axis (int, optional): grid resolution. Defaults to 12.
        threshold (float, optional): relative nullity threshold.
            Defaults to 1e-9.
        method (str, optional): spectral route passed to `nullspace`.
            Defaults to 'svd'.
    """
    layout = family.layout(p)
    points = family.grid(n_per_axis) if points is None else np.atleast_2d(points)
    jet = analytic_jet(family, points, p).cloud
    T = exact_tangents(family, points, p)
    U, _, _ = np.linalg.svd(T, full_matrices=True)
    S = U[:, :, layout.d:]
    if not basis.include_constants and layout.n_constants > 0:
        S = restrict_normals(S, layout.constant_mask(p))
    L = prolong_ansatz(basis, layout, p).evaluate(jet.data)
    system = assemble(pointwise_blocks(L, S),
                      provenance={'oracle': family.system.name, 'p': p})
    return nullspace(system, NullityPolicy(threshold=threshold), method=method)


def central_weights(order: int, offsets: Sequence[int]) -> np.ndarray:
    """Finite-difference weights for the given derivative order.

    Solves sum_k w_k o_k^j / j! = delta_{j, order} for j < len(offsets).
    """
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    if order >= n:
        raise ValueError(f'{n} offsets cannot resolve derivative order {order}.')
    A = np.array([offsets**j / factorial(j) for j in range(n)])
    rhs = np.zeros(n)
    rhs[order] = 1.
    return np.linalg.solve(A, rhs)


def _stencil(order: int):
    if order == 0:
        return np.array([0]), np.array([1.])
    half = (order + 1) // 2
    offsets = np.arange(-half, half + 1)
    return offsets, central_weights(order, offsets)


def _richardson(values: Sequence[np.ndarray]) -> np.ndarray:
    # Estimates at h, h/2, h/4 with even error expansions.
    table = [np.asarray(v, dtype=float) for v in values]
    power = 4.
    while len(table) > 1:
        table = [(power * fine - coarse) / (power - 1)
                 for coarse, fine in zip(table[:-1], table[1:])]
        power *= 4.
    return table[0]


class _Flow():
    """Flow of a generator of the ansatz on (x, u) space."""

    def __init__(self, c: np.ndarray, basis: AnsatzBasis):
        self.c = np.asarray(c, dtype=float)
        self.basis = basis
        self.dim = basis.layout.d + basis.layout.m
        self.affine = basis.degree <= 1
        if self.affine:
            G = np.zeros((self.dim + 1, self.dim + 1))
            for col in np.flatnonzero(self.c):
                slot, j = basis.split(int(col))
                target = basis.slots[slot]
                exponent = basis.exponents[j]
                if sum(exponent) == 0:
                    G[target, self.dim] += self.c[col]
                else:
                    G[target, basis.variables[int(np.argmax(exponent))]] += self.c[col]
            self.generator_matrix = G

    def field(self, w: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim)
        for col in np.flatnonzero(self.c):
            slot, j = self.basis.split(int(col))
            psi = np.prod([w[v]**k for v, k in
                           zip(self.basis.variables, self.basis.exponents[j])])
            out[self.basis.slots[slot]] += self.c[col] * psi
        return out

    def __call__(self, w: np.ndarray, s: float) -> np.ndarray:
        if s == 0:
            return np.asarray(w, dtype=float).copy()
        if self.affine:
            E = scipy.linalg.expm(s * self.generator_matrix)
            return E[:self.dim, :self.dim] @ w + E[:self.dim, self.dim]
        sol = solve_ivp(lambda _, y: self.field(y), (0., s), w, method='DOP853',
                        rtol=1e-13, atol=1e-13)
        return sol.y[:, -1]


def _transformed_value(flow: _Flow, family: AnalyticFamily, y: np.ndarray,
                       s: float, d: int) -> np.ndarray:
    """u of the transformed solution at the independent point y."""
    def residual(x):
        return flow(np.concatenate([x, family.base(x)]), s)[:d] - y
    guess = y - s * flow.field(np.concatenate([y, family.base(y)]))[:d]
    sol = root(residual, guess, tol=1e-14)
    if not sol.success:
        raise ValueError(f'Could not invert the flow at {y}: {sol.message}')
    return flow(np.concatenate([sol.x, family.base(sol.x)]), s)[d:]


def _transported_jet(flow: _Flow, family: AnalyticFamily, x0: np.ndarray,
                     layout: JetLayout, s: float, h: float) -> np.ndarray:
    d = layout.d
    w = flow(np.concatenate([x0, family.base(x0)]), s)
    y = w[:d]
    out = [w]
    pairs = [(b, J) for b, J in layout.ordering() if sum(J) > 0]
    if not pairs:
        return w
    cache: Dict[tuple, np.ndarray] = {}

    def value(point):
        key = tuple(np.round(point, 15))
        if key not in cache:
            cache[key] = _transformed_value(flow, family, np.array(point), s, d)
        return cache[key]

    derivatives = []
    for b, J in pairs:
        levels = []
        for hh in (h, h / 2, h / 4):
            stencils = [_stencil(k) for k in J]
            total = 0.
            for combo in np.ndindex(*[len(o) for o, _ in stencils]):
                weight = np.prod([wts[i] for (_, wts), i in zip(stencils, combo)])
                shift = np.array([o[i] for (o, _), i in zip(stencils, combo)])
                total += weight * value(y + hh * shift)[b]
            levels.append(total / hh**sum(J))
        derivatives.append(_richardson(levels))
    out.append(np.array(derivatives))
    return np.concatenate(out)


def flow_prolongation_oracle(c: np.ndarray, basis: AnsatzBasis,
                             family: AnalyticFamily, x0: np.ndarray, p: int,
                             s: float = 1e-2, h: float = 5e-2,
                             check_tol: float = 1e-2) -> np.ndarray:
    """Prolonged generator at the exact jet point over x0, by flowing.

    The graph of the closed-form solution is transported by the flow of the
    generator for parameters +-s and +-s/2; the derivatives of the
    transformed solution are taken with central differences in h, h/2, h/4
    and Richardson extrapolation, and the s-derivative of the transported
    jet point is extrapolated the same way.

    Args:
        c (np.ndarray): K generator coefficients.
        basis (AnsatzBasis): ansatz on `family.layout(p)`.
        family (AnalyticFamily): the solution family.
        x0 (np.ndarray): augmented independent values of the base point.
        p (int): prolongation order.
        s (float, optional): flow parameter. Defaults to 1e-2.
        h (float, optional): finite-difference step. Defaults to 5e-2.
        check_tol (float, optional): allowed relative disagreement between
            the s and s/2 estimates. Defaults to 1e-2.

    Returns:
        np.ndarray: D_p components of the prolonged generator.

    Raises:
        ValueError: if s is too large for the Richardson check.
    """
    layout = family.layout(p)
    x0 = np.asarray(x0, dtype=float)
    flow = _Flow(c, basis)

    def estimate(step):
        forward = _transported_jet(flow, family, x0, layout, step, h)
        backward = _transported_jet(flow, family, x0, layout, -step, h)
        return (forward - backward) / (2 * step)

    coarse, fine = estimate(s), estimate(s / 2)
    result = _richardson([coarse, fine])
    scale = max(1., float(np.max(np.abs(result))))
    if np.max(np.abs(fine - coarse)) > check_tol * scale:
        raise ValueError(f'Flow step s={s} is too large: the s and s/2 '
                         'estimates disagree beyond the Richardson check.')
    return result
