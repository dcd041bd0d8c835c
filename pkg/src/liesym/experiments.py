"""Benchmark pipelines, reference nullspaces and convergence studies.

Six benchmarks are known by name: the linear ODE u' = u as a family
(`linear_ode`) and on the single curve C = 1 (`linear_ode_fixed`), the
Stuart-Landau oscillator as a family (`stuart_landau`) and on its limit
cycle (`stuart_landau_fixed`), the transport equation on u = sin(t + x)
(`transport`) and the heat equation on its fundamental solution (`heat`).
Every benchmark has a desk-scale parameterisation and a full one
(`full=True`) with the larger sample sizes and trial counts.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from liesym.ansatz import AnsatzBasis, monomial_ansatz, prolong_ansatz
from liesym.errors import LiesymError
from liesym.invariance import (NullityPolicy, SpectralReport, SubspaceAngle,
                               build_system, normals, nullspace,
                               principal_angles, theoretical_rate)
from liesym.jetspace import JetLayout
from liesym.oracles import AnalyticFamily, residual_nullspace_oracle
from liesym.pointcloud import (FamilySpec, PointCloud, family_spec,
                               sample_system, uniform_draws)
from liesym.prolong import (COND_THRESHOLD, MAX_DEGENERATE_FRACTION,
                            prolongate, prolongate_once)
from liesym.systems import load_system
from liesym.tangent import GmlsParams

logger = logging.getLogger(__name__)

BENCHMARKS = ('linear_ode', 'linear_ode_fixed', 'stuart_landau',
              'stuart_landau_fixed', 'transport', 'heat')
# Sizes N = 10 * 2^q.
DESK_CURVE_SIZES = tuple(10 * 2**q for q in range(3, 11))
FULL_CURVE_SIZES = tuple(10 * 2**q for q in range(3, 13))
GRID_SIZES = (56, 80, 113, 160)
DESK_STUART_LANDAU_TRIPLES = ((16, 12, 10), (24, 18, 15), (32, 24, 20),
                              (40, 30, 25))
# Large-scale triples; one to three C1 values only. A single C1 draw fixes C1
# and removes the rotation.
LARGE_STUART_LANDAU_TRIPLES = ((225, 1, 95), (300, 2, 126), (600, 3, 252))
# Grid points per axis of the exact residual nullspace, by dimension d.
ORACLE_POINTS_PER_AXIS = {1: 200, 2: 30, 3: 12}
# Share of stencils a 2-D or 3-D benchmark may drop per GMLS stage.
MULTI_DIM_DEGENERATE_FRACTION = 0.05


@dataclass
class Benchmark:
    """Everything needed to run one experiment.

    Attributes:
        name (str): benchmark name.
        spec (FamilySpec): sampling recipe at the default size.
        prolong_params (GmlsParams): GMLS parameters of the prolongation.
        normal_params (GmlsParams): GMLS parameters of the normal stage.
        degree (int): ansatz degree.
        p (int): prolongation order.
        sizes (tuple): (label, counts) pairs of the convergence study.
        trials (int): trials per size.
        reference_kind (str): 'stated' for a closed-form reference, 'oracle'
            for one computed from exact jet data.
        include_constants (bool): free constants in the ansatz.
        policy (NullityPolicy): nullity detection.
        max_degenerate_fraction (float): allowed fraction of dropped points
            per GMLS stage.
        description (str): one line for reports.
    """
    name: str
    spec: FamilySpec
    prolong_params: GmlsParams
    normal_params: GmlsParams
    degree: int = 1
    p: int = 1
    sizes: Tuple[Tuple[str, Dict[str, int]], ...] = ()
    trials: int = 20
    reference_kind: str = 'stated'
    include_constants: bool = False
    policy: NullityPolicy = field(default_factory=NullityPolicy)
    max_degenerate_fraction: float = MAX_DEGENERATE_FRACTION
    description: str = ''

    def with_counts(self, counts: Dict[str, int]) -> 'Benchmark':
        return replace(self, spec=self.spec.with_counts(**counts))

    def layout(self) -> JetLayout:
        fixed = set(self.spec.fixed) | {a for a, c in self.spec.counts.items()
                                        if c == 1}
        family = AnalyticFamily(self.spec.system,
                                fixed={a: 0. for a in fixed})
        return family.layout(self.p)

    def ansatz(self) -> AnsatzBasis:
        return monomial_ansatz(self.layout(), self.degree,
                               include_constants=self.include_constants)

    def get_properties_str(self) -> str:
        main_string = f'Benchmark: {self.name}\n'
        main_string += '--------------------------------------------\n'
        if self.description:
            main_string += f'{self.description}\n'
        main_string += f'System: {self.spec.system}\n'
        main_string += f'Counts: {self.spec.counts}\n'
        if self.spec.fixed:
            main_string += f'Fixed: {self.spec.fixed}\n'
        main_string += (f'Prolongation: k={self.prolong_params.k}, '
                        f'l={self.prolong_params.degree}, p={self.p}\n')
        main_string += (f'Normals: k={self.normal_params.k}, '
                        f'l={self.normal_params.degree}\n')
        main_string += f'Ansatz degree: {self.degree}\n'
        main_string += (f'Sampling: {self.spec.mode}, nullity policy: '
                        f'{self.policy.to_string()}\n')
        main_string += f'Reference: {self.reference_kind}\n'
        main_string += f'Sizes: {", ".join(label for label, _ in self.sizes)}'
        return main_string

    def print_properties(self) -> None:
        print(self.get_properties_str())


def _curve_sizes(axis: str, values: Sequence[int]):
    return tuple((str(n), {axis: n}) for n in values)


def _grid_sizes(values: Sequence[int]):
    return tuple((str(n), {'t': n, 'x': n}) for n in values)


def _triple_sizes(values):
    return tuple(('x'.join(str(v) for v in triple),
                  dict(zip(('t', 'C1', 'C2'), triple))) for triple in values)


def get_benchmark(name: str, full: bool = False) -> Benchmark:
    """Named benchmark with desk-scale or full parameters.

    Raises:
        ValueError: for an unknown name.
    """
    if name == 'linear_ode':
        sizes = ((('125x250', {'x': 125, 'C': 250}),
                  ('250x500', {'x': 250, 'C': 500}),
                  ('501x1001', {'x': 501, 'C': 1001})) if full else
                 (('25x25', {'x': 25, 'C': 25}), ('50x50', {'x': 50, 'C': 50}),
                  ('100x100', {'x': 100, 'C': 100})))
        return Benchmark(
            name=name,
            spec=family_spec('linear_ode', ranges={'x': (-1., 1.), 'C': (1., 2.)},
                             counts=sizes[-1][1], mode='iid'),
            prolong_params=GmlsParams(k=25, degree=4),
            normal_params=GmlsParams(k=25, degree=3),
            sizes=sizes, trials=1 if full else 20,
            policy=NullityPolicy('gap'),
            max_degenerate_fraction=MULTI_DIM_DEGENERATE_FRACTION,
            description="u' = u, family u = C e^x")
    if name == 'linear_ode_fixed':
        sizes = _curve_sizes('x', FULL_CURVE_SIZES if full else DESK_CURVE_SIZES)
        return Benchmark(
            name=name,
            spec=family_spec('linear_ode', ranges={'x': (-2., 1.)},
                             counts={'x': 1280}, fixed={'C': 1.}),
            prolong_params=GmlsParams(k=10, degree=3),
            normal_params=GmlsParams(k=10, degree=3),
            sizes=sizes, trials=100 if full else 20,
            description="u' = u, single curve u = e^x")
    if name == 'stuart_landau':
        sizes = _triple_sizes(DESK_STUART_LANDAU_TRIPLES)
        return Benchmark(
            name=name,
            spec=family_spec('stuart_landau', counts=sizes[-1][1], mode='iid'),
            prolong_params=GmlsParams(k=50, degree=3),
            normal_params=GmlsParams(k=50, degree=3),
            sizes=sizes, trials=20, policy=NullityPolicy('gap'),
            max_degenerate_fraction=MULTI_DIM_DEGENERATE_FRACTION,
            description='Stuart-Landau oscillator, family in (t, C1, C2)')
    if name == 'stuart_landau_fixed':
        sizes = _curve_sizes('t', FULL_CURVE_SIZES if full
                             else DESK_CURVE_SIZES[:5])
        return Benchmark(
            name=name,
            spec=family_spec('stuart_landau', ranges={'t': (0., 2 * np.pi)},
                             counts={'t': 1280}, fixed={'C1': 0., 'C2': 1.}),
            prolong_params=GmlsParams(k=10, degree=3),
            normal_params=GmlsParams(k=10, degree=3),
            sizes=sizes, trials=20, reference_kind='oracle',
            description='Stuart-Landau oscillator on the unit circle')
    if name == 'transport':
        return Benchmark(
            name=name,
            spec=family_spec('transport', counts={'t': 160, 'x': 160},
                             mode='iid'),
            prolong_params=GmlsParams(k=20, degree=3),
            normal_params=GmlsParams(k=20, degree=3),
            sizes=_grid_sizes(GRID_SIZES), trials=100 if full else 20,
            reference_kind='oracle', policy=NullityPolicy('gap'),
            max_degenerate_fraction=MULTI_DIM_DEGENERATE_FRACTION,
            description='u_t = u_x on u = sin(t + x)')
    if name == 'heat':
        return Benchmark(
            name=name,
            spec=family_spec('heat', counts={'t': 160, 'x': 160}, mode='iid'),
            prolong_params=GmlsParams(k=40, degree=4),
            normal_params=GmlsParams(k=40, degree=4),
            p=2, sizes=_grid_sizes(GRID_SIZES), trials=100 if full else 20,
            reference_kind='oracle', policy=NullityPolicy('gap'),
            max_degenerate_fraction=MULTI_DIM_DEGENERATE_FRACTION,
            description='u_t = u_xx on the fundamental solution')
    raise ValueError(f'Benchmark {name!r} not found. Available benchmarks: '
                     f'{list(BENCHMARKS)}.')


def _unit_vectors(K: int, columns: Sequence[Dict[int, float]]) -> np.ndarray:
    basis = np.zeros((K, len(columns)))
    for j, entries in enumerate(columns):
        for i, value in entries.items():
            basis[i, j] = value
    return basis


def stated_reference(name: str) -> Optional[np.ndarray]:
    """Reference nullspace stated in closed form for a benchmark.

    Returns None for the transport benchmark, whose printed relation
    c1 = c6 = -c1 = -c5 is self-contradictory. The Stuart-Landau limit
    cycle and heat statements differ from the exact nullspaces; see
    `reference_nullspace`.

    Returns:
        np.ndarray: K x r orthonormal basis, or None.
    """
    stated = {'linear_ode': (6, [{0: 1.}, {5: 1.}]),
              'linear_ode_fixed': (6, [{0: 1., 5: 1.}]),
              'stuart_landau': (12, [{0: 1.}, {7: -1., 10: 1.}]),
              'stuart_landau_fixed': (12, [{1: 1., 7: -1., 10: 1.}]),
              'heat': (12, [{1: 2., 6: 1., 11: -2.}])}
    if name not in BENCHMARKS:
        raise ValueError(f'Benchmark {name!r} not found.')
    if name not in stated:
        return None
    K, columns = stated[name]
    Q, _ = np.linalg.qr(_unit_vectors(K, columns))
    return Q


@lru_cache(maxsize=None)
def _oracle_reference(system: str, fixed: Tuple, p: int, degree: int,
                      include_constants: bool) -> np.ndarray:
    family = AnalyticFamily(system, fixed=dict(fixed))
    basis = monomial_ansatz(family.layout(p), degree,
                            include_constants=include_constants)
    n = ORACLE_POINTS_PER_AXIS.get(family.layout(p).d, 10)
    report = residual_nullspace_oracle(family, basis, p, n_per_axis=n)
    logger.info('Oracle reference for %s: nullity %d.', system, report.nullity)
    return report.basis.copy()


def reference_nullspace(benchmark) -> np.ndarray:
    """Ground-truth nullspace of a benchmark, K x r orthonormal.

    Stated references are used for the linear ODE and the Stuart-Landau
    family. The limit cycle, transport and heat references are the exact
    nullspaces of the invariance system on analytic jet data.

    Args:
        benchmark (Benchmark or str): the benchmark.

    Raises:
        ValueError: for an unknown benchmark.
    """
    if isinstance(benchmark, str):
        benchmark = get_benchmark(benchmark)
    if benchmark.reference_kind == 'stated':
        reference = stated_reference(benchmark.name)
        if reference is None:
            raise ValueError(f'No stated reference for {benchmark.name}.')
        return reference
    spec = benchmark.spec
    fixed = tuple(sorted((a, float(v)) for a, v in spec.fixed.items()))
    return _oracle_reference(spec.system, fixed, benchmark.p, benchmark.degree,
                             benchmark.include_constants).copy()


@dataclass
class BenchmarkRun:
    """Outcome of one pipeline run.

    Attributes:
        report (SpectralReport): spectrum and nullspace of P.
        angle (SubspaceAngle): principal angles between the trailing
            singular vectors (as many as the reference has) and the
            reference nullspace.
        diagnostics (pd.DataFrame): per-point prolongation diagnostics.
        basis (AnsatzBasis): the ansatz.
        names (list): base variable names of the cloud.
        n_points (int): number of sampled points.
        runtime_s (float): wall-clock time of the run.
    """
    report: SpectralReport
    angle: SubspaceAngle
    diagnostics: pd.DataFrame
    basis: AnsatzBasis
    names: List[str]
    n_points: int
    runtime_s: float

    def __iter__(self):
        return iter((self.report, self.angle, self.diagnostics))


def discover(cloud: PointCloud, p: int, prolong_params: GmlsParams,
             normal_params: GmlsParams, degree: int = 1,
             include_constants: bool = False,
             policy: Optional[NullityPolicy] = None, workers: int = 1,
             normalize: bool = False, method: str = 'auto',
             cond_threshold: float = COND_THRESHOLD,
             max_degenerate_fraction: float = MAX_DEGENERATE_FRACTION):
    """Run the pipeline on a cloud: prolongate, normals, P and its nullspace.

    A cloud already at level p is used as it is.

    Returns:
        tuple: (SpectralReport, AnsatzBasis, ProlongedCloud).
    """
    lifted = prolongate(cloud, p, prolong_params, workers=workers,
                        cond_threshold=cond_threshold,
                        max_degenerate_fraction=max_degenerate_fraction)
    layout = lifted.cloud.layout.with_order(p)
    basis = monomial_ansatz(layout, degree, include_constants=include_constants)
    bundle = normals(lifted, normal_params, include_constants=include_constants,
                     workers=workers,
                     max_degenerate_fraction=max_degenerate_fraction)
    system = build_system(lifted, prolong_ansatz(basis, layout, p), bundle,
                          normalize=normalize)
    return nullspace(system, policy, method=method), basis, lifted


def run_benchmark(benchmark, seed: int = 0, workers: int = 1) -> BenchmarkRun:
    """Sample, prolongate, build P and compare its nullspace to the reference.

    Args:
        benchmark (Benchmark or str): the benchmark.
        seed (int, optional): sampling seed. Defaults to 0.
        workers (int, optional): threads for the neighbour searches.
    """
    if isinstance(benchmark, str):
        benchmark = get_benchmark(benchmark)
    start = time.perf_counter()
    cloud = sample_system(benchmark.spec.with_seed(seed))
    report, basis, lifted = discover(
        cloud, benchmark.p, benchmark.prolong_params, benchmark.normal_params,
        degree=benchmark.degree, include_constants=benchmark.include_constants,
        policy=benchmark.policy, workers=workers,
        max_degenerate_fraction=benchmark.max_degenerate_fraction)
    reference = reference_nullspace(benchmark)
    if reference.shape[0] != report.K:
        raise ValueError(f'Reference has K={reference.shape[0]}, the ansatz '
                         f'K={report.K}.')
    angle = principal_angles(report.trailing_basis(reference.shape[1]),
                             reference)
    runtime = time.perf_counter() - start
    logger.info('%s (seed %d): nullity %d, ||sin Theta|| = %.3e, %.1f s.',
                benchmark.name, seed, report.nullity, angle.max_sine, runtime)
    return BenchmarkRun(report=report, angle=angle,
                        diagnostics=lifted.diagnostics, basis=basis,
                        names=cloud.names, n_points=cloud.n_points,
                        runtime_s=runtime)


@dataclass
class ConvergenceRow:
    """Trial statistics at one sample size.

    Attributes:
        N (str): size label, e.g. '160' or '40x30x25'.
        n_points (int): number of sampled points.
        trials (int): trials that completed.
        mean_sin_theta (float): mean ||sin Theta||_2.
        std (float): standard deviation over the trials.
        theory_rescaled (float): theoretical rate rescaled to the first row.
        runtime_s (float): mean runtime, NaN unless recorded.
        failed (int): trials that raised.
    """
    N: str
    n_points: int
    trials: int
    mean_sin_theta: float
    std: float
    theory_rescaled: float = float('nan')
    runtime_s: float = float('nan')
    failed: int = 0

    @property
    def partial(self) -> bool:
        return self.failed > 0


@dataclass
class ConvergenceSweep:
    """Rows of a convergence study with the fitted log-log slope."""
    benchmark: str
    rows: List[ConvergenceRow]
    slope: float
    ell: int
    d: int

    def get_dataframe(self) -> pd.DataFrame:
        columns = ['N', 'n_points', 'trials', 'mean_sin_theta', 'std',
                   'theory_rescaled', 'runtime_s']
        return pd.DataFrame([{c: getattr(row, c) for c in columns}
                             for row in self.rows], columns=columns)

    def to_csv(self, path) -> None:
        self.get_dataframe().to_csv(path, index=False, float_format='%.10g',
                                    lineterminator='\n')

    def plot(self, figax: tuple = None):
        return plot_convergence(self, figax=figax)


def rescaled_theory(n_points: Sequence[float], ell: int, d: int,
                    anchor: float) -> np.ndarray:
    """N (log N / N)^(ell/d) scaled to equal `anchor` at the first N."""
    rates = np.array([theoretical_rate(n, ell, d) for n in n_points])
    return rates * anchor / rates[0]


def _trial(benchmark: Benchmark, seed: int, workers: int):
    try:
        run = run_benchmark(benchmark, seed=seed, workers=workers)
        return run.angle.max_sine, run.runtime_s, run.n_points
    except (LiesymError, ValueError, np.linalg.LinAlgError) as err:
        logger.warning('Trial with seed %d of %s failed: %s', seed,
                       benchmark.name, err)
        return float('nan'), float('nan'), 0


def convergence_sweep(benchmark, sizes: Optional[Sequence] = None,
                      trials: Optional[int] = None, seed: int = 0,
                      workers: int = 1, threads: int = 1,
                      record_runtime: bool = False) -> ConvergenceSweep:
    """Mean principal-angle error over trials at increasing sample sizes.

    Trial t of every size uses the seed `seed + t`. Trials run on a thread
    pool and are aggregated in trial order, so the rows do not depend on
    `threads`. Runtimes are wall-clock and only reported with
    `record_runtime`.

    Args:
        benchmark (Benchmark or str): the benchmark.
        sizes (list, optional): (label, counts) pairs, or plain integers for
            curve benchmarks. Defaults to the benchmark's sizes.
        trials (int, optional): trials per size. Defaults to the benchmark's.
        seed (int, optional): base seed. Defaults to 0.
        workers (int, optional): threads of each neighbour search.
        threads (int, optional): concurrent trials. Defaults to 1.
        record_runtime (bool, optional): fill runtime_s. Defaults to False.

    Raises:
        ValueError: if trials < 1.
    """
    if isinstance(benchmark, str):
        benchmark = get_benchmark(benchmark)
    trials = benchmark.trials if trials is None else int(trials)
    if trials < 1:
        raise ValueError(f'A convergence sweep needs at least one trial, got {trials}.')
    sizes = benchmark.sizes if sizes is None else _normalize_sizes(benchmark, sizes)

    rows = []
    for label, counts in sizes:
        sized = benchmark.with_counts(counts)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            results = list(pool.map(lambda t: _trial(sized, seed + t, workers),
                                    range(trials)))
        errors = np.array([r[0] for r in results])
        ok = np.isfinite(errors)
        n_points = max(r[2] for r in results) or int(np.prod(list(counts.values())))
        rows.append(ConvergenceRow(
            N=label, n_points=int(n_points), trials=int(ok.sum()),
            mean_sin_theta=float(np.mean(errors[ok])) if ok.any() else float('nan'),
            std=float(np.std(errors[ok])) if ok.any() else float('nan'),
            runtime_s=(float(np.nanmean([r[1] for r in results]))
                       if record_runtime and ok.any() else float('nan')),
            failed=int((~ok).sum())))
        logger.info('%s N=%s: mean ||sin Theta|| = %.3e over %d trials.',
                    benchmark.name, label, rows[-1].mean_sin_theta, trials)

    ell, d = benchmark.prolong_params.degree, benchmark.layout().d
    finite = [r for r in rows if np.isfinite(r.mean_sin_theta)
              and r.mean_sin_theta > 0]
    if finite:
        theory = rescaled_theory([r.n_points for r in finite], ell, d,
                                 finite[0].mean_sin_theta)
        for row, value in zip(finite, theory):
            row.theory_rescaled = float(value)
    slope = float('nan')
    if len(finite) >= 2:
        slope = float(np.polyfit(np.log([r.n_points for r in finite]),
                                 np.log([r.mean_sin_theta for r in finite]),
                                 1)[0])
    return ConvergenceSweep(benchmark=benchmark.name, rows=rows, slope=slope,
                            ell=ell, d=d)


def _normalize_sizes(benchmark: Benchmark, sizes: Sequence):
    out = []
    sampled = [a for a in load_system(benchmark.spec.system).axes
               if a not in benchmark.spec.fixed]
    for size in sizes:
        if isinstance(size, (int, np.integer)):
            out.append((str(int(size)), {a: int(size) for a in sampled}))
        elif isinstance(size, tuple) and len(size) == 2 and isinstance(size[1], dict):
            out.append((str(size[0]), dict(size[1])))
        else:
            values = tuple(int(v) for v in size)
            if len(values) != len(sampled):
                raise ValueError(f'Size {size} does not match the sampled axes '
                                 f'{sampled}.')
            out.append(('x'.join(map(str, values)), dict(zip(sampled, values))))
    return tuple(out)


def plot_convergence(sweep, figax: tuple = None):
    """Log-log mean error with one standard deviation and the rescaled
    theoretical rate.

    Args:
        sweep (ConvergenceSweep or list): the sweep or its rows.
        figax (tuple, optional): figure and axis objects to draw in.
            Defaults to None.

    Returns:
        tuple: figure and axis objects
    """
    if figax is None:
        fig, ax = plt.subplots(figsize=(6, 4))
    else:
        fig, ax = figax
    rows = sweep.rows if isinstance(sweep, ConvergenceSweep) else list(sweep)
    n = np.array([r.n_points for r in rows], dtype=float)
    mean = np.array([r.mean_sin_theta for r in rows])
    std = np.array([r.std for r in rows])
    theory = np.array([r.theory_rescaled for r in rows])
    ax.errorbar(n, mean, yerr=std, fmt='o-', color='k', capsize=3,
                label='numerical')
    if np.any(np.isfinite(theory)):
        ax.plot(n, theory, '--', color='r', label='theory (rescaled)')
    ax.set_xscale('log')
    ax.set_yscale('log')
    ax.set_xlabel('$N$')
    ax.set_ylabel(r'$\|\sin\Theta\|_2$')
    ax.legend()
    return fig, ax


def derivative_convergence(n_list: Sequence[int] = DESK_CURVE_SIZES,
                           seeds: int = 20, seed: int = 0,
                           params: Optional[GmlsParams] = None
                           ) -> Tuple[pd.DataFrame, float]:
    """Max error of GMLS first derivatives of y = sin(x) on [0, pi].

    Points are drawn i.i.d. uniformly; for each N the maximum over points of
    |y_x - cos x| is averaged over `seeds` draws.

    Returns:
        tuple: (DataFrame with N, mean_max_error, std; fitted log-log slope).
    """
    params = params or GmlsParams(k=10, degree=3)
    rows = []
    for n in n_list:
        errors = []
        for s in range(seeds):
            x = uniform_draws(seed + s, 0, int(n), 0., np.pi)
            cloud = PointCloud.from_arrays(x, np.sin(x), names=['x', 'y'],
                                           seed=seed + s)
            lifted = prolongate_once(cloud.with_layout_order(1), params)
            data = lifted.cloud.data
            errors.append(np.max(np.abs(data[:, 2] - np.cos(data[:, 0]))))
        rows.append({'N': int(n), 'mean_max_error': float(np.mean(errors)),
                     'std': float(np.std(errors))})
    df = pd.DataFrame(rows)
    slope = float(np.polyfit(np.log(df['N']), np.log(df['mean_max_error']), 1)[0])
    return df, slope
