"""Scattered samples of a solution manifold, synthetic benchmark families
and the liesym CSV format.
"""

import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from liesym.errors import CSVFormatError
from liesym.jetspace import (JetLayout, MultiIndex, coordinate_names,
                             default_names, jet_dimension)
from liesym.systems import load_system

logger = logging.getLogger(__name__)

CSV_MAGIC = '# liesym v1'


class RoleKind(Enum):
    INDEPENDENT = 'independent'
    FREE_CONSTANT = 'free_constant'
    DEPENDENT = 'dependent'
    JET = 'jet'


_TOKEN_PATTERNS = [
    (RoleKind.INDEPENDENT, re.compile(r'^x(\d+)$')),
    (RoleKind.FREE_CONSTANT, re.compile(r'^C(\d+)$')),
    (RoleKind.DEPENDENT, re.compile(r'^u(\d+)$')),
    (RoleKind.JET, re.compile(r'^u(\d+)_J\((\d+(?:,\d+)*)\)$')),
]


@dataclass(frozen=True)
class ColumnRole:
    """Role of one column of a point cloud.

    `index` is zero-based within its kind; for jet columns it is the
    dependent variable and `J` the multi-index.
    """
    kind: RoleKind
    index: int
    J: MultiIndex = ()

    @property
    def token(self) -> str:
        if self.kind == RoleKind.INDEPENDENT:
            return f'x{self.index + 1}'
        if self.kind == RoleKind.FREE_CONSTANT:
            return f'C{self.index + 1}'
        if self.kind == RoleKind.DEPENDENT:
            return f'u{self.index + 1}'
        return f'u{self.index + 1}_J({",".join(str(j) for j in self.J)})'

    @classmethod
    def from_token(cls, token: str) -> 'ColumnRole':
        token = token.strip()
        for kind, pattern in _TOKEN_PATTERNS:
            match = pattern.match(token)
            if match is None:
                continue
            index = int(match.group(1)) - 1
            if index < 0:
                break
            if kind == RoleKind.JET:
                J = tuple(int(j) for j in match.group(2).split(','))
                return cls(kind, index, J)
            return cls(kind, index)
        raise CSVFormatError(f'Unknown column role token {token!r}.')


def roles_for_layout(layout: JetLayout, level: int) -> List[ColumnRole]:
    """Column roles of a cloud with this layout at the given level."""
    roles = [ColumnRole(RoleKind.INDEPENDENT, i) for i in range(layout.n)]
    roles += [ColumnRole(RoleKind.FREE_CONSTANT, i)
              for i in range(layout.n_constants)]
    for b, J in layout.ordering(level):
        if sum(J) == 0:
            roles.append(ColumnRole(RoleKind.DEPENDENT, b))
        else:
            roles.append(ColumnRole(RoleKind.JET, b, J))
    return roles


def find_duplicate_rows(data: np.ndarray) -> np.ndarray:
    """Indices of every row that occurs more than once."""
    duplicated = pd.DataFrame(data).duplicated(keep=False).to_numpy()
    return np.flatnonzero(duplicated)


class PointCloud():
    """Class to represent N samples of a (prolonged) solution manifold."""

    def __init__(self, data: np.ndarray, layout: JetLayout, level: int = 0,
                 roles: Optional[List[ColumnRole]] = None,
                 seed: Optional[int] = None,
                 names: Optional[Sequence[str]] = None,
                 system: Optional[str] = None,
                 check_duplicates: bool = True):
        """PointCloud class

        Args:
            data (np.ndarray): N x D_level matrix of samples.
            layout (JetLayout): jet layout the columns follow.
            level (int, optional): current prolongation level. Defaults to 0.
            roles (list, optional): column roles; derived from the layout
                when omitted and checked against it otherwise.
            seed (int, optional): generator seed, kept for provenance.
            names (list, optional): d + m display names of the base
                variables. Defaults to generic names.
            system (str, optional): name of the generating family, if any.
            check_duplicates (bool, optional): reject repeated rows.
                Defaults to True.

        Raises:
            ValueError: on shape or role mismatches and duplicated rows.
        """
        data = np.asarray(data, dtype=float)
        if data.ndim != 2:
            raise ValueError(f'Point cloud data must be 2-D, got shape {data.shape}.')
        layout.check_level(level)
        D = jet_dimension(layout, level)
        if data.shape[1] != D:
            raise ValueError(f'Layout d={layout.d}, m={layout.m} at level {level} '
                             f'has {D} columns, data has {data.shape[1]}.')
        expected = roles_for_layout(layout, level)
        if roles is not None and list(roles) != expected:
            raise ValueError('Column roles do not follow the jet layout: got '
                             f'{[r.token for r in roles]}, expected '
                             f'{[r.token for r in expected]}.')
        if check_duplicates:
            duplicates = find_duplicate_rows(data)
            if len(duplicates) > 0:
                raise ValueError('Point cloud rows must be pairwise distinct. '
                                 f'Duplicated rows: {duplicates.tolist()}')

        self.data = data
        self.layout = layout
        self.level = level
        self.roles = expected
        self.seed = seed
        self.names = list(names) if names is not None else default_names(layout)
        if len(self.names) != layout.d + layout.m:
            raise ValueError(f'Expected {layout.d + layout.m} variable names, '
                             f'got {self.names}.')
        self.system = system

    @classmethod
    def from_arrays(cls, independent: np.ndarray, dependent: np.ndarray,
                    constants: Optional[np.ndarray] = None,
                    names: Optional[Sequence[str]] = None,
                    **kwargs) -> 'PointCloud':
        """Build a level-0 cloud from separate column blocks.

        Args:
            independent (np.ndarray): N or N x n true independent values.
            dependent (np.ndarray): N or N x m dependent values.
            constants (np.ndarray, optional): N or N x c free constants.
            names (list, optional): base variable names.
        """
        blocks = [np.asarray(independent, dtype=float).reshape(len(independent), -1)]
        n_constants = 0
        if constants is not None:
            constants = np.asarray(constants, dtype=float).reshape(len(constants), -1)
            n_constants = constants.shape[1]
            blocks.append(constants)
        dependent = np.asarray(dependent, dtype=float).reshape(len(dependent), -1)
        blocks.append(dependent)
        d = blocks[0].shape[1] + n_constants
        layout = JetLayout(d=d, m=dependent.shape[1], p=0, n_constants=n_constants)
        return cls(np.hstack(blocks), layout, level=0, names=names, **kwargs)

    @property
    def n_points(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @property
    def d(self) -> int:
        return self.layout.d

    @property
    def m(self) -> int:
        return self.layout.m

    @property
    def column_names(self) -> List[str]:
        return coordinate_names(self.layout, self.names, self.level)

    @property
    def tokens(self) -> List[str]:
        return [role.token for role in self.roles]

    def independent_block(self) -> np.ndarray:
        """N x d block of the augmented independent variables."""
        return self.data[:, :self.layout.d]

    def with_layout_order(self, p: int) -> 'PointCloud':
        """Same samples under a layout allowing prolongation up to order p."""
        if p < self.level:
            raise ValueError(f'Cannot set order {p} below the current level '
                             f'{self.level}.')
        return PointCloud(self.data, self.layout.with_order(p), self.level,
                          seed=self.seed, names=self.names, system=self.system,
                          check_duplicates=False)

    def select_rows(self, rows: np.ndarray) -> 'PointCloud':
        """New cloud made of the given rows, in the given order."""
        return PointCloud(self.data[np.asarray(rows, dtype=int)], self.layout,
                          self.level, seed=self.seed, names=self.names,
                          system=self.system, check_duplicates=False)

    def drop_rows(self, indices) -> Tuple['PointCloud', np.ndarray]:
        """Remove rows.

        Returns:
            tuple: (reduced cloud, original indices of the rows kept).
        """
        keep = np.setdiff1d(np.arange(self.n_points),
                            np.asarray(indices, dtype=int))
        return self.select_rows(keep), keep

    def to_dataframe(self) -> pd.DataFrame:
        """Samples as a pandas DataFrame with readable column names."""
        return pd.DataFrame(self.data, columns=self.column_names)

    def get_properties_str(self) -> str:
        main_string = f'Point cloud: {self.system or "user data"}\n'
        main_string += '--------------------------------------------\n'
        main_string += f'Points: {self.n_points}\n'
        main_string += f'Columns: {", ".join(self.column_names)}\n'
        main_string += (f'Independent variables (d): {self.layout.d} '
                        f'({self.layout.n_constants} free constants)\n')
        main_string += f'Dependent variables (m): {self.layout.m}\n'
        main_string += f'Level: {self.level} of {self.layout.p}\n'
        main_string += f'Seed: {self.seed}'
        return main_string

    def print_properties(self) -> None:
        """Print the main properties of the point cloud
        """
        print(self.get_properties_str())


@dataclass
class FamilySpec:
    """Sampling recipe of a closed-form solution family.

    Attributes:
        system (str): library name of the family.
        ranges (dict): (low, high) per sampled axis.
        counts (dict): number of draws per sampled axis.
        fixed (dict): value per fixed integration constant.
        seed (int, optional): generator seed.
        mode (str): 'grid' for a tensor product of per-axis draws, 'iid'
            for independent rows (as many as the grid would have).
    """
    system: str
    ranges: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    fixed: Dict[str, float] = field(default_factory=dict)
    seed: Optional[int] = 0
    mode: str = 'grid'

    def with_seed(self, seed: Optional[int]) -> 'FamilySpec':
        return replace(self, seed=seed)

    def with_counts(self, **counts) -> 'FamilySpec':
        return replace(self, counts={**self.counts, **counts})


def family_spec(system: str, ranges: Optional[Dict] = None,
                counts: Optional[Dict] = None, fixed: Optional[Dict] = None,
                seed: Optional[int] = 0, mode: str = 'grid') -> FamilySpec:
    """FamilySpec filled with the family's defaults, then the overrides."""
    des = load_system(system)
    fixed = {**des.default_fixed, **(fixed or {})}
    return FamilySpec(system=system,
                      ranges={**des.default_ranges, **(ranges or {})},
                      counts={**des.default_counts, **(counts or {})},
                      fixed=fixed, seed=seed, mode=mode)


def uniform_draws(seed: Optional[int], axis_id: int, n: int, low: float,
                  high: float) -> np.ndarray:
    """n uniform draws on [low, high) from the Philox stream keyed by
    (seed, axis_id). Draw i depends only on the key and i.
    """
    key = np.random.SeedSequence(None if seed is None else [seed, axis_id])
    generator = np.random.Generator(np.random.Philox(key))
    return generator.uniform(low, high, n)


def sample_family(spec: FamilySpec) -> PointCloud:
    """Sample a closed-form family into a level-0 point cloud.

    Columns are the true independents, the free constants and the
    dependents. A constant with count 1 is drawn once and then treated as
    fixed.

    Raises:
        ValueError: on invalid ranges, counts or values outside the domain
            of the closed form.
    """
    system = load_system(spec.system)
    system.check_sampling_params(spec.ranges, spec.counts, spec.fixed)
    if spec.mode not in ('grid', 'iid'):
        raise ValueError(f'Sampling mode must be "grid" or "iid", got {spec.mode!r}.')

    fixed = {a: float(v) for a, v in spec.fixed.items()}
    sampled = []
    for axis_id, axis in enumerate(system.axes):
        if axis in fixed:
            continue
        count = int(spec.counts[axis])
        lo, hi = spec.ranges[axis]
        if count < 1:
            raise ValueError(f'Axis {axis} needs at least one sample, got {count}.')
        if not lo < hi:
            raise ValueError(f'Empty range [{lo}, {hi}] for sampled axis {axis}.')
        if axis in system.constants and count == 1:
            fixed[axis] = float(uniform_draws(spec.seed, axis_id, 1, lo, hi)[0])
            logger.info('Constant %s has a single sample and is fixed at %.6g.',
                        axis, fixed[axis])
            continue
        sampled.append((axis_id, axis, count, lo, hi))

    values = {}
    if spec.mode == 'grid':
        draws = [uniform_draws(spec.seed, axis_id, count, lo, hi)
                 for axis_id, _, count, lo, hi in sampled]
        for (_, axis, *_), grid in zip(sampled,
                                       np.meshgrid(*draws, indexing='ij')):
            values[axis] = grid.ravel()
    else:
        n_rows = int(np.prod([count for _, _, count, _, _ in sampled]))
        for axis_id, axis, _, lo, hi in sampled:
            values[axis] = uniform_draws(spec.seed, axis_id, n_rows, lo, hi)
    values.update(fixed)
    system.check_domain(values)

    free = [a for a in system.constants if a not in fixed]
    columns = [values[a] for a in system.independents + tuple(free)]
    data = np.column_stack(columns + [system.evaluate(values)])
    layout = JetLayout(d=len(system.independents) + len(free),
                       m=len(system.dependents), p=0, n_constants=len(free))
    names = list(system.independents) + free + list(system.dependents)
    logger.info('Sampled %d points of %s (d=%d, m=%d).', len(data),
                system.name, layout.d, layout.m)
    return PointCloud(data, layout, level=0, seed=spec.seed, names=names,
                      system=system.name)


def _check_system(spec: FamilySpec, expected: str) -> None:
    if load_system(spec.system).name != expected:
        raise ValueError(f'Expected a {expected} family spec, got {spec.system!r}.')


def sample_linear_ode(spec: FamilySpec) -> PointCloud:
    """Sample u = C e^x; d = 2 with C free, d = 1 with C fixed."""
    _check_system(spec, 'linear_ode')
    return sample_family(spec)


def sample_stuart_landau(spec: FamilySpec) -> PointCloud:
    """Sample the Stuart-Landau general solution in (t, [C1], [C2], x, y)."""
    _check_system(spec, 'stuart_landau')
    return sample_family(spec)


def sample_transport(spec: FamilySpec) -> PointCloud:
    """Sample u = sin(t + x)."""
    _check_system(spec, 'transport')
    return sample_family(spec)


def sample_heat(spec: FamilySpec) -> PointCloud:
    """Sample the heat kernel (4 pi t)^(-1/2) exp(-x^2/(4t))."""
    _check_system(spec, 'heat')
    return sample_family(spec)


def sample_system(spec: FamilySpec) -> PointCloud:
    """Dispatch a spec to the sampler of its family."""
    samplers = {'linear_ode': sample_linear_ode,
                'stuart_landau': sample_stuart_landau,
                'transport': sample_transport,
                'heat': sample_heat}
    name = load_system(spec.system).name
    if name not in samplers:
        return sample_family(spec)
    return samplers[name](spec)


def _header_line(cloud: PointCloud) -> str:
    layout = cloud.layout
    return (f'{CSV_MAGIC}; d={layout.d}; m={layout.m}; p={layout.p}; '
            f'level={cloud.level}; names={",".join(cloud.names)}'
            + ('' if cloud.seed is None else f'; seed={cloud.seed}'))


def save_csv(cloud: PointCloud, path) -> None:
    """Write a cloud in the liesym CSV format.

    The first line holds the layout, the second the role tokens, then one
    row per point with 17 significant digits.
    """
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(_header_line(cloud) + '\n')
        f.write(','.join(cloud.tokens) + '\n')
        pd.DataFrame(cloud.data).to_csv(f, header=False, index=False,
                                        float_format='%.17g',
                                        lineterminator='\n')


def _parse_header(line: str) -> Dict[str, str]:
    if not line.startswith(CSV_MAGIC):
        raise CSVFormatError(f'Malformed header, expected it to start with '
                             f'{CSV_MAGIC!r}: {line.strip()!r}')
    items = {}
    for item in line[len(CSV_MAGIC):].split(';'):
        item = item.strip()
        if not item:
            continue
        if '=' not in item:
            raise CSVFormatError(f'Malformed header entry {item!r}.')
        key, value = item.split('=', 1)
        items[key.strip()] = value.strip()
    missing = [key for key in ('d', 'm', 'p', 'level') if key not in items]
    if len(missing) > 0:
        raise CSVFormatError(f'Malformed header, missing keys: {missing}')
    return items


def load_csv(path) -> PointCloud:
    """Read a cloud written by `save_csv`.

    Raises:
        CSVFormatError: on malformed headers, unknown role tokens, ragged or
            duplicated rows and files without data.
    """
    with open(path, 'r', encoding='utf-8') as f:
        header = f.readline()
        token_line = f.readline().strip()
    items = _parse_header(header)
    try:
        d, m, p, level = (int(items[key]) for key in ('d', 'm', 'p', 'level'))
    except ValueError:
        raise CSVFormatError(f'Non-integer layout entries in header: {items}')

    tokens = re.split(r',(?![^()]*\))', token_line) if token_line else []
    roles = [ColumnRole.from_token(token) for token in tokens]
    n_constants = sum(role.kind == RoleKind.FREE_CONSTANT for role in roles)
    try:
        layout = JetLayout(d=d, m=m, p=p, n_constants=n_constants)
        D = jet_dimension(layout, level)
    except ValueError as e:
        raise CSVFormatError(f'Inconsistent layout in header: {e}')
    if roles != roles_for_layout(layout, level):
        raise CSVFormatError(f'Role tokens {tokens} do not match the layout '
                             f'd={d}, m={m}, level={level}.')

    try:
        frame = pd.read_csv(path, skiprows=2, header=None,
                            float_precision='round_trip')
    except pd.errors.EmptyDataError:
        raise CSVFormatError(f'{path} holds no data rows.')
    except pd.errors.ParserError as e:
        raise CSVFormatError(f'Ragged rows in {path}: {e}')
    if frame.shape[1] != D:
        raise CSVFormatError(f'Expected {D} columns, found {frame.shape[1]}.')
    ragged = np.flatnonzero(frame.isna().any(axis=1).to_numpy())
    if len(ragged) > 0:
        raise CSVFormatError(f'Ragged or incomplete rows: {ragged.tolist()}')
    try:
        data = frame.to_numpy(dtype=float)
    except ValueError:
        raise CSVFormatError(f'Non-numeric values in {path}.')
    duplicates = find_duplicate_rows(data)
    if len(duplicates) > 0:
        raise CSVFormatError(f'Duplicated rows: {duplicates.tolist()}')

    names = items['names'].split(',') if 'names' in items else None
    seed = int(items['seed']) if 'seed' in items else None
    return PointCloud(data, layout, level, seed=seed, names=names,
                      check_duplicates=False)
