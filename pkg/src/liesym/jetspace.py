"""Multi-index algebra and coordinate layout of jet spaces.

A jet point at level k is laid out as

    (x_1, ..., x_n, C_1, ..., C_c, u_1, ..., u_m, level-1 block, ..., level-k block)

where the first d = n + c columns are the (augmented) independent variables
and the block of level r lists, for every dependent variable u_b, the
derivatives u_{b,J} with |J| = r in graded-lexicographic order of J.
Offsets of level k are a prefix of the offsets of level k + 1.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np

MultiIndex = Tuple[int, ...]


@lru_cache(maxsize=None)
def _multi_indices(d: int, r: int) -> Tuple[MultiIndex, ...]:
    if d == 1:
        return ((r,),)
    indices = []
    for first in range(r, -1, -1):
        for rest in _multi_indices(d - 1, r - first):
            indices.append((first,) + rest)
    return tuple(indices)


def multi_indices(d: int, r: int) -> List[MultiIndex]:
    """All multi-indices of order exactly r over d variables.

    The list is in graded-lexicographic order, so for d=2 and r=2 it is
    [(2, 0), (1, 1), (0, 2)]. Its length is C(d+r-1, r).

    Args:
        d (int): number of variables, at least 1.
        r (int): order of the multi-indices, at least 0.

    Returns:
        list: the multi-indices as tuples of length d.

    Raises:
        ValueError: if d < 1 or r < 0.
    """
    if int(d) != d or d < 1:
        raise ValueError(f'Number of variables must be a positive integer, got {d}.')
    if int(r) != r or r < 0:
        raise ValueError(f'Order must be a non-negative integer, got {r}.')
    return list(_multi_indices(int(d), int(r)))


def index_order(J: MultiIndex) -> int:
    """Order |J| of a multi-index."""
    return int(sum(J))


def unit_index(d: int, j: int) -> MultiIndex:
    """Multi-index e_j over d variables."""
    return tuple(1 if i == j else 0 for i in range(d))


def add_index(J: MultiIndex, j: int) -> MultiIndex:
    """Multi-index J + e_j."""
    return tuple(v + 1 if i == j else v for i, v in enumerate(J))


@dataclass(frozen=True)
class JetLayout:
    """Coordinate bookkeeping of a jet space.

    Attributes:
        d (int): number of effective independent variables, free constants
            included.
        m (int): number of dependent variables.
        p (int): highest prolongation order the layout holds.
        n_constants (int): how many of the d independent columns are free
            integration constants. They are the last ones of the block.
    """
    d: int
    m: int
    p: int = 0
    n_constants: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f'A jet layout needs d >= 1, got d={self.d}.')
        if self.m < 1:
            raise ValueError(f'A jet layout needs m >= 1, got m={self.m}.')
        if self.p < 0:
            raise ValueError(f'Prolongation order must be >= 0, got p={self.p}.')
        if not 0 <= self.n_constants < self.d:
            raise ValueError(
                'The number of free constants must leave at least one true '
                f'independent variable, got n_constants={self.n_constants} '
                f'with d={self.d}.')

    @property
    def n(self) -> int:
        """Number of true independent variables."""
        return self.d - self.n_constants

    def with_order(self, p: int) -> 'JetLayout':
        """Same layout holding prolongations up to order p."""
        return JetLayout(self.d, self.m, p, self.n_constants)

    def check_level(self, k: int) -> None:
        if not 0 <= k <= self.p:
            raise ValueError(
                f'Level {k} is out of range for a layout of order {self.p}.')

    def ordering(self, k: Optional[int] = None) -> List[Tuple[int, MultiIndex]]:
        """(dependent index, J) pairs of every dependent coordinate up to level k.

        The pairs follow the column order of a jet point, starting with the
        undifferentiated dependents (J = 0).
        """
        k = self.p if k is None else k
        self.check_level(k)
        return list(_ordering(self.d, self.m, k))

    def level_ordering(self, r: int) -> List[Tuple[int, MultiIndex]]:
        """(dependent index, J) pairs with |J| = r, in column order."""
        return [(b, J) for b in range(self.m) for J in multi_indices(self.d, r)]

    def level_slice(self, r: int) -> slice:
        """Columns holding the coordinates of order exactly r.

        Order 0 refers to the dependent variables themselves.
        """
        self.check_level(r)
        start = self.d if r == 0 else jet_dimension(self, r - 1)
        return slice(start, jet_dimension(self, r))

    def constant_mask(self, k: Optional[int] = None) -> np.ndarray:
        """Boolean mask of the columns tied to free constants at level k.

        A column is tied to the constants when it is a free constant itself
        or a derivative u_{b,J} whose J differentiates along a constant.
        """
        k = self.p if k is None else k
        mask = np.zeros(jet_dimension(self, k), dtype=bool)
        if self.n_constants == 0:
            return mask
        mask[self.n:self.d] = True
        for offset, (_, J) in enumerate(self.ordering(k), start=self.d):
            if any(J[self.n:]):
                mask[offset] = True
        return mask


@lru_cache(maxsize=None)
def _ordering(d: int, m: int, k: int) -> Tuple[Tuple[int, MultiIndex], ...]:
    pairs = [(b, (0,) * d) for b in range(m)]
    for r in range(1, k + 1):
        pairs += [(b, J) for b in range(m) for J in _multi_indices(d, r)]
    return tuple(pairs)


@lru_cache(maxsize=None)
def _offset_table(d: int, m: int, k: int) -> Dict[Tuple[int, MultiIndex], int]:
    return {pair: d + i for i, pair in enumerate(_ordering(d, m, k))}


def jet_dimension(layout: JetLayout, k: Optional[int] = None) -> int:
    """Ambient dimension D_k of the jet space at level k.

    D_k = d + m + sum_{r=1..k} C(d+r-1, r) m.

    Args:
        layout (JetLayout): the jet layout.
        k (int, optional): level. Defaults to layout.p.

    Raises:
        ValueError: if k is outside [0, layout.p].
    """
    k = layout.p if k is None else k
    layout.check_level(k)
    return layout.d + layout.m + sum(
        comb(layout.d + r - 1, r) * layout.m for r in range(1, k + 1))


def coordinate_offset(layout: JetLayout, dependent_index: int,
                      J: MultiIndex) -> int:
    """Column of u_{b,J} inside a jet point of this layout.

    Args:
        layout (JetLayout): the jet layout.
        dependent_index (int): b, zero-based.
        J (tuple): multi-index of length layout.d with |J| <= layout.p.

    Returns:
        int: the column offset.

    Raises:
        ValueError: if the pair does not exist in the layout.
    """
    key = (int(dependent_index), tuple(int(j) for j in J))
    table = _offset_table(layout.d, layout.m, layout.p)
    if key not in table:
        raise ValueError(
            f'Unknown coordinate (u{key[0] + 1}, J={key[1]}) for a layout with '
            f'd={layout.d}, m={layout.m}, p={layout.p}.')
    return table[key]


def coordinate_at(layout: JetLayout, offset: int) -> Tuple[int, MultiIndex]:
    """Inverse of `coordinate_offset`.

    Raises:
        ValueError: if the offset belongs to the independent block or lies
            outside the layout.
    """
    pairs = _ordering(layout.d, layout.m, layout.p)
    if not layout.d <= offset < layout.d + len(pairs):
        raise ValueError(
            f'Offset {offset} does not hold a dependent coordinate of a layout '
            f'with d={layout.d}, m={layout.m}, p={layout.p}.')
    return pairs[offset - layout.d]


def coordinate_names(layout: JetLayout, names: Optional[List[str]] = None,
                     k: Optional[int] = None) -> List[str]:
    """Readable names of every column, like ['t', 'x', 'u', 'u_t', 'u_x'].

    Args:
        layout (JetLayout): the jet layout.
        names (list, optional): d + m base names (independents, constants,
            dependents). Generic names are used when omitted.
        k (int, optional): level. Defaults to layout.p.
    """
    names = list(names) if names is not None else default_names(layout)
    if len(names) != layout.d + layout.m:
        raise ValueError(
            f'Expected {layout.d + layout.m} base names, got {len(names)}.')
    indep, dep = names[:layout.d], names[layout.d:]
    out = list(indep)
    for b, J in layout.ordering(k):
        suffix = ''.join(indep[j] * J[j] for j in range(layout.d))
        out.append(f'{dep[b]}_{suffix}' if suffix else dep[b])
    return out


def default_names(layout: JetLayout) -> List[str]:
    """Generic base names: x or x1.., C or C1.., u or u1.."""
    def numbered(stem, count):
        return [stem] if count == 1 else [f'{stem}{i + 1}' for i in range(count)]
    names = numbered('x', layout.n)
    if layout.n_constants:
        names += numbered('C', layout.n_constants)
    return names + numbered('u', layout.m)
