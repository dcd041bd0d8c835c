"""Polynomial ansatz for infinitesimal generators and its prolongation.

A generator X = sum_a xi_a d/dx_a + sum_b eta_b d/du_b is written in a
shared basis psi_1..psi_kappa of monomials in (x, u):
xi_a = sum_j c[a*kappa + j] psi_j and eta_b = sum_j c[(n+b)*kappa + j] psi_j.
The prolongation of the basis fields is computed exactly over polynomials in
the jet coordinates with rational coefficients.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from liesym.errors import OrderOverflowError
from liesym.jetspace import (JetLayout, MultiIndex, add_index, coordinate_at,
                             coordinate_names, coordinate_offset,
                             default_names, jet_dimension, multi_indices,
                             unit_index)

logger = logging.getLogger(__name__)

Monomial = Tuple[Tuple[int, int], ...]
PRINT_THRESHOLD = 1e-8


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


def _merge(a: Monomial, b: Monomial) -> Monomial:
    powers = dict(a)
    for var, k in b:
        powers[var] = powers.get(var, 0) + k
    return tuple(sorted(powers.items()))


class JetPolynomial():
    """Sparse polynomial over jet coordinates with rational coefficients.

    Variables are column offsets of a jet layout. Monomials are stored as
    sorted ((variable, power), ...) tuples; the empty tuple is the constant
    monomial. Zero coefficients are never stored.

    Example:
        {((2, 1),): 1, ((1, 1), (2, 2)): -1} is u_x - u u_x^2 on the
        layout (x, u, u_x).
    """

    def __init__(self, terms: Optional[Dict[Monomial, Fraction]] = None):
        self.terms: Dict[Monomial, Fraction] = {}
        for monomial, coeff in (terms or {}).items():
            coeff = _as_fraction(coeff)
            if coeff != 0:
                key = tuple(sorted((int(v), int(k)) for v, k in monomial if k))
                self.terms[key] = self.terms.get(key, Fraction(0)) + coeff
        self.terms = {k: v for k, v in self.terms.items() if v != 0}

    @classmethod
    def constant(cls, value) -> 'JetPolynomial':
        return cls({(): value})

    @classmethod
    def variable(cls, index: int, power: int = 1) -> 'JetPolynomial':
        return cls({((index, power),): 1})

    @classmethod
    def monomial(cls, powers: Dict[int, int], coeff=1) -> 'JetPolynomial':
        return cls({tuple(powers.items()): coeff})

    @staticmethod
    def _lift(other) -> 'JetPolynomial':
        if isinstance(other, JetPolynomial):
            return other
        if isinstance(other, Number):
            return JetPolynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for monomial, coeff in other.terms.items():
            terms[monomial] = terms.get(monomial, Fraction(0)) + coeff
        return JetPolynomial(terms)

    __radd__ = __add__

    def __neg__(self):
        return JetPolynomial({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        terms: Dict[Monomial, Fraction] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = _merge(a, b)
                terms[key] = terms.get(key, Fraction(0)) + ca * cb
        return JetPolynomial(terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return len(self.terms) > 0

    def __repr__(self):
        return f'JetPolynomial({self.to_text()})'

    @property
    def is_zero(self) -> bool:
        return len(self.terms) == 0

    def variables(self) -> List[int]:
        """Sorted list of the variables the polynomial depends on."""
        return sorted({v for monomial in self.terms for v, _ in monomial})

    def degree(self) -> int:
        if self.is_zero:
            return 0
        return max(sum(k for _, k in monomial) for monomial in self.terms)

    def coefficient(self, powers: Union[Monomial, Dict[int, int]]) -> Fraction:
        """Coefficient of a monomial, zero if absent."""
        items = powers.items() if isinstance(powers, dict) else powers
        key = tuple(sorted((int(v), int(k)) for v, k in items if k))
        return self.terms.get(key, Fraction(0))

    def diff(self, var: int) -> 'JetPolynomial':
        """Partial derivative with respect to one variable."""
        terms = {}
        for monomial, coeff in self.terms.items():
            powers = dict(monomial)
            k = powers.get(var, 0)
            if k == 0:
                continue
            if k == 1:
                del powers[var]
            else:
                powers[var] = k - 1
            key = tuple(sorted(powers.items()))
            terms[key] = terms.get(key, Fraction(0)) + coeff * k
        return JetPolynomial(terms)

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Terms in graded order of their monomials."""
        return sorted(self.terms.items(),
                      key=lambda t: (sum(k for _, k in t[0]), t[0]))

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """Numeric value at one jet point (shape (D,)) or many (N x D)."""
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape[:-1])
        for monomial, coeff in self.terms.items():
            value = np.full(z.shape[:-1], float(coeff))
            for var, k in monomial:
                value = value * z[..., var]**k
            out = out + value
        return out

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        """Text like `u_x - 2 * u u_x^2`.

        Args:
            names (list, optional): name of every variable offset. Defaults
                to z0, z1, ...
        """
        if self.is_zero:
            return '0'
        out = ''
        for i, (monomial, coeff) in enumerate(self.sorted_terms()):
            factors = ' '.join(
                (names[v] if names is not None else f'z{v}') +
                (f'^{k}' if k > 1 else '') for v, k in monomial)
            magnitude = abs(coeff)
            if not factors:
                term = str(magnitude)
            elif magnitude == 1:
                term = factors
            else:
                term = f'{magnitude} * {factors}'
            if i == 0:
                out = f'-{term}' if coeff < 0 else term
            else:
                out += f' - {term}' if coeff < 0 else f' + {term}'
        return out


def _ring(layout: JetLayout, extended: bool) -> JetLayout:
    return layout.with_order(layout.p + 1) if extended else layout


def total_derivative(f: JetPolynomial, i: int, layout: JetLayout,
                     extended: bool = False) -> JetPolynomial:
    """Total derivative D_i f = df/dx_i + sum_{b,J} u_{b,J+e_i} df/du_{b,J}.

    Args:
        f (JetPolynomial): polynomial over the coordinates of `layout`.
        i (int): independent variable, 0 <= i < layout.d.
        layout (JetLayout): the ring the result must live in.
        extended (bool, optional): admit coordinates of order layout.p + 1.
            Defaults to False.

    Raises:
        ValueError: if i is not an independent variable.
        OrderOverflowError: if the result needs a coordinate above the ring.
    """
    if not 0 <= i < layout.d:
        raise ValueError(f'Independent variable index {i} is out of range '
                         f'for d={layout.d}.')
    ring = _ring(layout, extended)
    dim = jet_dimension(ring)
    out = f.diff(i)
    for var in f.variables():
        if var >= dim:
            raise OrderOverflowError(
                f'Variable {var} lies outside a jet ring of order {ring.p}.')
        if var < layout.d:
            continue
        b, J = coordinate_at(ring, var)
        if sum(J) + 1 > ring.p:
            raise OrderOverflowError(
                f'D_{i} of a polynomial in u{b + 1}_{J} needs order '
                f'{sum(J) + 1} in a ring of order {ring.p}.')
        target = coordinate_offset(ring, b, add_index(J, i))
        out = out + JetPolynomial.variable(target) * f.diff(var)
    return out


@dataclass(frozen=True)
class AnsatzBasis:
    """Shared monomial basis psi of every generator component.

    Attributes:
        layout (JetLayout): jet layout of the data.
        degree (int): highest total degree of psi.
        include_constants (bool): whether free constants take part in psi
            and carry a xi component.
        variables (tuple): jet columns psi is built over.
        exponents (tuple): exponent vectors over `variables`, graded-lex.
        slots (tuple): jet column driven by each block of kappa
            coefficients (the xi axes first, then the dependents).
    """
    layout: JetLayout
    degree: int
    include_constants: bool = False
    variables: Tuple[int, ...] = field(init=False)
    exponents: Tuple[MultiIndex, ...] = field(init=False)
    slots: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 0:
            raise ValueError(f'Ansatz degree must be a non-negative integer, '
                             f'got {self.degree}.')
        layout = self.layout
        axes = list(range(layout.d if self.include_constants else layout.n))
        variables = tuple(axes + [layout.d + b for b in range(layout.m)])
        exponents = tuple(J for r in range(int(self.degree) + 1)
                          for J in multi_indices(len(variables), r))
        object.__setattr__(self, 'variables', variables)
        object.__setattr__(self, 'exponents', exponents)
        object.__setattr__(self, 'slots', variables)

    @property
    def kappa(self) -> int:
        return len(self.exponents)

    @property
    def K(self) -> int:
        return self.kappa * len(self.slots)

    @property
    def psi(self) -> List[JetPolynomial]:
        return [JetPolynomial.monomial(
            {v: k for v, k in zip(self.variables, J) if k})
            for J in self.exponents]

    def column(self, slot: int, j: int) -> int:
        """Coefficient index of psi_j in the given slot."""
        return slot * self.kappa + j

    def split(self, col: int) -> Tuple[int, int]:
        """(slot, j) of a coefficient index."""
        if not 0 <= col < self.K:
            raise ValueError(f'Coefficient index {col} out of range for K={self.K}.')
        return divmod(col, self.kappa)

    def base_names(self, names: Optional[Sequence[str]] = None) -> List[str]:
        names = list(names) if names is not None else default_names(self.layout)
        if len(names) != self.layout.d + self.layout.m:
            raise ValueError(f'Expected {self.layout.d + self.layout.m} names, '
                             f'got {len(names)}.')
        return names

    def monomial_text(self, j: int, names: Optional[Sequence[str]] = None) -> str:
        """psi_j as text, '1' for the constant monomial."""
        names = self.base_names(names)
        factors = [names[v] + (f'^{k}' if k > 1 else '')
                   for v, k in zip(self.variables, self.exponents[j]) if k]
        return '*'.join(factors) if factors else '1'

    def column_label(self, col: int, names: Optional[Sequence[str]] = None) -> str:
        """Basis vector field of a coefficient, like 'u ∂x'."""
        names = self.base_names(names)
        slot, j = self.split(col)
        derivative = f'∂{names[self.slots[slot]]}'
        monomial = self.monomial_text(j, names)
        return derivative if monomial == '1' else f'{monomial} {derivative}'

    def get_properties_str(self, names: Optional[Sequence[str]] = None) -> str:
        main_string = f'Ansatz of degree {self.degree}\n'
        main_string += f'psi = ({", ".join(self.monomial_text(j, names) for j in range(self.kappa))})\n'
        main_string += f'kappa = {self.kappa}, K = {self.K}'
        return main_string

    def print_properties(self, names: Optional[Sequence[str]] = None) -> None:
        print(self.get_properties_str(names))


def monomial_ansatz(layout: JetLayout, degree: int,
                    include_constants: bool = False) -> AnsatzBasis:
    """All monomials in (x, u) of total degree <= degree.

    Free constants enter psi only when `include_constants` is set; then
    kappa = C(degree + d + m, d + m), otherwise C(degree + n + m, n + m).

    Args:
        layout (JetLayout): layout of the data.
        degree (int): non-negative degree.
        include_constants (bool, optional): Defaults to False.

    Returns:
        AnsatzBasis: the basis; K = kappa times the number of slots.
    """
    return AnsatzBasis(layout=layout, degree=degree,
                       include_constants=include_constants)


class ProlongedAnsatz():
    """The D_p x K matrix L^(p) Psi of prolonged basis vector fields.

    Row r, column c holds the component along jet coordinate r of the
    prolongation of the c-th basis field. Evaluation is compiled into a
    monomial table and a coefficient matrix.
    """

    def __init__(self, basis: AnsatzBasis, layout: JetLayout,
                 entries: Sequence[Sequence[JetPolynomial]]):
        self.basis = basis
        self.layout = layout
        self.entries: Tuple[Tuple[JetPolynomial, ...], ...] = tuple(
            tuple(row) for row in entries)
        if len(self.entries) != jet_dimension(layout) or any(
                len(row) != basis.K for row in self.entries):
            raise ValueError('Entries do not form a D_p x K array.')
        monomials = sorted({mono for row in self.entries for poly in row
                            for mono in poly.terms},
                           key=lambda mono: (sum(k for _, k in mono), mono))
        position = {mono: i for i, mono in enumerate(monomials)}
        self._monomials: List[Monomial] = monomials
        self._coefficients = np.zeros((len(monomials), self.shape[0] * self.shape[1]))
        for r, row in enumerate(self.entries):
            for c, poly in enumerate(row):
                for mono, coeff in poly.terms.items():
                    self._coefficients[position[mono], r * self.shape[1] + c] = float(coeff)

    @property
    def shape(self) -> Tuple[int, int]:
        return jet_dimension(self.layout), self.basis.K

    @property
    def p(self) -> int:
        return self.layout.p

    def entry(self, row: int, col: int) -> JetPolynomial:
        return self.entries[row][col]

    def component(self, dependent_index: int, J: MultiIndex,
                  col: int) -> JetPolynomial:
        """eta_{b,J} of the col-th basis field."""
        return self.entries[coordinate_offset(self.layout, dependent_index, J)][col]

    def generator_component(self, row: int, c: Sequence) -> JetPolynomial:
        """Row of L^(p) Psi c for a coefficient vector (exact when rational)."""
        if len(c) != self.basis.K:
            raise ValueError(f'Expected {self.basis.K} coefficients, got {len(c)}.')
        out = JetPolynomial()
        for col, value in enumerate(c):
            if value:
                out = out + _as_fraction(value) * self.entries[row][col]
        return out

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        D, K = self.shape
        if z.ndim not in (1, 2) or z.shape[-1] != D:
            raise ValueError(f'Jet points must have {D} coordinates, got an '
                             f'array of shape {z.shape}.')
        points = np.atleast_2d(z)
        values = np.ones((len(points), len(self._monomials)))
        for i, mono in enumerate(self._monomials):
            for var, k in mono:
                values[:, i] *= points[:, var]**k
        out = (values @ self._coefficients).reshape(len(points), D, K)
        return out[0] if z.ndim == 1 else out

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        """One line per nonzero entry: `<row> | <basis field> | <polynomial>`."""
        base = self.basis.base_names(names)
        row_names = coordinate_names(self.layout, base)
        lines = []
        for r, row in enumerate(self.entries):
            for c, poly in enumerate(row):
                if not poly.is_zero:
                    lines.append(f'{row_names[r]} | '
                                 f'{self.basis.column_label(c, base)} | '
                                 f'{poly.to_text(row_names)}')
        return '\n'.join(lines)


def prolong_ansatz(basis: AnsatzBasis, layout: JetLayout,
                   p: int) -> ProlongedAnsatz:
    """Prolong every basis vector field of the ansatz to order p.

    eta_{b,J} = D_J(Q_b) + sum_k xi_k u_{b,J+e_k} with the characteristic
    Q_b = eta_b - sum_k xi_k u_{b,e_k}. D_J is computed over a ring that
    admits order p + 1; the order-(p+1) terms of the two parts must cancel
    and are checked to do so.

    Args:
        basis (AnsatzBasis): the ansatz.
        layout (JetLayout): layout of the jet data; only d, m and the
            constants are used.
        p (int): prolongation order, at least 0.

    Returns:
        ProlongedAnsatz: the D_p x K matrix.

    Raises:
        ValueError: for a negative p or a basis built on another layout.
        OrderOverflowError: if the top-order terms do not cancel.
    """
    if int(p) != p or p < 0:
        raise ValueError(f'Prolongation order must be a non-negative integer, '
                         f'got {p}.')
    if (basis.layout.d, basis.layout.m, basis.layout.n_constants) != (
            layout.d, layout.m, layout.n_constants):
        raise ValueError('The ansatz was built for a different jet layout.')
    target = layout.with_order(int(p))
    ring = target.with_order(target.p + 1)
    d, m = target.d, target.m
    D = jet_dimension(target)
    psi = basis.psi
    first = [[JetPolynomial.variable(coordinate_offset(ring, b, unit_index(d, k)))
              for k in range(d)] for b in range(m)]

    columns = []
    for col in range(basis.K):
        slot, j = basis.split(col)
        axis = basis.slots[slot]
        xi = [psi[j] if axis == k else JetPolynomial() for k in range(d)]
        eta = [psi[j] if axis == d + b else JetPolynomial() for b in range(m)]
        column = list(xi)
        for b in range(m):
            Q = eta[b] - sum((xi[k] * first[b][k] for k in range(d)),
                             JetPolynomial())
            memo: Dict[MultiIndex, JetPolynomial] = {(0,) * d: Q}
            for b_, J in target.ordering():
                if b_ != b:
                    continue
                DJ = _memo_total_derivative(memo, J, target)
                correction = sum(
                    (xi[k] * JetPolynomial.variable(
                        coordinate_offset(ring, b, add_index(J, k)))
                     for k in range(d) if not xi[k].is_zero),
                    JetPolynomial())
                eta_J = DJ + correction
                if any(v >= D for v in eta_J.variables()):
                    raise OrderOverflowError(
                        f'Order-{sum(J) + 1} terms of eta_({b}, {J}) did not '
                        f'cancel for basis column {col}.')
                column.append(eta_J)
        columns.append(column)
    entries = [[columns[c][r] for c in range(basis.K)] for r in range(D)]
    logger.debug('Prolonged a K=%d ansatz to order %d.', basis.K, p)
    return ProlongedAnsatz(basis, target, entries)


def _memo_total_derivative(memo: Dict[MultiIndex, JetPolynomial], J: MultiIndex,
                           layout: JetLayout) -> JetPolynomial:
    # D_J = D_d^{J_d} ... D_1^{J_1}: x_1 is applied first.
    if J in memo:
        return memo[J]
    last = max(i for i, v in enumerate(J) if v > 0)
    parent = tuple(v - 1 if i == last else v for i, v in enumerate(J))
    inner = _memo_total_derivative(memo, parent, layout)
    memo[J] = total_derivative(inner, last, layout, extended=True)
    return memo[J]


def evaluate_prolonged(prolonged: ProlongedAnsatz, z: np.ndarray) -> np.ndarray:
    """Numeric L^(p) Psi at jet points.

    Args:
        prolonged (ProlongedAnsatz): the symbolic matrix.
        z (np.ndarray): one jet point (D_p,) or a stack (N x D_p).

    Returns:
        np.ndarray: D_p x K, or N x D_p x K for a stack.

    Raises:
        ValueError: on a dimension mismatch.
    """
    return prolonged.evaluate(z)


@dataclass
class GeneratorCoefficients:
    """Coefficient vector of a generator in an ansatz basis.

    Attributes:
        c (np.ndarray): K coefficients with unit 2-norm and a positive first
            significant entry.
        basis (AnsatzBasis): the basis the coefficients refer to.
        norm (float): 2-norm of the vector before normalisation.
    """
    c: np.ndarray
    basis: AnsatzBasis
    norm: float = 1.

    @classmethod
    def from_vector(cls, c, basis: AnsatzBasis,
                    threshold: float = PRINT_THRESHOLD) -> 'GeneratorCoefficients':
        c = np.asarray(c, dtype=float).ravel()
        if len(c) != basis.K:
            raise ValueError(f'Expected {basis.K} coefficients, got {len(c)}.')
        norm = float(np.linalg.norm(c))
        if norm == 0:
            return cls(c=c.copy(), basis=basis, norm=0.)
        c = c / norm
        significant = np.flatnonzero(np.abs(c) > threshold)
        if len(significant) > 0 and c[significant[0]] < 0:
            c = -c
        return cls(c=c, basis=basis, norm=norm)

    def render(self, names: Optional[Sequence[str]] = None,
               threshold: float = PRINT_THRESHOLD) -> str:
        return render_generator(self, self.basis, names=names,
                                threshold=threshold)


def render_generator(c, basis: AnsatzBasis,
                     names: Optional[Sequence[str]] = None,
                     threshold: float = PRINT_THRESHOLD) -> str:
    """Human-readable generator, like '0.7071 ∂x + 0.7071 u ∂u'.

    The vector is normalised to unit length with a positive first
    significant entry; entries below `threshold` are left out and
    coefficients equal to one are not printed.

    Args:
        c (GeneratorCoefficients or np.ndarray): the coefficients.
        basis (AnsatzBasis): the ansatz basis.
        names (list, optional): d + m base variable names.
        threshold (float, optional): print threshold. Defaults to 1e-8.
    """
    if not isinstance(c, GeneratorCoefficients):
        c = GeneratorCoefficients.from_vector(c, basis, threshold)
    out = ''
    for col in np.flatnonzero(np.abs(c.c) > threshold):
        value = float(c.c[col])
        label = basis.column_label(int(col), names)
        magnitude = abs(value)
        term = label if abs(magnitude - 1) < threshold else f'{magnitude:.4g} {label}'
        if not out:
            out = f'-{term}' if value < 0 else term
        else:
            out += f' - {term}' if value < 0 else f' + {term}'
    return out or '0'
