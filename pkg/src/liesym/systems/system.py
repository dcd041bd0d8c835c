from functools import cached_property
from importlib import import_module
from typing import Dict, List, Mapping, Tuple

import numpy as np
import pandas as pd
import sympy as sp


class DESystem():
    """Class to represent a closed-form solution family of a differential
    equation.

    Subclasses declare the variable names, the sampling box used by the
    benchmarks and the closed form as a sympy expression. Data generation
    evaluates a lambdified copy of it, the oracles differentiate it exactly.
    """
    name = ''
    equation = ''
    independents: Tuple[str, ...] = ()
    constants: Tuple[str, ...] = ()
    dependents: Tuple[str, ...] = ()
    default_ranges: Dict[str, Tuple[float, float]] = {}
    default_counts: Dict[str, int] = {}
    default_fixed: Dict[str, float] = {}

    @property
    def axes(self) -> Tuple[str, ...]:
        """Sampled axes: true independents followed by the constants."""
        return tuple(self.independents) + tuple(self.constants)

    def evaluate(self, values: Mapping[str, np.ndarray]) -> np.ndarray:
        """Evaluate the closed form.

        Args:
            values (dict): array (or scalar) for every axis name.

        Returns:
            np.ndarray: N x m array of dependent values.
        """
        columns = self._numpy_solution(
            *[np.asarray(values[a], dtype=float) for a in self.axes])
        return np.column_stack(np.broadcast_arrays(*columns)).astype(float)

    @cached_property
    def _numpy_solution(self):
        symbols = [sp.Symbol(a) for a in self.axes]
        exprs = self.sympy_solution(dict(zip(self.axes, symbols)))
        return sp.lambdify(symbols, exprs, 'numpy')

    def sympy_solution(self, symbols: Mapping[str, sp.Expr]) -> List[sp.Expr]:
        """Closed form as sympy expressions of the given axis symbols."""
        raise NotImplementedError

    def check_domain(self, values: Mapping[str, np.ndarray]) -> None:
        """Raise ValueError if the values leave the domain of the closed form."""
        return None

    def check_sampling_params(self, ranges: Mapping, counts: Mapping,
                              fixed: Mapping) -> None:
        """Check that every axis is either fixed or sampled.

        Raises:
            ValueError: listing unknown, fixed-but-not-constant or missing axes.
        """
        unknown = [a for a in (set(ranges) | set(counts) | set(fixed))
                   if a not in self.axes]
        if len(unknown) > 0:
            raise ValueError(f'Unknown axes for system {self.name}: '
                             f'{sorted(unknown)}. Axes are {list(self.axes)}.')
        not_constant = [a for a in fixed if a not in self.constants]
        if len(not_constant) > 0:
            raise ValueError('Only integration constants can be fixed, got '
                             f'{not_constant}.')
        params_missing = [a for a in self.axes if a not in fixed and
                          (a not in ranges or a not in counts)]
        if len(params_missing) > 0:
            raise ValueError('Every sampled axis needs a range and a count.\n'
                             f'Missing parameters: {params_missing}')

    def get_properties_str(self) -> str:
        main_string = f'System: {self.name}\n'
        main_string += '--------------------------------------------\n'
        main_string += f'Equation: {self.equation}\n'
        main_string += f'Independent variables: {", ".join(self.independents)}\n'
        if self.constants:
            main_string += f'Integration constants: {", ".join(self.constants)}\n'
        main_string += f'Dependent variables: {", ".join(self.dependents)}\n'
        main_string += '--------------------------------------------\n'
        for axis in self.axes:
            if axis in self.default_fixed:
                main_string += f'{axis} fixed at {self.default_fixed[axis]}\n'
            else:
                lo, hi = self.default_ranges[axis]
                main_string += (f'{axis} in [{lo:.4g}, {hi:.4g}], '
                                f'{self.default_counts[axis]} samples\n')
        return main_string.rstrip('\n')

    def print_properties(self) -> None:
        """Print the main properties of the solution family
        """
        print(self.get_properties_str())

    def get_properties_df(self) -> pd.DataFrame:
        """Get the sampling defaults of the family in a pandas DataFrame

        Returns:
            pd.DataFrame: one row per sampled axis.
        """
        rows = []
        for axis in self.axes:
            lo, hi = self.default_ranges.get(axis, (np.nan, np.nan))
            rows.append({'axis': axis,
                         'role': ('independent' if axis in self.independents
                                  else 'constant'),
                         'low': lo,
                         'high': hi,
                         'count': self.default_counts.get(axis, 1),
                         'fixed': self.default_fixed.get(axis, np.nan)})
        return pd.DataFrame(rows)


def load_system(name) -> DESystem:
    """Fetch a solution family from the system library.

    Args:
        name (str or DESystem): library name such as 'heat' or 'sl'.
            Instances are returned unchanged.

    Raises:
        ValueError: if the name is not in the library.
    """
    if isinstance(name, DESystem):
        return name
    from liesym.systems import system_lib
    if name not in system_lib:
        raise ValueError(f'System {name!r} not found. Available systems: '
                         f'{sorted(system_lib)}.')
    module_name, class_name = system_lib[name]
    system_module = import_module(f'liesym.systems.{module_name}')
    return getattr(system_module, class_name)()
