import numpy as np
import sympy as sp

from liesym.systems.system import DESystem


class Heat(DESystem):
    """Class of the fundamental solution
    u = (4 pi t)^(-1/2) exp(-x^2 / (4t)) of the heat equation u_t - u_xx = 0.
    """
    def __init__(self):
        self.name = 'heat'
        self.equation = 'u_t - u_xx = 0'
        self.independents = ('t', 'x')
        self.constants = ()
        self.dependents = ('u',)
        self.default_ranges = {'t': (1., 2.), 'x': (1., 2.)}
        self.default_counts = {'t': 160, 'x': 160}
        self.default_fixed = {}

    def sympy_solution(self, symbols):
        t, x = symbols['t'], symbols['x']
        return [sp.exp(-x**2/(4*t))/sp.sqrt(4*sp.pi*t)]

    def check_domain(self, values):
        t = np.asarray(values['t'], dtype=float)
        if np.any(t <= 0):
            raise ValueError('The heat kernel needs t > 0, got t = '
                             f'{np.min(t):.4g}.')
