import sympy as sp

from liesym.systems.system import DESystem


class Transport(DESystem):
    """Class of the particular solution u = sin(t + x) of the transport
    equation u_t - u_x = 0.
    """
    def __init__(self):
        self.name = 'transport'
        self.equation = 'u_t - u_x = 0'
        self.independents = ('t', 'x')
        self.constants = ()
        self.dependents = ('u',)
        self.default_ranges = {'t': (-0.5, 0.5), 'x': (-0.5, 0.5)}
        self.default_counts = {'t': 160, 'x': 160}
        self.default_fixed = {}

    def sympy_solution(self, symbols):
        return [sp.sin(symbols['t'] + symbols['x'])]
