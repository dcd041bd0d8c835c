import sympy as sp

from liesym.systems.system import DESystem


class LinearODE(DESystem):
    """Class of the first-order linear ODE u_x = u, with general solution
    u(x, C) = C e^x.
    """
    def __init__(self):
        self.name = 'linear_ode'
        self.equation = 'u_x - u = 0'
        self.independents = ('x',)
        self.constants = ('C',)
        self.dependents = ('u',)
        self.default_ranges = {'x': (-1., 1.), 'C': (1., 2.)}
        self.default_counts = {'x': 100, 'C': 100}
        self.default_fixed = {}

    def sympy_solution(self, symbols):
        return [symbols['C'] * sp.exp(symbols['x'])]
