import numpy as np
import sympy as sp

from liesym.systems.system import DESystem


class StuartLandau(DESystem):
    """Class of the Stuart-Landau oscillator

        x_t = -x (x^2 + y^2 - 1) + y,   y_t = -y (x^2 + y^2 - 1) - x,

    whose solutions relax onto the unit circle. C1 is the phase and C2 the
    initial radius; C1 = 0, C2 = 1 is the limit cycle x = cos(-t),
    y = sin(-t).
    """
    def __init__(self):
        self.name = 'stuart_landau'
        self.equation = 'x_t = -x(x^2+y^2-1) + y, y_t = -y(x^2+y^2-1) - x'
        self.independents = ('t',)
        self.constants = ('C1', 'C2')
        self.dependents = ('x', 'y')
        self.default_ranges = {'t': (0., np.pi),
                               'C1': (0., 2*np.pi),
                               'C2': (1., 1.3)}
        self.default_counts = {'t': 40, 'C1': 30, 'C2': 25}
        self.default_fixed = {}

    def sympy_solution(self, symbols):
        t, C1, C2 = symbols['t'], symbols['C1'], symbols['C2']
        radius = 1/sp.sqrt(1 - (1 - 1/C2**2)*sp.exp(-2*t))
        return [sp.cos(-t + C1)*radius, sp.sin(-t + C1)*radius]

    def check_domain(self, values):
        C2 = np.asarray(values['C2'], dtype=float)
        t = np.asarray(values['t'], dtype=float)
        if np.any(C2 <= 0):
            raise ValueError('The Stuart-Landau initial radius C2 must be '
                             f'positive, got min C2 = {np.min(C2):.3g}.')
        radicand = 1 - (1 - 1/C2**2)*np.exp(-2*t)
        if np.any(radicand <= 0):
            raise ValueError('Non-positive radicand in the Stuart-Landau closed '
                             f'form (min {np.min(radicand):.3g}); shrink the '
                             't or C2 range.')
