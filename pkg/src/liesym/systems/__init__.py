"""Closed-form solution families of the benchmark differential equations.
"""

from .system_lib import system_lib
from .system import DESystem, load_system
from .linear_ode import LinearODE
from .stuart_landau import StuartLandau
from .transport import Transport
from .heat import Heat
