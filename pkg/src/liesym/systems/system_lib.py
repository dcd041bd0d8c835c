""" System library for liesym
 Maps the names accepted on the command line and in configs to the module
 and class implementing each closed-form solution family.
"""

system_lib = {
    'linear_ode':    ('linear_ode', 'LinearODE'),
    'ode':           ('linear_ode', 'LinearODE'),
    'stuart_landau': ('stuart_landau', 'StuartLandau'),
    'sl':            ('stuart_landau', 'StuartLandau'),
    'transport':     ('transport', 'Transport'),
    'heat':          ('heat', 'Heat'),
    }
