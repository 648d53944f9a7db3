"""Reference summary figures for a three-operator glove dataset.

Used to seed simulator defaults and as fixtures for accounting checks.
Keys are (expertise, hand role).
"""

from .datamodel import Expertise, HandRole

E, I, N = Expertise.EXPERT, Expertise.INTERMEDIATE, Expertise.NOVICE
D, ND = HandRole.DOMINANT, HandRole.NON_DOMINANT

# Signals recorded per sensor, all ten sessions pooled.
SIGNALS_PER_SENSOR = {
    (E, D): 4442, (E, ND): 5244,
    (I, D): 5974, (I, ND): 6764,
    (N, D): 7780, (N, ND): 6497,
}

# Summed sensor voltage over all sessions, in volts, sensors S1..S12.
TOTAL_FORCE_V = {
    (E, D): (0, 6.23, 10.96, 9.03, 437.13, 2009.06, 2607.76, 0, 2.50, 2106.27, 0, 5.15),
    (E, ND): (3.40, 0, 0, 46.90, 1811.11, 1895.47, 115.71, 487.50, 534.02, 900.44, 3966.70, 2242.13),
    (I, D): (0, 9.16, 0, 37.50, 2901.79, 3327.50, 60.63, 1064.15, 786.74, 489.66, 0, 1593.11),
    (I, ND): (0, 58.67, 0, 0.60, 283.75, 3520.78, 3638.08, 38.27, 0, 499.17, 0, 0),
    (N, D): (0, 193.23, 5328.26, 6.07, 5946.81, 3915.37, 664.06, 5022.85, 8838.14, 5062.52,
             6842.42, 6585.59),
    (N, ND): (0, 447.29, 0, 0, 1926.19, 6910.31, 3420.98, 1512.46, 0.66, 3246.43, 0, 2.71),
}

# Task execution time (mean s, SEM s) over ten sessions.
TASK_TIME_S = {
    (E, D): (8.88, 0.36), (E, ND): (10.49, 0.49),
    (I, D): (11.95, 0.49), (I, ND): (13.53, 0.66),
    (N, D): (15.56, 1.60), (N, ND): (12.99, 0.75),
}

# Dominant-hand first/last session cells for S5, S6, S7: (mean mV, SEM mV).
TRIO_CELLS = {
    (E, 5): {"first": (240.37, 4.56), "last": (48.32, 0.36)},
    (N, 5): {"first": (790.00, 3.02), "last": (691.72, 2.19)},
    (E, 6): {"first": (575.63, 4.51), "last": (473.98, 5.17)},
    (N, 6): {"first": (504.12, 2.42), "last": (540.30, 2.23)},
    (E, 7): {"first": (594.02, 3.41), "last": (608.51, 2.38)},
    (N, 7): {"first": (110.82, 0.75), "last": (72.90, 0.61)},
}
# Samples across the four trio cells of one sensor.
TRIO_TOTAL_SAMPLES = 3124
