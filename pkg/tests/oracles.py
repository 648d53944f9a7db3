"""Independent reference computations used only by the tests."""

import itertools

import mpmath
import numpy as np


def definitional_anova(y):
    """Classical balanced-design ANOVA for mains + two-way interactions.

    ``y`` has one axis per factor plus a trailing replicate axis. Returns
    {term: (df, ss, f)} with terms as tuples of axis indices, and the
    residual (df, ss), where the residual pools everything the model
    leaves out. Pure marginal-mean arithmetic; no least squares.
    """
    y = np.asarray(y, dtype=float)
    k = y.ndim - 1
    shape = y.shape[:k]
    n_total = y.size
    grand = y.mean()
    ss_total = float(((y - grand) ** 2).sum())
    out = {}
    for i in range(k):
        axes = tuple(a for a in range(y.ndim) if a != i)
        means = y.mean(axis=axes)
        per_level = n_total / shape[i]
        out[(i,)] = (shape[i] - 1, float(per_level * ((means - grand) ** 2).sum()))
    for i, j in itertools.combinations(range(k), 2):
        axes = tuple(a for a in range(y.ndim) if a not in (i, j))
        cell = y.mean(axis=axes)
        mi = y.mean(axis=tuple(a for a in range(y.ndim) if a != i))
        mj = y.mean(axis=tuple(a for a in range(y.ndim) if a != j))
        dev = cell - mi[:, None] - mj[None, :] + grand
        per_cell = n_total / (shape[i] * shape[j])
        out[(i, j)] = ((shape[i] - 1) * (shape[j] - 1), float(per_cell * (dev ** 2).sum()))
    df_res = n_total - 1 - sum(df for df, _ in out.values())
    ss_res = ss_total - sum(ss for _, ss in out.values())
    ms_res = ss_res / df_res
    table = {t: (df, ss, (ss / df) / ms_res) for t, (df, ss) in out.items()}
    return table, (df_res, ss_res), ss_total


def balanced_columns(y, names):
    """Flatten a balanced array into (values, {factor: labels})."""
    y = np.asarray(y, dtype=float)
    k = y.ndim - 1
    values, cols = [], {n: [] for n in names}
    for idx in itertools.product(*(range(s) for s in y.shape)):
        values.append(y[idx])
        for axis, name in enumerate(names):
            cols[name].append(f"{name}{idx[axis]}")
    assert len(names) == k
    return values, cols


def f_cdf_quadrature(x, d1, d2, dps=30):
    """P(F <= x) by tanh-sinh integration of the F density."""
    if x == 0:
        return 0.0
    with mpmath.workdps(dps):
        a, b = mpmath.mpf(d1), mpmath.mpf(d2)
        log_norm = (a / 2) * mpmath.log(a / b) - mpmath.log(mpmath.beta(a / 2, b / 2))

        def density(t):
            return mpmath.exp(log_norm + (a / 2 - 1) * mpmath.log(t)
                              - (a + b) / 2 * mpmath.log1p(a * t / b))

        points = [0] + [p for p in (0.5, 1, 2, 5, 10) if p < x] + [mpmath.mpf(x)]
        return float(mpmath.quad(density, points))
