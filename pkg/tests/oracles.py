"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def u_statistic_bruteforce(n, e):
    subsets = list(itertools.combinations(e, n))
    return math.fsum(math.prod(s) for s in subsets) / len(subsets)


def lp_sup(cs, fs):
    """max sum f_i p_i s.t. sum c_i p_i <= 1, sum p_i = 1, p >= 0 (HiGHS simplex)."""
    cs = np.asarray(cs, dtype=float)
    res = linprog(
        -np.asarray(fs, dtype=float),
        A_ub=[cs],
        b_ub=[1.0],
        A_eq=[np.ones_like(cs)],
        b_eq=[1.0],
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    assert res.status == 0, res.message
    return -res.fun


def lp_envelope_level1(F, values):
    """F_1(e1) = sup over grid e-variables E2 of E[F(e1, E2)], one LP per e1."""
    return np.array([lp_sup(values, [F(e1, c) for c in values]) for e1 in values])
