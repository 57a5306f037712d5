#!/usr/bin/env python3
"""Hitting times and probabilities as monotone limits.

Payoffs that depend on the whole infinite path are handled through monotone
sequences of finite-horizon payoffs.  Truncated hitting times grow with the
horizon and their values converge; the engine iterates until the values
stabilize and reports the full history.
"""

import numpy as np

from iptree import (
    CredalSet,
    Hitting,
    Homogeneous,
    ImpreciseTree,
    Policy,
    StateSpace,
    hitting_time_variable,
    limit_lower,
    limit_upper,
    upper_probability,
)
from iptree.suites import degenerate_tree

space = StateSpace(("H", "T"))
coin = ImpreciseTree(space, Homogeneous(CredalSet(np.array([[0.4, 0.6], [0.6, 0.4]]))))

# Time of the first tails, with the tails chance anywhere in [0.4, 0.6].
tau = hitting_time_variable(space, ["T"])
policy = Policy(tol=1e-12, max_horizon=100)

up = limit_upper(coin, tau, (), policy)
lo = limit_lower(coin, tau, (), policy)
print("upper expected hitting time:", up.value)   # 1/0.4 = 2.5
print("lower expected hitting time:", lo.value)   # 1/0.6 = 1.666...
print("first upper iterates:", [v for _, v in up.iterates[:6]])
print("stopped because:", up.stop_reason.value, "after", len(up.iterates), "horizons")

# The chance of ever seeing tails tends to 1 from both sides.
hit = upper_probability(coin, Hitting(("T",)), (), policy)
print("\nupper probability of ever hitting T:", hit.value)
print("first iterates:", [round(v, 4) for _, v in hit.iterates[:5]])

# A process that surely stays in H: every finite horizon gives 0 for the
# chance of leaving, and the limit honors those zeros instead of jumping.
stuck = degenerate_tree(space, "H")
res = upper_probability(stuck, Hitting(("T",)), (), Policy(tol=1e-12, max_horizon=30))
print("\nsure-state process, upper probability of ever leaving:", res.value)
print("converged:", res.converged, "| iterates all zero:", all(v == 0.0 for _, v in res.iterates))
