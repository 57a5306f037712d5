#!/usr/bin/env python3
"""Local models: credal sets and their upper/lower expectations.

A local model describes one step of the process as a set of probability mass
functions over the next state.  Prices of payoff vectors are computed as
envelopes over that set: the upper expectation maximizes, the lower one
minimizes.
"""

import numpy as np

from iptree import (
    CredalSet,
    StateSpace,
    check_coherence_axioms,
    cut_limit_upper,
    extended_upper_expectation,
    lower_expectation,
    upper_expectation,
)

space = StateSpace(("H", "T"))
print("state space:", space.labels)

# A coin whose heads probability is only known to lie in [0.4, 0.6].
coin = CredalSet(np.array([[0.4, 0.6], [0.6, 0.4]]))
print("extreme points:\n", coin.points)

bet_on_heads = np.array([1.0, 0.0])
print("\nbet paying 1 on heads:")
print("  upper expectation:", upper_expectation(coin, bet_on_heads))  # 0.6
print("  lower expectation:", lower_expectation(coin, bet_on_heads))  # 0.4

# Constants are forced: no price ambiguity for a sure payoff.
print("  sure payoff 3.0 prices at:", upper_expectation(coin, np.array([3.0, 3.0])))

# A precise model (a single mass function) is self-conjugate.
fair = CredalSet(np.array([[0.5, 0.5]]))
f = np.array([2.0, -1.0])
print("\nprecise model: upper", upper_expectation(fair, f), "== lower", lower_expectation(fair, f))

# Payoffs may be infinite.  Positive mass on a +inf coordinate makes the
# price +inf; zero mass kills it (0 * inf == 0 here).
print("\nextended payoffs:")
print("  (inf, 1) under (0.5, 0.5):", extended_upper_expectation(fair, [np.inf, 1.0]))
print("  (inf, 1) under (0,   1):  ", extended_upper_expectation(CredalSet(np.array([[0.0, 1.0]])), [np.inf, 1.0]))
print("  (-inf, 2) under the coin: ", extended_upper_expectation(coin, [-np.inf, 2.0]))

# The same numbers fall out of clipping the payoff to [-c, c] and letting
# the cuts grow; the library cross-checks this equivalence everywhere.
print("  cut-limit agreement:", cut_limit_upper(coin, [-np.inf, 2.0]))

# A quick self-audit of the coherence axioms on random payoffs.
rng = np.random.default_rng(1)
report = check_coherence_axioms(coin, [rng.uniform(-5, 5, 2) for _ in range(50)])
print("\n" + str(report))
