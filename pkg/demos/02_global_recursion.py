#!/usr/bin/env python3
"""Global values by backward recursion.

The conditional upper expectation of a payoff on the first n states is
computed level by level: at depth n the values are the payoffs, and one step
up each situation prices the next level's values through its local model.
This script walks the recursion by hand and checks the engine against it.
"""

import numpy as np

from iptree import (
    CredalSet,
    ImpreciseTree,
    Homogeneous,
    StateSpace,
    compile_gamble,
    finitary_lower,
    finitary_upper,
    parse_gamble,
    upper_expectation,
    value_table,
)

space = StateSpace(("H", "T"))
coin = CredalSet(np.array([[0.4, 0.6], [0.6, 0.4]]))
tree = ImpreciseTree(space, Homogeneous(coin))

# Payoff 1 exactly when the first two tosses are both heads.
f = compile_gamble(parse_gamble("ind(X[1]==H && X[2]==H)", space))
print("payoff table (rows: X1, cols: X2):\n", f.table)

# By hand: after seeing H, the remaining bet is (1, 0) on the second toss,
# priced at 0.6; after T it is worthless.  At the root the induced one-step
# bet is (0.6, 0.0), priced at 0.36.
after_h = upper_expectation(coin, f.table[0])
after_t = upper_expectation(coin, f.table[1])
root = upper_expectation(coin, np.array([after_h, after_t]))
print("\nhand recursion: after H", after_h, "| after T", after_t, "| root", root)

print("engine:        ", finitary_upper(tree, f))
print("engine at (H,):", finitary_upper(tree, f, (0,)))
print("engine lower:  ", finitary_lower(tree, f))  # min over both steps: 0.16

# value_table exposes the whole recursion: one array per level.
for level, values in enumerate(value_table(tree, f)):
    print(f"level {level}:", np.asarray(values).ravel())

# Conditioning at or below the payoff depth just reads the payoff off.
print("\ngiven (H, H):", finitary_upper(tree, f, (0, 0)))
print("given (T, anything...):", finitary_upper(tree, f, (1, 0, 1, 1)))

# Expressions can mix arithmetic, min/max, and bounded sums.
g = compile_gamble(parse_gamble("sum(i=1..3, ind(X[i]==T)) - 2 * ind(X[1]==H)", space))
print("\nricher payoff, upper:", finitary_upper(tree, g), "lower:", finitary_lower(tree, g))
