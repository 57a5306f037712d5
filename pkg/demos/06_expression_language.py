#!/usr/bin/env python3
"""The gamble expression language.

Payoffs over the first n states are written in a small expression language:
state tests, indicators, min/max, arithmetic, and bounded sums.  Expressions
compile to dense payoff tables; parse errors carry line and column.
"""

import numpy as np

from iptree import (
    CredalSet,
    ExprError,
    Homogeneous,
    ImpreciseTree,
    StateSpace,
    compile_gamble,
    finitary_lower,
    finitary_upper,
    parse_gamble,
    unparse,
)

space = StateSpace(("H", "T"))
coin = ImpreciseTree(space, Homogeneous(CredalSet(np.array([[0.4, 0.6], [0.6, 0.4]]))))

examples = [
    "ind(X[1]==H)",                            # a plain indicator
    "sum(i=1..3, ind(X[i]==H))",               # heads among the first 3 states
    "min(ind(X[1]==H), ind(X[2]==H))",         # same as the && conjunction
    "2 * ind(X[1]==T) - 1",                    # affine transforms
    "max(sum(i=1..2, ind(X[i]==T)), 1)",       # clip from below
]

for source in examples:
    expr = parse_gamble(source, space)
    f = compile_gamble(expr)
    print(f"{source!r}")
    print(f"  depth {f.depth}, payoffs {np.asarray(f.table).ravel()}")
    print(f"  upper {finitary_upper(coin, f):.4f}  lower {finitary_lower(coin, f):.4f}")

# The printer emits parseable source; bound variable names don't matter.
expr = parse_gamble("sum(i=1..3, ind(X[i]==H))", space)
print("\nprinted form:", unparse(expr))

# Errors point at the offending token.
for bad in ("ind(X[0]==H)", "ind(X[1]==Q)", "1 + * 2"):
    try:
        parse_gamble(bad, space)
    except ExprError as err:
        print(f"rejected {bad!r}: {err}")
