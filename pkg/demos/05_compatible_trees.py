#!/usr/bin/env python3
"""The probability side: compatible precise trees and the envelope oracle.

Selecting one mass function from every local credal set yields a compatible
precise tree, with ordinary conditional probabilities given by the product
rule.  The supremum of the resulting expectations over all selections equals
the backward-recursion value on finite-depth payoffs, which makes exhaustive
enumeration a brute-force oracle for the engine.  For limit payoffs, sampled
selections must stay below the engine's value (one-sided domination).
"""

import numpy as np

from iptree import (
    CredalSet,
    Homogeneous,
    ImpreciseTree,
    MassFunction,
    Policy,
    PreciseTree,
    StateSpace,
    adversarial_selection,
    compile_gamble,
    conditional_prob,
    domination_check,
    enumerate_compatible,
    envelope_sup,
    finitary_upper,
    hitting_time_variable,
    parse_gamble,
    precise_expectation,
    sample_compatible,
)

space = StateSpace(("H", "T"))
coin = ImpreciseTree(space, Homogeneous(CredalSet(np.array([[0.4, 0.6], [0.6, 0.4]]))))
fair = PreciseTree(space, Homogeneous(MassFunction(np.array([0.5, 0.5]))))

# Conditional probabilities of a precise tree follow the product rule.
print("P(HH | root) =", conditional_prob(fair, (0, 0), ()))
print("P(H | HT)    =", conditional_prob(fair, (0,), (0, 1)))   # already implied
print("P(TH | H)    =", conditional_prob(fair, (1, 0), (0,)))   # contradicts history

f = compile_gamble(parse_gamble("ind(X[1]==H && X[2]==H)", space))
print("\nfair-coin expectation of HH:", precise_expectation(fair, f))

# Two extreme points at each of the three situations of length < 2 make
# eight compatible selections; the best one prices HH at 0.36.
print("\nall compatible selections at depth 2:")
for p in enumerate_compatible(coin, 2):
    print("  value:", round(precise_expectation(p, f), 4))

env = envelope_sup(coin, f)
print("envelope:", env.value, "over", env.count, "selections")
print("maximizing selection (situation -> extreme point):", env.argmax)
print("engine recursion:", finitary_upper(coin, f))

# For the unbounded hitting time, sampled compatible trees must stay below
# the engine's upper value; the recursion's own adversarial selection
# closes the gap.
tau = hitting_time_variable(space, ["T"])
rng = np.random.default_rng(5)
samples = sample_compatible(coin, 3, 5, rng) + [adversarial_selection(coin, tau.generator(80))]
report = domination_check(coin, tau, (), samples, Policy(tol=1e-13, max_horizon=90))
print("\ndomination check passed:", report.passed)
print("engine upper value:", report.upper.value)
for i, verdict in enumerate(report.samples):
    print(f"  sample {i}: limit {verdict.limit.value:.9f}  gap {verdict.gap:.2e}")
