#!/usr/bin/env python3
"""Supermartingale certificates: auditable upper bounds.

A process on situations is a supermartingale when no local model prices its
next-step values above its current value.  If such a process is bounded
below and eventually dominates a payoff, its starting value certifies an
upper bound on the payoff's conditional upper expectation.  The canonical
certificate attains the recursion value exactly, so third parties can verify
the number without rerunning the recursion.
"""

import json

import numpy as np

from iptree import (
    CredalSet,
    Homogeneous,
    ImpreciseTree,
    StateSpace,
    canonical_supermartingale,
    certified_upper_bound,
    compile_gamble,
    dump_certificate,
    finitary_upper,
    parse_gamble,
    verify,
)

space = StateSpace(("H", "T"))
coin = ImpreciseTree(space, Homogeneous(CredalSet(np.array([[0.4, 0.6], [0.6, 0.4]]))))
f = compile_gamble(parse_gamble("ind(X[1]==H && X[2]==H)", space))

m = canonical_supermartingale(coin, f)
print("canonical process values:")
for level, arr in enumerate(m.levels):
    print(f"  level {level}:", np.asarray(arr).ravel())

report = verify(m, coin)
print("\nverification:", report)
print("step margins:", report.min_margin, "..", report.max_margin)  # 0: equality everywhere

cert = certified_upper_bound(m, f, coin)
print("\ncertificate valid:", cert.valid)
print("bound:", cert.bound, "| engine value:", cert.engine_value, "| gap:", cert.gap)

# Padding the process keeps it valid; the bound just loosens by the pad.
padded = certified_upper_bound(m + 0.05, f, coin)
print("\npadded bound:", padded.bound, "gap:", padded.gap)

# Damaging the deepest level breaks domination, with witnesses named.
broken_levels = list(m.levels)
broken_levels[2] = m.levels[2] - np.array([[2.0, 0.0], [0.0, 0.0]])
from iptree import TailConstantProcess

bad = certified_upper_bound(TailConstantProcess(2, tuple(broken_levels)), f, coin)
print("\nbroken certificate valid:", bad.valid, "| witnesses:", bad.domination_witnesses)

# Certificates serialize to JSON for offline audits (see the CLI's
# `check cert`).
doc = dump_certificate(m, space)
print("\nJSON certificate:")
print(json.dumps(doc, indent=2, sort_keys=True))

assert abs(cert.bound - finitary_upper(coin, f)) < 1e-12
