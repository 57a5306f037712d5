"""Conditional global upper and lower expectations.

For a finitary gamble the conditional upper expectation given a situation is
computed exactly by backward recursion: at the deepest level the values are
the payoffs themselves, and one level up the value at a prefix is the local
upper expectation of the values over the next state.  This is the law of
iterated upper expectations run backwards, and it characterizes the unique
most conservative global model consistent with the local ones; the same
number is the infimum of supermartingale certificates (see
:mod:`.supermartingale`) and the upper envelope over compatible precise trees
(see :mod:`.oracle`), which the test suite cross-checks.

Dense gambles are recursed over their payoff tables situation by situation.
Machine gambles are recursed over the product of the tree's finite-state view
and the gamble's automaton, which keeps hitting-time computations polynomial
in the horizon.

Payoffs that depend on the whole infinite path enter through
:class:`~iptree.gambles.LimitVariable`: the engine evaluates the monotone
approximations until the values stabilize, certify divergence, or hit the
horizon cap, and reports the full iterate history either way.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import InvalidInputError, MonotonicityError
from .extreal import INF
from .gambles import (
    Cylinder,
    Direction,
    EventSpec,
    FinitaryGamble,
    Gamble,
    Hitting,
    LimitVariable,
    MachineGamble,
    UnionAtDepth,
    hitting_event_variable,
    indicator_of_cylinder,
    indicator_of_strings,
    pointwise_leq,
)
from .local import CredalSet, MassFunction
from .tree import PreciseTree, SelectionOverlay, Situation, Tree, as_situation

#: Slack allowed when auditing that iterate values follow the declared
#: monotone direction (pure float noise; anything larger is a generator bug).
_VALUE_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class Policy:
    """Convergence policy for limit evaluations.

    ``monotone_audit`` consecutive generator pairs are compared pointwise
    (exactly, via the automaton product); iterate values are audited for
    monotonicity throughout.  Divergence is declared only when the iterates
    are monotone and exceed ``divergence_threshold`` in the direction of
    approximation; no finite computation can truly certify an infinite limit,
    so the flag is a documented heuristic.
    """

    tol: float = 1e-9
    max_horizon: int = 100
    divergence_threshold: float = 1e12
    monotone_audit: int = 4
    start_index: int = 1

    def __post_init__(self):
        if self.tol <= 0 or self.max_horizon < 1 or self.divergence_threshold <= 0:
            raise InvalidInputError("policy fields must be positive")


class StopReason(Enum):
    STABILIZED = "stabilized"
    HORIZON_CAP = "horizon_cap"
    DIVERGING = "diverging"


@dataclass(frozen=True)
class ApproxResult:
    """Outcome of a monotone limit evaluation.

    ``value`` equals the last iterate when stabilized and +/-inf when
    divergence was certified; ``iterates`` is the full (horizon, value)
    history.
    """

    value: float
    iterates: tuple[tuple[int, float], ...]
    converged: bool
    stop_reason: StopReason
    tol: float

    def to_json(self) -> dict:
        from .extreal import fmt

        return {
            "value": fmt(self.value),
            "converged": self.converged,
            "stop_reason": self.stop_reason.value,
            "tol": self.tol,
            "iterates": [[m, fmt(v)] for m, v in self.iterates],
        }


def _points_of(leaf) -> np.ndarray:
    if isinstance(leaf, CredalSet):
        return leaf.points
    if isinstance(leaf, MassFunction):
        return leaf.weights[None, :]
    raise InvalidInputError(f"not a local model: {leaf!r}")


def _max_dot(points: np.ndarray, values: np.ndarray) -> float:
    return float((points @ values).max())


def _dense_upper(tree: Tree, f: FinitaryGamble, s: Situation) -> float:
    k = tree.k
    n = f.depth
    if len(s) >= n:
        return float(f.table[s[:n]])
    assignment = tree.assignment
    g = np.asarray(f.table[s], dtype=float)
    for level in range(n - 1, len(s) - 1, -1):
        rel = level - len(s)
        out = np.empty((k,) * rel)
        for prefix in np.ndindex(*(k,) * rel):
            points = _points_of(assignment.local(s + prefix))
            out[prefix] = _max_dot(points, g[prefix])
        g = out
    return float(g)


def _machine_layers(tree: Tree, f: MachineGamble, s: Situation):
    """Forward reachability of (tree state, gamble state) pairs from ``s``.

    Returns the per-level node lists and the (node, symbol) -> next-node
    index tables for levels len(s)..depth.
    """
    assignment = tree.assignment
    k = tree.k
    start = (assignment.machine_init(s), f.state_after(s))
    layers: list[list[tuple]] = [[start]]
    transitions: list[np.ndarray] = []
    for level in range(len(s) + 1, f.depth + 1):
        cur = layers[-1]
        nxt_index: dict[tuple, int] = {}
        nxt: list[tuple] = []
        table = np.empty((len(cur), k), dtype=np.int64)
        for i, (t, q) in enumerate(cur):
            for y in range(k):
                pair = (assignment.machine_step(t, y), f.step(level, q, y))
                j = nxt_index.get(pair)
                if j is None:
                    j = len(nxt)
                    nxt_index[pair] = j
                    nxt.append(pair)
                table[i, y] = j
        layers.append(nxt)
        transitions.append(table)
    return layers, transitions


def _machine_upper(tree: Tree, f: MachineGamble, s: Situation) -> float:
    if len(s) >= f.depth:
        return f.payoff(s)
    assignment = tree.assignment
    layers, transitions = _machine_layers(tree, f, s)
    payoffs = f.payoffs()
    vals = np.array([payoffs[q] for _, q in layers[-1]])
    for li in range(len(transitions) - 1, -1, -1):
        nxt_vals = vals[transitions[li]]  # (nodes, k)
        out = np.empty(len(layers[li]))
        groups: dict = {}
        for i, (t, _) in enumerate(layers[li]):
            groups.setdefault(t, []).append(i)
        for t, rows in groups.items():
            points = _points_of(assignment.machine_leaf(t))
            out[rows] = (points @ nxt_vals[rows].T).max(axis=0)
        vals = out
    return float(vals[0])


def finitary_upper(tree: Tree, f: Gamble, s: Situation = ()) -> float:
    """Conditional upper expectation of a finitary gamble given ``s``.

    Exact up to floating arithmetic; conditioning on a situation at or below
    the gamble's depth just reads the payoff off.  Accepts an imprecise or a
    precise tree (the latter behaves as its one-point credal sets).
    """
    s = as_situation(s, tree.k)
    if f.k != tree.k:
        raise InvalidInputError("gamble and tree live on different state spaces")
    if isinstance(f, FinitaryGamble):
        return _dense_upper(tree, f, s)
    return _machine_upper(tree, f, s)


def finitary_lower(tree: Tree, f: Gamble, s: Situation = ()) -> float:
    """Conjugate lower expectation: ``-upper(-f)``."""
    return -finitary_upper(tree, -f, s)


@dataclass(frozen=True)
class _MachineSelection:
    """Precise assignment keyed by the (tree state, gamble state) product.

    Realizes the extreme-point choices an adversarial recursion made at each
    product node as an ordinary tree over situations: both coordinates are
    deterministic functions of the situation, so the selection is
    well-defined everywhere.  Situations outside the recorded layers fall
    back to the first extreme point.
    """

    base: object  # credal assignment
    gamble: MachineGamble
    choices: dict  # (level, tree state, gamble state) -> extreme-point index

    def validate(self, k: int, leaf_type: type):
        if leaf_type is not MassFunction:
            raise InvalidInputError("machine selections provide mass-function leaves")

    def _choice(self, level: int, t, q) -> int:
        return self.choices.get((level, t, q), 0)

    def local(self, s: Situation) -> MassFunction:
        t = self.base.machine_init(s)
        q = self.gamble.state_after(s)
        points = self.base.machine_leaf(t).points
        return MassFunction(points[self._choice(len(s), t, q)])

    def machine_init(self, s: Situation):
        return (len(s), self.base.machine_init(s), self.gamble.state_after(s))

    def machine_step(self, state, symbol: int):
        level, t, q = state
        return (
            level + 1,
            self.base.machine_step(t, symbol),
            self.gamble.step(level + 1, q, symbol) if level + 1 <= self.gamble.depth else q,
        )

    def machine_leaf(self, state) -> MassFunction:
        level, t, q = state
        points = self.base.machine_leaf(t).points
        return MassFunction(points[self._choice(level, t, q)])


def adversarial_selection(tree: Tree, f: Gamble, s: Situation = ()) -> PreciseTree:
    """The compatible precise tree whose choices attain the recursion value.

    Replays the backward recursion and records, at every reachable node, the
    extreme point that achieves the maximum (ties broken by lowest index).
    The returned tree plays those choices and the first extreme point
    anywhere the recursion never looked; its expectation of ``f`` given
    ``s`` equals ``finitary_upper(tree, f, s)``.
    """
    s = as_situation(s, tree.k)
    if f.k != tree.k:
        raise InvalidInputError("gamble and tree live on different state spaces")
    assignment = tree.assignment
    if isinstance(f, FinitaryGamble):
        n = f.depth
        choices: dict[Situation, MassFunction] = {}
        if len(s) < n:
            g = np.asarray(f.table[s], dtype=float)
            for level in range(n - 1, len(s) - 1, -1):
                rel = level - len(s)
                out = np.empty((tree.k,) * rel)
                for prefix in np.ndindex(*(tree.k,) * rel):
                    points = _points_of(assignment.local(s + prefix))
                    values = points @ g[prefix]
                    best = int(np.argmax(values))
                    choices[s + prefix] = MassFunction(points[best])
                    out[prefix] = float(values[best])
                g = out
        return PreciseTree(tree.state_space, SelectionOverlay(assignment, choices))

    machine = f
    picked: dict = {}
    if len(s) < machine.depth:
        layers, transitions = _machine_layers(tree, machine, s)
        payoffs = machine.payoffs()
        vals = np.array([payoffs[q] for _, q in layers[-1]])
        for li in range(len(transitions) - 1, -1, -1):
            level = len(s) + li
            nxt_vals = vals[transitions[li]]
            out = np.empty(len(layers[li]))
            for i, (t, q) in enumerate(layers[li]):
                points = _points_of(assignment.machine_leaf(t))
                values = points @ nxt_vals[i]
                best = int(np.argmax(values))
                picked[(level, t, q)] = best
                out[i] = float(values[best])
            vals = out
    return PreciseTree(tree.state_space, _MachineSelection(assignment, machine, picked))


def value_table(tree: Tree, f: FinitaryGamble) -> list[np.ndarray]:
    """Conditional upper expectations at every situation up to the depth.

    ``result[m]`` has shape ``(k,)*m`` and holds the value given each
    length-m situation; ``result[depth]`` is the payoff table itself.
    """
    if not isinstance(f, FinitaryGamble):
        raise InvalidInputError("value_table expects a dense finitary gamble")
    if f.k != tree.k:
        raise InvalidInputError("gamble and tree live on different state spaces")
    k = tree.k
    levels = [None] * (f.depth + 1)
    levels[f.depth] = np.asarray(f.table, dtype=float)
    for level in range(f.depth - 1, -1, -1):
        g = levels[level + 1]
        out = np.empty((k,) * level)
        for prefix in np.ndindex(*(k,) * level):
            points = _points_of(tree.assignment.local(prefix))
            out[prefix] = _max_dot(points, g[prefix])
        levels[level] = out
    return levels


def _audit_bound(v: LimitVariable, f: Gamble, m: int):
    lo, hi = f.bounds()
    if v.direction is Direction.NON_DECREASING and lo < v.bound - 1e-12:
        raise InvalidInputError(
            f"approximation {m} attains {lo}, below the declared lower bound {v.bound}"
        )
    if v.direction is Direction.NON_INCREASING and hi > v.bound + 1e-12:
        raise InvalidInputError(
            f"approximation {m} attains {hi}, above the declared upper bound {v.bound}"
        )


def limit_upper(
    tree: Tree, v: LimitVariable, s: Situation = (), policy: Policy = Policy()
) -> ApproxResult:
    """Upper expectation of a monotone limit of finitary gambles.

    Monotone limits of the approximations' values converge to the value of
    the limit variable, in both directions, so the iterates are the
    successive finitary upper expectations.  Stops when two successive
    iterates agree within ``policy.tol`` (stabilized), when the iterates
    grow monotonically past the divergence threshold (certified-diverging,
    value +/-inf), or at the horizon cap, in which case the last iterate is
    reported without extrapolation.
    """
    s = as_situation(s, tree.k)
    iterates: list[tuple[int, float]] = []
    prev_gamble: Gamble | None = None
    prev_val: float | None = None
    non_decreasing = v.direction is Direction.NON_DECREASING
    for m in range(policy.start_index, policy.start_index + policy.max_horizon):
        f = v.generator(m)
        _audit_bound(v, f, m)
        if prev_gamble is not None and len(iterates) <= policy.monotone_audit:
            lo_g, hi_g = (prev_gamble, f) if non_decreasing else (f, prev_gamble)
            ok, witness = pointwise_leq(lo_g, hi_g)
            if not ok:
                raise MonotonicityError(
                    f"approximations {m - 1} and {m} violate the declared direction",
                    witness,
                )
        val = finitary_upper(tree, f, s)
        iterates.append((m, val))
        if prev_val is not None:
            drift = val - prev_val if non_decreasing else prev_val - val
            if drift < -_VALUE_MONOTONE_SLACK:
                raise MonotonicityError(
                    f"iterate values move against the declared direction at index {m}",
                    f"{prev_val!r} -> {val!r}",
                )
            if abs(val - prev_val) < policy.tol:
                return ApproxResult(val, tuple(iterates), True, StopReason.STABILIZED, policy.tol)
        if non_decreasing and val > policy.divergence_threshold:
            return ApproxResult(INF, tuple(iterates), False, StopReason.DIVERGING, policy.tol)
        if not non_decreasing and val < -policy.divergence_threshold:
            return ApproxResult(-INF, tuple(iterates), False, StopReason.DIVERGING, policy.tol)
        prev_gamble, prev_val = f, val
    return ApproxResult(prev_val, tuple(iterates), False, StopReason.HORIZON_CAP, policy.tol)


def limit_lower(
    tree: Tree, v: LimitVariable, s: Situation = (), policy: Policy = Policy()
) -> ApproxResult:
    """Conjugate lower expectation of a limit variable: ``-upper(-v)``."""
    res = limit_upper(tree, -v, s, policy)
    return ApproxResult(
        -res.value,
        tuple((m, -x) for m, x in res.iterates),
        res.converged,
        res.stop_reason,
        res.tol,
    )


def upper_probability(
    tree: Tree, event: EventSpec, s: Situation = (), policy: Policy = Policy()
) -> Union[float, ApproxResult]:
    """Upper probability of an event: upper expectation of its indicator.

    Cylinder and fixed-depth union events resolve exactly through the
    finitary recursion; hitting events go through the monotone limit of
    horizon indicators and return the full :class:`ApproxResult`.
    """
    space = tree.state_space
    if isinstance(event, Cylinder):
        return finitary_upper(tree, indicator_of_cylinder(space, event.situation), s)
    if isinstance(event, UnionAtDepth):
        return finitary_upper(
            tree, indicator_of_strings(space, event.depth, event.strings), s
        )
    if isinstance(event, Hitting):
        return limit_upper(tree, hitting_event_variable(space, event.targets), s, policy)
    raise InvalidInputError(f"unknown event specification {event!r}")


def lower_probability(
    tree: Tree, event: EventSpec, s: Situation = (), policy: Policy = Policy()
) -> Union[float, ApproxResult]:
    """Lower probability of an event, by conjugacy."""
    space = tree.state_space
    if isinstance(event, Cylinder):
        return finitary_lower(tree, indicator_of_cylinder(space, event.situation), s)
    if isinstance(event, UnionAtDepth):
        return finitary_lower(
            tree, indicator_of_strings(space, event.depth, event.strings), s
        )
    if isinstance(event, Hitting):
        return limit_lower(tree, hitting_event_variable(space, event.targets), s, policy)
    raise InvalidInputError(f"unknown event specification {event!r}")
