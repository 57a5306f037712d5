"""Measure-theoretic side: precise trees, their expectations, and the
compatible-tree envelope used as a brute-force oracle.

A precise tree induces a conditional probability on finite-depth events by
the product rule: the probability of reaching ``z`` from ``x`` multiplies the
one-step probabilities along the way (1 when ``z`` is a prefix of ``x``, 0
when the strings disagree).  The expectation of a finitary gamble is the
finite weighted sum of its payoffs under those probabilities.

For an imprecise tree, every selection of one extreme point per situation is
a compatible precise tree; the supremum of their expectations is the
measure-theoretic upper envelope.  On finitary gambles that envelope equals
the backward-recursion value, which is exactly what makes exhaustive
enumeration a meaningful independent oracle for the engine.  For limit
variables only one-sided domination is finitely checkable, and
:func:`domination_check` verifies it against sampled compatible trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .engine import ApproxResult, Policy, StopReason, finitary_upper, _machine_layers
from .errors import InvalidInputError, ResourceLimitError
from .gambles import FinitaryGamble, Gamble, LimitVariable, MachineGamble
from .local import MassFunction
from .tree import (
    DEFAULT_ENUM_CAP,
    ImpreciseTree,
    PreciseTree,
    SelectionOverlay,
    Situation,
    all_situations,
    as_situation,
    is_compatible,
    local_model,
)

#: Agreement tolerance between the enumerated envelope and the recursion.
ORACLE_TOL = 1e-9

#: Per-selection values are reported in full up to this enumeration size.
AUDIT_LIMIT = 64


def conditional_prob(p: PreciseTree, z: Situation, x: Situation) -> float:
    """Probability of passing through ``z`` given passage through ``x``.

    Three cases: the product of one-step probabilities from ``x`` to ``z``
    when ``z`` strictly extends ``x``; 1 when ``z`` is a prefix of ``x``
    (the conditioning already implies it); 0 when the strings disagree.
    """
    z = as_situation(z, p.k)
    x = as_situation(x, p.k)
    n, m = len(x), len(z)
    if n < m:
        if z[:n] != x:
            return 0.0
        prob = 1.0
        for i in range(n, m):
            mass = local_model(p, z[:i])
            prob *= float(mass.weights[z[i]])
        return prob
    return 1.0 if z == x[:m] else 0.0


def _dense_precise(p: PreciseTree, f: FinitaryGamble, s: Situation) -> float:
    k = p.k
    n = f.depth
    if len(s) >= n:
        return float(f.table[s[:n]])
    rel = n - len(s)
    dist = np.ones(())
    for m in range(rel):
        out = np.empty((k,) * (m + 1))
        for prefix in np.ndindex(*(k,) * m):
            weights = local_model(p, s + prefix).weights
            out[prefix] = dist[prefix] * weights
        dist = out
    return float((dist * np.asarray(f.table[s], dtype=float)).sum())


def _machine_precise(p: PreciseTree, f: MachineGamble, s: Situation) -> float:
    if len(s) >= f.depth:
        return f.payoff(s)
    layers, transitions = _machine_layers(p, f, s)
    dist = np.array([1.0])
    assignment = p.assignment
    for li, table in enumerate(transitions):
        nxt = np.zeros(len(layers[li + 1]))
        for i, (t, _) in enumerate(layers[li]):
            if dist[i] == 0.0:
                continue
            weights = assignment.machine_leaf(t).weights
            for y in range(p.k):
                nxt[table[i, y]] += dist[i] * weights[y]
        dist = nxt
    payoffs = f.payoffs()
    return float(sum(w * payoffs[q] for w, (_, q) in zip(dist, layers[-1])))


def precise_expectation(p: PreciseTree, f: Gamble, s: Situation = ()) -> float:
    """Expectation of a finitary gamble under a precise tree, given ``s``.

    The finite sum of payoffs weighted by :func:`conditional_prob`, organized
    as a forward pass; linear in the gamble and constant-additive.
    """
    s = as_situation(s, p.k)
    if f.k != p.k:
        raise InvalidInputError("gamble and tree live on different state spaces")
    if isinstance(f, FinitaryGamble):
        return _dense_precise(p, f, s)
    return _machine_precise(p, f, s)


@dataclass(frozen=True)
class EnvelopeResult:
    """Supremum of compatible-tree expectations, with its attaining selection."""

    value: float
    method: str
    count: int
    argmax: dict[Situation, int] | None
    per_selection: tuple[float, ...] | None

    def to_json(self, space=None) -> dict:
        from .tree import format_situation

        def key(sit):
            return format_situation(space, sit) if space is not None else ",".join(map(str, sit))

        out = {"value": self.value, "method": self.method, "count": self.count}
        if self.argmax is not None:
            out["argmax"] = {key(sit): int(e) for sit, e in sorted(self.argmax.items())}
        if self.per_selection is not None:
            out["per_selection"] = list(self.per_selection)
        return out


def _enumerate_values(
    q: ImpreciseTree, table: np.ndarray, t: Situation
) -> tuple[np.ndarray, Callable[[int], dict[Situation, int]]]:
    """Expectations of a payoff subtable under every extreme-point selection.

    ``table`` holds the payoffs for strings extending ``t``.  Returns a flat
    value per selection and a decoder from flat index to per-situation
    extreme-point choices.  Introspects nothing about the recursion engine:
    values are assembled bottom-up by plain weighted sums.
    """
    if table.ndim == 0:
        return np.asarray([float(table)]), lambda idx: {}
    k = q.k
    points = local_model(q, t).points
    children = [_enumerate_values(q, table[y], t + (y,)) for y in range(k)]
    child_vals = [c[0] for c in children]
    dims = (points.shape[0],) + tuple(v.size for v in child_vals)
    acc = np.zeros(dims)
    for y in range(k):
        shape = [1] * (k + 1)
        shape[0] = dims[0]
        weight = points[:, y].reshape(shape)
        shape = [1] * (k + 1)
        shape[y + 1] = dims[y + 1]
        acc = acc + weight * child_vals[y].reshape(shape)

    def decode(idx: int) -> dict[Situation, int]:
        combo = np.unravel_index(idx, dims)
        choices = {t: int(combo[0])}
        for y in range(k):
            choices.update(children[y][1](int(combo[y + 1])))
        return choices

    return acc.reshape(-1), decode


def envelope_sup(
    q: ImpreciseTree,
    f: Gamble,
    s: Situation = (),
    method: Literal["enumerate", "recursion"] = "enumerate",
    cap: int = DEFAULT_ENUM_CAP,
    table_cap: int = 65536,
) -> EnvelopeResult:
    """Upper envelope of compatible-tree expectations of a finitary gamble.

    ``method="enumerate"`` brute-forces every selection of one extreme point
    per situation in the subtree below ``s`` (the only choices the payoff can
    see) and reports the maximizing selection; it is the oracle.
    ``method="recursion"`` delegates to the engine.   Both agree within
    ``ORACLE_TOL`` on every input; the acceptance suite enforces it.
    """
    s = as_situation(s, q.k)
    if method == "recursion":
        return EnvelopeResult(finitary_upper(q, f, s), "recursion", 0, None, None)
    if method != "enumerate":
        raise InvalidInputError(f"unknown envelope method {method!r}")
    dense = f.to_dense(cap=table_cap)
    count = 1
    for t in all_situations(q.k, max(dense.depth - 1, 0)):
        if len(s) <= len(t) < dense.depth and t[: len(s)] == s:
            count *= local_model(q, t).n_points
    if count > cap:
        raise ResourceLimitError(
            f"enumerating {count} compatible selections exceeds the cap of {cap}"
        )
    if len(s) >= dense.depth:
        value = float(dense.table[s[: dense.depth]])
        return EnvelopeResult(value, "enumerate", 1, {}, (value,))
    sub = np.asarray(dense.table[s], dtype=float)
    values, decode = _enumerate_values(q, sub, s)
    best = int(np.argmax(values))
    per_selection = tuple(float(v) for v in values) if values.size <= AUDIT_LIMIT else None
    return EnvelopeResult(float(values[best]), "enumerate", values.size, decode(best), per_selection)


def selection_tree(q: ImpreciseTree, choices: dict[Situation, int]) -> PreciseTree:
    """Build the compatible precise tree that realizes an argmax selection.

    Situations named in ``choices`` use the indicated extreme point; all
    others fall back to the first extreme point of their local model.
    """
    chosen = {
        sit: MassFunction(local_model(q, sit).points[e]) for sit, e in choices.items()
    }
    return PreciseTree(q.state_space, SelectionOverlay(q.assignment, chosen))


def sample_compatible(
    q: ImpreciseTree, depth: int, count: int, rng: np.random.Generator
) -> list[PreciseTree]:
    """Random compatible precise trees: hull mixtures up to ``depth``.

    Each sampled tree draws a Dirichlet-weighted mixture of the local extreme
    points at every situation of length < ``depth`` and uses the first
    extreme point beyond, so compatibility holds at every depth.
    """
    sits = list(all_situations(q.k, depth - 1)) if depth > 0 else []
    trees = []
    for _ in range(count):
        choices = {}
        for t in sits:
            points = local_model(q, t).points
            weights = rng.dirichlet(np.ones(points.shape[0]))
            choices[t] = MassFunction(weights @ points)
        trees.append(PreciseTree(q.state_space, SelectionOverlay(q.assignment, choices)))
    return trees


@dataclass(frozen=True)
class SampleVerdict:
    limit: ApproxResult
    ok: bool
    gap: float  # engine upper value minus the sample's limit


@dataclass(frozen=True)
class DominationReport:
    upper: ApproxResult
    samples: tuple[SampleVerdict, ...]
    passed: bool

    def min_gap(self) -> float:
        return min(v.gap for v in self.samples)


def _precise_limit(
    p: PreciseTree, v: LimitVariable, s: Situation, policy: Policy
) -> ApproxResult:
    iterates = []
    prev = None
    for m in range(policy.start_index, policy.start_index + policy.max_horizon):
        val = precise_expectation(p, v.generator(m), s)
        iterates.append((m, val))
        if prev is not None and abs(val - prev) < policy.tol:
            return ApproxResult(val, tuple(iterates), True, StopReason.STABILIZED, policy.tol)
        prev = val
    return ApproxResult(prev, tuple(iterates), False, StopReason.HORIZON_CAP, policy.tol)


def domination_check(
    q: ImpreciseTree,
    v: LimitVariable,
    s: Situation = (),
    samples: list[PreciseTree] | None = None,
    policy: Policy = Policy(),
    tol: float = ORACLE_TOL,
    compat_depth: int = 4,
) -> DominationReport:
    """Verify that sampled compatible trees never beat the engine's value.

    Every sample must pass :func:`~iptree.tree.is_compatible` (to
    ``compat_depth``); its expectation limit along the approximating sequence
    (monotone for precise trees, so the limit exists) must stay below the
    engine's upper value plus ``tol``.
    """
    from .engine import limit_upper

    if samples is None or not samples:
        raise InvalidInputError("domination_check needs at least one sampled tree")
    for i, p in enumerate(samples):
        if not is_compatible(p, q, compat_depth):
            raise InvalidInputError(f"sample #{i} is not compatible with the imprecise tree")
    upper = limit_upper(q, v, s, policy)
    verdicts = []
    for p in samples:
        res = _precise_limit(p, v, s, policy)
        gap = upper.value - res.value
        verdicts.append(SampleVerdict(res, gap >= -tol, gap))
    return DominationReport(upper, tuple(verdicts), all(x.ok for x in verdicts))
