"""Local uncertainty models on a finite state space.

A local model describes beliefs about the *next* state of the process.  It is
a credal set: a finite list of probability mass functions (its extreme
points), and the induced upper expectation of a payoff vector ``f`` is the
maximum of ``sum_x f(x) p(x)`` over those points.  The conjugate lower
expectation is ``-upper(-f)``.

Payoff vectors ("local gambles") are plain float arrays of length ``k``.
Finite-valued gambles are the primary domain; vectors with +/-inf entries are
supported through :func:`extended_upper_expectation`, which evaluates each
extreme point under the extended-arithmetic conventions of :mod:`.extreal`,
and through :func:`cut_limit_upper`, an independent evaluation of the same
quantity as a double limit of clipped finite gambles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .extreal import INF, check_no_nan, xdot

#: |sum(weights) - 1| beyond this is rejected instead of renormalized.
MASS_SUM_TOL = 1e-9

#: Default tolerance for the coherence-axiom checker.
AXIOM_TOL = 1e-9


@dataclass(frozen=True)
class StateSpace:
    """Ordered finite set of state labels; index <-> label is stable."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 1:
            raise InvalidInputError("state space needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidInputError("state labels must be distinct")
        object.__setattr__(self, "_index", {l: i for i, l in enumerate(self.labels)})

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InvalidInputError(
                f"unknown state label {label!r}; states are {list(self.labels)}"
            ) from None


def _frozen_array(values, what: str) -> np.ndarray:
    arr = check_no_nan(values, what).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class MassFunction:
    """Probability mass function on the state space.

    Weights must be non-negative and sum to 1 within ``MASS_SUM_TOL``; they
    are renormalized exactly on construction, so stored weights sum to 1 to
    machine precision.
    """

    weights: np.ndarray

    def __post_init__(self):
        arr = check_no_nan(self.weights, "probability weight")
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidInputError("mass function must be a non-empty vector")
        if (arr < 0).any():
            raise InvalidInputError("mass function weights must be non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > MASS_SUM_TOL:
            raise InvalidInputError(
                f"mass function weights sum to {total!r}, not 1 (tolerance {MASS_SUM_TOL})"
            )
        # Renormalize only outside the invariant band: division by a sum one
        # ulp away from 1 is not idempotent and would break round-trips.
        if abs(total - 1.0) > 1e-12:
            arr = arr / total
        object.__setattr__(self, "weights", _frozen_array(arr, "probability weight"))

    @property
    def k(self) -> int:
        return self.weights.size

    def __eq__(self, other) -> bool:
        return isinstance(other, MassFunction) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True)
class CredalSet:
    """Non-empty finite set of mass functions, stored as a (m, k) matrix.

    Rows are extreme points.  Exact (bitwise) duplicates are dropped on
    construction; no convex-hull reduction is attempted.
    """

    points: np.ndarray = field()

    def __post_init__(self):
        arr = check_no_nan(self.points, "extreme point weight")
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError("credal set needs a non-empty (m, k) matrix of extreme points")
        rows = []
        seen = set()
        for row in arr:
            p = MassFunction(row).weights
            key = p.tobytes()
            if key not in seen:
                seen.add(key)
                rows.append(p)
        mat = np.vstack(rows)
        mat.flags.writeable = False
        object.__setattr__(self, "points", mat)

    @classmethod
    def from_mass_functions(cls, mass_functions) -> "CredalSet":
        return cls(np.vstack([m.weights for m in mass_functions]))

    @classmethod
    def singleton(cls, mass: MassFunction) -> "CredalSet":
        return cls(mass.weights[None, :])

    @classmethod
    def vacuous(cls, k: int) -> "CredalSet":
        """All degenerate mass functions: the least informative model."""
        return cls(np.eye(k))

    @property
    def k(self) -> int:
        return self.points.shape[1]

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def is_precise(self) -> bool:
        return self.n_points == 1

    def mass_functions(self) -> list[MassFunction]:
        return [MassFunction(row) for row in self.points]

    def __eq__(self, other) -> bool:
        return isinstance(other, CredalSet) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


def _check_gamble(credal: CredalSet, f, require_finite: bool) -> np.ndarray:
    arr = check_no_nan(f, "gamble payoff")
    if arr.ndim != 1 or arr.size != credal.k:
        raise InvalidInputError(
            f"gamble has length {arr.size if arr.ndim == 1 else arr.shape}, "
            f"state space has size {credal.k}"
        )
    if require_finite and not np.isfinite(arr).all():
        raise InvalidInputError("this operation requires a finite-valued gamble")
    return arr


def upper_expectation(credal: CredalSet, f) -> float:
    """Maximum of ``p . f`` over the extreme points, for finite ``f``."""
    arr = _check_gamble(credal, f, require_finite=True)
    return float((credal.points @ arr).max())


def lower_expectation(credal: CredalSet, f) -> float:
    """Conjugate of :func:`upper_expectation`: ``-upper(-f)``."""
    return -upper_expectation(credal, -np.asarray(f, dtype=float))


def extended_upper_expectation(credal: CredalSet, f) -> float:
    """Upper expectation of a possibly infinite-valued payoff vector.

    Each extreme point is evaluated with :func:`iptree.extreal.xdot`
    (finite terms first, then +inf terms, then -inf terms, with
    ``+inf - inf == +inf``), and the maximum is returned.  Coincides with
    :func:`upper_expectation` on finite gambles.
    """
    arr = _check_gamble(credal, f, require_finite=False)
    if np.isfinite(arr).all():
        return upper_expectation(credal, arr)
    return max(xdot(p, arr) for p in credal.points)


def upper_cut(f, c: float) -> np.ndarray:
    """Pointwise ``min(f, c)``."""
    return np.minimum(np.asarray(f, dtype=float), c)


def lower_cut(f, c: float) -> np.ndarray:
    """Pointwise ``max(f, c)``."""
    return np.maximum(np.asarray(f, dtype=float), c)


@dataclass(frozen=True)
class CutLimitResult:
    """Trace of a cut-limit evaluation: clip levels with their finite values."""

    value: float
    iterates: tuple[tuple[float, float], ...]  # (cut magnitude, clipped value)


def cut_limit_upper(credal: CredalSet, f, schedule=None) -> float:
    """Upper expectation of ``f`` as a double limit of clipped gambles.

    Evaluates ``lim_{c -> -inf} lim_{d -> +inf} upper(min(max(f, c), d))``.
    Every clipped gamble is finite, so the inner evaluations go through
    :func:`upper_expectation` untouched.  For a fixed clip level the value of
    each extreme point is affine in the clip magnitude, and a maximum of
    finitely many monotone affine functions commutes with the limit, which is
    what makes the double limit exactly computable:

    * inner limit (d): +inf as soon as some extreme point puts positive mass
      on a +inf coordinate, otherwise already stabilized;
    * outer limit (c): discard points with positive mass on -inf coordinates;
      -inf when none survive.

    Serves as an independent check of :func:`extended_upper_expectation`;
    the two must agree exactly on every input.

    ``schedule`` is an increasing sequence of clip magnitudes used for the
    reported finite evaluations (defaults to a doubling schedule past the
    largest finite payoff).  Use :func:`cut_limit_trace` to inspect them.
    """
    return cut_limit_trace(credal, f, schedule).value


def cut_limit_trace(credal: CredalSet, f, schedule=None) -> CutLimitResult:
    arr = _check_gamble(credal, f, require_finite=False)
    finite = np.isfinite(arr)
    base = float(np.abs(arr[finite]).max()) if finite.any() else 0.0
    if schedule is None:
        start = max(1.0, base + 1.0)
        schedule = [start * (2.0**i) for i in range(4)]
    schedule = [float(c) for c in schedule]
    if any(c2 <= c1 for c1, c2 in zip(schedule, schedule[1:])) or not schedule:
        raise InvalidInputError("cut schedule must be non-empty and strictly increasing")

    iterates = tuple(
        (c, upper_expectation(credal, np.clip(arr, -c, c))) for c in schedule
    )

    pos = arr == INF
    neg = arr == -INF
    pos_mass = credal.points[:, pos].sum(axis=1)
    if (pos_mass > 0.0).any():
        return CutLimitResult(INF, iterates)
    # No point can reach +inf; drop the points dragged to -inf by the outer cut.
    survivors = credal.points[:, neg].sum(axis=1) == 0.0
    if not survivors.any():
        return CutLimitResult(-INF, iterates)
    vals = credal.points[np.ix_(survivors, finite)] @ arr[finite]
    return CutLimitResult(float(vals.max()), iterates)


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    detail: str
    slack: float


@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    checks_run: int
    violations: tuple[AxiomViolation, ...]

    def __str__(self):
        if self.passed:
            return f"coherence axioms: all {self.checks_run} checks passed"
        lines = [f"coherence axioms: {len(self.violations)} violation(s) in {self.checks_run} checks"]
        lines += [f"  {v.axiom}: {v.detail} (slack {v.slack:.3e})" for v in self.violations]
        return "\n".join(lines)


def check_coherence_axioms(credal: CredalSet, sample_gambles, tol: float = AXIOM_TOL) -> AxiomReport:
    """Assert the coherence axioms of the upper expectation on sample gambles.

    Checked properties, writing ``U`` for the upper expectation and ``L`` for
    its conjugate lower expectation:

    * upper bound:        U(f) <= sup f
    * sub-additivity:     U(f+g) <= U(f) + U(g)   (consecutive sample pairs)
    * homogeneity:        U(a f) == a U(f) for a in {0, 0.5, 1, 2}
    * monotonicity:       f <= g  =>  U(f) <= U(g)   (via f and f + |h|)
    * bounds:             inf f <= L(f) <= U(f) <= sup f
    * constant shift:     U(f + m) == U(f) + m
    * Lipschitz bound:    |U(f) - U(g)| <= sup|f - g|

    Returns a report listing every violated check with a witness description.
    """
    gambles = [_check_gamble(credal, g, require_finite=True) for g in sample_gambles]
    if not gambles:
        raise InvalidInputError("need at least one sample gamble")
    violations: list[AxiomViolation] = []
    checks = 0

    def note(cond: bool, axiom: str, detail: str, slack: float):
        nonlocal checks
        checks += 1
        if not cond:
            violations.append(AxiomViolation(axiom, detail, slack))

    for i, f in enumerate(gambles):
        uf = upper_expectation(credal, f)
        lf = lower_expectation(credal, f)
        note(uf <= f.max() + tol, "upper-bound", f"gamble #{i}", uf - f.max())
        note(f.min() - tol <= lf <= uf + tol, "bounds", f"gamble #{i}", max(f.min() - lf, lf - uf))
        for lam in (0.0, 0.5, 1.0, 2.0):
            ulam = upper_expectation(credal, lam * f)
            note(
                abs(ulam - lam * uf) <= tol,
                "homogeneity",
                f"gamble #{i}, scale {lam}",
                abs(ulam - lam * uf),
            )
        shift = 1.0 + 0.25 * i
        note(
            abs(upper_expectation(credal, f + shift) - (uf + shift)) <= tol,
            "constant-shift",
            f"gamble #{i}, shift {shift}",
            abs(upper_expectation(credal, f + shift) - (uf + shift)),
        )
        g = f + np.abs(gambles[(i + 1) % len(gambles)])
        note(
            uf <= upper_expectation(credal, g) + tol,
            "monotonicity",
            f"gamble #{i} vs dominating partner",
            uf - upper_expectation(credal, g),
        )

    for i in range(len(gambles) - 1):
        f, g = gambles[i], gambles[i + 1]
        usum = upper_expectation(credal, f + g)
        bound = upper_expectation(credal, f) + upper_expectation(credal, g)
        note(usum <= bound + tol, "sub-additivity", f"gambles #{i}, #{i + 1}", usum - bound)
        gap = abs(upper_expectation(credal, f) - upper_expectation(credal, g))
        lip = float(np.abs(f - g).max())
        note(gap <= lip + tol, "lipschitz", f"gambles #{i}, #{i + 1}", gap - lip)

    return AxiomReport(not violations, checks, tuple(violations))
