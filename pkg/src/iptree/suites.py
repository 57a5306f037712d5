"""Randomized property suites.

Each suite draws random instances from a seeded generator, asserts a family
of exact or toleranced identities, and returns a :class:`SuiteReport` listing
every failure with a witness.  The suites are the package's evidence that the
recursion engine, the local models, and the brute-force oracle agree with
each other and with the calculus they implement; the CLI ``check`` command
and the acceptance tests both run them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import finitary_lower, finitary_upper, value_table
from .errors import InvalidInputError
from .extreal import INF, xadd, xmul
from .gambles import FinitaryGamble, restrict
from .local import (
    CredalSet,
    MassFunction,
    StateSpace,
    check_coherence_axioms,
    cut_limit_upper,
    extended_upper_expectation,
    lower_expectation,
    upper_cut,
    upper_expectation,
)
from .oracle import envelope_sup, precise_expectation
from .supermartingale import canonical_supermartingale, certified_upper_bound, verify
from .tree import (
    Homogeneous,
    ImpreciseTree,
    Markov,
    PreciseTree,
    Situation,
    Table,
    all_situations,
    local_model,
)

_LABELS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class SuiteReport:
    name: str
    trials: int
    checks: int
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "checks": self.checks,
            "passed": self.passed,
            "failures": list(self.failures),
        }

    def __str__(self):
        status = "pass" if self.passed else f"FAIL ({len(self.failures)})"
        out = f"{self.name}: {status} [{self.checks} checks over {self.trials} trials]"
        for msg in self.failures[:10]:
            out += f"\n  {msg}"
        return out


class _Recorder:
    def __init__(self, name: str, trials: int):
        self.name = name
        self.trials = trials
        self.checks = 0
        self.failures: list[str] = []

    def check(self, cond: bool, message: str):
        self.checks += 1
        if not cond:
            self.failures.append(message)

    def report(self) -> SuiteReport:
        return SuiteReport(self.name, self.trials, self.checks, tuple(self.failures))


# --- random instance generators ----------------------------------------------

def random_space(k: int) -> StateSpace:
    return StateSpace(_LABELS[:k])


def random_mass(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.dirichlet(np.ones(k) * rng.uniform(0.4, 2.0))


def random_credal(rng: np.random.Generator, k: int, max_points: int = 3) -> CredalSet:
    m = int(rng.integers(1, max_points + 1))
    return CredalSet(np.vstack([random_mass(rng, k) for _ in range(m)]))


def random_tree(
    rng: np.random.Generator,
    k: int,
    max_points: int = 3,
    table_depth: int = 2,
    selection_budget: int | None = None,
) -> ImpreciseTree:
    """Random imprecise tree of a random assignment kind.

    With a ``selection_budget`` the per-situation extreme-point counts are
    trimmed so the product over situations of length < ``table_depth + 1``
    stays under it, which keeps enumeration oracles affordable.
    """
    space = random_space(k)
    kind = rng.integers(0, 3)
    budget = selection_budget or 10**9
    # Selections multiply across situations; a depth-d payoff only sees the
    # situations of length < d, so cap points per situation at
    # floor(budget ** (1/#those situations)) to keep enumeration affordable
    # even for homogeneous and last-state models.
    n_sits = max(1, sum(k**m for m in range(table_depth)))
    uniform_cap = max(1, min(max_points, int(budget ** (1.0 / n_sits) + 1e-9)))
    if kind == 0:
        return ImpreciseTree(space, Homogeneous(random_credal(rng, k, uniform_cap)))
    if kind == 1:
        return ImpreciseTree(
            space,
            Markov(
                random_credal(rng, k, uniform_cap),
                tuple(random_credal(rng, k, uniform_cap) for _ in range(k)),
            ),
        )
    # Tables can afford richer local sets at a few situations: spend the
    # budget greedily and fall back to singletons once it runs out.
    entries = {}
    product = 1
    for s in all_situations(k, table_depth):
        cap = max_points if product * max_points <= budget else 1
        credal = random_credal(rng, k, cap)
        product *= credal.n_points
        entries[s] = credal
    return ImpreciseTree(space, Table(table_depth, entries, CredalSet(np.eye(k)[:1])))


def random_precise_tree(rng: np.random.Generator, k: int, table_depth: int = 2) -> PreciseTree:
    space = random_space(k)
    kind = rng.integers(0, 3)
    if kind == 0:
        return PreciseTree(space, Homogeneous(MassFunction(random_mass(rng, k))))
    if kind == 1:
        return PreciseTree(
            space,
            Markov(
                MassFunction(random_mass(rng, k)),
                tuple(MassFunction(random_mass(rng, k)) for _ in range(k)),
            ),
        )
    entries = {
        s: MassFunction(random_mass(rng, k)) for s in all_situations(k, table_depth)
    }
    return PreciseTree(space, Table(table_depth, entries, MassFunction(random_mass(rng, k))))


def random_gamble(
    rng: np.random.Generator, k: int, depth: int, lo: float = -5.0, hi: float = 5.0
) -> FinitaryGamble:
    return FinitaryGamble(k, rng.uniform(lo, hi, size=(k,) * depth))


def random_situation(rng: np.random.Generator, k: int, max_len: int) -> Situation:
    n = int(rng.integers(0, max_len + 1))
    return tuple(int(x) for x in rng.integers(0, k, size=n))


def random_extended(rng: np.random.Generator, k: int, p_inf: float = 0.3) -> np.ndarray:
    vals = rng.uniform(-5, 5, size=k)
    for i in range(k):
        u = rng.uniform()
        if u < p_inf / 2:
            vals[i] = INF
        elif u < p_inf:
            vals[i] = -INF
    return vals


# --- suites -------------------------------------------------------------------

def coherence_suite(seed: int, trials: int = 50, gambles_per_trial: int = 10, k_max: int = 3) -> SuiteReport:
    """C-axioms of local upper expectations on random credal sets."""
    rng = np.random.default_rng(seed)
    rec = _Recorder("local-coherence", trials)
    for t in range(trials):
        k = int(rng.integers(2, k_max + 1))
        credal = random_credal(rng, k)
        gambles = [rng.uniform(-5, 5, size=k) for _ in range(gambles_per_trial)]
        report = check_coherence_axioms(credal, gambles)
        rec.checks += report.checks_run
        for v in report.violations:
            rec.failures.append(f"trial {t}: {v.axiom} violated ({v.detail}, slack {v.slack:.2e})")
        # Conjugacy is bitwise: lower(f) == -upper(-f) by construction.
        for i, f in enumerate(gambles):
            rec.check(
                lower_expectation(credal, f) == -upper_expectation(credal, -np.asarray(f)),
                f"trial {t}: conjugacy broken on gamble #{i}",
            )
    return rec.report()


def extended_suite(seed: int, trials: int = 50, k_max: int = 3) -> SuiteReport:
    """Extended-domain axioms and the cut-limit cross-check.

    Asserts, on random credal sets and extended payoff vectors: constants are
    preserved; sub-additivity and positive homogeneity hold under extended
    arithmetic; monotone domination is respected; upper cuts converge from
    below; and the extended evaluation agrees *exactly* with the independent
    cut-limit evaluation.
    """
    rng = np.random.default_rng(seed)
    rec = _Recorder("extended-local", trials)
    for t in range(trials):
        k = int(rng.integers(2, k_max + 1))
        credal = random_credal(rng, k)
        f = random_extended(rng, k)
        g = random_extended(rng, k)

        rec.check(
            extended_upper_expectation(credal, f) == cut_limit_upper(credal, f),
            f"trial {t}: extended value disagrees with cut limit on {f.tolist()}",
        )
        c = float(rng.uniform(-4, 4))
        rec.check(
            abs(extended_upper_expectation(credal, np.full(k, c)) - c) <= 1e-9,
            f"trial {t}: constant {c} not preserved",
        )
        fg = np.array([xadd(a, b) for a, b in zip(f, g)])
        lhs = extended_upper_expectation(credal, fg)
        rhs = xadd(extended_upper_expectation(credal, f), extended_upper_expectation(credal, g))
        rec.check(lhs <= rhs + 1e-9 if np.isfinite(rhs) else lhs <= rhs,
                  f"trial {t}: sub-additivity broken: {lhs} > {rhs}")
        lam = float(rng.uniform(0.1, 3.0))
        scaled = np.array([xmul(lam, x) for x in f])
        lhs = extended_upper_expectation(credal, scaled)
        rhs = xmul(lam, extended_upper_expectation(credal, f))
        ok = lhs == rhs if not np.isfinite(rhs) else abs(lhs - rhs) <= 1e-9
        rec.check(ok, f"trial {t}: homogeneity broken at scale {lam}: {lhs} vs {rhs}")
        bump = rng.uniform(0, 3, size=k)
        dominated = np.array([xadd(a, b) for a, b in zip(f, bump)])
        rec.check(
            extended_upper_expectation(credal, f)
            <= extended_upper_expectation(credal, dominated) + 1e-9,
            f"trial {t}: monotonicity broken",
        )
        # Upper cuts: non-decreasing, and they reach the value (or certify
        # its divergence) once the cut passes every finite payoff.
        target = extended_upper_expectation(credal, np.array([x if x != -INF else -6.0 for x in f]))
        cuts = [upper_expectation(credal, upper_cut(np.where(f == -INF, -6.0, f), c))
                for c in (6.0, 12.0, 24.0)]
        rec.check(
            all(a <= b + 1e-12 for a, b in zip(cuts, cuts[1:])),
            f"trial {t}: upper cuts not monotone",
        )
        if target == INF:
            rec.check(cuts[-1] > cuts[0], f"trial {t}: cuts fail to grow toward +inf")
        else:
            rec.check(abs(cuts[-1] - target) <= 1e-9, f"trial {t}: cuts stop short of the value")
    return rec.report()


def _one_step_gamble(k: int, n: int, h: np.ndarray) -> FinitaryGamble:
    table = np.broadcast_to(np.asarray(h, dtype=float), (k,) * n + (k,))
    return FinitaryGamble(k, np.ascontiguousarray(table))


def process_suite(seed: int, trials: int = 60, max_depth: int = 3, tree_factory=None) -> SuiteReport:
    """Global-model identities on random trees, gambles, and situations.

    * one-step payoffs reduce exactly to the local upper expectation;
    * conditioning sees only the payoffs on paths through the situation;
    * the recursion satisfies the law of iterated upper expectations;
    * pointwise domination is respected;
    * conditional bounds, sub-additivity, positive homogeneity, and constant
      additivity all hold given any situation.

    ``tree_factory(rng)`` pins the tree under test; by default a fresh random
    tree is drawn per trial.
    """
    rng = np.random.default_rng(seed)
    rec = _Recorder("global-process", trials)
    for t in range(trials):
        if tree_factory is None:
            k = int(rng.integers(2, 4))
            tree = random_tree(rng, k)
        else:
            tree = tree_factory(rng)
            k = tree.k
        space = tree.state_space

        # one-step reduction, exact
        n = int(rng.integers(0, 3))
        x = tuple(int(v) for v in rng.integers(0, k, size=n))
        h = rng.uniform(-5, 5, size=k)
        leaf = local_model(tree, x)
        rec.check(
            finitary_upper(tree, _one_step_gamble(k, n, h), x) == upper_expectation(leaf, h),
            f"trial {t}: one-step value differs from the local model at {x}",
        )

        depth = int(rng.integers(1, max_depth + 1))
        f = random_gamble(rng, k, depth)
        s = random_situation(rng, k, depth)
        uf = finitary_upper(tree, f, s)

        rec.check(
            uf == finitary_upper(tree, restrict(f, s), s),
            f"trial {t}: value changed by zeroing payoffs off the situation {s}",
        )

        m = int(rng.integers(0, depth))
        iterated = FinitaryGamble(k, value_table(tree, f)[m + 1])
        for x_m in all_situations(k, m):
            if len(x_m) != m:
                continue
            lhs = finitary_upper(tree, f, x_m)
            rhs = finitary_upper(tree, iterated, x_m)
            rec.check(
                abs(lhs - rhs) <= 1e-9,
                f"trial {t}: iterated law broken at {x_m}: {lhs} vs {rhs}",
            )

        g = f + FinitaryGamble(k, rng.uniform(0, 3, size=(k,) * depth))
        rec.check(
            uf <= finitary_upper(tree, g, s) + 1e-12,
            f"trial {t}: domination not respected at {s}",
        )

        sub = f.table[s] if len(s) <= depth else f.table[s[:depth]]
        rec.check(
            float(np.min(sub)) - 1e-12 <= finitary_lower(tree, f, s) <= uf <= float(np.max(sub)) + 1e-12,
            f"trial {t}: conditional bounds broken at {s}",
        )
        g2 = random_gamble(rng, k, depth)
        rec.check(
            finitary_upper(tree, f + g2, s)
            <= uf + finitary_upper(tree, g2, s) + 1e-9,
            f"trial {t}: conditional sub-additivity broken at {s}",
        )
        lam = float(rng.uniform(0, 3))
        rec.check(
            abs(finitary_upper(tree, lam * f, s) - lam * uf) <= 1e-9,
            f"trial {t}: conditional homogeneity broken at {s}",
        )
        mu = float(rng.uniform(-4, 4))
        rec.check(
            abs(finitary_upper(tree, f + mu, s) - (uf + mu)) <= 1e-9,
            f"trial {t}: constant additivity broken at {s}",
        )
    return rec.report()


def oracle_suite(
    seed: int,
    trials: int = 50,
    max_depth: int = 4,
    ks: tuple[int, ...] = (2, 3),
    max_points: int = 3,
    budget: int = 65536,
    tol: float = 1e-9,
) -> SuiteReport:
    """Enumerated compatible-tree envelope against the recursion engine."""
    rng = np.random.default_rng(seed)
    rec = _Recorder("oracle-equivalence", trials)
    for t in range(trials):
        k = int(rng.choice(ks))
        depth = int(rng.integers(1, max_depth + 1))
        tree = random_tree(rng, k, max_points=max_points, table_depth=depth, selection_budget=budget)
        f = random_gamble(rng, k, depth)
        s = random_situation(rng, k, 1) if rng.uniform() < 0.3 else ()
        enum = envelope_sup(tree, f, s, method="enumerate", cap=budget)
        rec_val = finitary_upper(tree, f, s)
        rec.check(
            abs(enum.value - rec_val) <= tol,
            f"trial {t}: envelope {enum.value!r} vs recursion {rec_val!r} "
            f"(k={k}, depth={depth}, s={s}, {enum.count} selections)",
        )
    return rec.report()


def precise_collapse_suite(seed: int, trials: int = 50, max_depth: int = 4, tol: float = 1e-10) -> SuiteReport:
    """On precise trees: upper, lower, and the product-rule sum all agree."""
    rng = np.random.default_rng(seed)
    rec = _Recorder("precise-collapse", trials)
    for t in range(trials):
        k = int(rng.integers(2, 4))
        p = random_precise_tree(rng, k)
        depth = int(rng.integers(1, max_depth + 1))
        f = random_gamble(rng, k, depth)
        s = random_situation(rng, k, depth)
        q = p.to_imprecise()
        upper = finitary_upper(q, f, s)
        lower = finitary_lower(q, f, s)
        direct = precise_expectation(p, f, s)
        rec.check(abs(upper - lower) <= tol, f"trial {t}: upper {upper!r} != lower {lower!r}")
        rec.check(abs(upper - direct) <= tol, f"trial {t}: recursion {upper!r} != product-rule sum {direct!r}")
    return rec.report()


def fatou_suite(seed: int, trials: int = 50, max_stable_index: int = 6, tol: float = 1e-9) -> SuiteReport:
    """Lower semicontinuity along uniformly bounded-below stabilizing sequences."""
    rng = np.random.default_rng(seed)
    rec = _Recorder("fatou", trials)
    for t in range(trials):
        k = int(rng.integers(2, 4))
        tree = random_tree(rng, k)
        depth = int(rng.integers(1, 3))
        n_stable = int(rng.integers(1, max_stable_index + 1))
        seq = [random_gamble(rng, k, depth, lo=-3.0, hi=3.0) for _ in range(n_stable + 1)]
        s = random_situation(rng, k, depth)
        # Constant from index n_stable on: the pointwise liminf is the tail
        # member, and liminf of the values is the eventual (constant) value.
        liminf_gamble = seq[n_stable]
        values = [finitary_upper(tree, g, s) for g in seq]
        lhs = finitary_upper(tree, liminf_gamble, s)
        rhs = values[n_stable]
        rec.check(lhs <= rhs + tol, f"trial {t}: Fatou broken: {lhs!r} > {rhs!r}")
        # A genuinely oscillating variant: cycle through the first few
        # members; the liminf is their pointwise minimum.
        lifted = [g.lift(depth) for g in seq]
        point_min = FinitaryGamble(k, np.minimum.reduce([g.table for g in lifted]))
        rec.check(
            finitary_upper(tree, point_min, s) <= min(values) + tol,
            f"trial {t}: Fatou broken on the oscillating variant",
        )
    return rec.report()


def certificate_suite(seed: int, trials: int = 50, tol: float = 1e-9) -> SuiteReport:
    """Canonical certificates are tight; valid perturbations stay above the value."""
    rng = np.random.default_rng(seed)
    rec = _Recorder("certificates", trials)
    for t in range(trials):
        k = int(rng.integers(2, 4))
        tree = random_tree(rng, k)
        depth = int(rng.integers(1, 4))
        f = random_gamble(rng, k, depth)
        s = random_situation(rng, k, depth - 1)
        canonical = canonical_supermartingale(tree, f)
        report = verify(canonical, tree)
        rec.check(report.passed, f"trial {t}: canonical process fails verification")
        rec.check(
            max(abs(report.min_margin), abs(report.max_margin)) <= 1e-10,
            f"trial {t}: canonical process not tight "
            f"(margins {report.min_margin:.2e}..{report.max_margin:.2e})",
        )
        value = finitary_upper(tree, f, s)
        rec.check(
            abs(canonical.value(s) - value) <= 1e-10,
            f"trial {t}: canonical value {canonical.value(s)!r} != engine {value!r}",
        )
        kind = int(rng.integers(0, 3))
        if kind == 0:
            perturbed = canonical + float(rng.uniform(0, 2))
        elif kind == 1:
            extra = random_gamble(rng, k, depth, lo=0.0, hi=2.0)
            perturbed = canonical + canonical_supermartingale(tree, extra)
        else:
            g = random_gamble(rng, k, depth)
            perturbed = canonical_supermartingale(tree, g) + canonical_supermartingale(tree, f - g)
        cert = certified_upper_bound(perturbed, f, tree, s)
        rec.check(cert.valid, f"trial {t}: perturbed certificate (kind {kind}) invalid")
        rec.check(
            cert.bound >= value - tol,
            f"trial {t}: perturbed bound {cert.bound!r} fell below the value {value!r}",
        )
    return rec.report()


def envelope_axiom_suite(seed: int, trials: int = 40, tol: float = 1e-9) -> SuiteReport:
    """Global-model identities asserted for the *enumerated envelope* itself.

    Runs the one-step, conditioning, iterated-law, and domination identities
    with the brute-force envelope as the expectation operator, bypassing the
    recursion engine entirely.
    """
    rng = np.random.default_rng(seed)
    rec = _Recorder("envelope-axioms", trials)
    for t in range(trials):
        k = 2
        depth = int(rng.integers(1, 4))
        tree = random_tree(rng, k, max_points=2, table_depth=depth, selection_budget=4096)

        def env(g: FinitaryGamble, sit: Situation) -> float:
            return envelope_sup(tree, g, sit, method="enumerate", cap=200_000).value

        n = int(rng.integers(0, 2))
        x = tuple(int(v) for v in rng.integers(0, k, size=n))
        h = rng.uniform(-5, 5, size=k)
        rec.check(
            abs(env(_one_step_gamble(k, n, h), x) - upper_expectation(local_model(tree, x), h)) <= tol,
            f"trial {t}: envelope one-step reduction broken at {x}",
        )
        f = random_gamble(rng, k, depth)
        s = random_situation(rng, k, depth)
        rec.check(
            abs(env(f, s) - env(restrict(f, s), s)) <= tol,
            f"trial {t}: envelope conditioning broken at {s}",
        )
        m = int(rng.integers(0, depth))
        iterated_table = np.empty((k,) * (m + 1))
        for z in np.ndindex(*(k,) * (m + 1)):
            iterated_table[z] = env(f, z)
        for x_m in np.ndindex(*(k,) * m):
            lhs = env(f, tuple(x_m))
            rhs = env(FinitaryGamble(k, iterated_table), tuple(x_m))
            rec.check(
                abs(lhs - rhs) <= tol,
                f"trial {t}: envelope iterated law broken at {tuple(x_m)}",
            )
        g = f + FinitaryGamble(k, rng.uniform(0, 2, size=(k,) * depth))
        rec.check(env(f, s) <= env(g, s) + tol, f"trial {t}: envelope domination broken")
    return rec.report()


def model_axiom_suites(tree: ImpreciseTree, seed: int, trials: int = 50) -> list[SuiteReport]:
    """Axiom checks anchored to one concrete model.

    Runs the local coherence axioms and the extended/cut-limit agreement on
    the tree's own local credal sets (sampled over situations), then the
    global-model identity suite with the tree pinned.
    """
    rng = np.random.default_rng(seed)
    rec = _Recorder("model-local-coherence", trials)
    for t in range(trials):
        s = random_situation(rng, tree.k, 4)
        credal = local_model(tree, s)
        gambles = [rng.uniform(-5, 5, size=tree.k) for _ in range(8)]
        report = check_coherence_axioms(credal, gambles)
        rec.checks += report.checks_run
        for v in report.violations:
            rec.failures.append(f"trial {t} at {s}: {v.axiom} violated ({v.detail})")
        f = random_extended(rng, tree.k)
        rec.check(
            extended_upper_expectation(credal, f) == cut_limit_upper(credal, f),
            f"trial {t} at {s}: extended value disagrees with cut limit",
        )
    local_rep = rec.report()
    proc_rep = process_suite(seed + 1, trials, tree_factory=lambda _rng: tree)
    return [local_rep, proc_rep]


def model_oracle_suite(
    tree: ImpreciseTree,
    seed: int,
    trials: int = 50,
    depth: int = 3,
    cap: int = 200_000,
    tol: float = 1e-9,
) -> SuiteReport:
    """Envelope-vs-recursion agreement on one concrete model."""
    rng = np.random.default_rng(seed)
    rec = _Recorder("model-oracle", trials)
    for t in range(trials):
        d = int(rng.integers(1, depth + 1))
        f = random_gamble(rng, tree.k, d)
        s = random_situation(rng, tree.k, 1) if rng.uniform() < 0.3 else ()
        enum = envelope_sup(tree, f, s, method="enumerate", cap=cap)
        rec_val = finitary_upper(tree, f, s)
        rec.check(
            abs(enum.value - rec_val) <= tol,
            f"trial {t}: envelope {enum.value!r} vs recursion {rec_val!r} (depth={d}, s={s})",
        )
    return rec.report()


def degenerate_tree(space: StateSpace, state: int | str) -> ImpreciseTree:
    """The tree that moves to one fixed state with certainty, everywhere."""
    idx = space.index(state) if isinstance(state, str) else int(state)
    if not 0 <= idx < space.size:
        raise InvalidInputError(f"state index {idx} out of range")
    point = np.zeros(space.size)
    point[idx] = 1.0
    return ImpreciseTree(space, Homogeneous(CredalSet(point[None, :])))
