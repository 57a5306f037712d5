import numpy as np
import pytest

from iptree.engine import finitary_upper
from iptree.errors import InvalidInputError
from iptree.expr import compile_gamble, parse_gamble
from iptree.extreal import INF
from iptree.gambles import FinitaryGamble
from iptree.supermartingale import (
    TailConstantProcess,
    canonical_supermartingale,
    certified_upper_bound,
    verify,
)
from iptree.suites import random_gamble, random_situation, random_tree


def expr_gamble(source, space):
    return compile_gamble(parse_gamble(source, space))


class TestTailConstantProcess:
    def test_value_uses_tail_rule(self):
        p = TailConstantProcess(2, (np.asarray(1.0), np.array([2.0, 3.0])))
        assert p.value(()) == 1.0
        assert p.value((1,)) == 3.0
        assert p.value((1, 0, 1)) == 3.0  # frozen past the depth

    def test_minus_inf_rejected(self):
        with pytest.raises(InvalidInputError):
            TailConstantProcess(2, (np.asarray(-INF),))

    def test_plus_inf_allowed(self):
        p = TailConstantProcess(2, (np.asarray(0.0), np.array([INF, 0.0])))
        assert p.value((0,)) == INF

    def test_sum_lifts_tail(self):
        a = TailConstantProcess(2, (np.asarray(1.0), np.array([2.0, 3.0])))
        b = TailConstantProcess(
            2, (np.asarray(0.5), np.array([1.0, 1.0]), np.array([[1.0, 2.0], [3.0, 4.0]]))
        )
        c = a + b
        assert c.depth == 2
        assert c.value(()) == 1.5
        assert c.value((1, 0)) == 3.0 + 3.0

    def test_scalar_shift(self):
        a = TailConstantProcess(2, (np.asarray(1.0),))
        assert (a + 2.0).value(()) == 3.0


class TestVerify:
    def test_constant_process_passes(self, imprecise_coin):
        p = TailConstantProcess(2, (np.asarray(4.0), np.full(2, 4.0)))
        assert verify(p, imprecise_coin).passed

    def test_canonical_passes_with_zero_slack(self, coin_space, imprecise_coin):
        f = expr_gamble("ind(X[1]==H && X[2]==H)", coin_space)
        report = verify(canonical_supermartingale(imprecise_coin, f), imprecise_coin)
        assert report.passed
        assert abs(report.min_margin) <= 1e-12 and abs(report.max_margin) <= 1e-12

    def test_growth_at_root_fails(self, imprecise_coin):
        p = TailConstantProcess(2, (np.asarray(0.0), np.full(2, 1.0)))
        report = verify(p, imprecise_coin)
        assert not report.passed
        assert report.violations[0].situation == ()
        assert report.violations[0].slack == pytest.approx(-1.0)

    def test_infinite_value_dominates_anything(self, imprecise_coin):
        p = TailConstantProcess(2, (np.asarray(INF), np.full(2, 1e9)))
        assert verify(p, imprecise_coin).passed


class TestCanonical:
    def test_fair_coin_one_step(self, coin_space, fair_coin):
        f = expr_gamble("ind(X[1]==H)", coin_space)
        m = canonical_supermartingale(fair_coin, f)
        assert m.value(()) == 0.5
        assert m.value((0,)) == 1.0
        assert m.value((1,)) == 0.0

    def test_imprecise_coin_two_heads(self, coin_space, imprecise_coin):
        f = expr_gamble("ind(X[1]==H && X[2]==H)", coin_space)
        m = canonical_supermartingale(imprecise_coin, f)
        assert m.value(()) == pytest.approx(0.36)
        assert m.value((0,)) == pytest.approx(0.6)
        assert m.value((1,)) == 0.0
        assert np.array_equal(m.levels[2], f.table)

    def test_constant_gamble_gives_constant_process(self, imprecise_coin):
        f = FinitaryGamble.constant(2, 3.0).lift(1)
        m = canonical_supermartingale(imprecise_coin, f)
        assert m.value(()) == 3.0 and m.value((0,)) == 3.0


class TestCertificates:
    def test_canonical_certificate_is_tight(self, coin_space, imprecise_coin):
        f = expr_gamble("ind(X[1]==H && X[2]==H)", coin_space)
        cert = certified_upper_bound(canonical_supermartingale(imprecise_coin, f), f, imprecise_coin)
        assert cert.valid
        assert cert.gap == pytest.approx(0.0, abs=1e-12)

    def test_shifted_certificate_bound(self, coin_space, imprecise_coin):
        f = expr_gamble("ind(X[1]==H && X[2]==H)", coin_space)
        m = canonical_supermartingale(imprecise_coin, f) + 0.25
        cert = certified_upper_bound(m, f, imprecise_coin)
        assert cert.valid
        assert cert.gap == pytest.approx(0.25, abs=1e-12)

    def test_domination_failure_lists_witnesses(self, coin_space, imprecise_coin):
        f = expr_gamble("ind(X[1]==H && X[2]==H)", coin_space)
        m = canonical_supermartingale(imprecise_coin, f)
        broken = TailConstantProcess(
            2, (m.levels[0], m.levels[1], m.levels[2] - np.eye(2)[0][:, None] * 2.0)
        )
        cert = certified_upper_bound(broken, f, imprecise_coin)
        assert not cert.valid
        assert (0, 0) in cert.domination_witnesses

    def test_depth_too_small_rejected(self, coin_space, imprecise_coin):
        f = expr_gamble("ind(X[1]==H && X[2]==H)", coin_space)
        shallow = TailConstantProcess(2, (np.asarray(1.0), np.full(2, 1.0)))
        with pytest.raises(InvalidInputError):
            certified_upper_bound(shallow, f, imprecise_coin)

    def test_minimality_on_random_instances(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            k = int(rng.integers(2, 4))
            tree = random_tree(rng, k)
            f = random_gamble(rng, k, int(rng.integers(1, 4)))
            s = random_situation(rng, k, f.depth - 1)
            m = canonical_supermartingale(tree, f) + float(rng.uniform(0, 1))
            cert = certified_upper_bound(m, f, tree, s)
            assert cert.valid
            assert cert.bound >= finitary_upper(tree, f, s) - 1e-9

    def test_sum_of_verified_processes_verifies(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            k = int(rng.integers(2, 4))
            tree = random_tree(rng, k)
            m1 = canonical_supermartingale(tree, random_gamble(rng, k, 2))
            m2 = canonical_supermartingale(tree, random_gamble(rng, k, int(rng.integers(1, 4))))
            assert verify(m1 + m2, tree).passed
