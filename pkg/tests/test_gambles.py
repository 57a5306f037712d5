import numpy as np
import pytest

from iptree.errors import InvalidInputError, ResourceLimitError
from iptree.gambles import (
    FinitaryGamble,
    as_machine,
    hitting_indicator,
    hitting_time_variable,
    indicator_of_cylinder,
    pointwise_leq,
    restrict,
    truncated_hitting_time,
)
from iptree.local import StateSpace


@pytest.fixture
def space():
    return StateSpace(("H", "T"))


class TestFinitaryGamble:
    def test_constant_depth_zero(self):
        f = FinitaryGamble.constant(2, 3.5)
        assert f.depth == 0
        assert f.payoff(()) == 3.5
        assert f.payoff((0, 1)) == 3.5

    def test_payoff_lookup(self):
        f = FinitaryGamble(2, np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert f.payoff((1, 0)) == 3.0
        assert f.payoff((1, 0, 1)) == 3.0  # extra states ignored
        with pytest.raises(InvalidInputError):
            f.payoff((1,))

    def test_rejects_infinite_payoffs(self):
        with pytest.raises(InvalidInputError):
            FinitaryGamble(2, np.array([np.inf, 0.0]))

    def test_lift_preserves_payoffs(self):
        f = FinitaryGamble(2, np.array([1.0, 2.0]))
        g = f.lift(3)
        assert g.depth == 3
        for string in np.ndindex(2, 2, 2):
            assert g.payoff(string) == f.payoff(string)

    def test_arithmetic_lifts_to_common_depth(self):
        f = FinitaryGamble(2, np.array([1.0, 2.0]))
        g = FinitaryGamble(2, np.array([[1.0, 0.0], [0.0, 1.0]]))
        h = f + g
        assert h.depth == 2
        assert h.payoff((1, 1)) == 3.0
        assert (-f).payoff((0,)) == -1.0
        assert (2.0 * f).payoff((1,)) == 4.0


class TestRestrict:
    def test_zero_off_the_situation(self, space):
        f = FinitaryGamble.constant(2, 1.0).lift(1)
        r = restrict(f, (0,))
        assert r.payoff((0,)) == 1.0
        assert r.payoff((1,)) == 0.0

    def test_idempotent(self):
        f = FinitaryGamble(2, np.arange(8.0).reshape(2, 2, 2))
        once = restrict(f, (1, 0))
        twice = restrict(once, (1, 0))
        assert np.array_equal(once.table, twice.table)

    def test_root_restriction_is_identity(self):
        f = FinitaryGamble(2, np.arange(4.0).reshape(2, 2))
        assert np.array_equal(restrict(f, ()).table, f.table)

    def test_too_long_situation_rejected(self):
        f = FinitaryGamble(2, np.array([1.0, 2.0]))
        with pytest.raises(InvalidInputError):
            restrict(f, (0, 1))


class TestHittingConstructs:
    def test_truncated_hitting_time_payoffs(self, space):
        tau = truncated_hitting_time(space, ["T"], 3)
        assert tau.payoff((0, 0, 0)) == 3.0  # never hit within horizon
        assert tau.payoff((0, 1, 0)) == 2.0
        assert tau.payoff((1, 1, 1)) == 1.0

    def test_matches_dense_enumeration(self, space):
        tau = truncated_hitting_time(space, ["T"], 4)
        dense = tau.to_dense()
        for string in np.ndindex(*(2,) * 4):
            first = next((i + 1 for i, x in enumerate(string) if x == 1), 4)
            assert dense.payoff(string) == float(first) == tau.payoff(string)

    def test_indicator(self, space):
        ind = hitting_indicator(space, ["T"], 2)
        assert ind.payoff((0, 0)) == 0.0
        assert ind.payoff((0, 1)) == 1.0

    def test_empty_target_rejected(self, space):
        with pytest.raises(InvalidInputError):
            truncated_hitting_time(space, [], 3)
        with pytest.raises(InvalidInputError):
            truncated_hitting_time(space, ["T"], 0)

    def test_sequence_monotone_and_bounded(self, space):
        v = hitting_time_variable(space, ["T"])
        for m in range(1, 6):
            ok, _ = pointwise_leq(v.generator(m), v.generator(m + 1))
            assert ok
            assert v.generator(m).bounds()[0] >= 1.0

    def test_dense_cap(self, space):
        tau = truncated_hitting_time(space, ["T"], 30)
        with pytest.raises(ResourceLimitError):
            tau.to_dense(cap=1024)


class TestMachineGamble:
    def test_negation_and_shift(self, space):
        tau = truncated_hitting_time(space, ["T"], 3)
        neg = -tau
        assert neg.payoff((0, 1, 0)) == -2.0
        shifted = tau + 1.5
        assert shifted.payoff((0, 1, 0)) == 3.5
        scaled = 2.0 * tau
        assert scaled.payoff((0, 0, 0)) == 6.0

    def test_lift_freezes_state(self, space):
        tau = truncated_hitting_time(space, ["T"], 2).lift(4)
        assert tau.payoff((0, 0, 1, 1)) == 2.0  # hits after the horizon do not count

    def test_as_machine_round_trip(self):
        f = FinitaryGamble(2, np.arange(8.0).reshape(2, 2, 2))
        m = as_machine(f)
        for string in np.ndindex(2, 2, 2):
            assert m.payoff(string) == f.payoff(string)


class TestPointwiseLeq:
    def test_dense_vs_dense(self):
        f = FinitaryGamble(2, np.array([1.0, 2.0]))
        g = FinitaryGamble(2, np.array([[1.5, 0.5], [2.0, 2.5]]))
        ok, witness = pointwise_leq(f, g)
        assert not ok and witness is not None
        ok, _ = pointwise_leq(f, f + 0.0)
        assert ok

    def test_mixed_dense_machine(self, space):
        tau3 = truncated_hitting_time(space, ["T"], 3)
        dense = tau3.to_dense()
        assert pointwise_leq(dense, tau3)[0]
        assert pointwise_leq(tau3, dense)[0]
        bigger = truncated_hitting_time(space, ["T"], 4)
        assert pointwise_leq(tau3, bigger)[0]
        assert not pointwise_leq(bigger, tau3)[0]

    def test_witness_names_a_string(self, space):
        one = hitting_indicator(space, ["T"], 1)
        two = hitting_indicator(space, ["T"], 2)
        ok, witness = pointwise_leq(two, one)
        assert not ok
        assert "(0, 1)" in witness


class TestCylinders:
    def test_indicator_of_cylinder(self, space):
        ind = indicator_of_cylinder(space, (0,))
        assert ind.payoff((0,)) == 1.0
        assert ind.payoff((1,)) == 0.0
