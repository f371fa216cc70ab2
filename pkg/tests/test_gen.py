"""Instance generators, pinned against the brute-force reach oracle."""
from __future__ import annotations

from itertools import combinations

from hypothesis import given, settings
from hypothesis import strategies as st

from bvass1.gen import (
    Gate,
    eval_circuit,
    format_circuit,
    gen_binary_constant,
    gen_doubling,
    gen_mcvp,
    gen_random,
    gen_random_circuit,
    gen_subset_sum,
    parse_circuit,
)
from bvass1.model import FormatError, SemanticError, parse_bvass, validate_bvass
from bvass1.oracle import bounded_reach_set

import pytest

from helpers import b2


# ---------------------------------------------------------------------------
# doubling family


def test_doubling_zero():
    system = gen_doubling(0)
    assert system.state_names == ("q", "q_f", "q_0")
    reach = bounded_reach_set(system, 3)
    assert reach.values(system.state_id("q_0")) == {1}
    assert reach.values(system.state_id("q")) == {0, 1}


@pytest.mark.parametrize("n", range(0, 6))
def test_doubling_levels_reach_exact_powers(n):
    system = gen_doubling(n)
    reach = bounded_reach_set(system, 2**n + 2)
    for i in range(n + 1):
        assert reach.values(system.state_id(f"q_{i}")) == {2**i}
    assert reach.values(system.state_id("q")) == set(range(2**n + 1))
    assert reach.values(system.state_id("q_f")) == {0}


def test_doubling_two_matches_handwritten_text():
    assert gen_doubling(2) == b2()


def test_doubling_rejects_negative():
    with pytest.raises(ValueError):
        gen_doubling(-1)


# ---------------------------------------------------------------------------
# binary constants


@pytest.mark.parametrize("m", [1, 2, 3, 5, 6, 7, 11, 13])
def test_binary_constant_entry_reaches_exactly_m(m):
    system, entry = gen_binary_constant(m)
    reach = bounded_reach_set(system, m + 4)
    assert reach.values(entry) == {m}


def test_binary_constant_rejects_zero():
    with pytest.raises(ValueError):
        gen_binary_constant(0)


def test_binary_constant_size_is_logarithmic():
    # ~3 states per bit, not per unit
    assert gen_binary_constant(1 << 9)[0].num_states < 60


# ---------------------------------------------------------------------------
# circuit evaluation


def test_mcvp_single_true_gate():
    system, states = gen_mcvp([Gate("T")])
    assert bounded_reach_set(system, 2).contains(states[0], 0)


def test_mcvp_and_over_false_is_unreachable():
    system, states = gen_mcvp([Gate("T"), Gate("F"), Gate("AND", 1, 2)])
    reach = bounded_reach_set(system, 2)
    assert reach.contains(states[0], 0)
    assert not reach.contains(states[1], 0)
    assert not reach.contains(states[2], 0)


def test_mcvp_or_picks_either_input():
    system, states = gen_mcvp([Gate("F"), Gate("T"), Gate("OR", 1, 2)])
    assert bounded_reach_set(system, 2).contains(states[2], 0)


@pytest.mark.parametrize("seed", range(50))
def test_mcvp_agrees_with_direct_evaluation(seed):
    gates = gen_random_circuit(seed, num_gates=16)
    system, states = gen_mcvp(gates)
    got = bounded_reach_set(system, 2).contains(states[-1], 0)
    assert got == eval_circuit(gates)


def test_circuit_text_round_trip():
    gates = [Gate("T"), Gate("F"), Gate("OR", 1, 2), Gate("AND", 3, 1)]
    assert parse_circuit(format_circuit(gates)) == gates


def test_parse_circuit_rejects_bad_input():
    with pytest.raises(FormatError):
        parse_circuit("")
    with pytest.raises(FormatError):
        parse_circuit("XOR 1 2\n")
    with pytest.raises(SemanticError):
        parse_circuit("T\nAND 1 2\n")  # forward reference
    with pytest.raises(FormatError):
        parse_circuit("T extra\n")


# ---------------------------------------------------------------------------
# subset sum


def _subset_sums(values):
    sums = set()
    for r in range(len(values) + 1):
        for combo in combinations(values, r):
            sums.add(sum(combo))
    return sums


def test_subset_sum_singleton():
    system, entry = gen_subset_sum([3], 3)
    reach = bounded_reach_set(system, 8)
    assert reach.contains(entry, 3)
    assert not reach.contains(entry, 2)


def test_subset_sum_three_values():
    system, entry = gen_subset_sum([2, 5, 9], 11)
    reach = bounded_reach_set(system, 40)
    assert reach.contains(entry, 11)
    assert not reach.contains(entry, 12)
    assert reach.values(entry) == _subset_sums([2, 5, 9])


def test_subset_sum_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gen_subset_sum([], 0)
    with pytest.raises(ValueError):
        gen_subset_sum([0, 2], 2)
    with pytest.raises(ValueError):
        gen_subset_sum([2], -1)


@given(
    values=st.lists(st.integers(1, 9), min_size=1, max_size=4),
    target=st.integers(0, 30),
)
@settings(max_examples=40, deadline=None)
def test_subset_sum_entry_reaches_exactly_the_sums(values, target):
    system, entry = gen_subset_sum(values, target)
    reach = bounded_reach_set(system, sum(values) + 4)
    assert reach.values(entry) == _subset_sums(values)


# ---------------------------------------------------------------------------
# random instances


def test_random_is_deterministic():
    a = gen_random(5, 8, 3, 2, seed=42)
    b = gen_random(5, 8, 3, 2, seed=42)
    assert a == b
    assert a != gen_random(5, 8, 3, 2, seed=43)


@pytest.mark.parametrize("seed", range(0, 500, 7))
def test_random_systems_are_well_formed(seed):
    system = gen_random(1 + seed % 5, seed % 8, seed % 3, 1 + seed % 2, seed)
    assert validate_bvass(system) == []
