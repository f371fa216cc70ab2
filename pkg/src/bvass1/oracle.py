"""Brute-force reference implementations.

Everything here is written in the most naive correct style on purpose:
full rescan passes over plain sets until nothing changes, no worklists,
no bit tricks, no code shared with the decision engines.  The results
referee the engines in tests and back the `oracle` CLI subcommand.

All answers are relative to a cap: a configuration is reported reachable
only if it has a derivation tree whose every counter stays at or below
the cap.  That is a sound under-approximation of true reachability and
is exact whenever every reachable value up to the cap admits such a
bounded tree.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import Bvass1


@dataclass(frozen=True)
class BoundedReachSet:
    """Configurations with a cap-bounded derivation tree."""

    cap: int
    reachable: frozenset[tuple[int, int]]

    def values(self, state: int) -> set[int]:
        return {n for (q, n) in self.reachable if q == state}

    def contains(self, state: int, n: int) -> bool:
        return (state, n) in self.reachable


def bounded_reach_set(system: Bvass1, cap: int, budget: int | None = 2**30) -> BoundedReachSet:
    """Least fixpoint of the derivation rules restricted to counters <= cap.

    Rules: (f, 0) for final f; (q, n) if a unary (q, z, p) has (p, n+z)
    present with n, n+z in [0, cap]; (q, n) if a branching (q, p, p')
    has (p, m0) and (p', m1) present with n = m0 + m1 <= cap.
    """
    if cap < 0:
        raise ValueError("cap must be >= 0")
    if budget is not None and system.num_states * (cap + 1) > budget:
        raise ValueError(f"cap {cap} exceeds the memory budget")
    present: set[tuple[int, int]] = {(f, 0) for f in system.finals}
    changed = True
    while changed:
        changed = False
        for t in system.unary:
            for n in range(0, cap + 1):
                m = n + t.delta
                if 0 <= m <= cap and (t.target, m) in present and (t.source, n) not in present:
                    present.add((t.source, n))
                    changed = True
        for t in system.branching:
            left_vals = sorted(n for (q, n) in present if q == t.left)
            right_vals = sorted(n for (q, n) in present if q == t.right)
            for m0 in left_vals:
                for m1 in right_vals:
                    n = m0 + m1
                    if n > cap:
                        break
                    if (t.source, n) not in present:
                        present.add((t.source, n))
                        changed = True
    return BoundedReachSet(cap, frozenset(present))


def oracle_residue(system: Bvass1, state: int, n0: int, d: int, cap: int) -> bool:
    """Scan for n >= n0 with n ≡ n0 (mod d) among cap-bounded reachable values.

    Sound; complete only up to the cap.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    reach = bounded_reach_set(system, cap)
    for n in reach.values(state):
        if n >= n0 and (n - n0) % d == 0:
            return True
    return False


def oracle_coverable(system: Bvass1, state: int, n: int, cap: int) -> bool:
    """Scan for a reachable value >= n; sound, complete only up to the cap."""
    return oracle_residue(system, state, n, 1, cap)


UNBOUNDED_PROVEN = "unbounded-proven"
NO_VALUE_ABOVE_THRESHOLD = "no-value-above-threshold"
INCONCLUSIVE = "inconclusive"


def oracle_unbounded_hint(system: Bvass1, state: int, cap: int) -> str:
    """Tri-state boundedness evidence for the reach set of ``state``.

    A value above 2^|Q| proves unboundedness outright.  If the cap
    already covers 2^|Q| + |Q| and the whole reach set is stable under
    doubling the cap, no value above the threshold exists as far as the
    oracle can see.  Everything else is inconclusive.  Stability is a
    heuristic of the test harness, not a truth claim.
    """
    threshold = 2 ** system.num_states
    first = bounded_reach_set(system, cap)
    if any(n > threshold for n in first.values(state)):
        return UNBOUNDED_PROVEN
    if cap >= threshold + system.num_states:
        second = bounded_reach_set(system, 2 * cap)
        if second.reachable == first.reachable:
            return NO_VALUE_ABOVE_THRESHOLD
    return INCONCLUSIVE
