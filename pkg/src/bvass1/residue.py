"""Residue reachability.

Decides queries of the form: is q(n) reachable for some n >= n0 with
n ≡ n0 (mod d)?  The procedure works with a window of concrete counter
values [0, cap] where cap = n0 + |Q|·d, plus residue classes modulo d
for everything above:

- S: configurations with a derivation tree entirely inside [0, cap];
- R0: residues of root values >= cap whose root step lands in S;
- R: closure of R0 upward through the transitions, modulo d;
- X: R joined with the residues of S-values in [n0, cap].

X then contains (q, n mod d) exactly for the reachable n >= n0, which
answers the query by one membership test.

Value sets are packed into Python integers, one bit per counter value
(or per residue class); the fixpoints are semi-naive worklists over
those masks.  The set-level operations (``delta_unary`` and friends)
are also exposed literally for cross-checking in tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .model import Bvass1

DEFAULT_BUDGET = 2**30


class BudgetExceeded(Exception):
    """A run would materialize more table entries than the budget allows."""


class Budget:
    """Mutable counter of materialized table entries shared across phases."""

    def __init__(self, limit: int | None = DEFAULT_BUDGET):
        self.limit = limit
        self.used = 0

    def charge(self, entries: int) -> None:
        self.used += entries
        if self.limit is not None and self.used > self.limit:
            raise BudgetExceeded(
                f"needs more than {self.limit} table entries ({self.used} and counting); "
                "raise the budget to proceed"
            )


@dataclass(frozen=True)
class ResidueQuery:
    system: Bvass1
    start_state: int
    n0: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.n0 < 0:
            raise ValueError("n0 must be >= 0")
        if not 0 <= self.start_state < self.system.num_states:
            raise ValueError("start state out of range")

    @property
    def big_n(self) -> int:
        return self.system.num_states * self.d

    @property
    def cap(self) -> int:
        return self.n0 + self.big_n


@dataclass(frozen=True)
class ResidueTable:
    """All sets computed for one residue query, bit-packed per state.

    ``s_masks[q]`` has bit m set iff q(m) has a cap-bounded derivation;
    the residue masks have bit r set for residue class r modulo d.
    """

    query: ResidueQuery
    big_n: int
    cap: int
    s_masks: tuple[int, ...]
    r0_masks: tuple[int, ...]
    r_masks: tuple[int, ...]
    x_masks: tuple[int, ...]
    iterations: int

    @cached_property
    def S(self) -> frozenset[tuple[int, int]]:
        return frozenset(_mask_pairs(self.s_masks))

    @cached_property
    def R0(self) -> frozenset[tuple[int, int]]:
        return frozenset(_mask_pairs(self.r0_masks))

    @cached_property
    def R(self) -> frozenset[tuple[int, int]]:
        return frozenset(_mask_pairs(self.r_masks))

    @cached_property
    def X(self) -> frozenset[tuple[int, int]]:
        return frozenset(_mask_pairs(self.x_masks))

    @property
    def holds(self) -> bool:
        return bool((self.x_masks[self.query.start_state] >> (self.query.n0 % self.query.d)) & 1)


def _mask_pairs(masks):
    for q, mask in enumerate(masks):
        while mask:
            low = mask & -mask
            yield (q, low.bit_length() - 1)
            mask ^= low


def _sumset(a: int, b: int) -> int:
    """{x + y : bit x of a, bit y of b} as a bitmask; operands untruncated."""
    if a == 0 or b == 0:
        return 0
    if a.bit_count() > b.bit_count():
        a, b = b, a
    out = 0
    while a:
        low = a & -a
        out |= b << (low.bit_length() - 1)
        a ^= low
    return out


def _fold_mod(mask: int, d: int, base: int = 0) -> int:
    """Residues modulo d of { base + j : bit j of mask }."""
    if mask == 0:
        return 0
    if d == 1:
        return 1
    g = mask << (base % d)
    dmask = (1 << d) - 1
    out = 0
    while g:
        out |= g & dmask
        g >>= d
    return out


def _rotate(x: int, r: int, d: int) -> int:
    """Cyclic left shift of a d-bit mask: residue class r' maps to r' + r mod d."""
    r %= d
    if r == 0 or x == 0:
        return x
    dmask = (1 << d) - 1
    return ((x << r) | (x >> (d - r))) & dmask


def _cyclic_sumset(a: int, b: int, d: int) -> int:
    """{(r0 + r1) mod d} over the set bits of two d-bit masks."""
    if a == 0 or b == 0:
        return 0
    if a.bit_count() > b.bit_count():
        a, b = b, a
    out = 0
    while a:
        low = a & -a
        out |= _rotate(b, low.bit_length() - 1, d)
        a ^= low
    return out


def _bounded_value_masks(system: Bvass1, cap: int, budget: Budget | None = None) -> list[int]:
    """Per-state bitmask of values in [0, cap] with a cap-bounded derivation.

    Semi-naive worklist; a state's own +1/-1 self-loops are saturated in
    closed form (they fill the mask downward resp. upward), which keeps
    long pump chains from dribbling through the queue one bit at a time.
    """
    if budget is not None:
        budget.charge(system.num_states * (cap + 1))
    nq = system.num_states
    full = (1 << (cap + 1)) - 1

    up_unary: list[list[tuple[int, int]]] = [[] for _ in range(nq)]
    fill_down = [False] * nq
    fill_up = [False] * nq
    for t in system.unary:
        up_unary[t.target].append((t.source, t.delta))
        if t.source == t.target:
            if t.delta == 1:
                fill_down[t.source] = True
            elif t.delta == -1:
                fill_up[t.source] = True
    by_left: list[list[int]] = [[] for _ in range(nq)]
    by_right: list[list[int]] = [[] for _ in range(nq)]
    for i, t in enumerate(system.branching):
        by_left[t.left].append(i)
        by_right[t.right].append(i)

    masks = [0] * nq
    pending = [0] * nq
    queue: list[int] = []
    queued = [False] * nq

    def close(q: int, mask: int) -> int:
        if mask and fill_down[q]:
            mask = (1 << mask.bit_length()) - 1
        if mask and fill_up[q]:
            low = (mask & -mask).bit_length() - 1
            mask |= full & ~((1 << low) - 1)
        return mask

    def add(q: int, bits: int) -> None:
        new = bits & full & ~masks[q]
        if not new:
            return
        grown = close(q, masks[q] | new)
        new = grown & ~masks[q]
        masks[q] = grown
        pending[q] |= new
        if not queued[q]:
            queued[q] = True
            queue.append(q)

    for f in system.finals:
        add(f, 1)
    head = 0
    while head < len(queue):
        p = queue[head]
        head += 1
        queued[p] = False
        delta = pending[p]
        pending[p] = 0
        if not delta:
            continue
        for (q, z) in up_unary[p]:
            if z == 1:
                add(q, delta >> 1)
            elif z == -1:
                add(q, delta << 1)
            else:
                add(q, delta)
        for i in by_left[p]:
            t = system.branching[i]
            add(t.source, _sumset(delta, masks[t.right]))
        for i in by_right[p]:
            t = system.branching[i]
            add(t.source, _sumset(masks[t.left], delta))
    return masks


def _r0_value_masks(system: Bvass1, s_masks: list[int], cap: int, d: int) -> list[int]:
    """Residues of root values >= cap with the root step landing inside S.

    A +1 root step cannot apply (its child would exceed cap); a -1 step
    allows children at cap-1 and cap, a 0 step only a child at exactly
    cap; a branching root takes any S x S pair summing to >= cap.
    """
    out = [0] * system.num_states
    for t in system.unary:
        if t.delta == -1:
            for m in (cap - 1, cap):
                if m >= 0 and (s_masks[t.target] >> m) & 1:
                    out[t.source] |= 1 << ((m + 1) % d)
        elif t.delta == 0:
            if (s_masks[t.target] >> cap) & 1:
                out[t.source] |= 1 << (cap % d)
    for t in system.branching:
        sums = _sumset(s_masks[t.left], s_masks[t.right])
        high = sums >> cap  # bit j = root value cap + j
        if high:
            out[t.source] |= _fold_mod(high, d, base=cap)
    return out


def _r_fixpoint(
    system: Bvass1, s_mod: list[int], r0: list[int], d: int
) -> tuple[list[int], int]:
    """Close R0 upward through the transitions modulo d; counts rounds."""
    nq = system.num_states
    r = list(r0)
    iterations = 0
    while True:
        # every evaluation pass counts, including the stabilizing one; a
        # nonempty seed leaves at most |Q|*d - 1 residues to add, so the
        # count never exceeds |Q|*d
        iterations += 1
        new = [0] * nq
        for t in system.unary:
            # parent residue = child residue - z (mod d)
            new[t.source] |= _rotate(r[t.target], -t.delta, d)
        for t in system.branching:
            rl, rr = r[t.left], r[t.right]
            new[t.source] |= _cyclic_sumset(rl, s_mod[t.right] | rr, d)
            new[t.source] |= _cyclic_sumset(s_mod[t.left], rr, d)
        changed = False
        for q in range(nq):
            extra = new[q] & ~r[q]
            if extra:
                r[q] |= extra
                changed = True
        if not changed:
            break
    big_n = nq * d
    assert iterations <= big_n, f"fixpoint took {iterations} rounds, bound is {big_n}"
    return r, iterations


def compute_table(query: ResidueQuery, budget: Budget | None = None) -> ResidueTable:
    """Run the full pipeline S -> R0 -> R -> X for one query."""
    system = query.system
    d, n0, cap = query.d, query.n0, query.cap
    if budget is not None:
        budget.charge(3 * system.num_states * d)
    s_masks = _bounded_value_masks(system, cap, budget)
    s_mod = [_fold_mod(m, d) for m in s_masks]
    r0 = _r0_value_masks(system, s_masks, cap, d)
    r, iterations = _r_fixpoint(system, s_mod, r0, d)
    window = ((1 << (cap - n0 + 1)) - 1) << n0  # values n0..cap
    x = [r[q] | _fold_mod(s_masks[q] & window, d) for q in range(system.num_states)]
    return ResidueTable(
        query=query,
        big_n=query.big_n,
        cap=cap,
        s_masks=tuple(s_masks),
        r0_masks=tuple(r0),
        r_masks=tuple(r),
        x_masks=tuple(x),
        iterations=iterations,
    )


def residue_reachable(query: ResidueQuery, budget: Budget | None = None) -> tuple[bool, ResidueTable]:
    table = compute_table(query, budget)
    return table.holds, table


# ---------------------------------------------------------------------------
# literal set-level operations, kept as the readable reference semantics


def delta_unary(system: Bvass1, v: set[tuple[int, int]], d: int) -> set[tuple[int, int]]:
    """{(q, (r - z) mod d) : (q, z, p) a unary transition, (p, r) in v}."""
    return {(t.source, (r - t.delta) % d) for t in system.unary for (p, r) in v if p == t.target}


def delta_branch(
    system: Bvass1, v: set[tuple[int, int]], w: set[tuple[int, int]], d: int
) -> set[tuple[int, int]]:
    """{(q, (r0 + r1) mod d) : branching (q, p0, p1), (p0, r0) in v, (p1, r1) in w}."""
    out = set()
    for t in system.branching:
        for (p0, r0) in v:
            if p0 != t.left:
                continue
            for (p1, r1) in w:
                if p1 == t.right:
                    out.add((t.source, (r0 + r1) % d))
    return out


def compute_S(query: ResidueQuery) -> frozenset[tuple[int, int]]:
    """The configurations in [0, cap] with cap-bounded derivations, as a set."""
    masks = _bounded_value_masks(query.system, query.cap)
    return frozenset(_mask_pairs(masks))


def compute_R0(query: ResidueQuery, s: frozenset[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    """Literal root-step enumeration over an explicit S set."""
    system, cap, d = query.system, query.cap, query.d
    by_state: dict[int, set[int]] = {}
    for (q, m) in s:
        by_state.setdefault(q, set()).add(m)
    out: set[tuple[int, int]] = set()
    for t in system.unary:
        for m in by_state.get(t.target, ()):
            n = m - t.delta
            if n >= cap:
                out.add((t.source, n % d))
    for t in system.branching:
        for m0 in by_state.get(t.left, ()):
            for m1 in by_state.get(t.right, ()):
                if m0 + m1 >= cap:
                    out.add((t.source, (m0 + m1) % d))
    return frozenset(out)


def compute_R(query: ResidueQuery) -> ResidueTable:
    """Table with S, R0, R and the round count filled in (X included)."""
    return compute_table(query)


# ---------------------------------------------------------------------------
# window cache


class ResidueCache:
    """Shares residue tables across queries with the same modulus.

    The answer for (q, n0, d) only reads X from the table computed at
    the window base W = d * floor(n0 / d): a witness l >= W with
    l ≡ n0 (mod d) below n0 would satisfy 0 < n0 - l < d with d | n0 - l,
    which is impossible, so the witnesses of the two queries coincide.
    Keying tables by (d, W) collapses the probe storm the reachability
    engine produces into a few dozen table builds.
    """

    def __init__(self, system: Bvass1, budget: Budget | None = None):
        self.system = system
        self.budget = budget
        self._tables: dict[tuple[int, int], tuple[int, ...]] = {}

    def query(self, state: int, n0: int, d: int) -> bool:
        window = (n0 // d) * d
        key = (d, window)
        x = self._tables.get(key)
        if x is None:
            table = compute_table(ResidueQuery(self.system, state, window, d), self.budget)
            x = table.x_masks
            self._tables[key] = x
        return bool((x[state] >> (n0 % d)) & 1)

    @property
    def tables_built(self) -> int:
        return len(self._tables)
