"""Reachability of a configuration, with checkable certificates.

A configuration q(n) is reachable exactly when some partial derivation
tree with root q(n) and counters bounded by B = 2|Q| + n has every leaf
either accepting or "increasing": labelled like a strictly smaller
ancestor (its anchor), with the residue query at the leaf positive, and
with the pumping segments of distinct increasing leaves not nested in a
conflicting way (exclusivity).  Such a tree is the certificate; it can
be checked independently and unrolled into a full derivation tree.

The decision engine computes two families of bit tables by a worklist
fixpoint over counters in [0, B]:

- reach masks: bit n of state q set when q(n) has such a tree;
- per pump context c = (state s, leaf counter m*): path masks whose bit
  m at state p says there is a valid downward path from p(m) to a leaf
  s(m*), side branches discharged by reach, and no interior path node
  labelled (s, counter < m*) (so s's deepest smaller ancestor is the
  node the path starts under).

A context contributes reach bits at its own state: reach(s, n) holds
when n < m*, the residue query (s, m*, m* - n) is positive, and a first
step from s(n) enters a path of the context.  Contexts are only created
for states on directed cycles (a path returning to s needs one) and for
leaf counters not above the state's largest coverable value.

Every new bit records the rule that first set it plus a timestamp, so a
positive answer replays into a concrete certificate deterministically.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .model import (
    Bvass1,
    Config,
    FormatError,
    PartialTree,
    SemanticError,
    classify_nodes,
    is_accepting,
    is_exclusive,
    tree_from_text,
    tree_to_text,
    validate_partial_tree_report,
)
from .residue import (
    DEFAULT_BUDGET,
    Budget,
    BudgetExceeded,
    ResidueCache,
    ResidueQuery,
    ResidueTable,
    _bounded_value_masks,
    compute_table,
)

DEFAULT_WITNESS_CAP = 1 << 20

# Defensive ceiling on replayed certificate size; extraction of a decided
# query should stay far below this, so hitting it means an engine bug.
_REPLAY_NODE_LIMIT = 1_000_000


class ExpandOverflow(Exception):
    """Unrolling a certificate would exceed the node allowance."""

    def __init__(self, needed: int, allowed: int):
        super().__init__(f"expansion needs about {needed} nodes, allowed {allowed}")
        self.needed = needed
        self.allowed = allowed


class WitnessSearchFailed(Exception):
    """No concrete reachable value found under the search cap.

    Signals that the bounded search gave up, not that the certificate is
    wrong; retry with a larger cap.
    """


@dataclass(frozen=True)
class ReachQuery:
    system: Bvass1
    state: int
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("counter must be a natural number")
        if not 0 <= self.state < self.system.num_states:
            raise ValueError("state out of range")

    @property
    def bound(self) -> int:
        return 2 * self.system.num_states + self.n


@dataclass(frozen=True)
class PumpRecord:
    """Where an increasing leaf pumps from: its anchor and the counter gap."""

    anchor: str
    modulus: int
    witness: Optional[ResidueTable] = None


@dataclass(frozen=True)
class Certificate:
    tree: PartialTree
    pumps: dict[str, PumpRecord]


# ---------------------------------------------------------------------------
# state-graph helpers


def _successor_sets(system: Bvass1) -> list[set[int]]:
    return [system.successors(q) for q in range(system.num_states)]


def _forward_set(succ: list[set[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        q = stack.pop()
        for p in succ[q]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def _backward_set(system: Bvass1, target: int) -> set[int]:
    pred: list[set[int]] = [set() for _ in range(system.num_states)]
    for q, outs in enumerate(_successor_sets(system)):
        for p in outs:
            pred[p].add(q)
    seen = {target}
    stack = [target]
    while stack:
        q = stack.pop()
        for p in pred[q]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def _cyclic_states(system: Bvass1) -> set[int]:
    """States lying on a directed cycle of the transition graph."""
    succ = _successor_sets(system)
    out = set()
    for q in range(system.num_states):
        # q is cyclic iff q is reachable from one of its successors
        stack = list(succ[q])
        seen = set(stack)
        hit = q in seen
        while stack and not hit:
            p = stack.pop()
            for r in succ[p]:
                if r == q:
                    hit = True
                    break
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        if hit:
            out.add(q)
    return out


def _sup_bounds(system: Bvass1, clamp: int) -> tuple[list[int], list[int]]:
    """Per-state bounds on the largest reachable counter, clamped.

    Returns (lower, upper) with -1 for states with empty reach sets.
    lower[q] is a value such that every m <= lower[q] is coverable;
    upper[q] is at least min(sup reach(q), clamp).  The two runs differ
    only in how a clamped operand propagates through a +1 unary step:
    the upper run keeps the clamp, the lower run subtracts anyway.
    Between the two, coverable(q, m) for m < clamp is decided exactly
    except in the gap (lower, upper], which callers resolve precisely.
    """
    nq = system.num_states
    up_unary: list[list[tuple[int, int]]] = [[] for _ in range(nq)]
    climb = [False] * nq
    for t in system.unary:
        up_unary[t.target].append((t.source, t.delta))
        # a (q,-1,q) loop climbs without limit from any reachable value
        if t.source == t.target and t.delta == -1:
            climb[t.source] = True
    touch: list[list[int]] = [[] for _ in range(nq)]
    for i, t in enumerate(system.branching):
        touch[t.left].append(i)
        if t.right != t.left:
            touch[t.right].append(i)

    def run(optimistic: bool) -> list[int]:
        vals = [-1] * nq
        queue: deque[int] = deque()
        queued = [False] * nq

        def relax(q: int, v: int) -> None:
            v = min(v, clamp)
            if v <= vals[q]:
                return
            vals[q] = clamp if climb[q] else v
            if not queued[q]:
                queued[q] = True
                queue.append(q)

        for f in system.finals:
            relax(f, 0)
        while queue:
            p = queue.popleft()
            queued[p] = False
            vp = vals[p]
            for (src, z) in up_unary[p]:
                if optimistic and vp == clamp:
                    cand = clamp
                else:
                    cand = vp - z
                if cand >= 0:
                    relax(src, cand)
            for i in touch[p]:
                t = system.branching[i]
                v0, v1 = vals[t.left], vals[t.right]
                if v0 >= 0 and v1 >= 0:
                    relax(t.source, v0 + v1)
        return vals

    return run(False), run(True)


# ---------------------------------------------------------------------------
# fixpoint engine


class _Context:
    """Path table of one pump context (state, leaf counter)."""

    __slots__ = ("state", "m_star", "masks", "info", "probed", "back")

    def __init__(self, state: int, m_star: int, num_states: int, back: set[int]):
        self.state = state
        self.m_star = m_star
        self.masks = [0] * num_states
        # per state: counter -> (timestamp, justification)
        self.info: list[dict[int, tuple[int, tuple]]] = [{} for _ in range(num_states)]
        self.probed = 0  # anchor counters whose residue query was already asked
        self.back = back  # states with a path to self.state


class FixpointTables:
    """Least fixpoint of the reach and path tables for one bound.

    Build it through run_query or run_batch.  ``holds(q, n)`` answers
    reachability for any n up to the construction's counter allowance.
    """

    def __init__(
        self,
        system: Bvass1,
        bound: int,
        complete_to: int,
        context_states: set[int],
        budget: Budget,
    ):
        self.system = system
        self.bound = bound
        self.complete_to = complete_to
        self.budget = budget
        self.residue_cache = ResidueCache(system, budget)
        self.sup_lower, self.sup_upper = _sup_bounds(system, bound + 1)

        nq = system.num_states
        self._full = (1 << (bound + 1)) - 1
        self.reach_masks = [0] * nq
        self.reach_info: list[dict[int, tuple[int, tuple]]] = [{} for _ in range(nq)]
        self._tick = 0
        budget.charge(nq)

        self._up_unary: list[list[int]] = [[] for _ in range(nq)]
        for i, t in enumerate(system.unary):
            self._up_unary[t.target].append(i)
        self._br_left: list[list[int]] = [[] for _ in range(nq)]
        self._br_right: list[list[int]] = [[] for _ in range(nq)]
        for i, t in enumerate(system.branching):
            self._br_left[t.left].append(i)
            self._br_right[t.right].append(i)

        self.contexts: list[_Context] = []
        # reach-delta watchers: state -> [(ctx, branch, p_side)]
        self._pb_watch: list[list[tuple[int, int, int]]] = [[] for _ in range(nq)]
        self._top_watch: list[list[tuple[int, int, int]]] = [[] for _ in range(nq)]
        self._activate_contexts(context_states)

        self._pending_r = [0] * nq
        self._pending_p: list[list[int]] = [[0] * nq for _ in self.contexts]
        self._queue: deque[tuple] = deque()
        self._queued: set[tuple] = set()

        for ci, ctx in enumerate(self.contexts):
            self._add_p(ci, ctx.state, 1 << ctx.m_star, ("self",))
        for f in sorted(system.finals):
            self._add_r(f, 1, ("final",))
        self._run()

    # -- setup

    def _activate_contexts(self, context_states: set[int]) -> None:
        system = self.system
        backs = {s: _backward_set(system, s) for s in sorted(context_states)}
        for s in sorted(context_states):
            top = min(self.sup_upper[s], self.bound)
            for m_star in range(1, top + 1):
                self.budget.charge(system.num_states)
                ci = len(self.contexts)
                ctx = _Context(s, m_star, system.num_states, backs[s])
                self.contexts.append(ctx)
                for i, t in enumerate(system.branching):
                    if t.left in ctx.back:
                        self._pb_watch[t.right].append((ci, i, 0))
                        if t.source == s:
                            self._top_watch[t.right].append((ci, i, 0))
                    if t.right in ctx.back:
                        self._pb_watch[t.left].append((ci, i, 1))
                        if t.source == s:
                            self._top_watch[t.left].append((ci, i, 1))

    # -- residue probes

    def _probe(self, state: int, n0: int, d: int) -> bool:
        if d == 1:
            if n0 <= self.sup_lower[state]:
                return True
            if n0 > self.sup_upper[state]:
                return False
        return self.residue_cache.query(state, n0, d)

    # -- table updates

    def _add_r(self, q: int, bits: int, just: tuple) -> None:
        new = bits & self._full & ~self.reach_masks[q]
        if not new:
            return
        self.budget.charge(new.bit_count())
        self.reach_masks[q] |= new
        info = self.reach_info[q]
        m = new
        while m:
            low = m & -m
            self._tick += 1
            info[low.bit_length() - 1] = (self._tick, just)
            m ^= low
        self._pending_r[q] |= new
        key = ("r", q)
        if key not in self._queued:
            self._queued.add(key)
            self._queue.append(key)

    def _add_p(self, ci: int, q: int, bits: int, just: tuple) -> None:
        ctx = self.contexts[ci]
        bits &= self._full
        if q == ctx.state:
            # interior path nodes must not sit below the leaf counter,
            # or the leaf's deepest smaller ancestor moves off the anchor
            bits &= ~((1 << ctx.m_star) - 1)
        new = bits & ~ctx.masks[q]
        if not new:
            return
        self.budget.charge(new.bit_count())
        ctx.masks[q] |= new
        info = ctx.info[q]
        m = new
        while m:
            low = m & -m
            self._tick += 1
            info[low.bit_length() - 1] = (self._tick, just)
            m ^= low
        self._pending_p[ci][q] |= new
        key = ("p", ci, q)
        if key not in self._queued:
            self._queued.add(key)
            self._queue.append(key)

    # -- rule application

    @staticmethod
    def _shift_parent(bits: int, z: int) -> int:
        # child counters -> parent counters along a unary step (child = parent + z)
        if z == 1:
            return bits >> 1
        if z == -1:
            return bits << 1
        return bits

    @staticmethod
    def _sumset(a: int, b: int) -> int:
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

    def _fire_top(self, ci: int, nbits: int, just: tuple) -> None:
        ctx = self.contexts[ci]
        nbits &= (1 << ctx.m_star) - 1  # anchor strictly below the leaf
        nbits &= ~self.reach_masks[ctx.state]
        cand = nbits & ~ctx.probed
        m = cand
        while m:
            low = m & -m
            n = low.bit_length() - 1
            ctx.probed |= low
            if self._probe(ctx.state, ctx.m_star, ctx.m_star - n):
                self._add_r(ctx.state, low, just)
            m ^= low
        # bits probed positive earlier are already reach bits; nothing to redo

    def _run(self) -> None:
        while self._queue:
            key = self._queue.popleft()
            self._queued.discard(key)
            if key[0] == "r":
                q = key[1]
                delta = self._pending_r[q]
                self._pending_r[q] = 0
                if delta:
                    self._on_reach_delta(q, delta)
            else:
                _, ci, q = key
                delta = self._pending_p[ci][q]
                self._pending_p[ci][q] = 0
                if delta:
                    self._on_path_delta(ci, q, delta)

    def _on_reach_delta(self, q: int, delta: int) -> None:
        system = self.system
        for ti in self._up_unary[q]:
            t = system.unary[ti]
            self._add_r(t.source, self._shift_parent(delta, t.delta), ("unary", ti))
        for bi in self._br_left[q]:
            t = system.branching[bi]
            self._add_r(t.source, self._sumset(delta, self.reach_masks[t.right]), ("branch", bi))
        for bi in self._br_right[q]:
            t = system.branching[bi]
            self._add_r(t.source, self._sumset(self.reach_masks[t.left], delta), ("branch", bi))
        for (ci, bi, p_side) in self._pb_watch[q]:
            t = system.branching[bi]
            ctx = self.contexts[ci]
            pmask = ctx.masks[t.left if p_side == 0 else t.right]
            if pmask:
                self._add_p(ci, t.source, self._sumset(delta, pmask), ("branch", bi, p_side))
        for (ci, bi, p_side) in self._top_watch[q]:
            t = system.branching[bi]
            ctx = self.contexts[ci]
            pmask = ctx.masks[t.left if p_side == 0 else t.right]
            if pmask:
                self._fire_top(ci, self._sumset(delta, pmask), ("pump_branch", ci, bi, p_side))

    def _on_path_delta(self, ci: int, q: int, delta: int) -> None:
        system = self.system
        ctx = self.contexts[ci]
        for ti in self._up_unary[q]:
            t = system.unary[ti]
            bits = self._shift_parent(delta, t.delta)
            self._add_p(ci, t.source, bits, ("unary", ti))
            if t.source == ctx.state:
                self._fire_top(ci, bits, ("pump_unary", ci, ti))
        for bi in self._br_left[q]:
            t = system.branching[bi]
            bits = self._sumset(delta, self.reach_masks[t.right])
            self._add_p(ci, t.source, bits, ("branch", bi, 0))
            if t.source == ctx.state:
                self._fire_top(ci, bits, ("pump_branch", ci, bi, 0))
        for bi in self._br_right[q]:
            t = system.branching[bi]
            bits = self._sumset(self.reach_masks[t.left], delta)
            self._add_p(ci, t.source, bits, ("branch", bi, 1))
            if t.source == ctx.state:
                self._fire_top(ci, bits, ("pump_branch", ci, bi, 1))

    # -- results

    def holds(self, state: int, n: int) -> bool:
        if not 0 <= n <= self.complete_to:
            raise ValueError(f"counter {n} outside the decided range [0, {self.complete_to}]")
        return bool((self.reach_masks[state] >> n) & 1)


def run_query(query: ReachQuery, budget: int | None = DEFAULT_BUDGET) -> FixpointTables:
    """Decide one configuration; pump contexts restricted to its state cone."""
    system = query.system
    succ = _successor_sets(system)
    cone = _forward_set(succ, query.state)
    context_states = _cyclic_states(system) & cone
    return FixpointTables(system, query.bound, query.n, context_states, Budget(budget))


def run_batch(system: Bvass1, nmax: int, budget: int | None = DEFAULT_BUDGET) -> FixpointTables:
    """One fixpoint answering every query with counter up to nmax.

    Uses the bound for the largest counter; a tree certifying q(n) under
    its own bound is also valid under a larger one, so the per-query and
    batched answers agree.
    """
    if nmax < 0:
        raise ValueError("nmax must be a natural number")
    bound = 2 * system.num_states + nmax
    return FixpointTables(system, bound, nmax, _cyclic_states(system), Budget(budget))


def decide_reach(query: ReachQuery, budget: int | None = DEFAULT_BUDGET) -> bool:
    return run_query(query, budget).holds(query.state, query.n)


# ---------------------------------------------------------------------------
# certificate extraction


def _resolve_branch_split(
    left_bits: int,
    left_info: dict[int, tuple[int, tuple]],
    right_bits: int,
    right_info: dict[int, tuple[int, tuple]],
    total: int,
    before: int,
) -> int:
    """Lowest left counter whose pair was derivable before the parent."""
    for m0 in range(total + 1):
        m1 = total - m0
        if (left_bits >> m0) & 1 and (right_bits >> m1) & 1:
            if left_info[m0][0] < before and right_info[m1][0] < before:
                return m0
    raise AssertionError("no justified split found; the fixpoint tables are inconsistent")


class _ReplayOverLimit(Exception):
    """A size-limited replay grew past its allowance."""


def _replay(
    tables: FixpointTables, state: int, n: int, node_limit: int | None = None
) -> tuple[dict[str, Config], dict[str, tuple[str, int]]]:
    system = tables.system
    labels: dict[str, Config] = {}
    pumps: dict[str, tuple[str, int]] = {}
    # stack items: ("r", addr, state, n) or ("p", addr, ctx index, state, n, anchor addr)
    stack: list[tuple] = [("r", "", state, n)]
    while stack:
        item = stack.pop()
        if node_limit is not None and len(labels) >= node_limit:
            raise _ReplayOverLimit
        if len(labels) >= _REPLAY_NODE_LIMIT:
            raise AssertionError("replayed tree grew past the safety limit")
        if item[0] == "r":
            _, addr, q, m = item
            labels[addr] = Config(q, m)
            ts, just = tables.reach_info[q][m]
            kind = just[0]
            if kind == "final":
                continue
            if kind == "unary":
                t = system.unary[just[1]]
                stack.append(("r", addr + "0", t.target, m + t.delta))
            elif kind == "branch":
                t = system.branching[just[1]]
                m0 = _resolve_branch_split(
                    tables.reach_masks[t.left],
                    tables.reach_info[t.left],
                    tables.reach_masks[t.right],
                    tables.reach_info[t.right],
                    m,
                    ts,
                )
                stack.append(("r", addr + "0", t.left, m0))
                stack.append(("r", addr + "1", t.right, m - m0))
            elif kind == "pump_unary":
                _, ci, ti = just
                t = system.unary[ti]
                stack.append(("p", addr + "0", ci, t.target, m + t.delta, addr))
            else:  # pump_branch
                _, ci, bi, p_side = just
                t = system.branching[bi]
                ctx = tables.contexts[ci]
                if p_side == 0:
                    m0 = _resolve_branch_split(
                        ctx.masks[t.left], ctx.info[t.left],
                        tables.reach_masks[t.right], tables.reach_info[t.right],
                        m, ts,
                    )
                    stack.append(("p", addr + "0", ci, t.left, m0, addr))
                    stack.append(("r", addr + "1", t.right, m - m0))
                else:
                    m0 = _resolve_branch_split(
                        tables.reach_masks[t.left], tables.reach_info[t.left],
                        ctx.masks[t.right], ctx.info[t.right],
                        m, ts,
                    )
                    stack.append(("r", addr + "0", t.left, m0))
                    stack.append(("p", addr + "1", ci, t.right, m - m0, addr))
        else:
            _, addr, ci, q, m, anchor = item
            labels[addr] = Config(q, m)
            ctx = tables.contexts[ci]
            ts, just = ctx.info[q][m]
            kind = just[0]
            if kind == "self":
                pumps[addr] = (anchor, ctx.m_star - labels[anchor].counter)
            elif kind == "unary":
                t = system.unary[just[1]]
                stack.append(("p", addr + "0", ci, t.target, m + t.delta, anchor))
            else:  # branch with the path continuing on just[2]
                _, bi, p_side = just
                t = system.branching[bi]
                if p_side == 0:
                    m0 = _resolve_branch_split(
                        ctx.masks[t.left], ctx.info[t.left],
                        tables.reach_masks[t.right], tables.reach_info[t.right],
                        m, ts,
                    )
                    stack.append(("p", addr + "0", ci, t.left, m0, anchor))
                    stack.append(("r", addr + "1", t.right, m - m0))
                else:
                    m0 = _resolve_branch_split(
                        tables.reach_masks[t.left], tables.reach_info[t.left],
                        ctx.masks[t.right], ctx.info[t.right],
                        m, ts,
                    )
                    stack.append(("r", addr + "0", t.left, m0))
                    stack.append(("p", addr + "1", ci, t.right, m - m0, anchor))
    return labels, pumps


def extract_certificate(query: ReachQuery, tables: FixpointTables) -> Certificate:
    """Replay the recorded first justifications into one certificate."""
    if not tables.holds(query.state, query.n):
        raise ValueError("extract_certificate needs a positive decision")
    labels, raw_pumps = _replay(tables, query.state, query.n)
    tree = PartialTree(labels)
    pumps: dict[str, PumpRecord] = {}
    for leaf, (anchor, d) in sorted(raw_pumps.items()):
        cfg = labels[leaf]
        table = compute_table(ResidueQuery(query.system, cfg.state, cfg.counter, d))
        pumps[leaf] = PumpRecord(anchor=anchor, modulus=d, witness=table)
    return Certificate(tree=tree, pumps=pumps)


# ---------------------------------------------------------------------------
# independent checking


def check_certificate_report(system: Bvass1, certificate: Certificate, claimed: Config) -> tuple[bool, str]:
    """Validate a certificate from scratch; names the first failed clause.

    Shares only the model validators and the residue decision with the
    engine; in particular every pump's residue query is re-decided here.
    """
    tree = certificate.tree
    if "" not in tree.labels:
        return False, "tree has no root"
    if tree.labels[""] != claimed:
        return False, "root label differs from the claimed configuration"
    ok, addr, why = validate_partial_tree_report(system, tree)
    if not ok:
        return False, f"invalid tree at {addr or 'root'}: {why}"
    bound = 2 * system.num_states + claimed.counter
    for a in tree.addresses():
        if tree.labels[a].counter > bound:
            return False, f"counter {tree.labels[a].counter} at node {a or 'root'} exceeds the bound {bound}"
    cls = classify_nodes(tree)
    for leaf in tree.leaves():
        if leaf in certificate.pumps:
            continue
        if not is_accepting(system, tree.labels[leaf]):
            return False, f"leaf {leaf or 'root'} is neither accepting nor pumped"
    for leaf, rec in sorted(certificate.pumps.items()):
        if leaf not in tree.labels or not tree.is_leaf(leaf):
            return False, f"pump source {leaf!r} is not a leaf of the tree"
        if rec.anchor not in tree.labels:
            return False, f"pump anchor {rec.anchor!r} is not a node of the tree"
        if leaf not in cls.increasing:
            return False, f"pumped leaf {leaf} is not increasing"
        if cls.anchor_of[leaf] != rec.anchor:
            return False, f"recorded anchor of leaf {leaf} is not its deepest smaller ancestor"
        gap = tree.labels[leaf].counter - tree.labels[rec.anchor].counter
        if rec.modulus != gap or rec.modulus < 1:
            return False, f"modulus {rec.modulus} of leaf {leaf} does not match the counter gap {gap}"
    if not is_exclusive(tree):
        return False, "pumping segments are not exclusive"
    for leaf, rec in sorted(certificate.pumps.items()):
        cfg = tree.labels[leaf]
        table = compute_table(ResidueQuery(system, cfg.state, cfg.counter, rec.modulus))
        if not table.holds:
            return False, f"residue query at leaf {leaf} ({system.state_name(cfg.state)}, {cfg.counter}, {rec.modulus}) is negative"
    return True, "ok"


def check_certificate(system: Bvass1, certificate: Certificate, claimed: Config) -> bool:
    return check_certificate_report(system, certificate, claimed)[0]


# ---------------------------------------------------------------------------
# expansion into a full derivation tree


def _witness_value_scan(
    system: Bvass1, state: int, start: int, d: int, search_cap: int
) -> tuple[int, int, int]:
    """Smallest reachable value >= start congruent to start modulo d.

    Searches complete derivations whose counters stay under a doubling
    cap; intermediate counters may need to be much larger than the value
    itself, hence the cap growth.  Returns (value, cap found at, largest
    cap tried without finding it); the last is 0 on a first-cap hit and
    lets the caller bound the witness tree size from below before
    committing to a replay.
    """
    cap = max(4 * (start + 2 * system.num_states), 64)
    prev = 0
    while True:
        cap = min(cap, search_cap)
        masks = _bounded_value_masks(system, cap)
        mask = masks[state]
        # byte view: per-position tests on the huge mask must stay O(1)
        buf = mask.to_bytes(cap // 8 + 1, "little")
        for v in range(start, cap + 1, d):
            if buf[v >> 3] & (1 << (v & 7)):
                return v, cap, prev
        if cap >= search_cap:
            raise WitnessSearchFailed(
                f"no reachable value >= {start} congruent modulo {d} at state "
                f"{system.state_name(state)} with counters up to {search_cap}"
            )
        prev = cap
        cap *= 2


def expand_certificate(
    system: Bvass1,
    certificate: Certificate,
    max_nodes: int,
    search_cap: int = DEFAULT_WITNESS_CAP,
) -> PartialTree:
    """Unroll every pump into concrete segments, giving a full derivation tree.

    Each pumped leaf l(m*) with anchor gap d gets a concrete reachable
    value v = m* + k*d; the anchor-to-leaf segment is repeated k+1 times
    with the path counters raised by d per copy (side branches copied
    as they are), and a derivation tree for the witness value closes the
    last copy.  Deeper anchors are processed first, so each pump is
    unrolled exactly once and later copies duplicate finished subtrees.
    """
    labels = dict(certificate.tree.labels)
    order = sorted(certificate.pumps.items(), key=lambda kv: (-len(kv[1].anchor), kv[1].anchor, kv[0]))
    for leaf, rec in order:
        anchor = rec.anchor
        d = rec.modulus
        leaf_cfg = labels[leaf]
        value, cap, cap_prev = _witness_value_scan(
            system, leaf_cfg.state, leaf_cfg.counter, d, search_cap
        )
        k = (value - leaf_cfg.counter) // d

        # cheap overflow bounds before any justified table is built: a
        # derivation missing from the cap_prev-bounded fixpoint contains a
        # counter above cap_prev, and a node with counter c heads a subtree
        # of more than c nodes (its value is consumed one step at a time)
        if cap_prev >= max_nodes:
            raise ExpandOverflow(cap_prev + 1, max_nodes)

        path_rel = leaf[len(anchor):]
        seg: dict[str, Config] = {}
        for a, cfg in labels.items():
            if a.startswith(anchor) and a != leaf:
                seg[a[len(anchor):]] = cfg
        seg_size = len(seg)

        base_nodes = (len(labels) - seg_size - 1) + (k + 1) * seg_size
        if base_nodes + 1 > max_nodes:
            raise ExpandOverflow(base_nodes + 1, max_nodes)

        wit_tables = FixpointTables(system, cap, cap, set(), Budget(None))
        try:
            wit_labels, wit_pumps = _replay(
                wit_tables, leaf_cfg.state, value, node_limit=max_nodes - base_nodes + 1
            )
        except _ReplayOverLimit:
            raise ExpandOverflow(max_nodes + 1, max_nodes) from None
        assert not wit_pumps, "witness tables were built without pump contexts"
        projected = base_nodes + len(wit_labels)
        if projected > max_nodes:
            raise ExpandOverflow(projected, max_nodes)

        out = {a: cfg for a, cfg in labels.items() if not a.startswith(anchor)}
        for i in range(k + 1):
            base = anchor + path_rel * i
            shift = i * d
            for rel, cfg in seg.items():
                if path_rel.startswith(rel):
                    out[base + rel] = Config(cfg.state, cfg.counter + shift)
                else:
                    out[base + rel] = cfg
        wit_base = anchor + path_rel * (k + 1)
        for rel, cfg in wit_labels.items():
            out[wit_base + rel] = cfg
        labels = out
    return PartialTree(labels)


# ---------------------------------------------------------------------------
# certificate text format


def certificate_to_text(system: Bvass1, certificate: Certificate) -> str:
    """Tree lines followed by one ``pump <leaf> <anchor> <modulus>`` per pump."""
    parts = [tree_to_text(system, certificate.tree)]
    for leaf, rec in sorted(certificate.pumps.items()):
        parts.append(f"pump {leaf or 'e'} {rec.anchor or 'e'} {rec.modulus}\n")
    return "".join(parts)


def certificate_from_text(system: Bvass1, text: str) -> Certificate:
    tree = tree_from_text(system, text)
    pumps: dict[str, PumpRecord] = {}

    def addr(token: str, line_no: int) -> str:
        if token == "e":
            return ""
        if not token or any(c not in "01" for c in token):
            raise FormatError(line_no, f"bad node address {token!r}")
        return token

    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens or tokens[0] != "pump":
            continue
        if len(tokens) != 4:
            raise FormatError(line_no, "expected pump <leaf> <anchor> <modulus>")
        leaf = addr(tokens[1], line_no)
        anchor = addr(tokens[2], line_no)
        try:
            modulus = int(tokens[3])
        except ValueError:
            raise FormatError(line_no, f"bad modulus {tokens[3]!r}") from None
        if modulus < 1:
            raise SemanticError(f"line {line_no}: modulus must be at least 1")
        if leaf in pumps:
            raise SemanticError(f"line {line_no}: duplicate pump for leaf {tokens[1]!r}")
        pumps[leaf] = PumpRecord(anchor=anchor, modulus=modulus)
    return Certificate(tree=tree, pumps=pumps)
