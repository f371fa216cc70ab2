"""Core data model for one-dimensional branching counter systems.

A system couples a finite set of control states with two kinds of
transitions: unary transitions, which move to a successor state while
shifting the counter by -1, 0 or +1, and branching transitions, which
split the current counter value between two successor states.  A
configuration is a state together with a natural-valued counter.

Derivations are binary trees of configurations, grown top-down: the two
children of a branching node carry counters summing to the parent's, and
the single child of a unary node carries the parent's counter plus the
transition shift.  A derivation is complete when every leaf is a final
state with counter zero.  This module holds the types, the text formats,
the tree validators, and the node classifications (increasing nodes and
their anchors) that the decision engines build on.

Node addresses are strings over "0"/"1"; the root is the empty string and
is spelled "e" in text files.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Optional

Z_VALUES = (-1, 0, 1)

# Directive keywords of the system file format; not usable as state names.
RESERVED_WORDS = frozenset({"state", "final", "unary", "branch", "pump"})


class FormatError(ValueError):
    """Malformed input text; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SemanticError(ValueError):
    """Well-formed text with inconsistent content (unknown state, duplicate, ...)."""


@dataclass(frozen=True)
class UnaryTransition:
    source: int
    delta: int
    target: int

    def __post_init__(self):
        if self.delta not in Z_VALUES:
            raise ValueError(f"unary shift must be -1, 0 or +1, got {self.delta}")


@dataclass(frozen=True)
class BranchTransition:
    source: int
    left: int
    right: int


@dataclass(frozen=True)
class Config:
    """A control state paired with a natural counter value."""

    state: int
    counter: int

    def __post_init__(self):
        if self.counter < 0:
            raise ValueError(f"counter must be a natural number, got {self.counter}")


@dataclass(frozen=True)
class Bvass1:
    """A branching one-counter system.

    States are dense integer ids; ``state_names`` fixes the id order and
    the external names used by the text format.
    """

    state_names: tuple[str, ...]
    unary: tuple[UnaryTransition, ...]
    branching: tuple[BranchTransition, ...]
    finals: frozenset[int]

    def __post_init__(self):
        n = len(self.state_names)
        if len(set(self.state_names)) != n:
            raise SemanticError("duplicate state name")
        for name in self.state_names:
            if name in RESERVED_WORDS:
                raise SemanticError(f"state name {name!r} is a reserved word")
        for t in self.unary:
            if not (0 <= t.source < n and 0 <= t.target < n):
                raise SemanticError(f"unary transition {t} references an unknown state")
        for t in self.branching:
            if not (0 <= t.source < n and 0 <= t.left < n and 0 <= t.right < n):
                raise SemanticError(f"branching transition {t} references an unknown state")
        for f in self.finals:
            if not 0 <= f < n:
                raise SemanticError(f"final state id {f} is out of range")

    @property
    def num_states(self) -> int:
        return len(self.state_names)

    @property
    def size(self) -> int:
        return len(self.state_names) + len(self.unary) + len(self.branching)

    def state_id(self, name: str) -> int:
        try:
            return self._name_index[name]
        except KeyError:
            raise SemanticError(f"unknown state {name!r}") from None

    def state_name(self, state: int) -> str:
        return self.state_names[state]

    @cached_property
    def _name_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.state_names)}

    @cached_property
    def unary_by_source(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.num_states)]
        for i, t in enumerate(self.unary):
            out[t.source].append(i)
        return tuple(tuple(v) for v in out)

    @cached_property
    def branching_by_source(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.num_states)]
        for i, t in enumerate(self.branching):
            out[t.source].append(i)
        return tuple(tuple(v) for v in out)

    def successors(self, state: int) -> set[int]:
        """States directly enterable from ``state`` by any transition."""
        out: set[int] = set()
        for i in self.unary_by_source[state]:
            out.add(self.unary[i].target)
        for i in self.branching_by_source[state]:
            out.add(self.branching[i].left)
            out.add(self.branching[i].right)
        return out


def validate_bvass(system: Bvass1) -> list[str]:
    """Structural problems of a system; empty list means well formed.

    Construction already enforces these invariants, so this only reports
    on systems rebuilt through unchecked paths; kept as a public check.
    """
    problems: list[str] = []
    n = system.num_states
    if len(set(system.state_names)) != n:
        problems.append("duplicate state name")
    for t in system.unary:
        if t.delta not in Z_VALUES:
            problems.append(f"bad shift {t.delta}")
        if not (0 <= t.source < n and 0 <= t.target < n):
            problems.append(f"dangling unary transition {t}")
    for t in system.branching:
        if not (0 <= t.source < n and 0 <= t.left < n and 0 <= t.right < n):
            problems.append(f"dangling branching transition {t}")
    for f in system.finals:
        if not 0 <= f < n:
            problems.append(f"dangling final state {f}")
    return problems


# ---------------------------------------------------------------------------
# system text format


def parse_bvass(text: str) -> Bvass1:
    """Parse the line-oriented system format.

    Directives are ``state <name>``, ``final <name>``,
    ``unary <src> <z> <tgt>`` and ``branch <src> <left> <right>``;
    ``#`` starts a comment.  Several directives may share a line.  States
    must be declared before use; declaration order fixes their ids.
    """
    names: list[str] = []
    ids: dict[str, int] = {}
    unary: list[UnaryTransition] = []
    branching: list[BranchTransition] = []
    finals: set[int] = set()

    def resolve(token: str, line_no: int) -> int:
        if token not in ids:
            raise SemanticError(f"line {line_no}: unknown state {token!r}")
        return ids[token]

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        pos = 0
        while pos < len(tokens):
            word = tokens[pos]
            if word == "state":
                if pos + 1 >= len(tokens):
                    raise FormatError(line_no, "state needs a name")
                name = tokens[pos + 1]
                if name in RESERVED_WORDS:
                    raise SemanticError(f"line {line_no}: {name!r} is a reserved word")
                if name in ids:
                    raise SemanticError(f"line {line_no}: duplicate state {name!r}")
                ids[name] = len(names)
                names.append(name)
                pos += 2
            elif word == "final":
                if pos + 1 >= len(tokens):
                    raise FormatError(line_no, "final needs a state name")
                finals.add(resolve(tokens[pos + 1], line_no))
                pos += 2
            elif word == "unary":
                if pos + 3 >= len(tokens):
                    raise FormatError(line_no, "unary needs <src> <z> <tgt>")
                src, z_tok, tgt = tokens[pos + 1 : pos + 4]
                try:
                    z = int(z_tok)
                except ValueError:
                    raise FormatError(line_no, f"bad counter shift {z_tok!r}") from None
                if z not in Z_VALUES:
                    raise SemanticError(f"line {line_no}: counter shift must be -1, 0 or +1")
                unary.append(UnaryTransition(resolve(src, line_no), z, resolve(tgt, line_no)))
                pos += 4
            elif word == "branch":
                if pos + 3 >= len(tokens):
                    raise FormatError(line_no, "branch needs <src> <left> <right>")
                src, left, right = tokens[pos + 1 : pos + 4]
                branching.append(
                    BranchTransition(resolve(src, line_no), resolve(left, line_no), resolve(right, line_no))
                )
                pos += 4
            else:
                raise FormatError(line_no, f"unknown directive {word!r}")
    return Bvass1(tuple(names), tuple(unary), tuple(branching), frozenset(finals))


def format_bvass(system: Bvass1) -> str:
    """Render a system in the text format; parse(format(B)) == B."""
    lines = [f"state {name}" for name in system.state_names]
    lines += [f"final {system.state_name(f)}" for f in sorted(system.finals)]
    for t in system.unary:
        z = f"+{t.delta}" if t.delta > 0 else str(t.delta)
        lines.append(f"unary {system.state_name(t.source)} {z} {system.state_name(t.target)}")
    for t in system.branching:
        lines.append(
            f"branch {system.state_name(t.source)} {system.state_name(t.left)} {system.state_name(t.right)}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class PartialTree:
    """A binary tree of configurations, keyed by 0/1 address strings.

    The mapping is treated as immutable after construction.  Nothing about
    well-formedness is assumed here; use the validators.
    """

    labels: dict[str, Config]

    def __len__(self) -> int:
        return len(self.labels)

    def addresses(self) -> list[str]:
        return sorted(self.labels, key=lambda a: (len(a), a))

    def label(self, addr: str) -> Config:
        return self.labels[addr]

    def children(self, addr: str) -> tuple[Optional[str], Optional[str]]:
        left = addr + "0"
        right = addr + "1"
        return (left if left in self.labels else None, right if right in self.labels else None)

    def is_leaf(self, addr: str) -> bool:
        return addr + "0" not in self.labels and addr + "1" not in self.labels

    def leaves(self) -> list[str]:
        return [a for a in self.addresses() if self.is_leaf(a)]

    def subtree(self, addr: str) -> "PartialTree":
        k = len(addr)
        return PartialTree({a[k:]: c for a, c in self.labels.items() if a.startswith(addr)})


def lca(a: str, b: str) -> str:
    """Longest common prefix of two addresses."""
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return a[:i]


def is_ancestor(a: str, b: str) -> bool:
    """True iff ``a`` is an ancestor of ``b`` or equal to it."""
    return b.startswith(a)


@dataclass(frozen=True)
class NodeClassification:
    """Increasing/decreasing nodes of a tree and the anchor of each increasing node.

    The anchor of an increasing node is its deepest proper ancestor with
    the same state and a strictly smaller counter.
    """

    increasing: frozenset[str]
    anchor_of: dict[str, str]
    decreasing: frozenset[str]


def classify_nodes(tree: PartialTree) -> NodeClassification:
    increasing: set[str] = set()
    decreasing: set[str] = set()
    anchor_of: dict[str, str] = {}
    labels = tree.labels
    for addr in tree.addresses():
        cfg = labels[addr]
        is_decreasing = False
        # Walk ancestors from deepest to the root; the first qualifying
        # ancestor is the maximal (deepest) anchor.
        for k in range(len(addr) - 1, -1, -1):
            anc = labels[addr[:k]] if addr[:k] in labels else None
            if anc is None:
                continue
            if anc.state == cfg.state:
                if anc.counter < cfg.counter and addr not in increasing:
                    increasing.add(addr)
                    anchor_of[addr] = addr[:k]
                elif anc.counter > cfg.counter:
                    is_decreasing = True
            if addr in increasing and is_decreasing:
                break
        if is_decreasing:
            decreasing.add(addr)
    return NodeClassification(frozenset(increasing), anchor_of, frozenset(decreasing))


def validate_partial_tree_report(system: Bvass1, tree: PartialTree) -> tuple[bool, Optional[str], str]:
    """Validate a partial derivation tree; reports the first violating address.

    A tree is valid when its domain is non-empty and prefix-closed and
    every inner node matches exactly one transition shape: both children
    present with counters summing to the parent under some branching
    transition, or only the left child present with counter shifted by
    some unary transition.
    """
    if not tree.labels:
        return False, None, "empty tree"
    labels = tree.labels
    for addr in tree.addresses():
        if addr and addr[:-1] not in labels:
            return False, addr, "domain is not prefix-closed"
        if any(c not in "01" for c in addr):
            return False, addr, "address contains characters other than 0/1"
    for addr in tree.addresses():
        cfg = labels[addr]
        left, right = tree.children(addr)
        if left is None and right is None:
            continue
        if left is None and right is not None:
            return False, addr, "node has only a right child"
        lcfg = labels[left]
        if right is not None:
            rcfg = labels[right]
            ok = any(
                t.left == lcfg.state and t.right == rcfg.state
                for i in system.branching_by_source[cfg.state]
                for t in (system.branching[i],)
            )
            if not ok:
                return False, addr, "no branching transition matches the children"
            if lcfg.counter + rcfg.counter != cfg.counter:
                return False, addr, "children counters do not sum to the parent counter"
        else:
            ok = any(
                t.target == lcfg.state and cfg.counter + t.delta == lcfg.counter
                for i in system.unary_by_source[cfg.state]
                for t in (system.unary[i],)
            )
            if not ok:
                return False, addr, "no unary transition matches the child"
    return True, None, "ok"


def validate_partial_tree(system: Bvass1, tree: PartialTree) -> bool:
    return validate_partial_tree_report(system, tree)[0]


def is_accepting(system: Bvass1, cfg: Config) -> bool:
    return cfg.state in system.finals and cfg.counter == 0


def is_reachability_tree(system: Bvass1, tree: PartialTree) -> bool:
    """True iff the tree is valid and every leaf is a final state at zero."""
    if not validate_partial_tree(system, tree):
        return False
    return all(is_accepting(system, tree.labels[a]) for a in tree.leaves())


def is_bounded_tree(tree: PartialTree, bound: int) -> bool:
    """True iff every node's counter is at most ``bound``."""
    return all(c.counter <= bound for c in tree.labels.values())


def is_exclusive(tree: PartialTree) -> bool:
    """Exclusivity of pumping segments.

    For any two distinct increasing leaves, their least common ancestor
    must sit strictly below at least one of the two anchors; equivalently
    it is never the case that both anchors are ancestors of the lca.
    """
    cls = classify_nodes(tree)
    inc_leaves = [a for a in cls.increasing if tree.is_leaf(a)]
    inc_leaves.sort(key=lambda a: (len(a), a))
    for i, a in enumerate(inc_leaves):
        for b in inc_leaves[i + 1 :]:
            meet = lca(a, b)
            if is_ancestor(cls.anchor_of[a], meet) and is_ancestor(cls.anchor_of[b], meet):
                return False
    return True


# ---------------------------------------------------------------------------
# tree text format


def _addr_to_text(addr: str) -> str:
    return addr if addr else "e"


def _addr_from_text(token: str, line_no: int) -> str:
    if token == "e":
        return ""
    if not token or any(c not in "01" for c in token):
        raise FormatError(line_no, f"bad node address {token!r}")
    return token


def tree_to_text(system: Bvass1, tree: PartialTree) -> str:
    """One line per node: ``<address> <state> <counter>``; the root is ``e``."""
    lines = []
    for addr in tree.addresses():
        cfg = tree.labels[addr]
        lines.append(f"{_addr_to_text(addr)} {system.state_name(cfg.state)} {cfg.counter}")
    return "\n".join(lines) + "\n"


def tree_from_text(system: Bvass1, text: str) -> PartialTree:
    labels: dict[str, Config] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "pump":
            continue  # certificate payload lines; handled elsewhere
        if len(tokens) != 3:
            raise FormatError(line_no, "expected <address> <state> <counter>")
        addr = _addr_from_text(tokens[0], line_no)
        if addr in labels:
            raise SemanticError(f"line {line_no}: duplicate address {tokens[0]!r}")
        state = system.state_id(tokens[1])
        try:
            counter = int(tokens[2])
        except ValueError:
            raise FormatError(line_no, f"bad counter {tokens[2]!r}") from None
        if counter < 0:
            raise SemanticError(f"line {line_no}: negative counter")
        labels[addr] = Config(state, counter)
    if not labels:
        raise FormatError(1, "empty tree")
    return PartialTree(labels)


def raw_tree_from_text(text: str) -> dict[str, tuple[str, int]]:
    """Parse a tree file without a system: address -> (state name, counter)."""
    labels: dict[str, tuple[str, int]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "pump":
            continue
        if len(tokens) != 3:
            raise FormatError(line_no, "expected <address> <state> <counter>")
        addr = _addr_from_text(tokens[0], line_no)
        if addr in labels:
            raise SemanticError(f"line {line_no}: duplicate address {tokens[0]!r}")
        try:
            counter = int(tokens[2])
        except ValueError:
            raise FormatError(line_no, f"bad counter {tokens[2]!r}") from None
        if counter < 0:
            raise SemanticError(f"line {line_no}: negative counter")
        labels[addr] = (tokens[1], counter)
    if not labels:
        raise FormatError(1, "empty tree")
    return labels
