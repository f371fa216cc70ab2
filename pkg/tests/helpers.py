"""Shared builders for the test suites."""
from __future__ import annotations

import random

from bvass1.model import Bvass1, Config, PartialTree, parse_bvass

LOOP_TEXT = """
state a  state f
final f
unary a -1 a
unary a 0 f
"""

# Doubling system at n = 2, written out in the file format.
B2_TEXT = """\
state q   state q_f  state q_0  state q_1  state q_2
final q_f
unary q +1 q
unary q 0 q_2
branch q_2 q_1 q_1
branch q_1 q_0 q_0
unary q_0 -1 q_f
"""


def b2() -> Bvass1:
    return parse_bvass(B2_TEXT)


def loop_gadget() -> Bvass1:
    """Two states: a counts down to itself and may exit to the final f.

    reach(a) is all naturals, reach(f) = {0}.
    """
    return parse_bvass(LOOP_TEXT)


def tree_of(system: Bvass1, labels: dict[str, tuple[str, int]]) -> PartialTree:
    """Build a tree from {address: (state name, counter)}."""
    return PartialTree(
        {addr: Config(system.state_id(name), c) for addr, (name, c) in labels.items()}
    )


def random_valid_tree(system: Bvass1, rng: random.Random, max_nodes: int = 40) -> PartialTree:
    """Grow a random valid partial tree by expanding leaves top-down."""
    state = rng.randrange(system.num_states)
    labels = {"": Config(state, rng.randint(0, 3))}
    frontier = [""]
    while frontier and len(labels) < max_nodes:
        addr = frontier.pop(rng.randrange(len(frontier)))
        if rng.random() < 0.25:
            continue  # leave this node a leaf
        cfg = labels[addr]
        options: list[tuple] = []
        for i in system.unary_by_source[cfg.state]:
            t = system.unary[i]
            if cfg.counter + t.delta >= 0:
                options.append(("u", t))
        for i in system.branching_by_source[cfg.state]:
            options.append(("b", system.branching[i]))
        if not options:
            continue
        kind, t = options[rng.randrange(len(options))]
        if kind == "u":
            labels[addr + "0"] = Config(t.target, cfg.counter + t.delta)
            frontier.append(addr + "0")
        else:
            m0 = rng.randint(0, cfg.counter)
            labels[addr + "0"] = Config(t.left, m0)
            labels[addr + "1"] = Config(t.right, cfg.counter - m0)
            frontier.append(addr + "0")
            frontier.append(addr + "1")
    return PartialTree(labels)
