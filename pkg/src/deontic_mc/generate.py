"""Seeded random models, automata, formulas and obligations.

Used by the randomized demos and by the property/acceptance suites.  All
generators take a random.Random so runs are reproducible from a seed, and
generated structures satisfy the respective validity axioms by
construction (the suites re-check this).
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import formula as fm
from .automaton import StitAutomaton
from .tree_model import ExplicitStitModel


def random_model(rng: random.Random, max_depth=3, max_histories=6,
                 n_agents=1, atoms=("p", "q", "g"), never_label=(),
                 label_chance=0.45) -> ExplicitStitModel:
    """Random valid stit model: random tree, per-leaf histories, coarsened
    child-block choice partitions (gridded across two agents so that
    independence holds), random labels and integer values."""
    parents: dict[int, int | None] = {0: None}
    counter = [0]

    def build(parent, depth, budget):
        leaves = []
        if depth >= max_depth or budget <= 1 or \
                (parent != 0 and rng.random() < 0.3):
            return [parent]
        k = rng.randint(2, min(3, budget))
        shares = _split(rng, budget, k)
        for share in shares:
            counter[0] += 1
            mid = counter[0]
            parents[mid] = parent
            leaves.extend(build(mid, depth + 1, share))
        return leaves

    leaf_list = build(0, 0, max_histories)
    moments = sorted(parents)
    children: dict[int, list[int]] = {m: [] for m in moments}
    for m in moments:
        if parents[m] is not None:
            children[parents[m]].append(m)
    paths = {}
    for leaf in leaf_list:
        path = [leaf]
        while parents[path[0]] is not None:
            path.insert(0, parents[path[0]])
        paths[leaf] = path
    histories = [(f"h{i + 1}", paths[leaf], Fraction(rng.randint(0, 9)))
                 for i, leaf in enumerate(sorted(paths))]
    through: dict[int, list[str]] = {m: [] for m in moments}
    for hid, path, _ in histories:
        for m in path:
            through[m].append(hid)
    agents = ["alpha", "beta"][:n_agents]
    choices = {}
    for m in moments:
        kids = children[m]
        if len(kids) < 2:
            continue
        blocks = [frozenset(through[c]) for c in kids if through[c]]
        if len(blocks) < 2:
            continue
        cells_per_agent = _partition_blocks(rng, blocks, len(agents))
        for agent, cells in zip(agents, cells_per_agent):
            choices[(agent, m)] = [sorted(cell) for cell in cells]
    labels = {}
    labeled_atoms = [a for a in atoms if a not in never_label]
    for hid, path, _ in histories:
        for m in path:
            chosen = {a for a in labeled_atoms if rng.random() < label_chance}
            if chosen:
                labels[(m, hid)] = chosen
    return ExplicitStitModel(agents, list(atoms), [(m, parents[m]) for m in moments],
                             histories, choices, labels)


def _split(rng, total, parts):
    """total split into `parts` positive integers."""
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def _partition_blocks(rng, blocks, n_agents):
    """Coarsen child blocks into one partition per agent.

    For a single agent: any random grouping.  For two agents: blocks are
    spread over an r x c grid covering every (row, column) pair, rows become
    the first agent's actions and columns the second's, which guarantees
    independence of agents.
    """
    blocks = list(blocks)
    rng.shuffle(blocks)
    if n_agents == 1:
        n_cells = rng.randint(1, len(blocks))
        cells = [set() for _ in range(n_cells)]
        for i, b in enumerate(blocks):
            target = i if i < n_cells else rng.randrange(n_cells)
            cells[target].update(b)
        return [[frozenset(c) for c in cells if c]]
    rows = rng.randint(1, len(blocks))
    cols = rng.randint(1, len(blocks) // rows)
    grid: dict[tuple[int, int], set] = {}
    slots = [(r, c) for r in range(rows) for c in range(cols)]
    for i, b in enumerate(blocks):
        slot = slots[i] if i < len(slots) else rng.choice(slots)
        grid.setdefault(slot, set()).update(b)
    row_cells = [frozenset().union(*(grid.get((r, c), set()) for c in range(cols)))
                 for r in range(rows)]
    col_cells = [frozenset().union(*(grid.get((r, c), set()) for r in range(rows)))
                 for c in range(cols)]
    return [[c for c in row_cells if c], [c for c in col_cells if c]]


def random_path_formula(rng: random.Random, depth, atoms,
                        allow_quantifiers=False, allow_bounded=True
                        ) -> fm.Formula:
    """Random formula; with quantifiers allowed the result is full CTL*."""
    if depth <= 0 or rng.random() < 0.2:
        roll = rng.random()
        if roll < 0.85:
            return fm.Atom(rng.choice(list(atoms)))
        return fm.TRUE if roll < 0.95 else fm.FALSE

    def sub(d=None):
        return random_path_formula(rng, depth - 1 if d is None else d, atoms,
                                   allow_quantifiers, allow_bounded)

    ops = ["not", "and", "or", "implies", "next", "until", "release",
           "eventually", "always"]
    if allow_bounded:
        ops += ["nextpow", "boundedf", "boundedr"]
    if allow_quantifiers:
        ops += ["forall", "exists"]
    op = rng.choice(ops)
    if op == "not":
        return fm.Not(sub())
    if op == "and":
        return fm.And(sub(), sub())
    if op == "or":
        return fm.Or(sub(), sub())
    if op == "implies":
        return fm.Implies(sub(), sub())
    if op == "next":
        return fm.Next(sub())
    if op == "until":
        return fm.Until(sub(), sub())
    if op == "release":
        return fm.Release(sub(), sub())
    if op == "eventually":
        return fm.Eventually(sub())
    if op == "always":
        return fm.Always(sub())
    if op == "nextpow":
        return fm.NextPow(rng.randint(0, 2), sub())
    if op == "boundedf":
        lo = rng.randint(0, 1)
        return fm.EventuallyBounded(lo, lo + rng.randint(0, 2), sub())
    if op == "boundedr":
        return fm.BoundedRelease(rng.randint(0, 2), sub(), sub())
    if op == "forall":
        return fm.ForallPaths(sub())
    return fm.ExistsPaths(sub())


def random_obligation(rng: random.Random, agent, depth, atoms,
                      allow_quantifiers=False) -> fm.Obligation:
    """One of the three checkable obligation shapes over a random formula."""
    body = random_path_formula(rng, depth, atoms, allow_quantifiers)
    roll = rng.random()
    if roll < 0.5:
        return fm.Plain(body)
    if roll < 0.75:
        return fm.DstitOf(agent, fm.Plain(body))
    return fm.NegatedObligation(fm.DstitOf(agent, fm.Plain(body)))


def random_automaton(rng: random.Random, max_states=6, max_first_actions=3,
                     weights=(1, 2, 3, 4, 5), atoms=("p", "q"),
                     label_chance=0.5) -> StitAutomaton:
    """Random valid stit automaton: every state keeps an outgoing
    transition, targets are distinct per source (so per-edge actions are
    unique), and the initial state fans out over up to max_first_actions."""
    n = rng.randint(2, max_states)
    states = [f"q{i}" for i in range(n)]
    transitions = []
    actions = []
    for i, q in enumerate(states):
        if q == "q0":
            n_out = rng.randint(1, min(max_first_actions + 1, n))
            targets = rng.sample(states, n_out)
            n_actions = rng.randint(1, min(max_first_actions, n_out))
            names = [f"K{j + 1}" for j in range(n_actions)]
        else:
            n_out = rng.randint(1, min(2, n))
            targets = rng.sample(states, n_out)
            n_actions = rng.randint(1, n_out)
            names = [f"m{j + 1}" for j in range(n_actions)]
        for name in names:
            if name not in actions:
                actions.append(name)
        for j, dst in enumerate(targets):
            act = names[j] if j < len(names) else rng.choice(names)
            transitions.append((q, act, dst, Fraction(rng.choice(weights))))
    labels = {q: {a for a in atoms if rng.random() < label_chance}
              for q in states}
    return StitAutomaton(states, "q0", actions, [], transitions, labels)
