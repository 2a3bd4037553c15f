"""Weighted stit automata and the graph surgery behind the model checker.

A stit automaton is a finite nondeterministic automaton whose transitions
carry an action label and a rational weight.  Executing it forever generates
a utilitarian stit model: executions become histories and the accumulation
function (here: min, the bottleneck value) turns traversed weights into the
history's utility.

This module owns the automaton data model, its validation, synchronous
products, the finite unrolling into an explicit stit model, the
first-action restriction and its primed union (whose executions are exactly
the executions starting with that action), exact extremal (maximin /
minimin) bottleneck values, and the cycle-automaton machinery that
enumerates abstract schedules.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import AutomatonError, ResourceLimitError
from .tree_model import ExplicitStitModel


DEFAULT_RESOURCE_LIMIT = 10_000


def resource_limit() -> int:
    raw = os.environ.get("DEONTIC_MC_RESOURCE_LIMIT", "")
    try:
        return int(raw) if raw else DEFAULT_RESOURCE_LIMIT
    except ValueError:
        return DEFAULT_RESOURCE_LIMIT


def _as_weight(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, bool):
        raise AutomatonError(f"bad weight {w!r}")
    if isinstance(w, int):
        return Fraction(w)
    if isinstance(w, (str, float)):
        return Fraction(str(w))
    raise AutomatonError(f"bad weight {w!r}")


def _weight_text(w: Fraction) -> str:
    if w.denominator == 1:
        return str(w.numerator)
    den, twos, fives = w.denominator, 0, 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:  # no finite decimal expansion; Fraction text stays exact
        return str(w)
    k = max(twos, fives)
    scaled = w.numerator * (10 ** k // w.denominator)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(k + 1, "0")
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


@dataclass(frozen=True)
class Transition:
    src: str
    action: str
    dst: str
    weight: Fraction


@dataclass(frozen=True)
class AccumulationSpec:
    """How weights along an execution turn into a history value.

    Only the bottleneck accumulation (min) is implemented; the kind is kept
    as data so mixed-kind products are detectable.
    """

    kind: str = "min"

    def combine(self, values):
        """The commutative schedule combiner (min for the bottleneck value)."""
        if self.kind != "min":
            raise AutomatonError(f"unsupported accumulation {self.kind!r}")
        values = list(values)
        if not values:
            raise AutomatonError("nothing to combine")
        return min(values)

    def of_path(self, transitions):
        return self.combine(t.weight for t in transitions)


@dataclass(frozen=True)
class Execution:
    """Ultimately periodic execution: a finite stem and a repeated loop."""

    stem: tuple[Transition, ...]
    loop: tuple[Transition, ...]

    def __post_init__(self):
        if not self.loop:
            raise AutomatonError("execution loop must be non-empty")
        seq = self.stem + self.loop
        for a, b in zip(seq, seq[1:]):
            if a.dst != b.src:
                raise AutomatonError("execution transitions do not chain")
        if self.loop[-1].dst != self.loop[0].src:
            raise AutomatonError("execution loop is not closed")

    def value(self, accumulation: AccumulationSpec) -> Fraction:
        return accumulation.of_path(self.stem + self.loop)

    def strategy(self) -> "Strategy":
        return Strategy(tuple(t.action for t in self.stem),
                        tuple(t.action for t in self.loop))


@dataclass(frozen=True)
class Strategy:
    """Action projection of an execution, lasso-represented."""

    stem: tuple[str, ...]
    loop: tuple[str, ...]


@dataclass(frozen=True)
class ValueInterval:
    """[lo, hi]: extreme history values reachable after one first action."""

    action: str | None
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise AutomatonError(f"interval [{self.lo}, {self.hi}] is inverted")


@dataclass(frozen=True)
class AutomatonViolation:
    axiom: str
    state: str | None
    detail: str

    def __str__(self):
        loc = f" (state={self.state})" if self.state is not None else ""
        return f"[{self.axiom}]{loc} {self.detail}"


class StitAutomaton:
    """Finite weighted nondeterministic automaton with labeled states."""

    def __init__(self, states, initial, actions, final, transitions, labels,
                 accumulation=None):
        self.states = list(states)
        self.initial = initial
        self.actions = list(actions)
        self.final = set(final)
        self.transitions = [
            t if isinstance(t, Transition)
            else Transition(t[0], t[1], t[2], _as_weight(t[3]))
            for t in transitions]
        self.labels = {q: frozenset(v) for q, v in dict(labels).items()}
        self.accumulation = accumulation or AccumulationSpec()
        self._out: dict[str, list[Transition]] = {q: [] for q in self.states}
        for t in self.transitions:
            self._out.setdefault(t.src, []).append(t)

    def out(self, state) -> list[Transition]:
        if state not in self._out:
            raise AutomatonError(f"unknown state {state!r}")
        return self._out[state]

    def enabled_actions(self, state) -> list[str]:
        """Actions labeling outgoing transitions, in declaration order."""
        seen = []
        for t in self.out(state):
            if t.action not in seen:
                seen.append(t.action)
        return seen

    def post(self, state, action) -> list[str]:
        return [t.dst for t in self.out(state) if t.action == action]

    def label(self, state) -> frozenset:
        return self.labels.get(state, frozenset())

    def atoms(self) -> list[str]:
        out = sorted({a for v in self.labels.values() for a in v})
        return out

    def reachable(self) -> list[str]:
        seen = [self.initial]
        seen_set = {self.initial}
        queue = [self.initial]
        while queue:
            q = queue.pop(0)
            for t in self._out.get(q, ()):
                if t.dst not in seen_set:
                    seen_set.add(t.dst)
                    seen.append(t.dst)
                    queue.append(t.dst)
        return seen

    def first_actions(self) -> list[str]:
        return self.enabled_actions(self.initial)

    # -- validation ----------------------------------------------------------

    def validate(self) -> list[AutomatonViolation]:
        out = []
        states = set(self.states)
        if self.initial not in states:
            out.append(AutomatonViolation("initial", self.initial,
                                          "initial state not in state set"))
        for q in self.final - states:
            out.append(AutomatonViolation("final", q, "final state unknown"))
        for q in set(self.labels) - states:
            out.append(AutomatonViolation("labels", q, "labeled state unknown"))
        by_pair: dict[tuple[str, str], set[str]] = {}
        seen_triples = set()
        for t in self.transitions:
            if t.src not in states or t.dst not in states:
                out.append(AutomatonViolation(
                    "endpoints", t.src, f"transition {t} has unknown endpoint"))
                continue
            if t.action not in self.actions:
                out.append(AutomatonViolation(
                    "actions", t.src, f"transition action {t.action!r} not declared"))
            by_pair.setdefault((t.src, t.dst), set()).add(t.action)
            triple = (t.src, t.action, t.dst)
            if triple in seen_triples:
                out.append(AutomatonViolation(
                    "edge-uniqueness", t.src,
                    f"duplicate transition {t.src} -{t.action}-> {t.dst}"))
            seen_triples.add(triple)
        for (src, dst), acts in sorted(by_pair.items()):
            if len(acts) > 1:
                out.append(AutomatonViolation(
                    "edge-uniqueness", src,
                    f"transitions {src} -> {dst} carry distinct actions "
                    f"{sorted(acts)}"))
        if self.initial in states:
            for q in self.reachable():
                if not self._out.get(q):
                    out.append(AutomatonViolation(
                        "no-dead-end", q,
                        "reachable state has no outgoing transition"))
        return out

    def require_valid(self):
        violations = self.validate()
        if violations:
            raise AutomatonError(
                "invalid automaton: " + "; ".join(str(v) for v in violations))

    # -- serialization -------------------------------------------------------

    _FIELDS = ("states", "init", "final", "actions", "transitions", "labels",
               "accumulation")

    @classmethod
    def from_json(cls, data: dict) -> "StitAutomaton":
        _require_fields(data, cls._FIELDS, "automaton")
        transitions = []
        for e in data["transitions"]:
            _require_fields(e, ("from", "action", "to", "weight"), "transitions")
            transitions.append(Transition(e["from"], e["action"], e["to"],
                                          _as_weight(e["weight"])))
        if not isinstance(data["labels"], dict):
            raise AutomatonError("labels: expected an object keyed by state")
        return cls(data["states"], data["init"], data["actions"], data["final"],
                   transitions, data["labels"],
                   AccumulationSpec(data["accumulation"]))

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "init": self.initial,
            "final": sorted(self.final),
            "actions": list(self.actions),
            "transitions": [{"from": t.src, "action": t.action, "to": t.dst,
                             "weight": _weight_text(t.weight)}
                            for t in self.transitions],
            "labels": {q: sorted(v) for q, v in sorted(self.labels.items()) if v},
            "accumulation": self.accumulation.kind,
        }


def _require_fields(data, fields, what):
    if not isinstance(data, dict):
        raise AutomatonError(f"{what}: expected an object")
    missing = [f for f in fields if f not in data]
    unknown = [f for f in data if f not in fields]
    if missing:
        raise AutomatonError(f"{what}: missing fields {missing}")
    if unknown:
        raise AutomatonError(f"{what}: unknown fields {unknown}")


def load_automaton(path) -> StitAutomaton:
    with open(path, "r", encoding="utf-8") as fp:
        data = json.load(fp, parse_float=Fraction)
    return StitAutomaton.from_json(data)


def save_automaton(aut: StitAutomaton, path):
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(aut.to_json(), fp, indent=2)
        fp.write("\n")


def validate_automaton(aut: StitAutomaton) -> list[AutomatonViolation]:
    return aut.validate()


# ---------------------------------------------------------------------------
# Product
# ---------------------------------------------------------------------------

_WEIGHT_POLICIES = {"min": min, "sum": sum}


def product(automata, weight_combine="min", names=None) -> StitAutomaton:
    """Synchronous product: states and actions are tuples of the components'.

    Labels are unioned; with more than one component each atom is qualified
    by its component's name ("a0.p").  Weights combine per the named policy.
    """
    if not automata:
        raise AutomatonError("product of zero automata")
    if weight_combine not in _WEIGHT_POLICIES:
        raise AutomatonError(f"unknown weight policy {weight_combine!r}")
    kinds = {a.accumulation.kind for a in automata}
    if len(kinds) != 1:
        raise AutomatonError(f"accumulation kinds differ: {sorted(kinds)}")
    combine = _WEIGHT_POLICIES[weight_combine]
    names = list(names) if names else [f"a{i}" for i in range(len(automata))]
    if len(names) != len(automata):
        raise AutomatonError("need one name per component")
    qualify = len(automata) > 1

    def state_id(qs):
        return "|".join(qs)

    def action_id(ks):
        return "|".join(ks)

    states = [state_id(qs) for qs in
              itertools.product(*[a.states for a in automata])]
    initial = state_id(tuple(a.initial for a in automata))
    final = {state_id(qs) for qs in
             itertools.product(*[sorted(a.final) for a in automata])}
    labels = {}
    for qs in itertools.product(*[a.states for a in automata]):
        atoms = set()
        for name, q, a in zip(names, qs, automata):
            for atom in a.label(q):
                atoms.add(f"{name}.{atom}" if qualify else atom)
        labels[state_id(qs)] = atoms
    transitions = []
    actions = []
    for srcs in itertools.product(*[a.states for a in automata]):
        for ts in itertools.product(*[a._out.get(q, ()) for q, a in
                                      zip(srcs, automata)]):
            act = action_id(tuple(t.action for t in ts))
            if act not in actions:
                actions.append(act)
            transitions.append(Transition(
                state_id(srcs), act,
                state_id(tuple(t.dst for t in ts)),
                combine([t.weight for t in ts])))
    return StitAutomaton(states, initial, actions, final, transitions, labels,
                         automata[0].accumulation)


# ---------------------------------------------------------------------------
# Unrolling into an explicit stit model
# ---------------------------------------------------------------------------

def unroll(aut: StitAutomaton, depth: int, agent: str = "alpha") -> ExplicitStitModel:
    """Execute the automaton for `depth` steps and build the stit model.

    Moments mirror (state, path) pairs, the choice at each non-leaf moment
    mirrors the actions enabled at its state, labels copy the state labeling,
    and each history's value accumulates the weights along its path (for the
    min accumulation: the bottleneck of the finite prefix).

    A finite prefix's bottleneck only bounds the infinite history's value
    from above, so value questions go through extremal_values or lasso
    analysis; unrolling answers structural and bounded-horizon questions.
    """
    if depth <= 0:
        raise AutomatonError("unroll needs depth >= 1")
    aut.require_valid()
    moments = [(0, None)]
    state_of = {0: aut.initial}
    child_action: dict[int, str] = {}
    incoming_weight: dict[int, Fraction] = {}
    frontier = [0]
    next_id = 1
    for _ in range(depth):
        new_frontier = []
        for m in frontier:
            for t in aut.out(state_of[m]):
                mid = next_id
                next_id += 1
                moments.append((mid, m))
                state_of[mid] = t.dst
                child_action[mid] = t.action
                incoming_weight[mid] = t.weight
                new_frontier.append(mid)
        frontier = new_frontier
    children: dict[int, list[int]] = {}
    for mid, parent in moments:
        if parent is not None:
            children.setdefault(parent, []).append(mid)
    histories = []
    paths = {}
    counter = itertools.count(1)

    def descend(mid, path):
        kids = children.get(mid, [])
        if not kids:
            hid = f"h{next(counter)}"
            weights = [incoming_weight[m] for m in path[1:]]
            value = aut.accumulation.combine(weights) if weights else Fraction(0)
            histories.append((hid, list(path), value))
            paths[hid] = list(path)
            return
        for kid in kids:
            descend(kid, path + [kid])

    descend(0, [0])
    through: dict[int, list[str]] = {}
    for hid, ms, _ in histories:
        for m in ms:
            through.setdefault(m, []).append(hid)
    choices = {}
    for mid, _ in moments:
        kids = children.get(mid)
        if not kids:
            continue
        cells = {}
        for kid in kids:
            cells.setdefault(child_action[kid], set()).update(through.get(kid, ()))
        ordered = [sorted(cells[a]) for a in aut.enabled_actions(state_of[mid])
                   if a in cells]
        choices[(agent, mid)] = ordered
    labels = {}
    for mid, _ in moments:
        atoms = aut.label(state_of[mid])
        for hid in through.get(mid, ()):
            labels[(mid, hid)] = atoms
    return ExplicitStitModel([agent], aut.atoms(), moments, histories,
                             choices, labels)


# ---------------------------------------------------------------------------
# First-action restriction and the primed union
# ---------------------------------------------------------------------------

def restrict_first_action(aut: StitAutomaton, action: str) -> StitAutomaton:
    """Delete every initial-state transition not labeled by the action."""
    if action not in aut.first_actions():
        raise AutomatonError(
            f"action {action!r} is not enabled at {aut.initial!r}")
    transitions = [t for t in aut.transitions
                   if t.src != aut.initial or t.action == action]
    return StitAutomaton(aut.states, aut.initial, aut.actions, aut.final,
                         transitions, aut.labels, aut.accumulation)


def prime_automaton(restricted: StitAutomaton, aut: StitAutomaton) -> StitAutomaton:
    """Union a renamed copy of the restricted automaton with the original.

    Every renamed transition that targeted the renamed initial state is
    redirected to the original's initial state, so executions of the result
    are exactly the original's executions that begin with the restricted
    first action.
    """
    if restricted.accumulation.kind != aut.accumulation.kind:
        raise AutomatonError("accumulation kinds differ")
    suffix = "'"
    taken = set(aut.states)
    while any(q + suffix in taken for q in restricted.states):
        suffix += "'"
    ren = {q: q + suffix for q in restricted.states}
    transitions = []
    for t in restricted.transitions:
        dst = aut.initial if t.dst == restricted.initial else ren[t.dst]
        transitions.append(Transition(ren[t.src], t.action, dst, t.weight))
    transitions.extend(aut.transitions)
    states = [ren[q] for q in restricted.states] + list(aut.states)
    labels = {ren[q]: restricted.label(q) for q in restricted.states}
    labels.update({q: aut.label(q) for q in aut.states})
    actions = list(dict.fromkeys(list(restricted.actions) + list(aut.actions)))
    final = {ren[q] for q in restricted.final} | set(aut.final)
    return StitAutomaton(states, ren[restricted.initial], actions, final,
                         transitions, labels, aut.accumulation)


def bounded_traces(aut: StitAutomaton, depth: int,
                   first_action: str | None = None) -> frozenset:
    """Depth-bounded traces: (initial label, ((action, weight, label), ...)).

    State names are deliberately absent so traces compare across renamings.
    """
    out = set()

    def go(state, steps, acc):
        if steps == 0:
            out.add((aut.label(aut.initial), tuple(acc)))
            return
        for t in aut.out(state):
            if not acc and first_action is not None and t.action != first_action:
                continue
            go(t.dst, steps - 1,
               acc + [(t.action, t.weight, aut.label(t.dst))])

    go(aut.initial, depth, [])
    return frozenset(out)


# ---------------------------------------------------------------------------
# Extremal bottleneck values (accumulation = min)
# ---------------------------------------------------------------------------

def extremal_values(aut: StitAutomaton) -> ValueInterval:
    """Exact min and max bottleneck value over all infinite executions.

    hi is the largest weight w such that, keeping only transitions of weight
    >= w, a cycle stays reachable from the initial state; lo is the smallest
    weight reachable at all (every reachable transition lies on some
    execution once no dead end is reachable).
    """
    if aut.accumulation.kind != "min":
        raise AutomatonError("extremal values implemented for accumulation=min")
    reachable = set(aut.reachable())
    for q in sorted(reachable):
        if not aut.out(q):
            raise AutomatonError(f"dead end reachable: no execution through {q!r}")
    edges = [t for t in aut.transitions if t.src in reachable]
    if not edges:
        raise AutomatonError("no transitions reachable from the initial state")
    lo = min(t.weight for t in edges)
    hi = None
    for w in sorted({t.weight for t in edges}, reverse=True):
        if _has_reachable_cycle(aut.initial,
                                [t for t in edges if t.weight >= w]):
            hi = w
            break
    if hi is None:
        raise AutomatonError("no infinite execution exists")
    firsts = aut.first_actions()
    action = firsts[0] if len(firsts) == 1 else None
    return ValueInterval(action, lo, hi)


def _has_reachable_cycle(start, edges) -> bool:
    succ: dict[str, list[str]] = {}
    for t in edges:
        succ.setdefault(t.src, []).append(t.dst)
    color: dict[str, int] = {}  # 1 = on stack, 2 = done

    stack = [(start, iter(succ.get(start, ())))]
    color[start] = 1
    while stack:
        node, it = stack[-1]
        advanced = False
        for nxt in it:
            c = color.get(nxt)
            if c == 1:
                return True
            if c is None:
                color[nxt] = 1
                stack.append((nxt, iter(succ.get(nxt, ()))))
                advanced = True
                break
        if not advanced:
            color[node] = 2
            stack.pop()
    return False


# ---------------------------------------------------------------------------
# Cycle automaton and abstract schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UEdge:
    """Edge of the cycle automaton, with the underlying path in T."""

    src: str
    dst: str
    kind: str  # "entry", "connect", "share"
    path: tuple[Transition, ...]
    arrive: str  # state of T on the destination cycle where the path lands
    weight: Fraction  # 0 for share edges, min of the path otherwise


@dataclass
class CycleAutomaton:
    initial: str
    cycles: dict[str, tuple[Transition, ...]]
    edges: list[UEdge] = field(default_factory=list)

    def states(self):
        return [self.initial] + sorted(self.cycles)


def simple_cycles(aut: StitAutomaton) -> list[tuple[Transition, ...]]:
    """All simple cycles among the reachable states, canonically rotated."""
    limit = resource_limit()
    reachable = aut.reachable()
    order = {q: i for i, q in enumerate(reachable)}
    cycles = []

    def dfs(start, state, path, on_path):
        for t in aut.out(state):
            if t.dst not in order:
                continue
            if t.dst == start:
                cycles.append(tuple(path + [t]))
                if len(cycles) > limit:
                    raise ResourceLimitError(
                        f"more than {limit} simple cycles; raise "
                        f"DEONTIC_MC_RESOURCE_LIMIT to go on")
            elif order[t.dst] > order[start] and t.dst not in on_path:
                dfs(start, t.dst, path + [t], on_path | {t.dst})

    for q in reachable:
        dfs(q, q, [], {q})
    return cycles


def _simple_paths(aut, src, dst, limit):
    """All simple transition paths src -> dst (just the empty path when
    src == dst: a non-empty return to src would be a cycle, not a path)."""
    if src == dst:
        return [()]
    out = []

    def dfs(state, path, seen):
        for t in aut.out(state):
            if t.dst == dst:
                out.append(tuple(path + [t]))
                if len(out) > limit:
                    raise ResourceLimitError(f"more than {limit} simple paths")
            elif t.dst not in seen:
                dfs(t.dst, path + [t], seen | {t.dst})

    dfs(src, [], {src})
    return out


def build_cycle_automaton(aut: StitAutomaton) -> CycleAutomaton:
    """The unlabeled weighted automaton whose finite paths name schedules.

    One state per simple cycle plus the initial state; entry edges replicate
    paths from the initial state onto each cycle, connecting paths join
    disjoint cycles, and zero-weight edges join cycles that share a state.
    """
    limit = resource_limit()
    cycles = simple_cycles(aut)
    u = CycleAutomaton("q0", {f"C{i}": c for i, c in enumerate(cycles)})
    cycle_states = {name: {t.src for t in c} for name, c in u.cycles.items()}
    for name, onto in sorted(cycle_states.items()):
        for target in sorted(onto):
            for path in _simple_paths(aut, aut.initial, target, limit):
                weight = (min(t.weight for t in path) if path else Fraction(0))
                u.edges.append(UEdge("q0", name, "entry", path, target, weight))
    for a, b in itertools.permutations(sorted(u.cycles), 2):
        shared = cycle_states[a] & cycle_states[b]
        if shared:
            for s in sorted(shared):
                u.edges.append(UEdge(a, b, "share", (), s, Fraction(0)))
            continue
        for src in sorted(cycle_states[a]):
            for dst in sorted(cycle_states[b]):
                for path in _simple_paths(aut, src, dst, limit):
                    if not path:
                        continue
                    u.edges.append(UEdge(a, b, "connect", path, dst,
                                         min(t.weight for t in path)))
    u.edges = list(dict.fromkeys(u.edges))
    return u


@dataclass(frozen=True)
class AbstractSchedule:
    """Prefix into a first cycle, then further cycles via connecting paths."""

    prefix: tuple[Transition, ...]
    cycles: tuple[tuple[str, tuple[Transition, ...]], ...]
    connectors: tuple[tuple[Transition, ...], ...]
    value: Fraction


def enumerate_abstract_schedules(u: CycleAutomaton,
                                 accumulation: AccumulationSpec | None = None
                                 ) -> list[AbstractSchedule]:
    """Schedules named by the simple paths of the cycle automaton.

    The schedule value combines (via the accumulation's commutative
    combiner) the weights of the prefix, every connector, and every cycle
    traversed; it equals the bottleneck of a concrete execution realizing
    the schedule.
    """
    accumulation = accumulation or AccumulationSpec()
    limit = resource_limit()
    by_src: dict[str, list[UEdge]] = {}
    for e in u.edges:
        by_src.setdefault(e.src, []).append(e)
    out = []

    def weights_of(schedule_edges, cycle_names):
        ws = [t.weight for e in schedule_edges for t in e.path]
        for name in cycle_names:
            ws.extend(t.weight for t in u.cycles[name])
        return ws

    def dfs(state, visited, edges_taken, names):
        if names:
            entry = edges_taken[0].path
            connectors = tuple(e.path for e in edges_taken[1:])
            cycles = tuple((n, u.cycles[n]) for n in names)
            out.append(AbstractSchedule(
                entry, cycles, connectors,
                accumulation.combine(weights_of(edges_taken, names))))
            if len(out) > limit:
                raise ResourceLimitError(f"more than {limit} schedules")
        for e in by_src.get(state, ()):
            if e.dst in visited:
                continue
            dfs(e.dst, visited | {e.dst}, edges_taken + [e], names + [e.dst])

    dfs(u.initial, {u.initial}, [], [])
    return out


def realize_schedule(u: CycleAutomaton, schedule: AbstractSchedule,
                     edges_taken: list[UEdge] | None = None) -> Execution:
    """One concrete execution whose traversed transitions realize a schedule:
    enter the first cycle, run each cycle once (walking along a cycle to the
    next departure point when needed), and loop on the last cycle forever."""
    names = [n for n, _ in schedule.cycles]
    # reconstruct the edges from the schedule pieces
    path_chunks = [schedule.prefix] + list(schedule.connectors)
    stem: list[Transition] = []
    arrive = None
    for i, name in enumerate(names):
        chunk = path_chunks[i] if i < len(path_chunks) else ()
        if i == 0:
            stem.extend(chunk)
            arrive = chunk[-1].dst if chunk else _cycle_start(u, name)
        else:
            if chunk:
                stem.extend(_walk_cycle(u.cycles[names[i - 1]], arrive,
                                        chunk[0].src))
                stem.extend(chunk)
                arrive = chunk[-1].dst
            else:
                shared = ({t.src for t in u.cycles[names[i - 1]]}
                          & {t.src for t in u.cycles[name]})
                target = sorted(shared)[0]
                stem.extend(_walk_cycle(u.cycles[names[i - 1]], arrive, target))
                arrive = target
        if i < len(names) - 1:
            stem.extend(_rotate_cycle(u.cycles[name], arrive))
    loop = _rotate_cycle(u.cycles[names[-1]], arrive)
    return Execution(tuple(stem), tuple(loop))


def _cycle_start(u, name):
    # canonical rotations start at the lowest-ordered state, and the initial
    # state is ordered first, so cycles through it start there
    return u.cycles[name][0].src


def _rotate_cycle(cycle, start):
    idx = [i for i, t in enumerate(cycle) if t.src == start]
    if not idx:
        raise AutomatonError(f"state {start!r} is not on the cycle")
    i = idx[0]
    return tuple(cycle[i:] + cycle[:i])


def _walk_cycle(cycle, frm, to):
    rotated = _rotate_cycle(cycle, frm)
    walk = []
    cur = frm
    for t in rotated:
        if cur == to:
            break
        walk.append(t)
        cur = t.dst
    if cur != to:
        raise AutomatonError(f"state {to!r} is not on the cycle")
    return walk
