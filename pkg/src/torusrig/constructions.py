"""Inductive constructions on periodic orbit graphs.

Body-bar level: gain-modified edge pinches, the random generator built from
them, and the splitting-off reducer that undoes one pinch at a time.
Bar-joint level: periodic vertex additions and edge splits.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .errors import (
    DomainError,
    ExhaustedSearch,
    InvalidMove,
    InvalidPinch,
    NotSparse,
    NotTight,
    SamplingExhausted,
)
from .gain_graph import Edge, Gain, GainGraph, gain_space_rank
from .rigidity import BarJointGraph
from .sparsity import (
    COUNTING_BODY_CAP,
    check_sparsity,
    first_violation_bruteforce,
    first_violation_counting,
    is_tight,
)

SEED_GAINS = (Gain(1, 0, 0), Gain(0, 1, 0), Gain(0, 0, 1))
GAIN_ALPHABET = tuple(range(-2, 3))
RETRY_BUDGET = 10_000
MAX_PINCH_N = 5


# ---------------------------------------------------------------- pinches


@dataclass(frozen=True)
class PinchedEdge:
    """One existing edge split through the new body.

    The halves run from the edge's tail to the new body with ``first_gain``
    and from the new body to its head with the remaining gain. ``tail`` fixes
    which end counts as the tail; by default the stored orientation is used.
    """

    edge: int
    first_gain: Gain
    first_id: int | None = None
    second_id: int | None = None
    tail: str | None = None


@dataclass(frozen=True)
class NewLoop:
    gain: Gain
    id: int | None = None


@dataclass(frozen=True)
class NewEdge:
    """A fresh edge oriented from the new body to ``target``."""

    target: str
    gain: Gain
    id: int | None = None


@dataclass(frozen=True)
class PinchSpec:
    extra_degree: int
    pinch_count: int
    body: str
    pinched: tuple[PinchedEdge, ...] = ()
    loops: tuple[NewLoop, ...] = ()
    new_edges: tuple[NewEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pinched", tuple(self.pinched))
        object.__setattr__(self, "loops", tuple(self.loops))
        object.__setattr__(self, "new_edges", tuple(self.new_edges))

    def with_ids(self, first_free: int) -> "PinchSpec":
        """Fill missing edge ids sequentially from ``first_free``."""
        counter = [first_free]

        def take(value: int | None) -> int:
            if value is not None:
                return value
            counter[0] += 1
            return counter[0] - 1

        pinched = tuple(
            PinchedEdge(p.edge, p.first_gain, take(p.first_id), take(p.second_id), p.tail)
            for p in self.pinched
        )
        loops = tuple(NewLoop(lp.gain, take(lp.id)) for lp in self.loops)
        new_edges = tuple(NewEdge(ne.target, ne.gain, take(ne.id)) for ne in self.new_edges)
        return PinchSpec(self.extra_degree, self.pinch_count, self.body, pinched, loops, new_edges)

    def to_dict(self) -> dict:
        return {
            "extra_degree": self.extra_degree,
            "pinch_count": self.pinch_count,
            "body": self.body,
            "pinched": [
                {"edge": p.edge, "first_gain": list(p.first_gain),
                 "first_id": p.first_id, "second_id": p.second_id, "tail": p.tail}
                for p in self.pinched
            ],
            "loops": [{"gain": list(lp.gain), "id": lp.id} for lp in self.loops],
            "new_edges": [
                {"target": ne.target, "gain": list(ne.gain), "id": ne.id}
                for ne in self.new_edges
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PinchSpec":
        return cls(
            data["extra_degree"],
            data["pinch_count"],
            data["body"],
            tuple(
                PinchedEdge(
                    p["edge"], Gain.of(p["first_gain"]), p.get("first_id"), p.get("second_id"), p.get("tail")
                )
                for p in data.get("pinched", ())
            ),
            tuple(NewLoop(Gain.of(lp["gain"]), lp.get("id")) for lp in data.get("loops", ())),
            tuple(
                NewEdge(ne["target"], Gain.of(ne["gain"]), ne.get("id"))
                for ne in data.get("new_edges", ())
            ),
        )


def _gain_or_none(value) -> Gain | None:
    try:
        return value if isinstance(value, Gain) else Gain.of(value)
    except DomainError:
        return None


def _new_edge_list(graph: GainGraph, spec: PinchSpec) -> list[Edge]:
    """The new edges (both halves of each pinched edge included) of a resolved spec."""
    b0 = spec.body
    out: list[Edge] = []
    for p in spec.pinched:
        old = graph.edge(p.edge)
        if p.tail is not None:
            old = old.oriented_from(p.tail)
        out.append(Edge(p.first_id, old.tail, b0, p.first_gain))
        out.append(Edge(p.second_id, b0, old.head, old.gain - p.first_gain))
    for lp in spec.loops:
        out.append(Edge(lp.id, b0, b0, lp.gain))
    for ne in spec.new_edges:
        out.append(Edge(ne.id, b0, ne.target, ne.gain))
    return out


def validate_pinch(graph: GainGraph, spec: PinchSpec) -> list[str]:
    """Every reason ``spec`` cannot be applied to ``graph``; empty when valid."""
    problems: list[str] = []
    extra, pinches = spec.extra_degree, spec.pinch_count
    if not (0 <= pinches <= extra <= MAX_PINCH_N):
        problems.append(
            f"need 0 <= pinch_count <= extra_degree <= {MAX_PINCH_N}, got {extra} and {pinches}"
        )
    if extra - pinches > 3:
        problems.append(f"at most 3 loops allowed, got {extra - pinches}")
    if len(spec.pinched) != pinches:
        problems.append(f"expected {pinches} pinched edges, got {len(spec.pinched)}")
    if len(spec.loops) != extra - pinches:
        problems.append(f"expected {extra - pinches} loops, got {len(spec.loops)}")
    if len(spec.new_edges) != 6 - extra:
        problems.append(f"expected {6 - extra} new edges, got {len(spec.new_edges)}")
    if spec.body in graph.bodies:
        problems.append(f"body {spec.body!r} already exists")

    existing = {e.id for e in graph.edges}
    pinched_ids = [p.edge for p in spec.pinched]
    if len(set(pinched_ids)) != len(pinched_ids):
        problems.append("a pinched edge is listed twice")
    for p in spec.pinched:
        if p.edge not in existing:
            problems.append(f"pinched edge {p.edge} is not in the graph")
        elif p.tail is not None and p.tail not in (graph.edge(p.edge).tail, graph.edge(p.edge).head):
            problems.append(f"pinched edge {p.edge} has no end at {p.tail!r}")
    for ne in spec.new_edges:
        if ne.target not in graph.bodies:
            problems.append(f"new edge target {ne.target!r} is not an existing body")

    gains = [p.first_gain for p in spec.pinched] + [x.gain for x in spec.loops + spec.new_edges]
    if any(_gain_or_none(g) is None for g in gains):
        problems.append("a gain is malformed or exceeds the component cap")
    if problems:
        return problems

    resolved = spec.with_ids(graph.next_edge_id())
    fresh = [p.first_id for p in resolved.pinched] + [p.second_id for p in resolved.pinched]
    fresh += [x.id for x in resolved.loops + resolved.new_edges]
    remaining = existing - set(pinched_ids)
    if len(set(fresh)) != len(fresh):
        problems.append("new edge ids are not distinct")
    clash = sorted(set(fresh) & remaining)
    if clash:
        problems.append(f"new edge ids {clash} already in use")
    if problems:
        return problems

    try:
        added = _new_edge_list(graph, resolved)
    except DomainError as exc:
        return [str(exc)]
    witness, _ = first_violation_bruteforce(added)
    if witness is not None:
        problems.append(f"new edges {list(witness)} break the sparsity count")
    return problems


def apply_pinch(graph: GainGraph, spec: PinchSpec) -> GainGraph:
    problems = validate_pinch(graph, spec)
    if problems:
        raise InvalidPinch(problems)
    resolved = spec.with_ids(graph.next_edge_id())
    added = _new_edge_list(graph, resolved)
    return graph.replace(
        remove=[p.edge for p in resolved.pinched],
        add=added,
        bodies=graph.bodies + (resolved.body,),
    )


# ---------------------------------------------------------------- generator


def seed_graph(body: str = "B0", gains: Sequence[Gain] = SEED_GAINS) -> GainGraph:
    """One body carrying three loops."""
    return GainGraph((body,), tuple(Edge(k, body, body, Gain.of(g)) for k, g in enumerate(gains)))


def _random_gain(rng: random.Random) -> Gain:
    return Gain(*(rng.choice(GAIN_ALPHABET) for _ in range(3)))


def _random_spec(graph: GainGraph, body: str, rng: random.Random) -> PinchSpec | None:
    extra = rng.randint(0, MAX_PINCH_N)
    lo, hi = max(0, extra - 3), min(extra, len(graph.edges))
    if lo > hi:
        return None
    pinches = rng.randint(lo, hi)
    ids = sorted(e.id for e in graph.edges)
    pinched = tuple(PinchedEdge(eid, _random_gain(rng)) for eid in sorted(rng.sample(ids, pinches)))
    loops = tuple(NewLoop(_random_gain(rng)) for _ in range(extra - pinches))
    bodies = sorted(graph.bodies)
    new_edges = tuple(NewEdge(rng.choice(bodies), _random_gain(rng)) for _ in range(6 - extra))
    return PinchSpec(extra, pinches, body, pinched, loops, new_edges)


def random_pinch(graph: GainGraph, body: str, rng: random.Random, retries: int = RETRY_BUDGET) -> PinchSpec:
    """A valid pinch adding ``body``, found by rejection sampling."""
    for _ in range(retries):
        spec = _random_spec(graph, body, rng)
        if spec is not None and not validate_pinch(graph, spec):
            return spec.with_ids(graph.next_edge_id())
    raise SamplingExhausted(f"no valid pinch found in {retries} draws")


def random_tight_graph(n_bodies: int, seed: int = 0, retries: int = RETRY_BUDGET) -> GainGraph:
    """Grow a tight sparse graph on ``n_bodies`` bodies from the three-loop seed."""
    if n_bodies < 1:
        raise DomainError("n_bodies must be at least 1")
    rng = random.Random(seed)
    graph = seed_graph()
    for k in range(1, n_bodies):
        graph = apply_pinch(graph, random_pinch(graph, f"B{k}", rng, retries))
    return graph


# ---------------------------------------------------------------- splitting off


def _shared_body(first: Edge, second: Edge, at: str | None) -> str:
    common = {first.tail, first.head} & {second.tail, second.head}
    ids = f"edges {first.id} and {second.id}"
    if at is not None:
        if at not in common:
            raise DomainError(f"{ids} do not meet at {at!r}")
        return at
    if not common:
        raise DomainError(f"{ids} are not adjacent")
    if len(common) > 1:
        raise DomainError(f"{ids} share both ends; pass at=")
    return common.pop()


def split_edge(graph: GainGraph, first_id: int, second_id: int, at: str | None = None,
               new_id: int | None = None) -> Edge:
    """The edge that replaces two adjacent edges when they are split off at their shared body."""
    if first_id == second_id:
        raise DomainError("cannot split an edge off with itself")
    first, second = graph.edge(first_id), graph.edge(second_id)
    if first.is_loop or second.is_loop:
        raise DomainError("loops cannot be split off")
    hub = _shared_body(first, second, at)
    first, second = first.oriented_from(hub), second.oriented_from(hub)
    joined_id = graph.next_edge_id() if new_id is None else new_id
    return Edge(joined_id, first.head, second.head, second.gain - first.gain)


def split_off(graph: GainGraph, first_id: int, second_id: int, at: str | None = None,
              new_id: int | None = None) -> GainGraph:
    joined = split_edge(graph, first_id, second_id, at, new_id)
    return graph.replace(remove=(first_id, second_id), add=(joined,))


def admissible(graph: GainGraph, first_id: int, second_id: int, at: str | None = None,
               engine: str = "auto", **oracle) -> bool:
    """Whether splitting off the two edges keeps the graph sparse.

    ``graph`` is assumed sparse. Under ``auto`` only subsets containing the
    new edge are examined (every other subset already existed); above the
    body cap the rank oracle decides.
    """
    joined = split_edge(graph, first_id, second_id, at)
    result = graph.replace(remove=(first_id, second_id), add=(joined,))
    if engine == "auto":
        if len(result.bodies) <= COUNTING_BODY_CAP:
            witness, _ = first_violation_counting(result.edges, containing=joined.id)
            return witness is None
        engine = "matroid"
    return check_sparsity(result, engine, **oracle).sparse


# ---------------------------------------------------------------- reducer


@dataclass(frozen=True)
class ReductionStep:
    spec: PinchSpec
    removed: str


@dataclass(frozen=True)
class ReductionTrace:
    steps: tuple[ReductionStep, ...]
    terminal: GainGraph


def graph_document(graph: GainGraph, canonical: bool = True) -> dict:
    """JSON-ready form, edges sorted by id.

    By default every edge is written in canonical orientation so equal graphs
    serialize equally. Traces pass ``canonical=False``: a pinch on a loop is
    orientation-relative and its ``tail`` cannot tell the two ends apart.
    """
    edges = sorted((e.canonical() if canonical else e for e in graph.edges), key=lambda e: e.id)
    return {
        "dim": 3,
        "bodies": sorted(graph.bodies),
        "edges": [{"id": e.id, "u": e.tail, "v": e.head, "gain": list(e.gain)} for e in edges],
    }


def pick_reduction_body(graph: GainGraph) -> str:
    return min(graph.bodies, key=lambda b: (graph.degree(b), b))


def reduce_step(graph: GainGraph, engine: str = "auto", check: bool = True,
                **oracle) -> tuple[GainGraph, PinchSpec]:
    """Remove one body by splitting off pairs, returning the smaller graph and
    the pinch that rebuilds ``graph`` from it."""
    if len(graph.bodies) < 2:
        raise DomainError("reduce_step needs at least two bodies")
    if not is_tight(graph):
        raise NotTight(f"{len(graph.edges)} edges on {len(graph.bodies)} bodies")
    if check:
        verdict = check_sparsity(graph, engine, **oracle)
        if not verdict.sparse:
            raise NotSparse(f"edges {list(verdict.witness or ())} violate the count")

    hub = pick_reduction_body(graph)
    deg = graph.degree(hub)
    loops = graph.loops_at(hub)
    extra = deg - 6
    pinches = extra - len(loops)
    if extra < 0 or pinches < 0 or extra - pinches > 3:
        raise NotSparse(f"body {hub!r} has degree {deg} with {len(loops)} loops")
    if extra > MAX_PINCH_N:
        raise DomainError(f"minimum degree {deg} exceeds 11; input cannot be tight and sparse")

    arms = sorted((e.oriented_from(hub) for e in graph.incident(hub) if not e.is_loop),
                  key=lambda e: e.id)
    base_id = max(graph.next_edge_id(), 0)
    pairs = _search_pairs(graph, hub, arms, pinches, base_id, engine, oracle)
    if pairs is None:
        raise ExhaustedSearch(
            f"no admissible set of {pinches} split-offs at body {hub!r}", graph_document(graph)
        )

    current = graph
    pinched = []
    used: set[int] = set()
    for k, (first, second) in enumerate(pairs):
        joined = split_edge(current, first.id, second.id, at=hub, new_id=base_id + k)
        current = current.replace(remove=(first.id, second.id), add=(joined,))
        used.update((first.id, second.id))
        pinched.append(PinchedEdge(joined.id, -first.gain, first.id, second.id, tail=first.head))
    leftover = [e for e in arms if e.id not in used]
    reduced = current.replace(
        remove=[x.id for x in loops] + [x.id for x in leftover],
        bodies=tuple(b for b in graph.bodies if b != hub),
    )
    spec = PinchSpec(
        extra,
        pinches,
        hub,
        tuple(pinched),
        tuple(NewLoop(x.gain, x.id) for x in loops),
        tuple(NewEdge(x.head, x.gain, x.id) for x in leftover),
    )
    return reduced, spec


def _search_pairs(graph, hub, arms, wanted, base_id, engine, oracle):
    """Depth-first, lexicographic-by-id search for ``wanted`` admissible disjoint pairs."""

    def dfs(current: GainGraph, free: list[Edge], chosen: list[tuple[Edge, Edge]]):
        if len(chosen) == wanted:
            return list(chosen)
        if len(free) < 2 * (wanted - len(chosen)):
            return None
        for a_pos, a in enumerate(free):
            for b in free[a_pos + 1:]:
                joined = split_edge(current, a.id, b.id, at=hub, new_id=base_id + len(chosen))
                nxt = current.replace(remove=(a.id, b.id), add=(joined,))
                if not _still_sparse(nxt, joined.id, engine, oracle):
                    continue
                rest = [x for x in free[a_pos + 1:] if x.id != b.id]
                found = dfs(nxt, rest, chosen + [(a, b)])
                if found is not None:
                    return found
        return None

    return dfs(graph, list(arms), [])


def _still_sparse(graph: GainGraph, joined_id: int, engine: str, oracle: dict) -> bool:
    if engine == "auto":
        if len(graph.bodies) <= COUNTING_BODY_CAP:
            return first_violation_counting(graph.edges, containing=joined_id)[0] is None
        engine = "matroid"
    return check_sparsity(graph, engine, **oracle).sparse


def is_seed_variant(graph: GainGraph) -> bool:
    """One body with three loops whose gains span a lattice of rank at least 2."""
    if len(graph.bodies) != 1 or len(graph.edges) != 3:
        return False
    return all(e.is_loop for e in graph.edges) and gain_space_rank(graph.edges) >= 2


def reduce_to_seed(graph: GainGraph, engine: str = "auto", **oracle) -> ReductionTrace:
    if not graph.bodies:
        raise DomainError("graph has no bodies")
    if not is_tight(graph):
        raise NotTight(f"{len(graph.edges)} edges on {len(graph.bodies)} bodies")
    verdict = check_sparsity(graph, engine, **oracle)
    if not verdict.sparse:
        raise NotSparse(f"edges {list(verdict.witness or ())} violate the count")
    steps: list[ReductionStep] = []
    current = graph
    while len(current.bodies) > 1:
        current, spec = reduce_step(current, engine, check=False, **oracle)
        steps.append(ReductionStep(spec, spec.body))
    if not is_seed_variant(current):
        raise ExhaustedSearch("reduction ended away from a three-loop seed", graph_document(current))
    return ReductionTrace(tuple(steps), current)


def replay_trace(trace: ReductionTrace) -> GainGraph:
    graph = trace.terminal
    for step in reversed(trace.steps):
        graph = apply_pinch(graph, step.spec)
    return graph


# ---------------------------------------------------------------- bar-joint moves


@dataclass(frozen=True)
class VertexAdditionSpec:
    """Three new edges oriented from the new ``vertex`` to existing targets."""

    vertex: str
    edges: tuple[tuple[str, Gain], ...]
    ids: tuple[int, ...] | None = None


@dataclass(frozen=True)
class EdgeSplitSpec:
    """Split ``edge`` through ``vertex`` and add two more edges from it."""

    edge: int
    vertex: str
    extra: tuple[tuple[str, Gain], ...]
    ids: tuple[int, ...] | None = None


def _check_move_gains(new: Sequence[Edge], hub: str) -> None:
    by_target: dict[str, list[Edge]] = {}
    for e in new:
        o = e.oriented_from(hub)
        by_target.setdefault(o.head, []).append(o)
    for target, group in sorted(by_target.items()):
        for a, b in combinations(group, 2):
            if a.gain == b.gain:
                raise InvalidMove(
                    f"edges {a.id} and {b.id} join {hub!r} to {target!r} with equal gain {tuple(a.gain)}"
                )
        for trio in combinations(group, 3):
            if gain_space_rank(list(trio)) < 2:
                raise InvalidMove(
                    f"edges {[x.id for x in trio]} to {target!r} span a gain space of dimension < 2"
                )


def _fresh_ids(graph: GainGraph, count: int, given: Iterable[int] | None) -> list[int]:
    if given is not None:
        ids = list(given)
        if len(ids) != count:
            raise InvalidMove(f"expected {count} edge ids, got {len(ids)}")
        return ids
    start = graph.next_edge_id()
    return list(range(start, start + count))


def vertex_addition(graph: BarJointGraph, spec: VertexAdditionSpec) -> BarJointGraph:
    if spec.vertex in graph.bodies:
        raise InvalidMove(f"vertex {spec.vertex!r} already exists")
    if len(spec.edges) != 3:
        raise InvalidMove("a vertex addition adds exactly three edges")
    ids = _fresh_ids(graph, 3, spec.ids)
    new = []
    for eid, (target, gain) in zip(ids, spec.edges):
        if target not in graph.bodies:
            raise InvalidMove(f"target {target!r} is not a vertex")
        new.append(Edge(eid, spec.vertex, target, Gain.of(gain)))
    _check_move_gains(new, spec.vertex)
    return BarJointGraph(graph.bodies + (spec.vertex,), graph.edges + tuple(new))


def edge_split(graph: BarJointGraph, spec: EdgeSplitSpec) -> BarJointGraph:
    e = graph.edge(spec.edge)
    if spec.vertex in graph.bodies:
        raise InvalidMove(f"vertex {spec.vertex!r} already exists")
    if len(spec.extra) != 2:
        raise InvalidMove("an edge split adds exactly two edges besides the halves")
    ids = _fresh_ids(graph, 4, spec.ids)
    v0 = spec.vertex
    new = [
        Edge(ids[0], e.tail, v0, Gain(0, 0, 0)),
        Edge(ids[1], v0, e.head, e.gain),
    ]
    for eid, (target, gain) in zip(ids[2:], spec.extra):
        if target not in graph.bodies:
            raise InvalidMove(f"target {target!r} is not a vertex")
        new.append(Edge(eid, v0, target, Gain.of(gain)))
    _check_move_gains(new, v0)
    kept = tuple(x for x in graph.edges if x.id != e.id)
    return BarJointGraph(graph.bodies + (v0,), kept + tuple(new))
