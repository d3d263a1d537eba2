"""Z^3-gained multigraphs (periodic orbit graphs) and gain spaces of edge subsets.

An edge ``Edge(id, tail, head, gain)`` stands for the orbit of bars joining
body ``tail`` in cell ``z`` to body ``head`` in cell ``z + gain``. Reversing an
edge swaps its endpoints and negates its gain; both forms describe the same
orbit. Loops (``tail == head``) are allowed on body-bar graphs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .errors import DomainError, EmptySubset
from .linalg import integer_rank

GAIN_CAP = 10**6


class Gain(NamedTuple):
    """A lattice translation in Z^3. Arithmetic is componentwise."""

    c0: int
    c1: int
    c2: int

    def __add__(self, other):  # type: ignore[override]
        return Gain(self.c0 + other[0], self.c1 + other[1], self.c2 + other[2])

    def __sub__(self, other):
        return Gain(self.c0 - other[0], self.c1 - other[1], self.c2 - other[2])

    def __neg__(self):
        return Gain(-self.c0, -self.c1, -self.c2)

    def is_zero(self) -> bool:
        return not (self.c0 or self.c1 or self.c2)

    @classmethod
    def of(cls, value: Iterable[int], cap: int | None = None) -> "Gain":
        """Validate and convert any 3-sequence of integers."""
        vals = tuple(value)
        if len(vals) != 3:
            raise DomainError(f"gain must have exactly 3 components, got {len(vals)}")
        for v in vals:
            if isinstance(v, bool) or not isinstance(v, int):
                raise DomainError(f"gain components must be integers, got {v!r}")
        limit = GAIN_CAP if cap is None else cap
        if any(abs(v) > limit for v in vals):
            raise DomainError(f"gain {vals} exceeds the component cap {limit}")
        return cls(*vals)


ZERO = Gain(0, 0, 0)


@dataclass(frozen=True)
class Edge:
    id: int
    tail: str
    head: str
    gain: Gain

    def __post_init__(self):
        g = self.gain
        if not isinstance(g, Gain):
            object.__setattr__(self, "gain", Gain.of(g))
        elif abs(g.c0) > GAIN_CAP or abs(g.c1) > GAIN_CAP or abs(g.c2) > GAIN_CAP:
            raise DomainError(f"edge {self.id} gain {tuple(g)} exceeds the cap {GAIN_CAP}")

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head

    def reversed(self) -> "Edge":
        return Edge(self.id, self.head, self.tail, -self.gain)

    def oriented_from(self, body: str) -> "Edge":
        """This edge written with ``body`` as its tail."""
        if self.tail == body:
            return self
        if self.head == body:
            return self.reversed()
        raise DomainError(f"edge {self.id} is not incident to body {body!r}")

    def other(self, body: str) -> str:
        return self.head if self.tail == body else self.tail

    def canonical(self) -> "Edge":
        """Orientation used for hashing and comparison.

        Non-loops get ``tail < head``; loops get a first nonzero gain
        coordinate that is positive.
        """
        if self.tail != self.head:
            return self if self.tail < self.head else self.reversed()
        for c in self.gain:
            if c:
                return self if c > 0 else self.reversed()
        return self


@dataclass(frozen=True)
class GainGraph:
    """Body-bar periodic orbit graph: bodies plus an ordered multiset of gained edges."""

    bodies: tuple[str, ...]
    edges: tuple[Edge, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        object.__setattr__(self, "edges", tuple(self.edges))
        if len(set(self.bodies)) != len(self.bodies):
            raise DomainError("body ids must be unique")
        known = set(self.bodies)
        seen: set[int] = set()
        for e in self.edges:
            if e.id in seen:
                raise DomainError(f"duplicate edge id {e.id}")
            seen.add(e.id)
            if e.tail not in known or e.head not in known:
                raise DomainError(f"edge {e.id} references an unknown body")

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple],
        bodies: Iterable[str] | None = None,
    ) -> "GainGraph":
        """Build from ``(u, v, gain)`` or ``(id, u, v, gain)`` tuples.

        Missing ids are numbered from 0 in input order. Bodies default to the
        sorted set of endpoints.
        """
        built = []
        for k, item in enumerate(edges):
            if len(item) == 3:
                u, v, g = item
                eid = k
            else:
                eid, u, v, g = item
            built.append(Edge(eid, u, v, Gain.of(g)))
        if bodies is None:
            names = sorted({b for e in built for b in (e.tail, e.head)})
        else:
            names = list(bodies)
        return cls(tuple(names), tuple(built))

    @cached_property
    def _by_id(self) -> dict[int, Edge]:
        return {e.id: e for e in self.edges}

    def edge(self, eid: int) -> Edge:
        try:
            return self._by_id[eid]
        except KeyError:
            raise DomainError(f"no edge with id {eid}") from None

    def subset(self, ids: Iterable[int]) -> tuple[Edge, ...]:
        """The edges with the given ids, in id order."""
        return tuple(sorted((self.edge(i) for i in set(ids)), key=lambda e: e.id))

    def incident(self, body: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if body in (e.tail, e.head))

    def loops_at(self, body: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.tail == body and e.head == body)

    def degree(self, body: str) -> int:
        """Number of edge ends at ``body``; a loop counts twice."""
        return sum((e.tail == body) + (e.head == body) for e in self.edges)

    def next_edge_id(self) -> int:
        return max((e.id for e in self.edges), default=-1) + 1

    def canonical(self) -> "GainGraph":
        """Sorted bodies, edges canonically oriented and sorted by id."""
        return GainGraph(
            tuple(sorted(self.bodies)),
            tuple(sorted((e.canonical() for e in self.edges), key=lambda e: e.id)),
        )

    def same_as(self, other: "GainGraph") -> bool:
        """Equality that ignores edge orientation and storage order."""
        return self.canonical() == other.canonical()

    def replace(
        self,
        remove: Iterable[int] = (),
        add: Iterable[Edge] = (),
        bodies: Iterable[str] | None = None,
    ) -> "GainGraph":
        drop = set(remove)
        kept = [e for e in self.edges if e.id not in drop]
        return GainGraph(
            self.bodies if bodies is None else tuple(bodies),
            tuple(kept) + tuple(add),
        )


def vertex_set(edges: Iterable[Edge]) -> set[str]:
    """V(Y): every endpoint of an edge in the subset."""
    out: set[str] = set()
    for e in edges:
        out.add(e.tail)
        out.add(e.head)
    return out


def _require(edges: Sequence[Edge]) -> Sequence[Edge]:
    if not edges:
        raise EmptySubset("operation needs a non-empty edge subset")
    return edges


def connected_components(edges: Sequence[Edge]) -> list[tuple[Edge, ...]]:
    """Split ``edges`` into the edge sets of the connected pieces of the
    underlying multigraph. Components are ordered by their smallest edge id."""
    _require(edges)
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        parent.setdefault(e.tail, e.tail)
        parent.setdefault(e.head, e.head)
        a, b = find(e.tail), find(e.head)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[str, list[Edge]] = {}
    for e in sorted(edges, key=lambda e: e.id):
        groups.setdefault(find(e.tail), []).append(e)
    return [tuple(g) for g in sorted(groups.values(), key=lambda g: g[0].id)]


def cycle_gain_generators(
    edges: Sequence[Edge],
    order: Sequence[int] | None = None,
) -> list[Gain]:
    """Net gains of the fundamental cycles of a spanning forest.

    Each component is searched breadth-first from its lowest body id, scanning
    edges in id order (or in the given edge-id ``order``). Every non-tree edge,
    loops included, contributes ``gain(e) - (tree gain from tail to head)``.
    The result generates the same sublattice as the net gains of all cycles.
    """
    _require(edges)
    if order is None:
        scan = sorted(edges, key=lambda e: e.id)
    else:
        rank = {eid: k for k, eid in enumerate(order)}
        scan = sorted(edges, key=lambda e: rank[e.id])
    out: list[Gain] = []
    for comp in connected_components(edges):
        ids = {e.id for e in comp}
        comp_scan = [e for e in scan if e.id in ids]
        adj: dict[str, list[Edge]] = {}
        for e in comp_scan:
            adj.setdefault(e.tail, []).append(e)
            if not e.is_loop:
                adj.setdefault(e.head, []).append(e)
        root = min(adj)
        pot = {root: ZERO}
        tree: set[int] = set()
        queue = deque([root])
        while queue:
            cur = queue.popleft()
            for e in adj[cur]:
                nxt = e.other(cur)
                if nxt not in pot:
                    pot[nxt] = pot[cur] + e.oriented_from(cur).gain
                    tree.add(e.id)
                    queue.append(nxt)
        for e in comp:
            if e.id not in tree:
                out.append(e.gain - (pot[e.head] - pot[e.tail]))
    return out


def gain_space_rank(edges: Sequence[Edge], order: Sequence[int] | None = None) -> int:
    """Rank (0..3) of the sublattice of Z^3 spanned by the cycle gains of ``edges``."""
    gens = cycle_gain_generators(edges, order)
    return integer_rank(gens)
