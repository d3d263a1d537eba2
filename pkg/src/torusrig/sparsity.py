"""Gain-sparsity counts for body-bar orbit graphs on the fixed 3-torus.

A non-empty edge set Y is within count when

    |Y| <= 6|V(Y)| - 6 + bonus(gain rank of Y),   bonus = 0, 2, 3, 3 for rank 0..3.

Four engines decide whether every subset of a graph is within count:

* ``brute``: all 2^|E| subsets in increasing bitmask order.
* ``connected``: only connected subsets (a violator always has a violating
  component, because 3k <= 6(k - 1) for k >= 2 components).
* ``counting``: for each body set X, only subsets of E(X) with at least
  6|X| - 5 edges, which is every set that could possibly violate.
* ``matroid``: generic rank of the induced bar-joint rigidity matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import CapExceeded, DomainError, EmptySubset
from .gain_graph import Edge, GainGraph, gain_space_rank, vertex_set
from .linalg import MERSENNE_61

BRUTE_CAP = 22
CONNECTED_CAP = 26
COUNTING_BODY_CAP = 16
# auto selection: exhaustive sweep while it costs well under a second
AUTO_BRUTE_EDGES = 16

ENGINES = ("auto", "brute", "connected", "counting", "matroid")

_BONUS = (0, 2, 3, 3)


@dataclass(frozen=True)
class SparsityVerdict:
    tight: bool
    sparse: bool
    witness: tuple[int, ...] | None
    checked_subsets: int
    engine: str

    def to_dict(self) -> dict:
        return {
            "tight": self.tight,
            "sparse": self.sparse,
            "witness": None if self.witness is None else list(self.witness),
            "checked_subsets": self.checked_subsets,
            "engine": self.engine,
        }


def bonus(g: int) -> int:
    """Extra edges allowed by a gain space of rank ``g``: sum of (3 - i) for i = 1..g."""
    if isinstance(g, bool) or not isinstance(g, int) or not 0 <= g <= 3:
        raise DomainError(f"gain rank must be an integer in 0..3, got {g!r}")
    return sum(3 - i for i in range(1, g + 1))


def deficiency(edges: Sequence[Edge]) -> int:
    """Slack 6|V(Y)| - 6 + bonus - |Y|; negative means the set is over-braced."""
    if not edges:
        raise EmptySubset("deficiency of an empty edge set is undefined")
    return 6 * len(vertex_set(edges)) - 6 + bonus(gain_space_rank(edges)) - len(edges)


def is_tight(graph: GainGraph) -> bool:
    return len(graph.edges) == 6 * len(graph.bodies) - 3


class _Packed:
    """Edges of a graph as parallel integer arrays, indexed in edge-id order."""

    def __init__(self, edges: Sequence[Edge]):
        self.edges = sorted(edges, key=lambda e: e.id)
        names = sorted(vertex_set(self.edges))
        self.index = {b: k for k, b in enumerate(names)}
        self.nv = len(names)
        self.tail = [self.index[e.tail] for e in self.edges]
        self.head = [self.index[e.head] for e in self.edges]
        self.gain = [tuple(e.gain) for e in self.edges]

    def ids(self, idx: Sequence[int]) -> tuple[int, ...]:
        return tuple(sorted(self.edges[i].id for i in idx))

    def gain_rank(self, idx: Sequence[int]) -> int:
        """Gain-space rank of a subset via union-find with lattice offsets."""
        parent: dict[int, int] = {}
        off: dict[int, tuple[int, int, int]] = {}
        basis_rank = 0
        b1 = None
        nrm = None

        def find(x: int):
            ax = ay = az = 0
            while parent.get(x, x) != x:
                o = off[x]
                ax += o[0]
                ay += o[1]
                az += o[2]
                x = parent[x]
            return x, ax, ay, az

        for i in idx:
            rt, ax, ay, az = find(self.tail[i])
            rh, bx, by, bz = find(self.head[i])
            gx, gy, gz = self.gain[i]
            if rt != rh:
                parent[rh] = rt
                off[rh] = (ax + gx - bx, ay + gy - by, az + gz - bz)
                continue
            c = (ax + gx - bx, ay + gy - by, az + gz - bz)
            if basis_rank == 0:
                if any(c):
                    basis_rank, b1 = 1, c
            elif basis_rank == 1:
                n = _cross(b1, c)
                if any(n):
                    basis_rank, nrm = 2, n
            elif basis_rank == 2:
                if nrm[0] * c[0] + nrm[1] * c[1] + nrm[2] * c[2]:
                    return 3
        return basis_rank

    def deficiency(self, idx: Sequence[int]) -> int:
        verts = {self.tail[i] for i in idx} | {self.head[i] for i in idx}
        return 6 * len(verts) - 6 + _BONUS[self.gain_rank(idx)] - len(idx)


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _sweep(packed: _Packed) -> tuple[list[int] | None, int]:
    """Visit every non-empty subset in increasing bitmask order.

    Returns the first violating subset (as edge indices) and the number of
    subsets inspected. The depth-first order adds the next-lower edge to the
    current set, so each subset is built from its parent in O(log V) work
    with an undoable union-find carrying lattice offsets.
    """
    T, H, G = packed.tail, packed.head, packed.gain
    nv = packed.nv
    parent = list(range(nv))
    size = [1] * nv
    ox = [0] * nv
    oy = [0] * nv
    oz = [0] * nv
    deg = [0] * nv
    chosen: list[int] = []
    count = 0

    def rec(top: int, depth: int, nvs: int, rank: int, b1, nrm) -> bool:
        nonlocal count
        for k in range(top):
            t = T[k]
            h = H[k]
            rt = t
            ax = ay = az = 0
            while parent[rt] != rt:
                ax += ox[rt]
                ay += oy[rt]
                az += oz[rt]
                rt = parent[rt]
            rh = h
            bx = by = bz = 0
            while parent[rh] != rh:
                bx += ox[rh]
                by += oy[rh]
                bz += oz[rh]
                rh = parent[rh]
            gx, gy, gz = G[k]
            merged = -1
            nrank, nb1, nnrm = rank, b1, nrm
            if rt == rh:
                cx = ax + gx - bx
                cy = ay + gy - by
                cz = az + gz - bz
                if rank == 0:
                    if cx or cy or cz:
                        nrank, nb1 = 1, (cx, cy, cz)
                elif rank == 1:
                    px, py, pz = b1
                    n0 = py * cz - pz * cy
                    n1 = pz * cx - px * cz
                    n2 = px * cy - py * cx
                    if n0 or n1 or n2:
                        nrank, nnrm = 2, (n0, n1, n2)
                elif rank == 2:
                    if nrm[0] * cx + nrm[1] * cy + nrm[2] * cz:
                        nrank = 3
            elif size[rt] < size[rh]:
                parent[rt] = rh
                size[rh] += size[rt]
                ox[rt] = bx - gx - ax
                oy[rt] = by - gy - ay
                oz[rt] = bz - gz - az
                merged = rt
            else:
                parent[rh] = rt
                size[rt] += size[rh]
                ox[rh] = ax + gx - bx
                oy[rh] = ay + gy - by
                oz[rh] = az + gz - bz
                merged = rh
            added = deg[t] == 0
            deg[t] += 1
            if h != t and deg[h] == 0:
                added += 1
            deg[h] += 1
            nn = nvs + added
            d1 = depth + 1
            count += 1
            chosen.append(k)
            if 6 * nn - 6 + _BONUS[nrank] - d1 < 0:
                return True
            if k and rec(k, d1, nn, nrank, nb1, nnrm):
                return True
            chosen.pop()
            deg[t] -= 1
            deg[h] -= 1
            if merged >= 0:
                r = parent[merged]
                size[r] -= size[merged]
                parent[merged] = merged
        return False

    hit = rec(len(T), 0, 0, 0, None, None)
    return (list(chosen) if hit else None), count


def first_violation_bruteforce(edges: Sequence[Edge]) -> tuple[tuple[int, ...] | None, int]:
    """Smallest-bitmask violating subset of an arbitrary edge list, or None."""
    if not edges:
        return None, 0
    packed = _Packed(edges)
    hit, count = _sweep(packed)
    return (None if hit is None else packed.ids(hit)), count


def check_sparsity_bruteforce(graph: GainGraph, cap: int = BRUTE_CAP) -> SparsityVerdict:
    if len(graph.edges) > cap:
        raise CapExceeded(len(graph.edges), cap)
    witness, count = first_violation_bruteforce(graph.edges)
    return SparsityVerdict(is_tight(graph), witness is None, witness, count, "brute")


def check_sparsity_connected(graph: GainGraph, cap: int = CONNECTED_CAP) -> SparsityVerdict:
    """Enumerate connected edge subsets only, each exactly once.

    Subsets are grown from their lowest-index edge; a branch that declines a
    candidate forbids it for the rest of that branch.
    """
    if len(graph.edges) > cap:
        raise CapExceeded(len(graph.edges), cap)
    if not graph.edges:
        return SparsityVerdict(is_tight(graph), True, None, 0, "connected")
    packed = _Packed(graph.edges)
    n = len(packed.edges)
    at: dict[int, list[int]] = {}
    for i in range(n):
        at.setdefault(packed.tail[i], []).append(i)
        if packed.head[i] != packed.tail[i]:
            at.setdefault(packed.head[i], []).append(i)
    nbrs = [
        sorted((set(at[packed.tail[i]]) | set(at[packed.head[i]])) - {i})
        for i in range(n)
    ]
    count = 0

    def grow(current: list[int], cands: list[int], banned: set[int]) -> list[int] | None:
        nonlocal count
        count += 1
        if packed.deficiency(current) < 0:
            return list(current)
        cands = list(cands)
        banned = set(banned)
        while cands:
            c = cands.pop(0)
            fresh = [
                x for x in nbrs[c]
                if x > current[0] and x not in banned and x not in current and x not in cands
            ]
            current.append(c)
            found = grow(current, cands + fresh, banned)
            current.pop()
            if found is not None:
                return found
            banned.add(c)
        return None

    for root in range(n):
        start = [x for x in nbrs[root] if x > root]
        found = grow([root], start, set())
        if found is not None:
            return SparsityVerdict(is_tight(graph), False, packed.ids(found), count, "connected")
    return SparsityVerdict(is_tight(graph), True, None, count, "connected")


def _dense_candidates(packed: _Packed, body_cap: int, containing: int | None = None):
    """Yield edge-index subsets that are dense enough to break the count.

    For each body set X (by increasing size), subsets of E(X) with at least
    6|X| - 5 edges. If E(X) itself exceeds 6|X| - 3 it is yielded alone, since
    it must already violate. With ``containing`` set, only subsets holding that
    edge index are produced.
    """
    nv = packed.nv
    if nv > body_cap:
        raise CapExceeded(nv, body_cap, "bodies")
    masks = [(1 << packed.tail[i]) | (1 << packed.head[i]) for i in range(len(packed.edges))]
    need_bits = 0 if containing is None else masks[containing]
    for size in range(1, nv + 1):
        need = 6 * size - 5
        for xs in combinations(range(nv), size):
            x = 0
            for b in xs:
                x |= 1 << b
            if need_bits & ~x:
                continue
            inner = [i for i, m in enumerate(masks) if m & ~x == 0]
            if len(inner) < need:
                continue
            if len(inner) > 6 * size - 3:
                yield inner
                continue
            if containing is None:
                for r in range(len(inner) - need + 1):
                    for removed in combinations(inner, r):
                        drop = set(removed)
                        yield [i for i in inner if i not in drop]
            else:
                rest = [i for i in inner if i != containing]
                for r in range(len(inner) - need + 1):
                    for removed in combinations(rest, r):
                        drop = set(removed)
                        yield [i for i in inner if i not in drop]


def first_violation_counting(
    edges: Sequence[Edge],
    body_cap: int = COUNTING_BODY_CAP,
    containing: int | None = None,
) -> tuple[tuple[int, ...] | None, int]:
    """First violator found by the dense-subset enumeration, or None.

    ``containing`` is an edge id; when given, only subsets holding it are
    examined (useful when the rest of the graph is already known sparse).
    """
    if not edges:
        return None, 0
    packed = _Packed(edges)
    target = None
    if containing is not None:
        target = next(i for i, e in enumerate(packed.edges) if e.id == containing)
    count = 0
    for idx in _dense_candidates(packed, body_cap, target):
        count += 1
        if packed.deficiency(idx) < 0:
            return packed.ids(idx), count
    return None, count


def check_sparsity_counting(graph: GainGraph, body_cap: int = COUNTING_BODY_CAP) -> SparsityVerdict:
    witness, count = first_violation_counting(graph.edges, body_cap)
    return SparsityVerdict(is_tight(graph), witness is None, witness, count, "counting")


def independence_matroid(
    graph: GainGraph,
    edge_ids: Sequence[int],
    prime: int = MERSENNE_61,
    trials: int = 3,
    seed: int = 0,
) -> bool:
    """Generic linear independence of the bars of ``edge_ids`` in the induced framework."""
    from .rigidity import edge_row_independence

    if not edge_ids:
        raise EmptySubset("independence of an empty edge set is undefined")
    return edge_row_independence(graph, edge_ids, prime=prime, trials=trials, seed=seed)


def check_sparsity_matroid(
    graph: GainGraph,
    prime: int = MERSENNE_61,
    trials: int = 3,
    seed: int = 0,
) -> SparsityVerdict:
    """Sparsity read off the rank oracle; a dependent graph reports a circuit as witness."""
    from .rigidity import dependent_circuit

    if not graph.edges:
        return SparsityVerdict(is_tight(graph), True, None, 0, "matroid")
    ids = [e.id for e in graph.edges]
    if independence_matroid(graph, ids, prime, trials, seed):
        return SparsityVerdict(is_tight(graph), True, None, 1, "matroid")
    circuit = dependent_circuit(graph, prime=prime, trials=trials, seed=seed)
    return SparsityVerdict(is_tight(graph), False, tuple(circuit), 1, "matroid")


def select_engine(graph: GainGraph) -> str:
    if len(graph.edges) <= AUTO_BRUTE_EDGES:
        return "brute"
    if len(graph.bodies) <= COUNTING_BODY_CAP:
        return "counting"
    return "matroid"


def check_sparsity(graph: GainGraph, engine: str = "auto", **oracle) -> SparsityVerdict:
    """Dispatch to one engine; ``oracle`` (prime/trials/seed) only affects ``matroid``."""
    if engine == "auto":
        engine = select_engine(graph)
    if engine == "brute":
        return check_sparsity_bruteforce(graph)
    if engine == "connected":
        return check_sparsity_connected(graph)
    if engine == "counting":
        return check_sparsity_counting(graph)
    if engine == "matroid":
        return check_sparsity_matroid(graph, **oracle)
    raise DomainError(f"unknown sparsity engine {engine!r}; choose from {ENGINES}")
