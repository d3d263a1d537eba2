"""Induced bar-joint frameworks and generic rank of the periodic rigidity matrix.

The lattice is fixed to the identity, so a bar ``{v_i, v_j; m}`` contributes
the row with ``p_i - (p_j + m)`` in the columns of ``v_i`` and its negative in
the columns of ``v_j``. Ranks are computed exactly: over F_p at uniformly
random positions (default), or over Q at random integer positions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .errors import ConfigError, DomainError, EmptySubset
from .gain_graph import ZERO, Edge, GainGraph
from .linalg import MERSENNE_61, ModEchelon, integer_rank, is_prime

DEFAULT_TRIALS = 3
EXACT_POSITION_BITS = 32

Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class BarJointGraph(GainGraph):
    """Bar-joint periodic orbit graph: no loops and no repeated (endpoints, gain) orbit."""

    def __post_init__(self):
        super().__post_init__()
        seen = set()
        for e in self.edges:
            if e.is_loop:
                raise DomainError(f"bar-joint graphs cannot carry loops (edge {e.id})")
            c = e.canonical()
            key = (c.tail, c.head, c.gain)
            if key in seen:
                raise DomainError(f"edge {e.id} duplicates an existing bar orbit")
            seen.add(key)


class InducedBarGraph(BarJointGraph):
    """Bar-joint graph of an induced framework.

    A zero-gain loop on a body becomes a bar parallel to one of the body's own
    edges. That repeated orbit is kept so its row shows up as dependent.
    """

    def __post_init__(self):
        GainGraph.__post_init__(self)
        for e in self.edges:
            if e.is_loop:
                raise DomainError(f"bar-joint graphs cannot carry loops (edge {e.id})")


@dataclass(frozen=True)
class InducedFramework:
    """Bar-joint graph G_H obtained by replacing each body with an isostatic framework."""

    graph: BarJointGraph
    body_of_vertex: Mapping[str, str]
    body_edges: frozenset[int]
    bar_edges: Mapping[int, int]
    attachments: Mapping[int, tuple[str, str]] = field(default_factory=dict)

    @property
    def vertices(self) -> tuple[str, ...]:
        return self.graph.bodies


@dataclass(frozen=True)
class RigidityVerdict:
    rank: int
    dof: int
    minimally_rigid: bool
    trials: int
    seed: int
    rows: int
    columns: int
    prime: int | None = None
    exact: bool = False
    trials_run: int = 0

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "dof": self.dof,
            "minimally_rigid": self.minimally_rigid,
            "rows": self.rows,
            "columns": self.columns,
            "prime": self.prime,
            "exact": self.exact,
            "trials": self.trials,
            "trials_run": self.trials_run,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class RigidityMatrix:
    """Sparse rows keyed by column index; columns are (vertex, axis) triples."""

    row_ids: tuple[int, ...]
    vertices: tuple[str, ...]
    rows: tuple[dict[int, Scalar], ...]
    modulus: int | None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), 3 * len(self.vertices)

    def dense(self) -> list[list[Scalar]]:
        ncols = 3 * len(self.vertices)
        out = []
        for row in self.rows:
            line = [0] * ncols
            for c, v in row.items():
                line[c] = v
            out.append(line)
        return out

    def column_labels(self) -> list[str]:
        return [f"v:{v}:{axis}" for v in self.vertices for axis in "xyz"]


def henneberg_edges(count: int) -> list[tuple[int, int]]:
    """Generically isostatic graph on ``count >= 3`` vertices in R^3 (``3 * count - 6`` edges).

    Triangle, then tetrahedron, then each further vertex joined to the three
    vertices before it.
    """
    if count < 3:
        raise DomainError("a body needs at least 3 vertices")
    out = [(0, 1), (0, 2), (1, 2)]
    for k in range(3, count):
        out.extend([(k - 3, k), (k - 2, k), (k - 1, k)])
    return out


def induce_bar_joint(graph: GainGraph) -> InducedFramework:
    """Replace every body by an isostatic bar-joint framework.

    Each body gets one vertex per incident edge end (a loop uses two), with a
    minimum of three. Vertex ids are ``"<body>:<k>"``. Internal edges come
    first with gain zero, then one bar per body-bar edge in edge-id order.
    """
    used = {b: 0 for b in graph.bodies}
    attach: dict[int, tuple[str, str]] = {}
    ordered = sorted(graph.edges, key=lambda e: e.id)
    for e in ordered:
        a = f"{e.tail}:{used[e.tail]}"
        used[e.tail] += 1
        b = f"{e.head}:{used[e.head]}"
        used[e.head] += 1
        attach[e.id] = (a, b)

    vertices: list[str] = []
    body_of: dict[str, str] = {}
    edges: list[Edge] = []
    body_edges: set[int] = set()
    for body in graph.bodies:
        size = max(3, used[body])
        names = [f"{body}:{k}" for k in range(size)]
        vertices.extend(names)
        body_of.update((v, body) for v in names)
        for lo, hi in henneberg_edges(size):
            body_edges.add(len(edges))
            edges.append(Edge(len(edges), names[lo], names[hi], ZERO))
    bars: dict[int, int] = {}
    for e in ordered:
        a, b = attach[e.id]
        bars[e.id] = len(edges)
        edges.append(Edge(len(edges), a, b, e.gain))
    return InducedFramework(
        InducedBarGraph(tuple(vertices), tuple(edges)),
        body_of,
        frozenset(body_edges),
        bars,
        attach,
    )


def _graph_of(framework: InducedFramework | GainGraph) -> GainGraph:
    return framework.graph if isinstance(framework, InducedFramework) else framework


def _row(e: Edge, col: Mapping[str, int], positions, modulus: int | None) -> dict[int, Scalar]:
    try:
        tail_pos = positions[e.tail]
        head_pos = positions[e.head]
    except KeyError as exc:
        raise DomainError(f"no position given for vertex {exc.args[0]!r}") from None
    if len(tail_pos) != 3 or len(head_pos) != 3:
        raise DomainError("positions need exactly 3 coordinates")
    row: dict[int, Scalar] = {}
    tail_col, head_col = col[e.tail], col[e.head]
    for k in range(3):
        diff = tail_pos[k] - head_pos[k] - e.gain[k]
        if modulus is not None:
            diff %= modulus
        if not diff:
            continue
        row[tail_col + k] = row.get(tail_col + k, 0) + diff
        neg = (-diff) % modulus if modulus is not None else -diff
        row[head_col + k] = row.get(head_col + k, 0) + neg
    if modulus is not None:
        row = {c: v % modulus for c, v in row.items() if v % modulus}
    else:
        row = {c: v for c, v in row.items() if v}
    return row


def assemble_matrix(
    framework: InducedFramework | GainGraph,
    positions: Mapping[str, Sequence[Scalar]],
    modulus: int | None = MERSENNE_61,
    edge_ids: Sequence[int] | None = None,
) -> RigidityMatrix:
    """Periodic rigidity matrix on the unit torus.

    ``modulus=None`` keeps exact integer/rational entries. Gains are reduced
    mod p in field mode. ``edge_ids`` restricts (and orders) the rows.
    """
    g = _graph_of(framework)
    col = {v: 3 * k for k, v in enumerate(g.bodies)}
    edges = g.edges if edge_ids is None else [g.edge(i) for i in edge_ids]
    rows = tuple(_row(e, col, positions, modulus) for e in edges)
    return RigidityMatrix(tuple(e.id for e in edges), g.bodies, rows, modulus)


def translation_residuals(matrix: RigidityMatrix) -> list[list[Scalar]]:
    """M times each unit translation field; all zero for a well-formed matrix."""
    out = []
    for axis in range(3):
        col_res = []
        for row in matrix.rows:
            s = sum(v for c, v in row.items() if c % 3 == axis)
            col_res.append(s % matrix.modulus if matrix.modulus else s)
        out.append(col_res)
    return out


def _below(rng: random.Random, n: int) -> int:
    bits = n.bit_length()
    while True:
        r = rng.getrandbits(bits)
        if r < n:
            return r


def sample_positions(
    vertices: Sequence[str],
    rng: random.Random,
    modulus: int | None = MERSENNE_61,
) -> dict[str, tuple[int, int, int]]:
    """Uniform residues mod p, or integers in [0, 2^32) when ``modulus`` is None."""
    bound = modulus if modulus is not None else 1 << EXACT_POSITION_BITS
    return {v: (_below(rng, bound), _below(rng, bound), _below(rng, bound)) for v in vertices}


def _check_prime(prime: int, trials: int) -> None:
    if not isinstance(prime, int) or not is_prime(prime):
        raise ConfigError(f"modulus {prime!r} is not prime")
    if trials < 1:
        raise ConfigError("at least one trial is required")


def matrix_rank(matrix: RigidityMatrix) -> int:
    if matrix.modulus is not None:
        ech = ModEchelon(matrix.modulus)
        for row in matrix.rows:
            ech.add(row)
        return ech.rank
    dense = matrix.dense()
    denom = 1
    for line in dense:
        for v in line:
            if isinstance(v, Fraction):
                denom = denom * v.denominator // _gcd(denom, v.denominator)
    if denom != 1:
        dense = [[int(v * denom) for v in line] for line in dense]
    return integer_rank(dense)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def generic_rank(
    framework: InducedFramework | GainGraph,
    prime: int = MERSENNE_61,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    exact: bool = False,
) -> RigidityVerdict:
    """Maximum rank of the rigidity matrix over ``trials`` random placements.

    Trials stop early once the rank reaches min(rows, 3|V| - 3), which no
    placement can exceed. ``exact`` switches to integer positions and
    fraction-free elimination over Q.
    """
    _check_prime(prime, trials)
    g = _graph_of(framework)
    nverts = len(g.bodies)
    nrows = len(g.edges)
    ceiling = min(nrows, max(3 * nverts - 3, 0))
    rng = random.Random(seed)
    modulus = None if exact else prime
    best = 0
    run = 0
    for _ in range(trials):
        run += 1
        pos = sample_positions(g.bodies, rng, modulus)
        best = max(best, matrix_rank(assemble_matrix(g, pos, modulus)))
        if best >= ceiling:
            break
    kernel = 3 * nverts - best
    return RigidityVerdict(
        rank=best,
        dof=kernel - 3,
        minimally_rigid=(best == 3 * nverts - 3 and nrows == 3 * nverts - 3),
        trials=trials,
        seed=seed,
        rows=nrows,
        columns=3 * nverts,
        prime=None if exact else prime,
        exact=exact,
        trials_run=run,
    )


def motion_space_dim(
    framework: InducedFramework | GainGraph,
    prime: int = MERSENNE_61,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    exact: bool = False,
) -> int:
    """Dimension of the infinitesimal motion space (3 of it is translation)."""
    v = generic_rank(framework, prime, trials, seed, exact)
    return v.columns - v.rank


class _BodyBasis:
    """Echelon form of the internal body rows at one placement, reused across bar sets."""

    def __init__(self, framework: InducedFramework, positions, prime: int):
        self.framework = framework
        self.positions = positions
        self.prime = prime
        g = framework.graph
        self.col = {v: 3 * k for k, v in enumerate(g.bodies)}
        self.base = ModEchelon(prime)
        for e in g.edges:
            if e.id in framework.body_edges:
                self.base.add(_row(e, self.col, positions, prime))
        self.body_rank = self.base.rank
        self.bar_rows = {
            hid: _row(g.edge(bid), self.col, positions, prime)
            for hid, bid in framework.bar_edges.items()
        }
        self.body_rows = len(framework.body_edges)

    def bars_independent(self, bar_ids: Sequence[int]) -> bool:
        ech = self.base.copy()
        for hid in bar_ids:
            if not ech.add(self.bar_rows[hid]):
                return False
        return self.body_rank == self.body_rows

    def first_dependent_prefix(self, bar_ids: Sequence[int]) -> list[int] | None:
        ech = self.base.copy()
        for k, hid in enumerate(bar_ids):
            if not ech.add(self.bar_rows[hid]):
                return list(bar_ids[: k + 1])
        return None


def _placements(framework: InducedFramework, prime: int, trials: int, seed: int):
    rng = random.Random(seed)
    for _ in range(trials):
        yield _BodyBasis(framework, sample_positions(framework.vertices, rng, prime), prime)


def edge_row_independence(
    graph: GainGraph,
    edge_ids: Sequence[int],
    prime: int = MERSENNE_61,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> bool:
    """True iff body rows plus the bars of ``edge_ids`` are independent at some trial."""
    _check_prime(prime, trials)
    if not edge_ids:
        raise EmptySubset("independence of an empty edge set is undefined")
    for i in edge_ids:
        graph.edge(i)
    framework = induce_bar_joint(graph)
    ids = sorted(set(edge_ids))
    return any(b.bars_independent(ids) for b in _placements(framework, prime, trials, seed))


def dependent_circuit(
    graph: GainGraph,
    prime: int = MERSENNE_61,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> list[int] | None:
    """A minimal dependent set of bars, or None if all bars are independent.

    Uses the placement of highest rank; the result is re-checked against all
    trials before being returned.
    """
    _check_prime(prime, trials)
    framework = induce_bar_joint(graph)
    ids = sorted(e.id for e in graph.edges)
    best = None
    best_len = -1
    for basis in _placements(framework, prime, trials, seed):
        prefix = basis.first_dependent_prefix(ids)
        if prefix is None:
            return None
        if len(prefix) > best_len:
            best, best_len = (basis, prefix), len(prefix)
    basis, circuit = best
    for hid in list(circuit):
        trial = [x for x in circuit if x != hid]
        if trial and not basis.bars_independent(trial):
            circuit = trial
    return circuit
