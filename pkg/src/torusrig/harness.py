"""Corpus generation and end-to-end property checks binding both verdicts.

Every check returns a ``PropertyResult`` so the CLI and the test-suite can
report counts and the first few failures without re-running anything.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .constructions import graph_document, random_tight_graph, reduce_to_seed, replay_trace
from .gain_graph import Edge, Gain, GainGraph
from .linalg import MERSENNE_61
from .rigidity import (
    DEFAULT_TRIALS,
    assemble_matrix,
    generic_rank,
    induce_bar_joint,
    sample_positions,
    translation_residuals,
)
from .sparsity import check_sparsity, check_sparsity_bruteforce, check_sparsity_connected

MAX_REPORTED_FAILURES = 5


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    failures: list[dict] = field(default_factory=list)
    failure_count: int = 0

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def fail(self, **detail) -> None:
        self.failure_count += 1
        if len(self.failures) < MAX_REPORTED_FAILURES:
            self.failures.append(detail)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "checked": self.checked,
            "passed": self.passed,
            "failure_count": self.failure_count,
            "failures": self.failures,
        }


def random_gain_graph(rng: random.Random, max_bodies: int = 3, max_edges: int = 12) -> GainGraph:
    """A small random body-bar graph, biased towards tight edge counts.

    Gains come from a few regimes (all zero, multiples of one axis, small
    random) so that both sparse and dense-gain-deficient samples are common.
    """
    nb = rng.randint(1, max_bodies)
    tight = 6 * nb - 3
    if tight <= max_edges and rng.random() < 0.6:
        ne = tight
    else:
        ne = rng.randint(1, max_edges)
    bodies = [f"B{k}" for k in range(nb)]
    regime = rng.choice(("small", "small", "axis", "mixed"))
    edges = []
    for eid in range(ne):
        u, v = rng.choice(bodies), rng.choice(bodies)
        if regime == "axis":
            gain = Gain(rng.randint(-3, 3), 0, 0)
        elif regime == "mixed" and rng.random() < 0.5:
            gain = Gain(0, 0, 0)
        else:
            gain = Gain(rng.randint(-1, 1), rng.randint(-1, 1), rng.randint(-1, 1))
        if u == v and gain.is_zero():
            gain = Gain(1, 0, 0)
        edges.append(Edge(eid, u, v, gain))
    return GainGraph(tuple(bodies), tuple(edges))


def equivalence_sweep(
    count: int,
    seed: int,
    rank_seeds: int = 3,
    max_bodies: int = 3,
    max_edges: int = 12,
    prime: int = MERSENNE_61,
    trials: int = DEFAULT_TRIALS,
) -> PropertyResult:
    """Brute-force counts against the rank oracle on random small graphs.

    Two agreements are required per graph and rank seed: tight and sparse iff
    minimally rigid, and sparse iff the bar rows are independent.
    """
    res = PropertyResult("count_rank_equivalence")
    rng = random.Random(seed)
    for k in range(count):
        g = random_gain_graph(rng, max_bodies, max_edges)
        comb = check_sparsity_bruteforce(g)
        fw = induce_bar_joint(g)
        nbodyrows = len(fw.body_edges)
        for rs in range(rank_seeds):
            lin = generic_rank(fw, prime, trials, seed=seed * 1000 + 3 * k + rs)
            independent = lin.rank == lin.rows
            minimal = comb.tight and comb.sparse
            res.checked += 1
            if minimal != lin.minimally_rigid or comb.sparse != independent:
                res.fail(index=k, rank_seed=rs, graph=graph_document(g), sparsity=comb.to_dict(),
                         rigidity=lin.to_dict(), body_rows=nbodyrows)
    return res


def pruning_agreement(count: int, seed: int, max_bodies: int = 4, max_edges: int = 10) -> PropertyResult:
    """Exhaustive and connected-subset sparsity checkers must agree."""
    res = PropertyResult("brute_vs_connected")
    rng = random.Random(seed)
    for k in range(count):
        g = random_gain_graph(rng, max_bodies, max_edges)
        a = check_sparsity_bruteforce(g)
        b = check_sparsity_connected(g)
        res.checked += 1
        if (a.sparse, a.tight) != (b.sparse, b.tight):
            res.fail(index=k, graph=graph_document(g), brute=a.to_dict(), connected=b.to_dict())
    return res


def construction_roundtrip(
    count: int,
    seed: int,
    min_bodies: int = 2,
    max_bodies: int = 6,
    prime: int = MERSENNE_61,
    trials: int = DEFAULT_TRIALS,
) -> PropertyResult:
    """Generated graphs pass both checks, reduce in |V|-1 steps and replay exactly."""
    res = PropertyResult("generate_reduce_replay")
    rng = random.Random(seed)
    for k in range(count):
        nb = rng.randint(min_bodies, max_bodies)
        gseed = rng.getrandbits(32)
        g = random_tight_graph(nb, gseed)
        comb = check_sparsity(g)
        lin = generic_rank(induce_bar_joint(g), prime, trials, seed=gseed)
        trace = reduce_to_seed(g)
        res.checked += 1
        problems = []
        if not (comb.tight and comb.sparse):
            problems.append("not tight and sparse")
        if not lin.minimally_rigid:
            problems.append(f"rank {lin.rank} of {lin.rows}")
        if len(trace.steps) != nb - 1:
            problems.append(f"{len(trace.steps)} reduction steps")
        if replay_trace(trace).canonical() != g.canonical():
            problems.append("replay differs")
        if problems:
            res.fail(index=k, bodies=nb, seed=gseed, problems=problems, graph=graph_document(g))
    return res


def kernel_sanity(graphs: list[GainGraph], seed: int, prime: int = MERSENNE_61) -> PropertyResult:
    """Unit translations annihilate every assembled matrix, exactly."""
    res = PropertyResult("translations_in_kernel")
    rng = random.Random(seed)
    for k, g in enumerate(graphs):
        fw = induce_bar_joint(g)
        for modulus in (prime, None):
            m = assemble_matrix(fw, sample_positions(fw.vertices, rng, modulus), modulus)
            res.checked += 1
            if any(any(x != 0 for x in col) for col in translation_residuals(m)):
                res.fail(index=k, modulus=modulus, graph=graph_document(g))
    return res


def run_verify(corpus_size: int, max_bodies: int, seed: int) -> dict:
    """The full harness at one corpus size, as a JSON-ready report."""
    rng = random.Random(seed)
    small = [random_gain_graph(rng, 3, 12) for _ in range(corpus_size)]
    results = [
        equivalence_sweep(corpus_size, seed),
        pruning_agreement(corpus_size, seed + 1),
        construction_roundtrip(corpus_size, seed + 2, min(2, max_bodies), max_bodies),
        kernel_sanity(small, seed + 3),
    ]
    return {
        "corpus_size": corpus_size,
        "max_bodies": max_bodies,
        "seed": seed,
        "passed": all(r.passed for r in results),
        "properties": [r.to_dict() for r in results],
    }
