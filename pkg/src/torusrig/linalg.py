"""Exact rank kernels: fraction-free integer elimination and sparse mod-p echelon forms."""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

MERSENNE_61 = (1 << 61) - 1

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Miller-Rabin with the first 13 prime bases.

    Deterministic below 3.3e24, which covers every modulus the rank oracle
    is meant to run with.
    """
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def integer_rank(rows: Iterable[Sequence[int]]) -> int:
    """Rank over Q of an integer matrix by Bareiss fraction-free elimination.

    Every intermediate entry is a minor of the input, so the integers stay
    bounded by Hadamard's bound and each division is exact.
    """
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    nrows = len(m)
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        pivot = next((i for i in range(r, nrows) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pr = m[r]
        pv = pr[c]
        for i in range(r + 1, nrows):
            row = m[i]
            a = row[c]
            for k in range(c + 1, ncols):
                row[k] = (row[k] * pv - a * pr[k]) // prev
            row[c] = 0
        prev = pv
        r += 1
    return r


class ModEchelon:
    """Incrementally maintained row-echelon basis over F_p with sparse rows.

    Rows are ``{column: residue}`` dicts. Each stored pivot row is scaled so
    its pivot (its smallest column) is 1. ``add`` reduces a new row against the
    basis and keeps it if anything survives, so the basis size is the rank of
    everything added so far.
    """

    __slots__ = ("p", "pivots")

    def __init__(self, p: int, pivots: dict[int, dict[int, int]] | None = None):
        self.p = p
        self.pivots: dict[int, dict[int, int]] = {} if pivots is None else pivots

    def copy(self) -> "ModEchelon":
        # pivot rows are never mutated after insertion, so a shallow copy is safe
        return ModEchelon(self.p, dict(self.pivots))

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, int]) -> dict[int, int]:
        p = self.p
        work = {c: v % p for c, v in row.items() if v % p}
        pivots = self.pivots
        while work:
            c = min(work)
            prow = pivots.get(c)
            if prow is None:
                return work
            f = work[c]
            for k, v in prow.items():
                nv = (work.get(k, 0) - f * v) % p
                if nv:
                    work[k] = nv
                else:
                    del work[k]
        return work

    def add(self, row: Mapping[int, int]) -> bool:
        """Insert ``row``; return True iff it was independent of the basis."""
        work = self.reduce(row)
        if not work:
            return False
        c = min(work)
        inv = pow(work[c], -1, self.p)
        p = self.p
        self.pivots[c] = {k: v * inv % p for k, v in work.items()}
        return True


def modular_rank(rows: Iterable[Mapping[int, int]], p: int) -> int:
    ech = ModEchelon(p)
    for row in rows:
        ech.add(row)
    return ech.rank
