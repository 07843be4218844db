"""Two reference schemes: additive secret-sharing PIR over replicated storage,
and a fixed three-node table scheme over GF(2) for two 2-bit records.

Both expose the ``EnumerableScheme`` interface so the brute-force oracles in
:mod:`codedpir.analysis` can certify them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import RequestError
from .field import FieldMatrix, check_prime, solve

__all__ = [
    "EXAMPLE2_TRIPLES",
    "Example2Scheme",
    "Example2Transcript",
    "SharingScheme",
    "SharingTranscript",
    "example2_costs",
    "example2_run",
    "sharing_retrieve",
]


@dataclass(frozen=True)
class SharingTranscript:
    M: int
    queries: tuple[tuple[int, ...], ...]
    answers: tuple[int, ...]
    decoded: int


@dataclass(frozen=True)
class SharingScheme:
    """Every node stores all ``N`` records; the unit query ``e_M`` is split
    into ``K`` additive shares (all reconstruction coefficients equal 1)."""

    K: int
    N: int
    q: int

    def __post_init__(self) -> None:
        check_prime(self.q)
        if self.K < 2 or self.N < 1:
            raise ValueError("need K >= 2 and N >= 1")

    @property
    def coefficients(self) -> tuple[int, ...]:
        return (1,) * self.K

    @property
    def num_records(self) -> int:
        return self.N

    @property
    def num_nodes(self) -> int:
        return self.K

    def shares(self, M: int, free: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
        """Complete ``K-1`` free shares with the one that sums to ``e_M``."""
        if not 1 <= M <= self.N:
            raise RequestError(f"record index M must be in 1..{self.N}, got {M}")
        last = [int(i == M - 1) for i in range(self.N)]
        for share in free:
            last = [a - b for a, b in zip(last, share)]
        return tuple(tuple(int(x) % self.q for x in s) for s in free) + (
            tuple(x % self.q for x in last),
        )

    # EnumerableScheme interface

    def enumeration_size(self, with_records: bool = False) -> int:
        size = self.q ** (self.N * (self.K - 1)) * self.N
        return size * self.q**self.N if with_records else size

    def query_support(self, m: int):
        vectors = list(itertools.product(range(self.q), repeat=self.N))
        for free in itertools.product(vectors, repeat=self.K - 1):
            yield 1, self.shares(m, free)

    def record_sets(self):
        return itertools.product(range(self.q), repeat=self.N)

    def answer(self, k: int, records, query) -> int:
        return sum(d * c for d, c in zip(records, query)) % self.q

    def target(self, records, m: int) -> int:
        return records[m - 1]


def sharing_retrieve(
    scheme: SharingScheme, records: Sequence[int], M: int, rng: np.random.Generator
) -> tuple[int, SharingTranscript]:
    """Retrieve ``records[M-1]`` privately against any single node."""
    if len(records) != scheme.N:
        raise ValueError(f"expected {scheme.N} records, got {len(records)}")
    free = rng.integers(0, scheme.q, size=(scheme.K - 1, scheme.N)).tolist()
    queries = scheme.shares(M, free)
    answers = tuple(scheme.answer(k, records, Q) for k, Q in enumerate(queries, start=1))
    decoded = sum(c * a for c, a in zip(scheme.coefficients, answers)) % scheme.q
    return decoded, SharingTranscript(M, queries, answers, decoded)


# Query triples (Q1, Q2, Q3) used for each requested record, each w.p. 1/3.
EXAMPLE2_TRIPLES: dict[int, tuple[tuple[int, int, int], ...]] = {
    1: ((1, 3, 3), (2, 1, 1), (3, 2, 2)),
    2: ((3, 1, 3), (1, 2, 1), (2, 3, 2)),
}

# Bit positions in the database vector (a1, b1, a2, b2).
_A1, _B1, _A2, _B2 = range(4)


def _node_contents(bits: Sequence[int]) -> tuple[tuple[int, int], ...]:
    a1, b1, a2, b2 = bits
    # Node 3 holds (a1+a2, b1+b2): the only content from which every
    # node-3 entry of the response table is computable.
    return (a1, b1), (a2, b2), (a1 ^ a2, b1 ^ b2)


# Each node's stored pair as GF(2) combinations of (a1, b1, a2, b2).
_CONTENT_COEFFS = (
    ((1, 0, 0, 0), (0, 1, 0, 0)),
    ((0, 0, 1, 0), (0, 0, 0, 1)),
    ((1, 0, 1, 0), (0, 1, 0, 1)),
)


def _response(content: Sequence, query: int):
    """Table lookup: query 1 -> first bit, 2 -> second, 3 -> their sum."""
    x, y = content
    if query == 1:
        return x
    if query == 2:
        return y
    if query == 3:
        if isinstance(x, tuple):
            return tuple((a + b) % 2 for a, b in zip(x, y))
        return x ^ y
    raise RequestError(f"query symbol must be 1, 2 or 3, got {query}")


@dataclass(frozen=True)
class Example2Transcript:
    M: int
    queries: tuple[int, int, int]
    answers: tuple[int, int, int]
    decoded: tuple[int, int]


class Example2Scheme:
    """Three nodes, two records of two bits, storage and download cost 1/2."""

    num_records = 2
    num_nodes = 3
    triples = EXAMPLE2_TRIPLES

    def enumeration_size(self, with_records: bool = False) -> int:
        size = sum(len(t) for t in EXAMPLE2_TRIPLES.values())
        return size * 16 if with_records else size

    def query_support(self, m: int):
        if m not in EXAMPLE2_TRIPLES:
            raise RequestError(f"record index M must be 1 or 2, got {m}")
        return ((1, t) for t in EXAMPLE2_TRIPLES[m])

    def record_sets(self):
        return itertools.product((0, 1), repeat=4)

    def answer(self, k: int, records, query: int) -> int:
        return _response(_node_contents(records)[k - 1], query)

    def target(self, records, m: int) -> tuple[int, int]:
        return (records[_A1], records[_B1]) if m == 1 else (records[_A2], records[_B2])

    @staticmethod
    def decode(triple: Sequence[int], answers: Sequence[int], M: int) -> tuple[int, int]:
        """Recover ``(a_M, b_M)`` as GF(2) combinations of the three answers."""
        coeffs = [
            _response(_CONTENT_COEFFS[k], triple[k]) for k in range(3)
        ]  # coeffs[k] expresses answer k in terms of (a1, b1, a2, b2)
        A_t = FieldMatrix(coeffs, 2).T  # 4 x 3
        wanted = (_A1, _B1) if M == 1 else (_A2, _B2)
        out = []
        for pos in wanted:
            c = solve(A_t, [int(i == pos) for i in range(4)])
            out.append(sum(ci * ai for ci, ai in zip(c, answers)) % 2)
        return out[0], out[1]


def example2_run(
    records: Sequence[int], M: int, rng: np.random.Generator
) -> tuple[tuple[int, int], Example2Transcript]:
    """One retrieval of record ``M`` from bits ``(a1, b1, a2, b2)``."""
    if M not in EXAMPLE2_TRIPLES:
        raise RequestError(f"record index M must be 1 or 2, got {M}")
    bits = tuple(int(b) & 1 for b in records)
    triples = EXAMPLE2_TRIPLES[M]
    triple = triples[int(rng.integers(len(triples)))]
    scheme = Example2Scheme()
    answers = tuple(scheme.answer(k, bits, triple[k - 1]) for k in (1, 2, 3))
    decoded = scheme.decode(triple, answers, M)
    return decoded, Example2Transcript(M, triple, answers, decoded)


def example2_costs() -> tuple[Fraction, Fraction]:
    """(storage, retrieval) cost from the fixture's alphabet sizes in bits."""
    record_bits, stored_bits, answer_bits, n_records = 2, 2, 1, 2
    return (
        Fraction(stored_bits, n_records * record_bits),
        Fraction(answer_bits, record_bits),
    )
