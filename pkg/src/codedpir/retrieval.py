"""Linear retrieval schemes driven by a ``(T+L) x (R*K)`` matrix V.

To fetch record ``M`` the client draws a uniform ``(L*N) x T`` mask ``U`` and
sends node ``k`` the ``R`` vectors

    Q[r,k] = sum_t v[t,r,k] U[:, t] + sum_l vstar[l,r,k] E[M,l]

where ``E[M,l]`` is the unit vector selecting symbol ``l`` of record ``M``.
Node ``k`` answers ``A[r,k] = Q[r,k] . X_k``.  With ``w[t,k] = U[:,t] . X_k``
and ``wstar[l,k] = d_M[l,k]`` the answers are linear in these unknowns, and
together with the parity constraints they pin ``d_M`` down whenever the
system matrix has full column rank.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DecodeError, ParameterError, ProtocolError, RequestError
from .field import (
    FieldMatrix,
    InconsistentSystem,
    UnderdeterminedSystem,
    rref,
    solve_unique,
)
from .storage import NodeContent, ParityCheck, RecordMatrix, SystemParams

__all__ = [
    "AnswerBundle",
    "Decoder",
    "MaskMatrix",
    "QueryBundle",
    "RetrievalMatrix",
    "Transcript",
    "cyclic_v",
    "decode",
    "decode_system",
    "gen_queries",
    "queries_from_mask",
    "random_mask",
    "random_v",
    "respond",
    "retrieval_cost",
]


@dataclass(frozen=True)
class RetrievalMatrix:
    """The retrieval matrix V.

    The top ``L`` rows hold the selector coefficients ``vstar`` and the bottom
    ``T`` rows the mask coefficients ``v``.  Column ``(r, k)`` (both 1-based)
    sits at offset ``(k-1)*R + (r-1)``.
    """

    matrix: FieldMatrix
    L: int
    T: int
    R: int

    def __post_init__(self) -> None:
        if self.matrix.rows != self.L + self.T:
            raise ParameterError(
                f"V has {self.matrix.rows} rows, expected T+L={self.T + self.L}"
            )
        if self.R < 1 or self.matrix.cols % self.R:
            raise ParameterError(f"V column count {self.matrix.cols} is not a multiple of R={self.R}")

    @property
    def K(self) -> int:
        return self.matrix.cols // self.R

    @property
    def q(self) -> int:
        return self.matrix.q

    def offset(self, r: int, k: int) -> int:
        return (k - 1) * self.R + (r - 1)

    def column(self, r: int, k: int) -> tuple[int, ...]:
        return self.matrix.col(self.offset(r, k))

    def block(self, nodes: Sequence[int]) -> FieldMatrix:
        """Columns ``(r, k)`` for ``k`` in ``nodes`` (the matrix G)."""
        cols = [self.offset(r, k) for k in nodes for r in range(1, self.R + 1)]
        return self.matrix.submatrix(cols=cols)

    def fits(self, params: SystemParams) -> bool:
        return (
            self.q == params.q
            and (self.L, self.T, self.R, self.K)
            == (params.L, params.T, params.R, params.K)
        )


@dataclass(frozen=True)
class MaskMatrix:
    """The ``(L*N) x T`` uniformly random mask U."""

    matrix: FieldMatrix


@dataclass(frozen=True)
class QueryBundle:
    k: int
    vectors: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class AnswerBundle:
    k: int
    values: tuple[int, ...]


@dataclass(frozen=True)
class Transcript:
    """Everything exchanged in one retrieval of record ``M``."""

    M: int
    mask: MaskMatrix
    queries: tuple[QueryBundle, ...]
    answers: tuple[AnswerBundle, ...]
    decoded: RecordMatrix | None = None


def cyclic_v(K: int, S: int, q: int) -> RetrievalMatrix:
    """Deterministic V with ``y[i,r,k] = 1`` iff ``k - i - r = 0 (mod K)``.

    Uses ``R = T = K - S`` and ``L = S`` so that V is ``K x K(K-S)``; row
    ``i`` indexes ``vstar`` for ``i <= L`` and ``v`` otherwise.  Every column
    has exactly one nonzero entry.
    """
    if not 1 <= S < K:
        raise ParameterError(f"need 1 <= S < K, got S={S}, K={K}")
    R = K - S
    data = [
        [int((k - i - r) % K == 0) for k in range(1, K + 1) for r in range(1, R + 1)]
        for i in range(1, K + 1)
    ]
    return RetrievalMatrix(FieldMatrix(data, q, R * K), L=S, T=K - S, R=R)


def _uniform(rng: np.random.Generator, q: int, rows: int, cols: int) -> FieldMatrix:
    draws = rng.integers(0, q, size=(rows, cols), dtype=np.int64)
    return FieldMatrix(draws.tolist(), q, cols)


def random_v(params: SystemParams, rng: np.random.Generator) -> RetrievalMatrix:
    """V with every entry independent and uniform over GF(q)."""
    m = _uniform(rng, params.q, params.T + params.L, params.R * params.K)
    return RetrievalMatrix(m, L=params.L, T=params.T, R=params.R)


def random_mask(params: SystemParams, rng: np.random.Generator) -> MaskMatrix:
    return MaskMatrix(_uniform(rng, params.q, params.node_len, params.T))


def queries_from_mask(
    V: RetrievalMatrix, M: int, mask: MaskMatrix, params: SystemParams
) -> tuple[QueryBundle, ...]:
    """Deterministic query construction for a given mask."""
    if not 1 <= M <= params.N:
        raise RequestError(f"record index M must be in 1..{params.N}, got {M}")
    if not V.fits(params):
        raise ParameterError("retrieval matrix does not match the system parameters")
    q, L, T = params.q, params.L, params.T
    U = mask.matrix
    if U.shape != (params.node_len, T):
        raise ParameterError(f"mask has shape {U.shape}, expected {(params.node_len, T)}")
    base = L * (M - 1)
    bundles = []
    for k in range(1, params.K + 1):
        vectors = []
        for r in range(1, params.R + 1):
            col = V.column(r, k)
            vstar, v = col[:L], col[L:]
            vec = [sum(U[i, t] * v[t] for t in range(T)) for i in range(params.node_len)]
            for l in range(L):
                vec[base + l] += vstar[l]
            vectors.append(tuple(x % q for x in vec))
        bundles.append(QueryBundle(k, tuple(vectors)))
    return tuple(bundles)


def gen_queries(
    V: RetrievalMatrix, M: int, params: SystemParams, rng: np.random.Generator
) -> tuple[MaskMatrix, tuple[QueryBundle, ...]]:
    """Draw a fresh mask and build every node's query bundle."""
    if not 1 <= M <= params.N:
        raise RequestError(f"record index M must be in 1..{params.N}, got {M}")
    mask = random_mask(params, rng)
    return mask, queries_from_mask(V, M, mask, params)


def respond(content: NodeContent, queries: QueryBundle, q: int) -> AnswerBundle:
    """Inner product of each query vector with the node's stored vector."""
    x = content.vector
    values = []
    for vec in queries.vectors:
        if len(vec) != len(x):
            raise ProtocolError(
                f"node {content.k}: query length {len(vec)} != stored length {len(x)}"
            )
        values.append(sum(a * b for a, b in zip(vec, x)) % q)
    return AnswerBundle(content.k, tuple(values))


def decode_system(
    parity: ParityCheck, V: RetrievalMatrix, params: SystemParams
) -> FieldMatrix:
    """Coefficient matrix of the decode system.

    Unknowns are ordered node by node: ``wstar[1..L, k]`` then ``w[1..T, k]``.
    The first ``S*(T+L)`` rows are the parity constraints
    ``sum_k p[k,s] z[i,k] = 0``; the remaining ``K*R`` rows are the answer
    equations ``sum_t v[t,r,k] w[t,k] + sum_l vstar[l,r,k] wstar[l,k]``.
    """
    K, S, L, T, R = params.K, params.S, params.L, params.T, params.R
    width = T + L
    P = parity.matrix
    rows = []
    for s in range(S):
        for i in range(width):
            row = [0] * (K * width)
            for k in range(K):
                row[k * width + i] = P[k, s]
            rows.append(row)
    for k in range(1, K + 1):
        for r in range(1, R + 1):
            row = [0] * (K * width)
            row[(k - 1) * width:k * width] = V.column(r, k)
            rows.append(row)
    return FieldMatrix(rows, params.q, K * width)


class Decoder:
    """Precomputed solver for one ``(P, V)`` pair.

    The system matrix does not depend on the answers, so it is reduced once:
    a maximal independent set of rows is inverted and every later decode is a
    matrix-vector product plus a consistency check on the remaining rows.
    """

    def __init__(self, parity: ParityCheck, V: RetrievalMatrix, params: SystemParams):
        if not V.fits(params) or parity.K != params.K or parity.S != params.S:
            raise ParameterError("parity check / retrieval matrix do not match the parameters")
        self.params = params
        self.system = decode_system(parity, V, params)
        n_rows, n_unknowns = self.system.shape
        q = params.q
        # Reduce [A^T | I] to find independent rows of A and a left inverse.
        aug = [
            list(self.system.col(j)) + [int(i == j) for i in range(n_unknowns)]
            for j in range(n_unknowns)
        ]
        reduced, pivots = rref(aug, q, pivot_cols=n_rows)
        self.rank = len(pivots)
        self._rows = pivots
        if self.rank == n_unknowns:
            # reduced = [X A^T | X]; X A^T is the identity on the pivot columns,
            # so A[pivots]^{-1} = X^T.
            self._left = [row[n_rows:] for row in reduced]
        else:
            self._left = None

    @property
    def unique(self) -> bool:
        return self._left is not None

    def solve(self, answers: Sequence[AnswerBundle]) -> tuple[int, ...]:
        params, q = self.params, self.params.q
        if len(answers) != params.K:
            raise DecodeError(f"expected answers from {params.K} nodes, got {len(answers)}")
        by_node = sorted(answers, key=lambda a: a.k)
        rhs = [0] * (params.S * (params.T + params.L))
        for a in by_node:
            if len(a.values) != params.R:
                raise DecodeError(f"node {a.k} returned {len(a.values)} symbols, expected {params.R}")
            rhs.extend(a.values)
        if self._left is None:
            try:
                return solve_unique(self.system, rhs)
            except (InconsistentSystem, UnderdeterminedSystem) as exc:
                raise DecodeError(f"decode system has no unique solution: {exc}") from None
        n_unknowns = self.system.cols
        # The inverse of the pivot-row block is the transpose of the left factor.
        x = [
            sum(self._left[i][j] * rhs[self._rows[i]] for i in range(n_unknowns)) % q
            for j in range(n_unknowns)
        ]
        if tuple(self.system.dot_vector(x)) != tuple(v % q for v in rhs):
            raise DecodeError("answers are inconsistent with the decode system")
        return tuple(x)

    def decode(self, answers: Sequence[AnswerBundle]) -> RecordMatrix:
        x = self.solve(answers)
        p = self.params
        width = p.T + p.L
        return RecordMatrix(
            FieldMatrix(
                [[x[k * width + l] for k in range(p.K)] for l in range(p.L)], p.q, p.K
            )
        )


def decode(
    V: RetrievalMatrix,
    parity: ParityCheck,
    answers: Sequence[AnswerBundle],
    M: int,
    params: SystemParams,
) -> RecordMatrix:
    """Recover record ``M`` from all ``K`` answer bundles.

    ``M`` only names which record the ``wstar`` unknowns stand for; the
    system itself is built from ``P``, ``V`` and the answers alone.

    Raises:
        DecodeError: the system is underdetermined or inconsistent.
    """
    if not 1 <= M <= params.N:
        raise RequestError(f"record index M must be in 1..{params.N}, got {M}")
    return Decoder(parity, V, params).decode(answers)


def retrieval_cost(params: SystemParams) -> Fraction:
    return Fraction(params.R, params.L * (params.K - params.S))
