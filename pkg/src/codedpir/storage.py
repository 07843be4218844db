"""Linear storage codes defined by a K x S parity-check matrix.

A record is an ``L x K`` matrix ``d`` with ``d @ P = 0``; column ``k`` is the
piece kept by node ``k``.  Records are encoded systematically: information
symbols fill columns ``0 .. K-S-1`` (column by column, ``L`` symbols each) and
the last ``S`` columns are the parity completion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import EncodingError, ParameterError
from .field import FieldMatrix, check_prime, inverse, rank

__all__ = [
    "NodeContent",
    "ParityCheck",
    "RecordMatrix",
    "SystemParams",
    "encode_record",
    "make_mds_parity",
    "make_uncoded_parity",
    "record_info",
    "storage_cost",
    "store",
]


@dataclass(frozen=True)
class SystemParams:
    """Scalar parameters of a coded PIR scheme.

    Attributes:
        q: prime field size.
        N: number of records.
        K: number of storage nodes.
        S: number of parity-check columns (``1 <= S < K``).
        L: rows per record; each node holds ``L`` symbols of every record.
        T: number of mask columns.
        R: number of query vectors (and answer symbols) per node.
    """

    q: int
    N: int
    K: int
    S: int
    L: int
    T: int
    R: int

    def __post_init__(self) -> None:
        check_prime(self.q)
        for name in ("N", "L", "T", "R", "S"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.K < 2:
            raise ParameterError(f"K must be >= 2, got {self.K}")
        if not self.S < self.K:
            raise ParameterError(f"S must be < K, got S={self.S}, K={self.K}")

    @classmethod
    def optimal(cls, q: int, K: int, S: int, N: int = 2) -> SystemParams:
        """Parameters ``R = T = K - S``, ``L = S`` that meet the tradeoff bound."""
        return cls(q=q, N=N, K=K, S=S, L=S, T=K - S, R=K - S)

    @property
    def info_len(self) -> int:
        """Information symbols per record, ``(K - S) * L``."""
        return (self.K - self.S) * self.L

    @property
    def node_len(self) -> int:
        return self.L * self.N


@dataclass(frozen=True)
class ParityCheck:
    """Full-rank ``K x S`` parity-check matrix."""

    matrix: FieldMatrix

    def __post_init__(self) -> None:
        K, S = self.matrix.shape
        if not 1 <= S < K:
            raise ParameterError(f"parity check must be K x S with 1 <= S < K, got {K}x{S}")
        if rank(self.matrix) != S:
            raise ParameterError("parity check matrix is not full rank")

    @property
    def K(self) -> int:
        return self.matrix.rows

    @property
    def S(self) -> int:
        return self.matrix.cols

    @property
    def q(self) -> int:
        return self.matrix.q


@dataclass(frozen=True)
class RecordMatrix:
    """One record laid out as ``L x K``; column ``k`` is stored on node ``k+1``."""

    matrix: FieldMatrix

    def satisfies(self, parity: ParityCheck) -> bool:
        return (self.matrix @ parity.matrix).is_zero()


@dataclass(frozen=True)
class NodeContent:
    """The length ``L*N`` vector held by node ``k`` (1-based)."""

    k: int
    vector: tuple[int, ...]


def make_mds_parity(K: int, S: int, q: int) -> ParityCheck:
    """Vandermonde parity check ``p[k, s] = a_k ** s`` with ``a_k = k``.

    Rows use the distinct evaluation points ``0, 1, ..., K-1`` so any ``S``
    rows form an invertible Vandermonde block, which is the MDS property.
    """
    check_prime(q)
    if not 1 <= S < K:
        raise ParameterError(f"need 1 <= S < K, got S={S}, K={K}")
    if q < K:
        raise ParameterError(f"MDS construction needs q >= K distinct points, got q={q}, K={K}")
    return ParityCheck(
        FieldMatrix([[pow(a, s, q) for s in range(S)] for a in range(K)], q, S)
    )


def make_uncoded_parity(K: int, q: int) -> ParityCheck:
    """Parity check of replicated storage: column ``j`` is ``e_j - e_{j+1}``."""
    check_prime(q)
    if K < 2:
        raise ParameterError(f"K must be >= 2, got {K}")
    data = [[0] * (K - 1) for _ in range(K)]
    for j in range(K - 1):
        data[j][j] = 1
        data[j + 1][j] = -1
    return ParityCheck(FieldMatrix(data, q, K - 1))


def _parity_block_inverse(parity: ParityCheck) -> FieldMatrix:
    K, S = parity.K, parity.S
    positions = list(range(K - S, K))
    try:
        return inverse(parity.matrix.submatrix(rows=positions))
    except ZeroDivisionError:
        raise EncodingError(
            f"rows {[p + 1 for p in positions]} of the parity check are singular; "
            "cannot use them as parity positions"
        ) from None


def encode_record(
    info: Sequence[int], parity: ParityCheck, L: int | None = None
) -> RecordMatrix:
    """Systematically encode ``(K-S)*L`` information symbols into a record.

    ``L`` defaults to ``len(info) // (K - S)``.
    """
    K, S, q = parity.K, parity.S, parity.q
    k_info = K - S
    if L is None:
        L = max(len(info) // k_info, 1)
    if len(info) != k_info * L:
        raise ValueError(f"expected {k_info * L} information symbols, got {len(info)}")
    p_info = parity.matrix.submatrix(rows=range(k_info))
    p_par_inv = _parity_block_inverse(parity)
    info_block = FieldMatrix(
        [[info[j * L + l] for j in range(k_info)] for l in range(L)], q, k_info
    )
    # d_info P_info + d_par P_par = 0  =>  d_par = -d_info P_info P_par^{-1}
    parity_block = -(info_block @ p_info @ p_par_inv)
    return RecordMatrix(FieldMatrix.hstack([info_block, parity_block]))


def record_info(record: RecordMatrix, S: int) -> tuple[int, ...]:
    """Read back the information symbols of a systematically encoded record."""
    m = record.matrix
    return tuple(m[l, j] for j in range(m.cols - S) for l in range(m.rows))


def store(
    records: Sequence[RecordMatrix], parity: ParityCheck | None = None
) -> list[NodeContent]:
    """Lay ``N`` records out across the ``K`` nodes.

    Node ``k`` stores column ``k`` of record 1, then of record 2, and so on.
    If ``parity`` is given every record is checked against it first.
    """
    if not records:
        raise ValueError("at least one record is required")
    shape = records[0].matrix.shape
    for n, rec in enumerate(records, start=1):
        if rec.matrix.shape != shape:
            raise ValueError(f"record {n} has shape {rec.matrix.shape}, expected {shape}")
        if parity is not None and not rec.satisfies(parity):
            raise EncodingError(f"record {n} is not a codeword (d P != 0)")
    L, K = shape
    return [
        NodeContent(
            k + 1,
            tuple(rec.matrix[l, k] for rec in records for l in range(L)),
        )
        for k in range(K)
    ]


def storage_cost(params: SystemParams) -> Fraction:
    return Fraction(1, params.K - params.S)
