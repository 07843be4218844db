"""Exact arithmetic over prime fields GF(q) and a dense matrix kernel.

Entries are stored as plain Python ints reduced into ``[0, q)``, so moduli up
to ``2**31`` (and beyond) are handled without overflow.  Every matrix routine
is a straightforward Gauss-Jordan elimination that pivots on the first
nonzero entry in scan order.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

from sympy import isprime

from .errors import ParameterError

__all__ = [
    "FieldElem",
    "FieldMatrix",
    "GF",
    "InconsistentSystem",
    "LinAlgError",
    "UnderdeterminedSystem",
    "check_prime",
    "fe_arith",
    "inverse",
    "null_space",
    "rank",
    "reduced_column_echelon",
    "rref",
    "solve",
    "solve_unique",
]


@functools.lru_cache(maxsize=256)
def check_prime(q: int) -> int:
    """Return ``q`` unchanged if it is prime, otherwise raise ParameterError."""
    if not isinstance(q, int) or isinstance(q, bool) or not isprime(q):
        raise ParameterError(f"field modulus must be prime, got {q!r}")
    return q


@dataclass(frozen=True, slots=True)
class FieldElem:
    """An element of GF(q)."""

    value: int
    q: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.q:
            raise ValueError(f"{self.value} is not a residue modulo {self.q}")

    def _coerce(self, other: FieldElem | int) -> int:
        if isinstance(other, FieldElem):
            if other.q != self.q:
                raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")
            return other.value
        return other % self.q

    def __add__(self, other: FieldElem | int) -> FieldElem:
        return FieldElem((self.value + self._coerce(other)) % self.q, self.q)

    def __sub__(self, other: FieldElem | int) -> FieldElem:
        return FieldElem((self.value - self._coerce(other)) % self.q, self.q)

    def __mul__(self, other: FieldElem | int) -> FieldElem:
        return FieldElem(self.value * self._coerce(other) % self.q, self.q)

    def __truediv__(self, other: FieldElem | int) -> FieldElem:
        b = self._coerce(other)
        if b == 0:
            raise ZeroDivisionError(f"division by zero in GF({self.q})")
        return FieldElem(self.value * pow(b, -1, self.q) % self.q, self.q)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self) -> FieldElem:
        return FieldElem(-self.value % self.q, self.q)

    def inverse(self) -> FieldElem:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.q})")
        return FieldElem(pow(self.value, -1, self.q), self.q)

    def __int__(self) -> int:
        return self.value


class GF:
    """Factory for elements of the prime field GF(q).

    >>> F = GF(7)
    >>> F(3) / F(5)
    FieldElem(value=2, q=7)
    """

    def __init__(self, q: int):
        self.q = check_prime(q)

    def __call__(self, value: int) -> FieldElem:
        return FieldElem(value % self.q, self.q)

    def __iter__(self):
        return (FieldElem(v, self.q) for v in range(self.q))

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("GF", self.q))


def fe_arith(a: FieldElem, b: FieldElem, op: str) -> FieldElem:
    """Apply ``op`` (one of add, sub, mul, div) to two elements of one field."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown field operation {op!r}")


class FieldMatrix:
    """Immutable dense matrix over GF(q), stored as a tuple of row tuples."""

    __slots__ = ("q", "rows", "cols", "_data")

    def __init__(
        self,
        data: Iterable[Sequence[int]],
        q: int,
        cols: int | None = None,
    ):
        rows = tuple(tuple(int(x) % q for x in row) for row in data)
        if cols is None:
            if not rows:
                raise ValueError("cols must be given for a matrix with no rows")
            cols = len(rows[0])
        for row in rows:
            if len(row) != cols:
                raise ValueError("ragged matrix rows")
        self.q = q
        self.rows = len(rows)
        self.cols = cols
        self._data = rows

    # construction helpers

    @classmethod
    def zeros(cls, rows: int, cols: int, q: int) -> FieldMatrix:
        return cls([[0] * cols for _ in range(rows)], q, cols)

    @classmethod
    def identity(cls, n: int, q: int) -> FieldMatrix:
        return cls([[int(i == j) for j in range(n)] for i in range(n)], q, n)

    @classmethod
    def from_entries(
        cls, rows: int, cols: int, entries: Sequence[int], q: int
    ) -> FieldMatrix:
        """Build from a row-major flat sequence of length ``rows * cols``."""
        if len(entries) != rows * cols:
            raise ValueError("entries length must equal rows * cols")
        return cls(
            [entries[i * cols:(i + 1) * cols] for i in range(rows)], q, cols
        )

    @classmethod
    def column(cls, values: Sequence[int], q: int) -> FieldMatrix:
        return cls([[v] for v in values], q, 1)

    @classmethod
    def hstack(cls, blocks: Sequence[FieldMatrix]) -> FieldMatrix:
        q, nrows = blocks[0].q, blocks[0].rows
        data = [
            [x for b in blocks for x in b._data[i]] for i in range(nrows)
        ]
        return cls(data, q, sum(b.cols for b in blocks))

    @classmethod
    def vstack(cls, blocks: Sequence[FieldMatrix]) -> FieldMatrix:
        q, ncols = blocks[0].q, blocks[0].cols
        return cls([row for b in blocks for row in b._data], q, ncols)

    # access

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> tuple[int, ...]:
        return tuple(x for row in self._data for x in row)

    def tolist(self) -> list[list[int]]:
        return [list(row) for row in self._data]

    def row(self, i: int) -> tuple[int, ...]:
        return self._data[i]

    def col(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self._data)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return self._data[i][j]

    def submatrix(
        self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None
    ) -> FieldMatrix:
        rows = range(self.rows) if rows is None else rows
        cols = range(self.cols) if cols is None else cols
        return FieldMatrix(
            [[self._data[i][j] for j in cols] for i in rows], self.q, len(cols)
        )

    @property
    def T(self) -> FieldMatrix:
        return FieldMatrix(
            [self.col(j) for j in range(self.cols)], self.q, self.rows
        )

    def is_zero(self) -> bool:
        return all(x == 0 for row in self._data for x in row)

    # arithmetic

    def _check_same(self, other: FieldMatrix) -> None:
        if other.q != self.q:
            raise ValueError(f"modulus mismatch: {self.q} vs {other.q}")

    def __matmul__(self, other: FieldMatrix) -> FieldMatrix:
        self._check_same(other)
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        q = self.q
        other_cols = [other.col(j) for j in range(other.cols)]
        return FieldMatrix(
            [
                [sum(a * b for a, b in zip(row, c)) % q for c in other_cols]
                for row in self._data
            ],
            q,
            other.cols,
        )

    def __add__(self, other: FieldMatrix) -> FieldMatrix:
        self._check_same(other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return FieldMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)],
            self.q,
            self.cols,
        )

    def __sub__(self, other: FieldMatrix) -> FieldMatrix:
        self._check_same(other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return FieldMatrix(
            [[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)],
            self.q,
            self.cols,
        )

    def __neg__(self) -> FieldMatrix:
        return FieldMatrix([[-a for a in r] for r in self._data], self.q, self.cols)

    def scale(self, c: int) -> FieldMatrix:
        return FieldMatrix([[c * a for a in r] for r in self._data], self.q, self.cols)

    def dot_vector(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise ValueError("vector length must equal column count")
        q = self.q
        return tuple(sum(a * b for a, b in zip(row, v)) % q for row in self._data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return (
            self.q == other.q
            and self.shape == other.shape
            and self._data == other._data
        )

    def __hash__(self) -> int:
        return hash((self.q, self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        return f"FieldMatrix({self.tolist()}, q={self.q})"


class LinAlgError(ArithmeticError):
    """A linear system has no unique solution."""


class InconsistentSystem(LinAlgError):
    pass


class UnderdeterminedSystem(LinAlgError):
    pass


def rref(
    data: Sequence[Sequence[int]], q: int, pivot_cols: int | None = None
) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form of a list-of-rows matrix over GF(q).

    Row operations act on the full width, but pivots are only searched in
    the first ``pivot_cols`` columns (all columns by default), which makes
    augmented-matrix solving a one-liner.

    Returns:
        (rows, pivots): the reduced rows and the pivot column of each
        nonzero leading row.
    """
    a = [[x % q for x in row] for row in data]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    if pivot_cols is None:
        pivot_cols = ncols
    pivots: list[int] = []
    r = 0
    for c in range(pivot_cols):
        if r == nrows:
            break
        found = next((i for i in range(r, nrows) if a[i][c]), None)
        if found is None:
            continue
        a[r], a[found] = a[found], a[r]
        inv = pow(a[r][c], -1, q)
        prow = [x * inv % q for x in a[r]]
        a[r] = prow
        for i in range(nrows):
            if i != r:
                f = a[i][c]
                if f:
                    a[i] = [(x - f * y) % q for x, y in zip(a[i], prow)]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: FieldMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(rref(m._data, m.q)[1])


def solve(a: FieldMatrix, b: Sequence[int]) -> tuple[int, ...]:
    """Return one solution of ``a @ x = b`` (free variables set to zero).

    Raises:
        InconsistentSystem: if no solution exists.
    """
    if len(b) != a.rows:
        raise ValueError(f"rhs length {len(b)} does not match {a.rows} rows")
    q = a.q
    aug = [list(row) + [bi % q] for row, bi in zip(a._data, b)]
    if not aug:
        return (0,) * a.cols
    reduced, pivots = rref(aug, q, pivot_cols=a.cols)
    for row in reduced[len(pivots):]:
        if row[-1]:
            raise InconsistentSystem("system has no solution")
    x = [0] * a.cols
    for row, c in zip(reduced, pivots):
        x[c] = row[-1]
    return tuple(x)


def solve_unique(a: FieldMatrix, b: Sequence[int]) -> tuple[int, ...]:
    """Return the unique ``x`` with ``a @ x = b``.

    Raises:
        InconsistentSystem: if no solution exists.
        UnderdeterminedSystem: if the solution is not unique.
        ValueError: if ``b`` does not have ``a.rows`` entries.
    """
    x = solve(a, b)
    if rank(a) < a.cols:
        raise UnderdeterminedSystem(
            f"rank {rank(a)} < {a.cols} unknowns; solution not unique"
        )
    return x


def null_space(m: FieldMatrix) -> FieldMatrix:
    """Basis of ``{x : m @ x = 0}`` as the columns of a ``cols x nullity`` matrix."""
    if m.rows == 0:
        return FieldMatrix.identity(m.cols, m.q)
    reduced, pivots = rref(m._data, m.q)
    pivot_set = set(pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    q = m.q
    basis = []
    for f in free:
        v = [0] * m.cols
        v[f] = 1
        for row, c in zip(reduced, pivots):
            v[c] = -row[f] % q
        basis.append(v)
    if not basis:
        return FieldMatrix.zeros(m.cols, 0, q) if m.cols else FieldMatrix([], q, 0)
    return FieldMatrix(basis, q, m.cols).T


def reduced_column_echelon(m: FieldMatrix) -> tuple[FieldMatrix, FieldMatrix]:
    """Return ``(echelon, transform)`` with ``echelon = m @ transform``.

    ``transform`` is invertible.  Each nonzero column ``a`` of ``echelon``
    owns a pivot row ``t_a`` where it equals 1 and every other column is 0;
    zero columns come last.
    """
    q, n = m.q, m.cols
    # Row-reduce [m^T | I]: C^T m^T = E^T, hence m C = E.
    aug = [list(m.col(j)) + [int(i == j) for i in range(n)] for j in range(n)]
    reduced, _ = rref(aug, q, pivot_cols=m.rows)
    echelon_t = [row[: m.rows] for row in reduced]
    transform_t = [row[m.rows:] for row in reduced]
    echelon = FieldMatrix(echelon_t, q, m.rows).T if n else FieldMatrix.zeros(m.rows, 0, q)
    transform = FieldMatrix(transform_t, q, n).T if n else FieldMatrix([], q, 0)
    return echelon, transform


def inverse(m: FieldMatrix) -> FieldMatrix:
    if m.rows != m.cols:
        raise ValueError("only square matrices are invertible")
    n = m.rows
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(m._data)]
    reduced, pivots = rref(aug, m.q, pivot_cols=n)
    if len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    return FieldMatrix([row[n:] for row in reduced], m.q, n)
