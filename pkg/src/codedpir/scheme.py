"""A bound (P, V, phi) triple and its portable JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import ParameterError, PIRError, SchemeFileError
from .field import FieldMatrix
from .retrieval import RetrievalMatrix
from .storage import ParityCheck, SystemParams

__all__ = ["CollusionPattern", "Scheme", "dumps", "load", "loads", "save"]


@dataclass(frozen=True)
class CollusionPattern:
    """Family of node subsets that may pool their queries.

    Stored canonically: each subset as a sorted tuple of 1-based node indices,
    subsets contained in another one dropped (the superset dominates), and the
    family sorted.
    """

    subsets: tuple[tuple[int, ...], ...]

    def __init__(self, subsets: Iterable[Iterable[int]], K: int | None = None):
        sets = {frozenset(int(k) for k in s) for s in subsets}
        for s in sets:
            if not s:
                raise ParameterError("collusion sets must be nonempty")
            if K is not None and not all(1 <= k <= K for k in s):
                raise ParameterError(f"collusion set {sorted(s)} is not within 1..{K}")
        maximal = [s for s in sets if not any(s < t for t in sets)]
        canon = tuple(sorted(tuple(sorted(s)) for s in maximal))
        object.__setattr__(self, "subsets", canon)

    @classmethod
    def singletons(cls, K: int) -> CollusionPattern:
        return cls([[k] for k in range(1, K + 1)], K)

    def __iter__(self):
        return iter(self.subsets)

    def __len__(self) -> int:
        return len(self.subsets)

    def tolist(self) -> list[list[int]]:
        return [list(s) for s in self.subsets]


@dataclass(frozen=True)
class Scheme:
    """A storage code and retrieval matrix for one parameter set."""

    params: SystemParams
    parity: ParityCheck
    V: RetrievalMatrix
    phi: CollusionPattern = field(default=None)  # type: ignore[assignment]
    seed: int | None = None

    def __post_init__(self) -> None:
        p = self.params
        if (self.parity.K, self.parity.S, self.parity.q) != (p.K, p.S, p.q):
            raise ParameterError("parity check does not match the parameters")
        if not self.V.fits(p):
            raise ParameterError("retrieval matrix does not match the parameters")
        if self.phi is None:
            object.__setattr__(self, "phi", CollusionPattern.singletons(p.K))

    def to_dict(self) -> dict[str, Any]:
        p = self.params
        d: dict[str, Any] = {
            "q": p.q,
            "N": p.N,
            "K": p.K,
            "S": p.S,
            "L": p.L,
            "T": p.T,
            "R": p.R,
            "P": self.parity.matrix.tolist(),
            "V": self.V.matrix.tolist(),
            "phi": self.phi.tolist(),
        }
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Scheme:
        if not isinstance(d, dict):
            raise SchemeFileError("scheme file must hold a JSON object")
        required = {"q", "N", "K", "S", "L", "T", "R", "P", "V", "phi"}
        unknown = set(d) - required - {"seed"}
        if unknown:
            raise SchemeFileError(f"unknown keys: {sorted(unknown)}")
        missing = required - set(d)
        if missing:
            raise SchemeFileError(f"missing keys: {sorted(missing)}")
        for key in ("q", "N", "K", "S", "L", "T", "R"):
            if not isinstance(d[key], int) or isinstance(d[key], bool):
                raise SchemeFileError(f"{key!r} must be an integer")
        seed = d.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            raise SchemeFileError("'seed' must be an integer")
        try:
            params = SystemParams(
                q=d["q"], N=d["N"], K=d["K"], S=d["S"], L=d["L"], T=d["T"], R=d["R"]
            )
        except PIRError as exc:
            raise SchemeFileError(str(exc)) from None
        q = params.q
        P = _matrix(d["P"], "P", params.K, params.S, q)
        V = _matrix(d["V"], "V", params.T + params.L, params.R * params.K, q)
        if not isinstance(d["phi"], list) or not all(isinstance(a, list) for a in d["phi"]):
            raise SchemeFileError("'phi' must be an array of arrays")
        try:
            phi = CollusionPattern(d["phi"], params.K)
            return cls(
                params,
                ParityCheck(P),
                RetrievalMatrix(V, L=params.L, T=params.T, R=params.R),
                phi,
                seed,
            )
        except PIRError as exc:
            raise SchemeFileError(str(exc)) from None


def _matrix(data: Any, name: str, rows: int, cols: int, q: int) -> FieldMatrix:
    if not isinstance(data, list) or len(data) != rows:
        raise SchemeFileError(f"{name!r} must have {rows} rows")
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise SchemeFileError(f"{name!r} row {i} must have {cols} entries")
        for x in row:
            if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x < q:
                raise SchemeFileError(f"{name!r} row {i}: {x!r} is not a residue mod {q}")
    return FieldMatrix(data, q, cols)


def dumps(scheme: Scheme) -> str:
    return json.dumps(scheme.to_dict(), separators=(",", ":"))


def loads(text: str) -> Scheme:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemeFileError(f"invalid JSON: {exc}") from None
    return Scheme.from_dict(data)


def save(scheme: Scheme, path) -> None:
    with open(path, "w") as f:
        f.write(dumps(scheme) + "\n")


def load(path) -> Scheme:
    with open(path) as f:
        return loads(f.read())
