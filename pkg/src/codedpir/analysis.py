"""Certification of (P, V) schemes.

Two routes are provided and kept independent of each other:

* algebraic checks on P and V (full column rank of the decode system,
  trivial intersection of each colluding span with the selector subspace,
  and the two necessary counting conditions), and
* brute-force oracles that enumerate every mask, request and record set of a
  tiny instance and test error-freeness and privacy straight from their
  definitions: the requested record must be a function of what the client
  sees, and the colluders' view must have the same distribution for every
  requested index.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Iterable, NamedTuple, Protocol, Sequence

from .errors import EnumerationBudgetError, InfeasibleRegionError, ParameterError
from .field import FieldMatrix, rank
from .retrieval import MaskMatrix, RetrievalMatrix, decode_system, queries_from_mask, retrieval_cost
from .scheme import CollusionPattern, Scheme
from .storage import ParityCheck, SystemParams, encode_record, storage_cost, store

__all__ = [
    "BRUTE_FORCE_BUDGET",
    "CertificationReport",
    "CollusionPattern",
    "CostReport",
    "EnumerableScheme",
    "LinearPIR",
    "PrivacyVerdict",
    "Prop1Verdict",
    "brute_errorfree",
    "brute_privacy",
    "certify",
    "check_privacy",
    "check_prop1",
    "check_prop2",
    "check_retrievability",
    "cost_report",
    "tradeoff_bound",
]

BRUTE_FORCE_BUDGET = 2**24
PROP1_MAX_K = 20


class PrivacyVerdict(NamedTuple):
    private: bool
    failing: tuple[int, ...] | None


class Prop1Verdict(NamedTuple):
    ok: bool
    beta: tuple[int, ...]


def check_retrievability(
    parity: ParityCheck, V: RetrievalMatrix, params: SystemParams
) -> bool:
    """True iff the homogeneous decode system has only the zero solution."""
    system = decode_system(parity, V, params)
    return rank(system) == system.cols


def check_privacy(
    V: RetrievalMatrix, phi: CollusionPattern, params: SystemParams
) -> PrivacyVerdict:
    """Check that no colluding span meets the selector subspace nontrivially.

    For each pattern the columns of V owned by its nodes form G; G's span
    avoids the top-``L`` coordinate subspace exactly when dropping those top
    rows loses no rank.
    """
    L = params.L
    for alpha in phi:
        if not all(1 <= k <= params.K for k in alpha):
            raise ParameterError(f"collusion set {alpha} is not within 1..{params.K}")
        G = V.block(alpha)
        G_minus = G.submatrix(rows=range(L, L + params.T))
        if rank(G) != rank(G_minus):
            return PrivacyVerdict(False, alpha)
    return PrivacyVerdict(True, None)


def check_prop1(
    parity: ParityCheck,
    params: SystemParams,
    betas: Iterable[Sequence[int]] | None = None,
) -> Prop1Verdict:
    """Necessary counting condition for retrievability.

    For every removed node set ``beta``:
    ``(T+L-R)(K-|beta|) <= rank(P without rows beta) * (T+L)``.
    Returns the first violating ``beta``, or the tightest one if none fails.
    Sweeping all subsets is refused for ``K > 20``; pass ``betas`` instead.
    """
    K, T, L, R = params.K, params.T, params.L, params.R
    if betas is None:
        if K > PROP1_MAX_K:
            raise ParameterError(
                f"exhaustive subset sweep refused for K={K} > {PROP1_MAX_K}; pass betas explicitly"
            )
        betas = (
            c for size in range(K + 1) for c in itertools.combinations(range(1, K + 1), size)
        )
    worst: tuple[int, ...] | None = None
    worst_slack = None
    for beta in betas:
        beta = tuple(sorted(beta))
        keep = [k - 1 for k in range(1, K + 1) if k not in beta]
        r = rank(parity.matrix.submatrix(rows=keep)) if keep else 0
        slack = r * (T + L) - (T + L - R) * (K - len(beta))
        if slack < 0:
            return Prop1Verdict(False, beta)
        if worst_slack is None or slack < worst_slack:
            worst, worst_slack = beta, slack
    return Prop1Verdict(True, worst if worst is not None else ())


def check_prop2(params: SystemParams) -> bool:
    """Necessary condition for privacy: at most ``T`` queries per node."""
    return params.R <= params.T


def tradeoff_bound(sc: Fraction, K: int) -> Fraction:
    """Least retrieval cost compatible with storage cost ``sc`` on ``K`` nodes.

    Raises:
        InfeasibleRegionError: when ``K * sc <= 1`` and the bound is undefined.
    """
    sc = Fraction(sc)
    if K * sc <= 1:
        raise InfeasibleRegionError(f"K * sc = {K * sc} <= 1: bound is unbounded")
    return sc / (K * sc - 1)


@dataclass(frozen=True)
class CostReport:
    sc: Fraction
    rc: Fraction
    bound: Fraction | None
    tight: bool

    @classmethod
    def from_costs(cls, sc: Fraction, rc: Fraction, K: int) -> CostReport:
        try:
            bound = tradeoff_bound(sc, K)
        except InfeasibleRegionError:
            return cls(Fraction(sc), Fraction(rc), None, False)
        return cls(Fraction(sc), Fraction(rc), bound, Fraction(rc) == bound)

    def to_dict(self) -> dict[str, Any]:
        return {
            "sc": str(self.sc),
            "rc": str(self.rc),
            "bound": None if self.bound is None else str(self.bound),
            "tight": self.tight,
        }


def cost_report(params: SystemParams) -> CostReport:
    return CostReport.from_costs(storage_cost(params), retrieval_cost(params), params.K)


@dataclass(frozen=True)
class CertificationReport:
    """Algebraic verdicts for one scheme, plus optional oracle verdicts.

    The algebraic conditions are sufficient only, so a failed condition with no
    oracle run reads as ``unknown`` rather than ``falsified``.
    """

    retrievable: bool
    private: bool
    failing_pattern: tuple[int, ...] | None
    prop1_ok: bool
    prop1_beta: tuple[int, ...]
    prop2_ok: bool
    oracle_errorfree: bool | None = None
    oracle_private: bool | None = None

    @property
    def certified(self) -> bool:
        return self.retrievable and self.private

    @property
    def verdict(self) -> str:
        if self.certified:
            return "certified"
        if self.oracle_errorfree is False or self.oracle_private is False:
            return "falsified"
        return "unknown"

    def to_dict(self) -> dict[str, Any]:
        return {
            "retrievable": self.retrievable,
            "private": self.private,
            "failing_pattern": None if self.failing_pattern is None else list(self.failing_pattern),
            "prop1_ok": self.prop1_ok,
            "prop1_beta": list(self.prop1_beta),
            "prop2_ok": self.prop2_ok,
            "oracle_errorfree": self.oracle_errorfree,
            "oracle_private": self.oracle_private,
            "verdict": self.verdict,
        }


def certify(scheme: Scheme, oracle: bool = False) -> CertificationReport:
    """Run every algebraic check; with ``oracle`` also run the brute-force
    oracles when the instance fits the enumeration budget."""
    p = scheme.params
    privacy = check_privacy(scheme.V, scheme.phi, p)
    # Beyond the sweep cap only the empty removal set is checked.
    prop1 = check_prop1(scheme.parity, p, None if p.K <= PROP1_MAX_K else [()])
    oracle_ef = oracle_priv = None
    if oracle:
        linear = LinearPIR(scheme)
        if linear.enumeration_size(with_records=True) <= BRUTE_FORCE_BUDGET:
            oracle_ef = brute_errorfree(linear)
            oracle_priv = brute_privacy(linear, scheme.phi)
    return CertificationReport(
        retrievable=check_retrievability(scheme.parity, scheme.V, p),
        private=privacy.private,
        failing_pattern=privacy.failing,
        prop1_ok=prop1.ok,
        prop1_beta=prop1.beta,
        prop2_ok=check_prop2(p),
        oracle_errorfree=oracle_ef,
        oracle_private=oracle_priv,
    )


class EnumerableScheme(Protocol):
    """What the brute-force oracles need from a retrieval scheme.

    ``query_support(m)`` yields ``(weight, queries)`` pairs covering the whole
    query distribution given ``M = m`` (weights are relative counts);
    ``queries[k-1]`` is what node ``k`` receives and must be hashable.
    ``record_sets()`` enumerates every possible database, ``answer`` is node
    ``k``'s response map and ``target`` the record the client wants.
    """

    num_records: int
    num_nodes: int

    def enumeration_size(self, with_records: bool = False) -> int: ...

    def query_support(self, m: int) -> Iterable[tuple[int, tuple[Hashable, ...]]]: ...

    def record_sets(self) -> Iterable[Any]: ...

    def answer(self, k: int, records: Any, query: Hashable) -> Hashable: ...

    def target(self, records: Any, m: int) -> Hashable: ...


class LinearPIR:
    """Exhaustive view of a linear (P, V) scheme for the oracles."""

    def __init__(self, scheme: Scheme):
        self.scheme = scheme
        self.params = scheme.params
        self.num_records = scheme.params.N
        self.num_nodes = scheme.params.K

    def enumeration_size(self, with_records: bool = False) -> int:
        p = self.params
        size = p.q ** (p.node_len * p.T) * p.N
        if with_records:
            size *= p.q ** (p.info_len * p.N)
        return size

    def query_support(self, m: int):
        p = self.params
        for flat in itertools.product(range(p.q), repeat=p.node_len * p.T):
            mask = MaskMatrix(FieldMatrix.from_entries(p.node_len, p.T, flat, p.q))
            bundles = queries_from_mask(self.scheme.V, m, mask, p)
            yield 1, tuple(b.vectors for b in bundles)

    def record_sets(self):
        p = self.params
        infos = list(itertools.product(range(p.q), repeat=p.info_len))
        for combo in itertools.product(infos, repeat=p.N):
            records = [encode_record(info, self.scheme.parity, p.L) for info in combo]
            contents = store(records)
            yield combo, tuple(c.vector for c in contents)

    def answer(self, k: int, records, query) -> tuple[int, ...]:
        x = records[1][k - 1]
        q = self.params.q
        return tuple(sum(a * b for a, b in zip(vec, x)) % q for vec in query)

    def target(self, records, m: int):
        return records[0][m - 1]


def _as_enumerable(scheme) -> EnumerableScheme:
    return LinearPIR(scheme) if isinstance(scheme, Scheme) else scheme


def brute_privacy(
    scheme: EnumerableScheme | Scheme,
    phi: CollusionPattern,
    budget: int = BRUTE_FORCE_BUDGET,
) -> bool:
    """Exact privacy check by enumeration.

    For every pattern, builds the exact distribution of the colluders' joint
    query view under each requested index and demands they all coincide,
    which is zero mutual information under a uniform index.

    Raises:
        EnumerationBudgetError: the instance is too large to enumerate.
    """
    scheme = _as_enumerable(scheme)
    size = scheme.enumeration_size()
    if size > budget:
        raise EnumerationBudgetError(size, budget)
    supports = {m: list(scheme.query_support(m)) for m in range(1, scheme.num_records + 1)}
    for alpha in phi:
        reference = None
        for m, support in supports.items():
            counts: Counter = Counter()
            for weight, queries in support:
                counts[tuple(queries[k - 1] for k in alpha)] += weight
            total = sum(counts.values())
            dist = {view: Fraction(c, total) for view, c in counts.items()}
            if reference is None:
                reference = dist
            elif dist != reference:
                return False
    return True


def brute_errorfree(
    scheme: EnumerableScheme | Scheme, budget: int = BRUTE_FORCE_BUDGET
) -> bool:
    """Exact error-freeness check by enumeration.

    For every index and every query realisation, two databases that produce
    identical answers must agree on the requested record; otherwise the
    client cannot tell them apart and decoding must fail for one of them.

    Raises:
        EnumerationBudgetError: the instance is too large to enumerate.
    """
    scheme = _as_enumerable(scheme)
    size = scheme.enumeration_size(with_records=True)
    if size > budget:
        raise EnumerationBudgetError(size, budget)
    databases = list(scheme.record_sets())
    K = scheme.num_nodes
    for m in range(1, scheme.num_records + 1):
        realised = {queries for _, queries in scheme.query_support(m)}
        for queries in realised:
            seen: dict = {}
            for db in databases:
                answers = tuple(scheme.answer(k, db, queries[k - 1]) for k in range(1, K + 1))
                want = scheme.target(db, m)
                if seen.setdefault(answers, want) != want:
                    return False
    return True
