"""Client side of the simulated protocol, plus the collusion observer.

A :class:`Cluster` starts one actor per node, ships each node its stored
vector once and then runs any number of retrievals.  All randomness is drawn
by the client from the generator it is handed, so a session is a pure
function of ``(scheme, records, M, rng state)`` whichever transport is used.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..analysis import certify
from ..errors import ParameterError, ProtocolError, SessionError
from ..retrieval import AnswerBundle, Decoder, QueryBundle, Transcript, gen_queries
from ..scheme import Scheme
from ..storage import RecordMatrix, encode_record, store
from .transport import StorageNode, Transport, make_transport
from .wire import Kind, decode_frame, encode_frame

__all__ = [
    "Cluster",
    "ObservationReport",
    "ObservedRun",
    "Observer",
    "ObserverLog",
    "observe",
    "random_records",
    "run_session",
]


def _as_records(scheme: Scheme, records: Sequence) -> list[RecordMatrix]:
    out = []
    for rec in records:
        if not isinstance(rec, RecordMatrix):
            rec = encode_record([int(x) for x in rec], scheme.parity, scheme.params.L)
        out.append(rec)
    if len(out) != scheme.params.N:
        raise ParameterError(f"expected {scheme.params.N} records, got {len(out)}")
    return out


def random_records(scheme: Scheme, rng: np.random.Generator) -> list[RecordMatrix]:
    """Encode ``N`` uniformly random information vectors."""
    p = scheme.params
    info = rng.integers(0, p.q, size=(p.N, p.info_len), dtype=np.int64).tolist()
    return [encode_record(row, scheme.parity, p.L) for row in info]


@dataclass(frozen=True)
class ObservedRun:
    m_hidden: bool
    bundles: tuple[QueryBundle, ...]


@dataclass
class ObserverLog:
    alpha: tuple[int, ...]
    runs: list[ObservedRun] = field(default_factory=list)


class Observer:
    """Eavesdrops on the QUERY frames addressed to the nodes in ``alpha``.

    It is attached as a transport tap and sees only raw frames; it never
    learns ``M``, the mask or any stored content.
    """

    def __init__(self, alpha: Sequence[int], q: int | None = None):
        self.alpha = tuple(sorted(set(int(k) for k in alpha)))
        if not self.alpha:
            raise ParameterError("observer needs a nonempty node set")
        self.q = q
        self.log = ObserverLog(self.alpha)
        self._pending: dict[int, QueryBundle] = {}

    def __call__(self, k: int, frame: bytes) -> None:
        if k not in self.alpha:
            return
        msg = decode_frame(frame, self.q)
        if msg.kind != Kind.QUERY:
            return
        self._pending[k] = QueryBundle(msg.node, msg.vectors)
        if len(self._pending) == len(self.alpha):
            bundles = tuple(self._pending[j] for j in self.alpha)
            self.log.runs.append(ObservedRun(True, bundles))
            self._pending.clear()

    @staticmethod
    def digests(run: ObservedRun) -> list[bytes]:
        """Hash of the whole observed tuple, then of each single query vector."""
        joint = hashlib.blake2b(digest_size=16)
        singles = []
        for b in run.bundles:
            for vec in b.vectors:
                chunk = encode_frame(Kind.QUERY, b.k, [vec])
                joint.update(chunk)
                singles.append(hashlib.blake2b(chunk, digest_size=16).digest())
        return [joint.digest()] + singles


class Cluster:
    """Client plus ``K`` node actors for one scheme.

    Args:
        scheme: the scheme to run.
        transport: ``"inproc"`` or ``"socket"``.
        timeout: seconds to wait for each node's reply.
        addresses: socket listen address per 1-based node index.
        unsafe: run even if the scheme fails certification.
    """

    def __init__(
        self,
        scheme: Scheme,
        transport: str = "inproc",
        timeout: float = 5.0,
        addresses: Mapping[int, tuple[str, int]] | None = None,
        unsafe: bool = False,
    ):
        if not unsafe:
            report = certify(scheme)
            if not report.certified:
                raise SessionError(
                    "scheme is not certified (retrievable="
                    f"{report.retrievable}, private={report.private}); use unsafe to force"
                )
        self.scheme = scheme
        self.params = scheme.params
        self.nodes = [StorageNode(k, self.params.q) for k in range(1, self.params.K + 1)]
        self.transport: Transport = make_transport(transport, self.nodes, timeout, addresses)
        self.decoder = Decoder(scheme.parity, scheme.V, scheme.params)
        self._stored = False

    def __enter__(self) -> Cluster:
        self.transport.start()
        return self

    def __exit__(self, *exc) -> None:
        self.transport.close()

    def attach(self, observer: Observer) -> None:
        self.transport.taps.append(observer)

    def kill(self, k: int) -> None:
        self.transport.kill(k)

    def store(self, records: Sequence) -> list[RecordMatrix]:
        records = _as_records(self.scheme, records)
        for content in store(records, self.scheme.parity):
            self.transport.send(content.k, encode_frame(Kind.STORE, content.k, [content.vector]))
        self._stored = True
        return records

    def _answer(self, k: int) -> AnswerBundle:
        frame = self.transport.recv(k)
        try:
            msg = decode_frame(frame, self.params.q)
        except ProtocolError as exc:
            raise SessionError(f"malformed frame: {exc}", node=k) from None
        if msg.kind == Kind.ERROR:
            raise SessionError(msg.text, node=k)
        if msg.kind != Kind.ANSWER or msg.node != k:
            raise SessionError(f"expected ANSWER from node {k}, got {msg.kind.name}", node=k)
        if len(msg.vectors) != 1 or len(msg.vectors[0]) != self.params.R:
            raise SessionError(f"answer must carry {self.params.R} symbols", node=k)
        return AnswerBundle(k, msg.vectors[0])

    def retrieve(self, M: int, rng: np.random.Generator, decode: bool | None = True) -> Transcript:
        """Run one retrieval of record ``M``.

        ``decode=None`` decodes only when the scheme is retrievable.
        Answers from every node are collected before decoding, so a failed
        node never leaves a partial result behind.
        """
        if not self._stored:
            raise SessionError("records have not been stored")
        mask, queries = gen_queries(self.scheme.V, M, self.params, rng)
        for b in queries:
            self.transport.send(b.k, encode_frame(Kind.QUERY, b.k, b.vectors))
        answers = tuple(self._answer(b.k) for b in queries)
        decoded = None
        if decode or (decode is None and self.decoder.unique):
            decoded = self.decoder.decode(answers)
        return Transcript(M, mask, queries, answers, decoded)


def run_session(
    scheme: Scheme,
    records: Sequence,
    M: int,
    transport: str = "inproc",
    rng: np.random.Generator | None = None,
    *,
    seed: int | None = None,
    timeout: float = 5.0,
    unsafe: bool = False,
    observer: Observer | None = None,
    addresses: Mapping[int, tuple[str, int]] | None = None,
) -> Transcript:
    """Store ``records`` and retrieve record ``M`` over a fresh cluster.

    Raises:
        SessionError: certification failed (without ``unsafe``), or a node
            timed out, sent a malformed frame or reported an error.
        DecodeError: the answers do not determine the record.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    with Cluster(scheme, transport, timeout, addresses, unsafe) as cluster:
        if observer is not None:
            cluster.attach(observer)
        cluster.store(records)
        return cluster.retrieve(M, rng)


@dataclass(frozen=True)
class ObservationReport:
    runs: int
    alpha: tuple[int, ...]
    counts: dict[int, int]
    distance: float | None
    null_mean: float | None
    null_std: float | None
    band: float | None

    @property
    def defined(self) -> bool:
        return self.distance is not None

    @property
    def within_band(self) -> bool | None:
        return None if self.distance is None else self.distance <= self.band

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "alpha": list(self.alpha),
            "counts": {str(m): c for m, c in sorted(self.counts.items())},
            "distance": self.distance,
            "null_mean": self.null_mean,
            "null_std": self.null_std,
            "band": self.band,
            "defined": self.defined,
            "within_band": self.within_band,
        }


def _max_tv(bins: np.ndarray, labels: np.ndarray, n_labels: int, n_bins: int) -> float:
    """Largest pairwise TV distance over label pairs and feature columns.

    ``bins`` is ``runs x features``; each column is histogrammed separately.
    """
    best = 0.0
    for col in bins.T:
        hist = np.zeros((n_labels, n_bins))
        np.add.at(hist, (labels, col), 1.0)
        totals = hist.sum(axis=1)
        present = totals > 0
        dists = hist[present] / totals[present, None]
        for a, b in itertools.combinations(range(len(dists)), 2):
            best = max(best, 0.5 * float(np.abs(dists[a] - dists[b]).sum()))
    return best


def observe(
    runs: int,
    scheme: Scheme,
    alpha: Sequence[int],
    rng: np.random.Generator,
    *,
    bins: int = 64,
    permutations: int = 200,
    transport: str = "inproc",
) -> ObservationReport:
    """Empirical check that the ``alpha`` view does not depend on ``M``.

    Runs ``runs`` sessions with ``M`` uniform over ``1..N``, hashes each
    observed query tuple (and, separately, each observed query vector) into
    ``bins`` buckets and reports the largest pairwise total-variation
    distance between the per-``M`` histograms of any of these features.  The
    reference band is the mean plus three standard deviations of the same
    statistic under random relabelling of ``M``, i.e. for identical
    distributions at the same sample sizes.
    """
    alpha = tuple(sorted(set(int(k) for k in alpha)))
    if not any(set(alpha) <= set(s) for s in scheme.phi):
        raise ParameterError(f"{list(alpha)} is not covered by the collusion pattern")
    N = scheme.params.N
    if runs <= 0:
        return ObservationReport(0, alpha, {}, None, None, None, None)
    observer = Observer(alpha, scheme.params.q)
    labels = rng.integers(1, N + 1, size=runs)
    with Cluster(scheme, transport, unsafe=True) as cluster:
        cluster.attach(observer)
        cluster.store(random_records(scheme, rng))
        for M in labels:
            cluster.retrieve(int(M), rng, decode=None)
    if len(observer.log.runs) != runs:
        raise SessionError("observer missed some query frames")
    hashed = np.array(
        [
            [int.from_bytes(d[:8], "big") % bins for d in observer.digests(r)]
            for r in observer.log.runs
        ]
    )
    idx = labels - 1
    distance = _max_tv(hashed, idx, N, bins)
    null = np.array(
        [_max_tv(hashed, rng.permutation(idx), N, bins) for _ in range(permutations)]
    )
    mean, std = float(null.mean()), float(null.std(ddof=1)) if permutations > 1 else 0.0
    counts = {m: int((labels == m).sum()) for m in range(1, N + 1)}
    return ObservationReport(runs, alpha, counts, distance, mean, std, mean + 3 * std)
