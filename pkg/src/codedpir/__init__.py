"""Private information retrieval from linearly coded distributed storage.

The package covers exact GF(q) linear algebra, parity-check storage codes,
the randomized linear retrieval scheme, algebraic and brute-force
certification, two reference schemes, and a message-passing simulator.
"""

from .analysis import (
    CertificationReport,
    CostReport,
    brute_errorfree,
    brute_privacy,
    certify,
    check_privacy,
    check_prop1,
    check_prop2,
    check_retrievability,
    cost_report,
    tradeoff_bound,
)
from .errors import (
    DecodeError,
    EncodingError,
    EnumerationBudgetError,
    InfeasibleRegionError,
    ParameterError,
    PIRError,
    ProtocolError,
    RequestError,
    SchemeFileError,
    SessionError,
)
from .field import GF, FieldMatrix, rank
from .retrieval import (
    Decoder,
    RetrievalMatrix,
    Transcript,
    cyclic_v,
    decode,
    gen_queries,
    random_v,
    respond,
    retrieval_cost,
)
from .scheme import CollusionPattern, Scheme
from .storage import (
    ParityCheck,
    RecordMatrix,
    SystemParams,
    encode_record,
    make_mds_parity,
    make_uncoded_parity,
    storage_cost,
    store,
)

__version__ = "0.1.0"

__all__ = [
    "GF",
    "CertificationReport",
    "CollusionPattern",
    "CostReport",
    "DecodeError",
    "Decoder",
    "EncodingError",
    "EnumerationBudgetError",
    "FieldMatrix",
    "InfeasibleRegionError",
    "PIRError",
    "ParameterError",
    "ParityCheck",
    "ProtocolError",
    "RecordMatrix",
    "RequestError",
    "RetrievalMatrix",
    "Scheme",
    "SchemeFileError",
    "SessionError",
    "SystemParams",
    "Transcript",
    "brute_errorfree",
    "brute_privacy",
    "certify",
    "check_privacy",
    "check_prop1",
    "check_prop2",
    "check_retrievability",
    "cost_report",
    "cyclic_v",
    "decode",
    "encode_record",
    "gen_queries",
    "make_mds_parity",
    "make_uncoded_parity",
    "random_v",
    "rank",
    "respond",
    "retrieval_cost",
    "storage_cost",
    "store",
    "tradeoff_bound",
]
