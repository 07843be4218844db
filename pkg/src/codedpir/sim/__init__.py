"""Message-passing simulation of the retrieval protocol."""

from .session import (
    Cluster,
    ObservationReport,
    ObservedRun,
    Observer,
    ObserverLog,
    observe,
    random_records,
    run_session,
)
from .transport import InProcessTransport, SocketTransport, StorageNode, make_transport
from .wire import Kind, WireMessage, decode_frame, encode_frame, error_frame, read_frame

__all__ = [
    "Cluster",
    "InProcessTransport",
    "Kind",
    "ObservationReport",
    "ObservedRun",
    "Observer",
    "ObserverLog",
    "SocketTransport",
    "StorageNode",
    "WireMessage",
    "decode_frame",
    "encode_frame",
    "error_frame",
    "make_transport",
    "observe",
    "random_records",
    "read_frame",
    "run_session",
]
