"""Actor-based simulation of the scheme over in-process or TCP transports."""

from .actors import RandomSource, ScriptedSource
from .harness import (
    AuditLogError,
    ChiSquare,
    ReceiverView,
    RoundLog,
    SimulationLog,
    chi_square_screen,
    read_jsonl,
    receiver_view_dump,
    run_simulation,
    write_jsonl,
)
from .transport import TrafficAudit
from .wire import MsgType, ProtocolError, WireMessage

__all__ = [
    "AuditLogError",
    "ChiSquare",
    "MsgType",
    "ProtocolError",
    "RandomSource",
    "ReceiverView",
    "RoundLog",
    "ScriptedSource",
    "SimulationLog",
    "TrafficAudit",
    "WireMessage",
    "chi_square_screen",
    "read_jsonl",
    "receiver_view_dump",
    "run_simulation",
    "write_jsonl",
]
