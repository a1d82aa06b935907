"""Time-stamped lockstep message service linking simulator, controllers and observers."""

from .messages import (
    MessageType,
    ProtocolError,
    WireMessage,
    decode,
    encode,
)
from .service import ServiceConfig, SimulationService
from .client import InProcTransport, LockstepClient, TcpTransport

__all__ = [
    "MessageType",
    "ProtocolError",
    "WireMessage",
    "decode",
    "encode",
    "ServiceConfig",
    "SimulationService",
    "LockstepClient",
    "InProcTransport",
    "TcpTransport",
]
