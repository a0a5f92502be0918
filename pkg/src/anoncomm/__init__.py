"""Anonymous communication over parallel noiseless links with coded shared randomness."""

from .fp import FieldElement, Matrix, SymbolVector
from .info import DEFAULT_MAX_STATES, DistTable, StateSpaceTooLarge
from .protocol import (
    Dealer,
    DesireFlag,
    Message,
    SchemeParams,
    Seed,
    Share,
    Transcript,
    deal,
    decode,
    encode,
    metrics,
    run_round,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MAX_STATES",
    "Dealer",
    "DesireFlag",
    "DistTable",
    "FieldElement",
    "Matrix",
    "Message",
    "SchemeParams",
    "Seed",
    "Share",
    "StateSpaceTooLarge",
    "SymbolVector",
    "Transcript",
    "deal",
    "decode",
    "encode",
    "metrics",
    "run_round",
]
