from oblivion.simnet.bus import (
    DELIVERED,
    DROPPED,
    INJECTED,
    REPLAYED,
    TAMPERED,
    Bus,
    Envelope,
    Transcript,
)
from oblivion.simnet.leakage import LeakageReport, PlainBits, scan, state_digest

__all__ = [
    "Bus",
    "DELIVERED",
    "DROPPED",
    "Envelope",
    "INJECTED",
    "LeakageReport",
    "PlainBits",
    "REPLAYED",
    "TAMPERED",
    "Transcript",
    "scan",
    "state_digest",
]
