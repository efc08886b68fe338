"""Exception classes shared across the codec, session and CLI layers.

Decapsulation failures are deliberately split into distinct classes because
the protocol reacts differently to each: only :class:`MicFailure` feeds the
countermeasure state machine, replay and integrity rejections are counted
separately, and the CLI maps the classes to distinct exit codes.
"""


class MotkipError(Exception):
    """Base class for all package errors."""


class InvalidKeyLength(MotkipError):
    """A key octet-string has an unsupported length."""


class MalformedFrame(MotkipError):
    """Frame too short, bad magic, or reserved header bits violated."""


class ReservedBitsSet(MalformedFrame):
    """A flag octet carries nonzero reserved bits."""


class IcvMismatch(MotkipError):
    """Per-MPDU CRC-32 integrity check failed after decryption."""


class MicFailure(MotkipError):
    """Per-MSDU Michael check failed; the only error feeding countermeasures."""


class ReplayDetected(MotkipError):
    """Packet counter already seen or too far behind the newest accepted."""


class EpochMismatch(MotkipError):
    """Short-header frame arrived but the receiver holds no counter epoch."""


class TscExhausted(MotkipError):
    """The 48-bit packet counter space is spent for the current key."""


class Blackout(MotkipError):
    """Traffic suspended by the two-failures-per-minute countermeasure."""


class MissingFragment(MotkipError):
    """Reassembly finished with a gap in the fragment sequence."""


class DuplicateFragment(MotkipError):
    """The same fragment index arrived twice for one service data unit."""


class QueueFull(MotkipError):
    """The precomputed-seed queue is at capacity."""
