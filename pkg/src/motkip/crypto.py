"""Cryptographic building blocks: RC4, the CRC-32 ICV, and the Michael MIC.

All three are pure functions of their inputs (the incremental
:class:`Rc4State` advances caller-owned state).  Distinct states and calls
may run concurrently; a single ``Rc4State`` must not be advanced from two
threads at once.

The CRC-32 here is the reflected variant (polynomial 0x04C11DB7, all-ones
init, final complement) serialized little-endian, as carried in WEP and
TKIP frame trailers.  Michael follows the IEEE 802.11i construction: the
message is padded with one 0x5A octet and 4..7 zero octets, absorbed as
little-endian 32-bit words through the swap/rotate/add block function,
and the two final words are emitted little-endian.
"""

from __future__ import annotations

import zlib

import numpy as np

from . import _backend
from .errors import InvalidKeyLength

ICV_LEN = 4
MIC_LEN = 8
MICHAEL_KEY_LEN = 8

_EMPTY = np.empty(0, dtype=np.uint8)


def _as_array(data: bytes) -> np.ndarray:
    if not data:
        return _EMPTY
    return np.frombuffer(data, dtype=np.uint8)


class Rc4State:
    """RC4 keystream state: a 256-octet permutation plus the two indices.

    Keystream generation is incremental, so arbitrarily large payloads can
    be processed in chunks without materializing the keystream.
    """

    __slots__ = ("s", "i", "j")

    def __init__(self, key: bytes):
        if not 1 <= len(key) <= 256:
            raise InvalidKeyLength(f"RC4 key must be 1..256 octets, got {len(key)}")
        self.s = _backend.rc4_ksa(_as_array(key))
        self.i = 0
        self.j = 0

    def crypt(self, data: bytes) -> bytes:
        """XOR ``data`` with the next ``len(data)`` keystream octets."""
        if not data:
            return b""
        out = np.empty(len(data), dtype=np.uint8)
        self.i, self.j = _backend.rc4_xor(self.s, self.i, self.j, _as_array(data), out)
        return out.tobytes()


def rc4_init(key: bytes) -> Rc4State:
    """Run the 256-step key schedule and return the fresh cipher state."""
    return Rc4State(key)


def rc4_apply(key: bytes, data: bytes) -> bytes:
    """One-shot RC4: equals encryption and decryption (XOR is an involution)."""
    return Rc4State(key).crypt(data)


def crc32_value(data: bytes) -> int:
    """Standard reflected CRC-32 as an integer."""
    return zlib.crc32(data) & 0xFFFFFFFF


def crc32_raw(data: bytes) -> int:
    """Raw shift-register CRC (zero init, no final complement).

    This is the GF(2)-linear part of CRC-32: ``raw(a ^ b) == raw(a) ^ raw(b)``
    for equal-length inputs.  Used by tests and by the forgery constructions
    that patch an ICV after flipping payload bits.
    """
    return (zlib.crc32(data, 0xFFFFFFFF) ^ 0xFFFFFFFF) & 0xFFFFFFFF


def crc32_icv(data: bytes) -> bytes:
    """4-octet little-endian ICV trailer protecting ``data``."""
    return crc32_value(data).to_bytes(4, "little")


def michael(key: bytes, message: bytes) -> bytes:
    """8-octet Michael MIC of ``message`` under the 64-bit ``key``."""
    if len(key) != MICHAEL_KEY_LEN:
        raise InvalidKeyLength(f"Michael key must be {MICHAEL_KEY_LEN} octets, got {len(key)}")
    l = int.from_bytes(key[0:4], "little")
    r = int.from_bytes(key[4:8], "little")
    l, r = _backend.michael_core(l, r, _as_array(message))
    return int(l).to_bytes(4, "little") + int(r).to_bytes(4, "little")
