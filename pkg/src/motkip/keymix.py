"""Two-phase TKIP per-packet key mixing.

Phase 1 folds the transmitter address and the upper 32 counter bits into
the 128-bit temporal key, producing the 80-bit intermediate key that stays
constant for 65,536 consecutive packets.  Phase 2 folds in the lower 16
counter bits and emits the 16-octet RC4 seed whose first three octets are
the on-wire WEP IV; octet 1 carries the weak-key mask (bit 5 forced on,
bit 4 forced off).  Both phases follow the IEEE 802.11i reference
pseudocode; the substitution table below is that standard's S-box.

All operations are stateless and deterministic.  The :class:`P1kCache` is
mutable and belongs to one session; concurrent sessions use separate
caches.
"""

from __future__ import annotations

import hashlib
from collections import OrderedDict

import numpy as np

from . import _backend

TK_LEN = 16
TA_LEN = 6
P1K_WORDS = 5
SEED_LEN = 16

# fmt: off
TKIP_SBOX = (
    0xC6A5, 0xF884, 0xEE99, 0xF68D, 0xFF0D, 0xD6BD, 0xDEB1, 0x9154,
    0x6050, 0x0203, 0xCEA9, 0x567D, 0xE719, 0xB562, 0x4DE6, 0xEC9A,
    0x8F45, 0x1F9D, 0x8940, 0xFA87, 0xEF15, 0xB2EB, 0x8EC9, 0xFB0B,
    0x41EC, 0xB367, 0x5FFD, 0x45EA, 0x23BF, 0x53F7, 0xE496, 0x9B5B,
    0x75C2, 0xE11C, 0x3DAE, 0x4C6A, 0x6C5A, 0x7E41, 0xF502, 0x834F,
    0x685C, 0x51F4, 0xD134, 0xF908, 0xE293, 0xAB73, 0x6253, 0x2A3F,
    0x080C, 0x9552, 0x4665, 0x9D5E, 0x3028, 0x37A1, 0x0A0F, 0x2FB5,
    0x0E09, 0x2436, 0x1B9B, 0xDF3D, 0xCD26, 0x4E69, 0x7FCD, 0xEA9F,
    0x121B, 0x1D9E, 0x5874, 0x342E, 0x362D, 0xDCB2, 0xB4EE, 0x5BFB,
    0xA4F6, 0x764D, 0xB761, 0x7DCE, 0x527B, 0xDD3E, 0x5E71, 0x1397,
    0xA6F5, 0xB968, 0x0000, 0xC12C, 0x4060, 0xE31F, 0x79C8, 0xB6ED,
    0xD4BE, 0x8D46, 0x67D9, 0x724B, 0x94DE, 0x98D4, 0xB0E8, 0x854A,
    0xBB6B, 0xC52A, 0x4FE5, 0xED16, 0x86C5, 0x9AD7, 0x6655, 0x1194,
    0x8ACF, 0xE910, 0x0406, 0xFE81, 0xA0F0, 0x7844, 0x25BA, 0x4BE3,
    0xA2F3, 0x5DFE, 0x80C0, 0x058A, 0x3FAD, 0x21BC, 0x7048, 0xF104,
    0x63DF, 0x77C1, 0xAF75, 0x4263, 0x2030, 0xE51A, 0xFD0E, 0xBF6D,
    0x814C, 0x1814, 0x2635, 0xC32F, 0xBEE1, 0x35A2, 0x88CC, 0x2E39,
    0x9357, 0x55F2, 0xFC82, 0x7A47, 0xC8AC, 0xBAE7, 0x322B, 0xE695,
    0xC0A0, 0x1998, 0x9ED1, 0xA37F, 0x4466, 0x547E, 0x3BAB, 0x0B83,
    0x8CCA, 0xC729, 0x6BD3, 0x283C, 0xA779, 0xBCE2, 0x161D, 0xAD76,
    0xDB3B, 0x6456, 0x744E, 0x141E, 0x92DB, 0x0C0A, 0x486C, 0xB8E4,
    0x9F5D, 0xBD6E, 0x43EF, 0xC4A6, 0x39A8, 0x31A4, 0xD337, 0xF28B,
    0xD532, 0x8B43, 0x6E59, 0xDAB7, 0x018C, 0xB164, 0x9CD2, 0x49E0,
    0xD8B4, 0xACFA, 0xF307, 0xCF25, 0xCAAF, 0xF48E, 0x47E9, 0x1018,
    0x6FD5, 0xF088, 0x4A6F, 0x5C72, 0x3824, 0x57F1, 0x73C7, 0x9751,
    0xCB23, 0xA17C, 0xE89C, 0x3E21, 0x96DD, 0x61DC, 0x0D86, 0x0F85,
    0xE090, 0x7C42, 0x71C4, 0xCCAA, 0x90D8, 0x0605, 0xF701, 0x1C12,
    0xC2A3, 0x6A5F, 0xAEF9, 0x69D0, 0x1791, 0x9958, 0x3A27, 0x27B9,
    0xD938, 0xEB13, 0x2BB3, 0x2233, 0xD2BB, 0xA970, 0x0789, 0x33A7,
    0x2DB6, 0x3C22, 0x1592, 0xC920, 0x8749, 0xAAFF, 0x5078, 0xA57A,
    0x038F, 0x59F8, 0x0980, 0x1A17, 0x65DA, 0xD731, 0x84C6, 0xD0B8,
    0x82C3, 0x29B0, 0x5A77, 0x1E11, 0x7BCB, 0xA8FC, 0x6DD6, 0x2C3A,
)
# fmt: on

# int64 so the compiled kernels never mix signedness (see _kernels_numba)
_SBOX_ARR = np.array(TKIP_SBOX, dtype=np.int64)


def _check_tk(tk: bytes) -> None:
    if len(tk) != TK_LEN:
        raise ValueError(f"temporal key must be {TK_LEN} octets, got {len(tk)}")


def _check_ta(ta: bytes) -> None:
    if len(ta) != TA_LEN:
        raise ValueError(f"transmitter address must be {TA_LEN} octets, got {len(ta)}")


def mk16(x: int, y: int) -> int:
    """Combine two octets into a 16-bit word: 256*x + y."""
    return ((x & 0xFF) << 8) | (y & 0xFF)


def sbox(word: int) -> int:
    """16-bit substitution: lower-table lookup XOR octet-swapped upper lookup."""
    lo = TKIP_SBOX[word & 0xFF]
    hi = TKIP_SBOX[(word >> 8) & 0xFF]
    return lo ^ (((hi << 8) | (hi >> 8)) & 0xFFFF)


def phase1(tk: bytes, ta: bytes, iv32: int) -> tuple[int, int, int, int, int]:
    """80-bit intermediate key from (temporal key, transmitter address, iv32).

    Independent of the low 16 counter bits, so one result serves 2**16
    consecutive packets.
    """
    _check_tk(tk)
    _check_ta(ta)
    out = _backend.phase1_mix(
        np.frombuffer(tk, dtype=np.uint8),
        np.frombuffer(ta, dtype=np.uint8),
        iv32 & 0xFFFFFFFF,
        _SBOX_ARR,
    )
    return tuple(int(w) for w in out)  # type: ignore[return-value]


def phase2(p1k: tuple[int, ...], tk: bytes, iv16: int) -> bytes:
    """16-octet per-packet RC4 seed.

    seed[0] and seed[2] carry iv16 (high then low octet) and seed[1] is the
    weak-key-masked repeat of seed[0]; the remaining 13 octets are the
    per-packet base key.
    """
    _check_tk(tk)
    if len(p1k) != P1K_WORDS:
        raise ValueError(f"P1K must be {P1K_WORDS} words, got {len(p1k)}")
    out = _backend.phase2_mix(
        np.asarray(p1k, dtype=np.uint16),
        np.frombuffer(tk, dtype=np.uint8),
        iv16 & 0xFFFF,
        _SBOX_ARR,
    )
    return out.tobytes()


def tk_fingerprint(tk: bytes) -> bytes:
    """Opaque cache identifier for a temporal key (no key octets leak)."""
    return hashlib.sha256(b"motkip-tk" + tk).digest()[:8]


class P1kCache:
    """LRU cache of phase-1 results keyed by (key id, address, iv32).

    Capacity matches the handful of concurrent associations a station
    holds; one phase-1 computation then serves an entire 2**16-packet
    window.  ``computations`` counts actual phase-1 runs for the
    operation-count accounting.
    """

    def __init__(self, capacity: int = 16):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.computations = 0
        self._entries: OrderedDict[tuple[bytes, bytes, int], tuple[int, ...]] = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, tk: bytes, ta: bytes, iv32: int) -> tuple[int, int, int, int, int]:
        key = (tk_fingerprint(tk), ta, iv32)
        hit = self._entries.get(key)
        if hit is not None:
            self._entries.move_to_end(key)
            return hit  # type: ignore[return-value]
        value = phase1(tk, ta, iv32)
        self.computations += 1
        self._entries[key] = value
        if len(self._entries) > self.capacity:
            self._entries.popitem(last=False)
        return value

    def clear(self) -> None:
        self._entries.clear()
