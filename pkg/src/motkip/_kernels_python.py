"""Pure-Python kernel implementations.

Fallback path used when numba is unavailable or disabled via the
``MOTKIP_NO_NUMBA`` environment variable.  Signatures and results are
byte-identical to :mod:`motkip._kernels_numba`; only throughput differs.
Hot loops run over plain Python lists, which beats per-element numpy
indexing by a wide margin.
"""

from __future__ import annotations

import numpy as np

_M16 = 0xFFFF
_M32 = 0xFFFFFFFF


def rc4_ksa(key: np.ndarray) -> np.ndarray:
    s = list(range(256))
    j = 0
    klen = len(key)
    kb = key.tolist()
    for i in range(256):
        j = (j + s[i] + kb[i % klen]) & 0xFF
        s[i], s[j] = s[j], s[i]
    return np.array(s, dtype=np.uint8)


def rc4_xor(s: np.ndarray, i: int, j: int, data: np.ndarray, out: np.ndarray) -> tuple[int, int]:
    sl = s.tolist()
    db = data.tolist()
    res = bytearray(len(db))
    for n, byte in enumerate(db):
        i = (i + 1) & 0xFF
        j = (j + sl[i]) & 0xFF
        sl[i], sl[j] = sl[j], sl[i]
        res[n] = byte ^ sl[(sl[i] + sl[j]) & 0xFF]
    s[:] = sl
    out[:] = np.frombuffer(bytes(res), dtype=np.uint8)
    return i, j


def _michael_block(l: int, r: int) -> tuple[int, int]:
    r ^= ((l << 17) | (l >> 15)) & _M32
    l = (l + r) & _M32
    r ^= ((l & 0xFF00FF00) >> 8) | ((l & 0x00FF00FF) << 8)
    l = (l + r) & _M32
    r ^= ((l << 3) | (l >> 29)) & _M32
    l = (l + r) & _M32
    r ^= ((l >> 2) | (l << 30)) & _M32
    l = (l + r) & _M32
    return l, r


def michael_core(l: int, r: int, data: np.ndarray) -> tuple[int, int]:
    buf = data.tobytes()
    full = len(buf) - (len(buf) % 4)
    for off in range(0, full, 4):
        l ^= int.from_bytes(buf[off : off + 4], "little")
        l, r = _michael_block(l, r)
    # trailing 0..3 octets, then 0x5a, then zeros; one zero word always follows
    val = 0x5A
    for byte in reversed(buf[full:]):
        val = (val << 8) | byte
    l ^= val
    l, r = _michael_block(l, r)
    l, r = _michael_block(l, r)
    return l, r


def _sbox16(v: int, sbox: list[int]) -> int:
    hi = sbox[(v >> 8) & 0xFF]
    return sbox[v & 0xFF] ^ (((hi << 8) | (hi >> 8)) & _M16)


def phase1_mix(tk: np.ndarray, ta: np.ndarray, iv32: int, sbox: np.ndarray) -> np.ndarray:
    tkl = tk.tolist()
    tal = ta.tolist()
    sb = sbox.tolist()
    p = [
        iv32 & _M16,
        (iv32 >> 16) & _M16,
        tal[0] | (tal[1] << 8),
        tal[2] | (tal[3] << 8),
        tal[4] | (tal[5] << 8),
    ]
    for i in range(8):
        j = 2 * (i & 1)
        p[0] = (p[0] + _sbox16(p[4] ^ (tkl[0 + j] | (tkl[1 + j] << 8)), sb)) & _M16
        p[1] = (p[1] + _sbox16(p[0] ^ (tkl[4 + j] | (tkl[5 + j] << 8)), sb)) & _M16
        p[2] = (p[2] + _sbox16(p[1] ^ (tkl[8 + j] | (tkl[9 + j] << 8)), sb)) & _M16
        p[3] = (p[3] + _sbox16(p[2] ^ (tkl[12 + j] | (tkl[13 + j] << 8)), sb)) & _M16
        p[4] = (p[4] + _sbox16(p[3] ^ (tkl[0 + j] | (tkl[1 + j] << 8)), sb) + i) & _M16
    return np.array(p, dtype=np.uint16)


def phase2_mix(p1k: np.ndarray, tk: np.ndarray, iv16: int, sbox: np.ndarray) -> np.ndarray:
    tkl = tk.tolist()
    sb = sbox.tolist()

    def tk16(i: int) -> int:
        return tkl[2 * i] | (tkl[2 * i + 1] << 8)

    ppk = p1k.tolist()
    ppk.append((ppk[4] + iv16) & _M16)

    ppk[0] = (ppk[0] + _sbox16(ppk[5] ^ tk16(0), sb)) & _M16
    ppk[1] = (ppk[1] + _sbox16(ppk[0] ^ tk16(1), sb)) & _M16
    ppk[2] = (ppk[2] + _sbox16(ppk[1] ^ tk16(2), sb)) & _M16
    ppk[3] = (ppk[3] + _sbox16(ppk[2] ^ tk16(3), sb)) & _M16
    ppk[4] = (ppk[4] + _sbox16(ppk[3] ^ tk16(4), sb)) & _M16
    ppk[5] = (ppk[5] + _sbox16(ppk[4] ^ tk16(5), sb)) & _M16

    ppk[0] = (ppk[0] + (((ppk[5] ^ tk16(6)) >> 1) | ((ppk[5] ^ tk16(6)) << 15))) & _M16
    ppk[1] = (ppk[1] + (((ppk[0] ^ tk16(7)) >> 1) | ((ppk[0] ^ tk16(7)) << 15))) & _M16
    ppk[2] = (ppk[2] + ((ppk[1] >> 1) | (ppk[1] << 15))) & _M16
    ppk[3] = (ppk[3] + ((ppk[2] >> 1) | (ppk[2] << 15))) & _M16
    ppk[4] = (ppk[4] + ((ppk[3] >> 1) | (ppk[3] << 15))) & _M16
    ppk[5] = (ppk[5] + ((ppk[4] >> 1) | (ppk[4] << 15))) & _M16

    seed = bytearray(16)
    seed[0] = (iv16 >> 8) & 0xFF
    seed[1] = ((iv16 >> 8) | 0x20) & 0x7F
    seed[2] = iv16 & 0xFF
    seed[3] = ((ppk[5] ^ tk16(7)) >> 1) & 0xFF
    for i in range(6):
        seed[4 + 2 * i] = ppk[i] & 0xFF
        seed[5 + 2 * i] = (ppk[i] >> 8) & 0xFF
    return np.frombuffer(bytes(seed), dtype=np.uint8)
