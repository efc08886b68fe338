"""Independent reference implementations used as test oracles.

Everything in this module is a direct, deliberately naive transcription of
the published algorithm descriptions (IEEE 802.11i reference pseudocode,
the RC4 cipher description, bitwise CRC-32 long division).  None of it
shares code with the package under test: the package uses table-driven
numpy/numba kernels, while these oracles use plain Python integers and
explicit loops.  The packaged vector files were generated from these
functions and cross-checked against published values before the kernels
were written; the tests then hold both sides to the frozen vectors.
"""

from __future__ import annotations


# ---------------------------------------------------------------------------
# RC4 (key-scheduling + PRGA, straight from the cipher description)
# ---------------------------------------------------------------------------

def ref_rc4_keystream(key: bytes, n: int) -> bytes:
    """First n keystream octets for the given key."""
    s = list(range(256))
    j = 0
    for i in range(256):
        j = (j + s[i] + key[i % len(key)]) % 256
        s[i], s[j] = s[j], s[i]
    out = []
    i = j = 0
    for _ in range(n):
        i = (i + 1) % 256
        j = (j + s[i]) % 256
        s[i], s[j] = s[j], s[i]
        out.append(s[(s[i] + s[j]) % 256])
    return bytes(out)


def ref_rc4(key: bytes, data: bytes) -> bytes:
    ks = ref_rc4_keystream(key, len(data))
    return bytes(a ^ b for a, b in zip(data, ks))


# ---------------------------------------------------------------------------
# CRC-32 (reflected, polynomial 0x04C11DB7) by bitwise long division
# ---------------------------------------------------------------------------

REFLECTED_POLY = 0xEDB88320  # bit-reversed 0x04C11DB7


def ref_crc32_register(data: bytes, init: int) -> int:
    """Raw shift-register CRC: no final complement, caller picks init."""
    reg = init
    for byte in data:
        reg ^= byte
        for _ in range(8):
            if reg & 1:
                reg = (reg >> 1) ^ REFLECTED_POLY
            else:
                reg >>= 1
    return reg


def ref_crc32(data: bytes) -> int:
    """Standard CRC-32 (init all-ones, final complement)."""
    return ref_crc32_register(data, 0xFFFFFFFF) ^ 0xFFFFFFFF


def ref_crc32_raw(data: bytes) -> int:
    """Linear part of CRC-32: zero init, no final complement."""
    return ref_crc32_register(data, 0)


# ---------------------------------------------------------------------------
# Michael MIC (IEEE 802.11i clause 8.3.2.4 pseudocode)
# ---------------------------------------------------------------------------

_M32 = 0xFFFFFFFF


def _rotl32(v: int, n: int) -> int:
    return ((v << n) | (v >> (32 - n))) & _M32


def _rotr32(v: int, n: int) -> int:
    return ((v >> n) | (v << (32 - n))) & _M32


def _xswap(v: int) -> int:
    return ((v & 0xFF00FF00) >> 8) | ((v & 0x00FF00FF) << 8)


def _michael_block(l: int, r: int) -> tuple[int, int]:
    r ^= _rotl32(l, 17)
    l = (l + r) & _M32
    r ^= _xswap(l)
    l = (l + r) & _M32
    r ^= _rotl32(l, 3)
    l = (l + r) & _M32
    r ^= _rotr32(l, 2)
    l = (l + r) & _M32
    return l, r


def ref_michael(key: bytes, message: bytes) -> bytes:
    """8-octet Michael MIC.

    The message is padded with a single 0x5A octet followed by 4 to 7 zero
    octets, bringing the padded length to the next multiple of four that
    leaves a full terminating zero word; the padded words are absorbed
    little-endian through the block function.
    """
    assert len(key) == 8
    zeros = 7 - (len(message) % 4)
    padded = message + b"\x5a" + b"\x00" * zeros
    assert len(padded) % 4 == 0
    l = int.from_bytes(key[0:4], "little")
    r = int.from_bytes(key[4:8], "little")
    for off in range(0, len(padded), 4):
        l ^= int.from_bytes(padded[off : off + 4], "little")
        l, r = _michael_block(l, r)
    return l.to_bytes(4, "little") + r.to_bytes(4, "little")


# ---------------------------------------------------------------------------
# TKIP S-box, rebuilt from first principles rather than transcribed.
#
# The 802.11i mixing S-box is the AES T-table pair: entry i of the first
# table is (2*SubBytes(i) << 8) | 3*SubBytes(i) with GF(2^8) products over
# the AES polynomial, and the second table is the octet swap of the first.
# Deriving it from the AES S-box construction (multiplicative inverse plus
# affine transform) gives a generation route that shares nothing with the
# literal table shipped in the package.
# ---------------------------------------------------------------------------

def _gf_mul(a: int, b: int) -> int:
    p = 0
    for _ in range(8):
        if b & 1:
            p ^= a
        hi = a & 0x80
        a = (a << 1) & 0xFF
        if hi:
            a ^= 0x1B
        b >>= 1
    return p


def ref_aes_sbox() -> list[int]:
    inv = [0] * 256
    for x in range(1, 256):
        for y in range(1, 256):
            if _gf_mul(x, y) == 1:
                inv[x] = y
                break
    sbox = []
    for x in range(256):
        b = inv[x]
        s = b
        for sh in (1, 2, 3, 4):
            s ^= ((b << sh) | (b >> (8 - sh))) & 0xFF
        sbox.append(s ^ 0x63)
    return sbox


def ref_tkip_sbox_table() -> list[int]:
    """First (lower) 256-entry 16-bit table of the TKIP S-box."""
    aes = ref_aes_sbox()
    table = []
    for s in aes:
        table.append((_gf_mul(s, 2) << 8) | _gf_mul(s, 3))
    return table


_TKIP_SBOX = None


def ref_sbox(v: int) -> int:
    """Full 16-bit TKIP substitution: lower table XOR swapped upper lookup."""
    global _TKIP_SBOX
    if _TKIP_SBOX is None:
        _TKIP_SBOX = ref_tkip_sbox_table()
    lo = _TKIP_SBOX[v & 0xFF]
    hi = _TKIP_SBOX[(v >> 8) & 0xFF]
    return lo ^ (((hi << 8) | (hi >> 8)) & 0xFFFF)


# ---------------------------------------------------------------------------
# TKIP per-packet key mixing (IEEE 802.11i clause 8.3.2.5.4 pseudocode)
# ---------------------------------------------------------------------------

def _mk16(hi: int, lo: int) -> int:
    return ((hi << 8) | lo) & 0xFFFF


def _tk16(tk: bytes, i: int) -> int:
    """16-bit little-endian word i of the temporal key."""
    return _mk16(tk[2 * i + 1], tk[2 * i])


def _rotr1(v: int) -> int:
    return ((v >> 1) | (v << 15)) & 0xFFFF


def ref_phase1(tk: bytes, ta: bytes, iv32: int) -> list[int]:
    assert len(tk) == 16 and len(ta) == 6
    p = [
        iv32 & 0xFFFF,
        (iv32 >> 16) & 0xFFFF,
        _mk16(ta[1], ta[0]),
        _mk16(ta[3], ta[2]),
        _mk16(ta[5], ta[4]),
    ]
    for i in range(8):
        j = 2 * (i & 1)
        p[0] = (p[0] + ref_sbox(p[4] ^ _mk16(tk[1 + j], tk[0 + j]))) & 0xFFFF
        p[1] = (p[1] + ref_sbox(p[0] ^ _mk16(tk[5 + j], tk[4 + j]))) & 0xFFFF
        p[2] = (p[2] + ref_sbox(p[1] ^ _mk16(tk[9 + j], tk[8 + j]))) & 0xFFFF
        p[3] = (p[3] + ref_sbox(p[2] ^ _mk16(tk[13 + j], tk[12 + j]))) & 0xFFFF
        p[4] = (p[4] + ref_sbox(p[3] ^ _mk16(tk[1 + j], tk[0 + j])) + i) & 0xFFFF
    return p


def ref_phase2(p1k: list[int], tk: bytes, iv16: int) -> bytes:
    assert len(p1k) == 5 and len(tk) == 16
    ppk = list(p1k) + [(p1k[4] + iv16) & 0xFFFF]

    ppk[0] = (ppk[0] + ref_sbox(ppk[5] ^ _tk16(tk, 0))) & 0xFFFF
    ppk[1] = (ppk[1] + ref_sbox(ppk[0] ^ _tk16(tk, 1))) & 0xFFFF
    ppk[2] = (ppk[2] + ref_sbox(ppk[1] ^ _tk16(tk, 2))) & 0xFFFF
    ppk[3] = (ppk[3] + ref_sbox(ppk[2] ^ _tk16(tk, 3))) & 0xFFFF
    ppk[4] = (ppk[4] + ref_sbox(ppk[3] ^ _tk16(tk, 4))) & 0xFFFF
    ppk[5] = (ppk[5] + ref_sbox(ppk[4] ^ _tk16(tk, 5))) & 0xFFFF

    ppk[0] = (ppk[0] + _rotr1(ppk[5] ^ _tk16(tk, 6))) & 0xFFFF
    ppk[1] = (ppk[1] + _rotr1(ppk[0] ^ _tk16(tk, 7))) & 0xFFFF
    ppk[2] = (ppk[2] + _rotr1(ppk[1])) & 0xFFFF
    ppk[3] = (ppk[3] + _rotr1(ppk[2])) & 0xFFFF
    ppk[4] = (ppk[4] + _rotr1(ppk[3])) & 0xFFFF
    ppk[5] = (ppk[5] + _rotr1(ppk[4])) & 0xFFFF

    seed = bytearray(16)
    seed[0] = (iv16 >> 8) & 0xFF
    seed[1] = ((iv16 >> 8) | 0x20) & 0x7F
    seed[2] = iv16 & 0xFF
    seed[3] = ((ppk[5] ^ _tk16(tk, 7)) >> 1) & 0xFF
    for i in range(6):
        seed[4 + 2 * i] = ppk[i] & 0xFF
        seed[5 + 2 * i] = (ppk[i] >> 8) & 0xFF
    return bytes(seed)
