"""Numba-compiled kernel implementations.

These carry the hot byte loops: RC4 key scheduling and keystream XOR,
the Michael block absorption, and the two-phase per-packet key mixing.
Results are byte-identical to :mod:`motkip._kernels_python`; the
``cache=True`` flag persists compiled code across processes so the JIT
cost is paid once per machine.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_M16 = 0xFFFF
_M32 = 0xFFFFFFFF


@njit(cache=True, nogil=True)
def rc4_ksa(key):
    s = np.empty(256, dtype=np.uint8)
    for i in range(256):
        s[i] = i
    j = 0
    klen = key.shape[0]
    for i in range(256):
        j = (j + s[i] + key[i % klen]) & 0xFF
        s[i], s[j] = s[j], s[i]
    return s


@njit(cache=True, nogil=True)
def rc4_xor(s, i, j, data, out):
    for n in range(data.shape[0]):
        i = (i + 1) & 0xFF
        j = (j + s[i]) & 0xFF
        tmp = s[i]
        s[i] = s[j]
        s[j] = tmp
        out[n] = data[n] ^ s[(int(s[i]) + int(s[j])) & 0xFF]
    return i, j


@njit(cache=True, nogil=True)
def _michael_block(l, r):
    r ^= ((l << 17) | (l >> 15)) & _M32
    l = (l + r) & _M32
    r ^= ((l & 0xFF00FF00) >> 8) | ((l & 0x00FF00FF) << 8)
    l = (l + r) & _M32
    r ^= ((l << 3) | (l >> 29)) & _M32
    l = (l + r) & _M32
    r ^= ((l >> 2) | (l << 30)) & _M32
    l = (l + r) & _M32
    return l, r


@njit(cache=True, nogil=True)
def michael_core(l, r, data):
    n = data.shape[0]
    full = n - (n % 4)
    for off in range(0, full, 4):
        word = (
            int(data[off])
            | (int(data[off + 1]) << 8)
            | (int(data[off + 2]) << 16)
            | (int(data[off + 3]) << 24)
        )
        l, r = _michael_block(l ^ word, r)
    val = 0x5A
    for k in range(n - 1, full - 1, -1):
        val = (val << 8) | int(data[k])
    l, r = _michael_block(l ^ val, r)
    l, r = _michael_block(l, r)
    return l, r


@njit(cache=True, nogil=True, inline="always")
def _sbox16(v, sbox):
    # sbox is an int64 table so every product of the mixing stays int64;
    # unsigned/signed mixing would push numba's unifier to float64
    lo = sbox[v & 0xFF]
    hi = sbox[(v >> 8) & 0xFF]
    return lo ^ (((hi << 8) | (hi >> 8)) & _M16)


@njit(cache=True, nogil=True)
def phase1_mix(tk_u8, ta_u8, iv32, sbox):
    tk = tk_u8.astype(np.int64)
    ta = ta_u8.astype(np.int64)
    p = np.empty(5, dtype=np.uint16)
    p0 = iv32 & _M16
    p1 = (iv32 >> 16) & _M16
    p2 = ta[0] | (ta[1] << 8)
    p3 = ta[2] | (ta[3] << 8)
    p4 = ta[4] | (ta[5] << 8)
    for i in range(8):
        j = 2 * (i & 1)
        p0 = (p0 + _sbox16(p4 ^ (tk[0 + j] | (tk[1 + j] << 8)), sbox)) & _M16
        p1 = (p1 + _sbox16(p0 ^ (tk[4 + j] | (tk[5 + j] << 8)), sbox)) & _M16
        p2 = (p2 + _sbox16(p1 ^ (tk[8 + j] | (tk[9 + j] << 8)), sbox)) & _M16
        p3 = (p3 + _sbox16(p2 ^ (tk[12 + j] | (tk[13 + j] << 8)), sbox)) & _M16
        p4 = (p4 + _sbox16(p3 ^ (tk[0 + j] | (tk[1 + j] << 8)), sbox) + i) & _M16
    p[0] = p0
    p[1] = p1
    p[2] = p2
    p[3] = p3
    p[4] = p4
    return p


@njit(cache=True, nogil=True, inline="always")
def _rotr1(v):
    return ((v >> 1) | (v << 15)) & _M16


@njit(cache=True, nogil=True)
def phase2_mix(p1k_u16, tk_u8, iv16, sbox):
    tk = tk_u8.astype(np.int64)
    p1k = p1k_u16.astype(np.int64)
    t0 = tk[0] | (tk[1] << 8)
    t1 = tk[2] | (tk[3] << 8)
    t2 = tk[4] | (tk[5] << 8)
    t3 = tk[6] | (tk[7] << 8)
    t4 = tk[8] | (tk[9] << 8)
    t5 = tk[10] | (tk[11] << 8)
    t6 = tk[12] | (tk[13] << 8)
    t7 = tk[14] | (tk[15] << 8)

    k0 = p1k[0]
    k1 = p1k[1]
    k2 = p1k[2]
    k3 = p1k[3]
    k4 = p1k[4]
    k5 = (k4 + iv16) & _M16

    k0 = (k0 + _sbox16(k5 ^ t0, sbox)) & _M16
    k1 = (k1 + _sbox16(k0 ^ t1, sbox)) & _M16
    k2 = (k2 + _sbox16(k1 ^ t2, sbox)) & _M16
    k3 = (k3 + _sbox16(k2 ^ t3, sbox)) & _M16
    k4 = (k4 + _sbox16(k3 ^ t4, sbox)) & _M16
    k5 = (k5 + _sbox16(k4 ^ t5, sbox)) & _M16

    k0 = (k0 + _rotr1(k5 ^ t6)) & _M16
    k1 = (k1 + _rotr1(k0 ^ t7)) & _M16
    k2 = (k2 + _rotr1(k1)) & _M16
    k3 = (k3 + _rotr1(k2)) & _M16
    k4 = (k4 + _rotr1(k3)) & _M16
    k5 = (k5 + _rotr1(k4)) & _M16

    seed = np.empty(16, dtype=np.uint8)
    seed[0] = (iv16 >> 8) & 0xFF
    seed[1] = ((iv16 >> 8) | 0x20) & 0x7F
    seed[2] = iv16 & 0xFF
    seed[3] = ((k5 ^ t7) >> 1) & 0xFF
    ks = (k0, k1, k2, k3, k4, k5)
    for i in range(6):
        seed[4 + 2 * i] = ks[i] & 0xFF
        seed[5 + 2 * i] = (ks[i] >> 8) & 0xFF
    return seed
