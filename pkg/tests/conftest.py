import random

import pytest

from motkip import crypto, keymix
from motkip.session import Clock, KeyMaterial, SecurityAssociation

STA = bytes.fromhex("020000000001")
DST = bytes.fromhex("020000000002")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Touch every compiled kernel once so JIT cost never lands in a timed test."""
    crypto.rc4_apply(b"warmup", b"warmup")
    crypto.michael(bytes(8), b"warmup")
    crypto.crc32_icv(b"warmup")
    p1k = keymix.phase1(bytes(16), STA, 0)
    keymix.phase2(p1k, bytes(16), 0)


@pytest.fixture
def keys():
    rng = random.Random(0xFEED)
    return KeyMaterial(
        tk=rng.randbytes(16),
        mic_tx=rng.randbytes(8),
        mic_rx=rng.randbytes(8),
        ks=rng.randbytes(6),
        wep_key=rng.randbytes(13),
    )


@pytest.fixture
def sa_pair(keys):
    """Transmitter and receiver associations sharing one clock."""

    def make(key_material=None, **kwargs):
        km = key_material if key_material is not None else keys
        clock = Clock()
        tx = SecurityAssociation("transmitter", km, ta=STA, clock=clock, **kwargs)
        rx = SecurityAssociation("receiver", km, ta=STA, clock=clock, **kwargs)
        return tx, rx

    return make
