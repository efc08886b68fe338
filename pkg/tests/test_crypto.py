"""RC4, CRC-32 ICV and Michael against the reference oracles and frozen vectors."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motkip import crypto, vectordata
from motkip.errors import InvalidKeyLength

import oracles


class TestRc4:
    def test_frozen_vectors(self):
        assert vectordata.check_rc4() >= 10

    def test_published_keystream(self):
        # 40-bit key vector: first 16 keystream octets
        assert crypto.rc4_apply(bytes([1, 2, 3, 4, 5]), bytes(16)).hex() == (
            "b2396305f03dc027ccc3524a0a1118a8"
        )

    def test_state_is_permutation(self):
        state = crypto.rc4_init(bytes(16))
        assert sorted(state.s.tolist()) == list(range(256))
        state.crypt(b"x" * 999)
        assert sorted(state.s.tolist()) == list(range(256))

    def test_identical_keys_identical_states(self):
        a = crypto.rc4_init(b"same key")
        b = crypto.rc4_init(b"same key")
        assert a.s.tolist() == b.s.tolist() and (a.i, a.j) == (b.i, b.j)

    def test_key_length_bounds(self):
        with pytest.raises(InvalidKeyLength):
            crypto.rc4_init(b"")
        with pytest.raises(InvalidKeyLength):
            crypto.rc4_init(bytes(257))
        crypto.rc4_init(bytes(256))  # max length is fine

    def test_empty_data(self):
        assert crypto.rc4_apply(b"k", b"") == b""

    def test_incremental_equals_one_shot(self):
        rng = random.Random(1)
        data = rng.randbytes(4096)
        whole = crypto.rc4_apply(b"chunked", data)
        state = crypto.rc4_init(b"chunked")
        parts = b"".join(state.crypt(data[i : i + 111]) for i in range(0, len(data), 111))
        assert parts == whole

    def test_involution_fixed_cases(self):
        rng = random.Random(2)
        for _ in range(1000):
            key = rng.randbytes(rng.randrange(1, 64))
            data = rng.randbytes(rng.randrange(0, 256))
            assert crypto.rc4_apply(key, crypto.rc4_apply(key, data)) == data

    @settings(max_examples=60, deadline=None)
    @given(st.binary(min_size=1, max_size=64), st.binary(max_size=512))
    def test_involution_property(self, key, data):
        assert crypto.rc4_apply(key, crypto.rc4_apply(key, data)) == data

    def test_matches_oracle(self):
        rng = random.Random(3)
        for _ in range(300):
            key = rng.randbytes(rng.randrange(1, 48))
            data = rng.randbytes(rng.randrange(0, 300))
            assert crypto.rc4_apply(key, data) == oracles.ref_rc4(key, data)


class TestCrc32:
    def test_frozen_vectors(self):
        assert vectordata.check_crc32() >= 10

    def test_check_value(self):
        assert crypto.crc32_value(b"123456789") == 0xCBF43926

    def test_empty(self):
        assert crypto.crc32_value(b"") == 0
        assert crypto.crc32_icv(b"") == bytes(4)

    def test_residue_constant(self):
        # appending the little-endian ICV drives the register to a constant
        rng = random.Random(4)
        residues = set()
        for _ in range(100):
            data = rng.randbytes(rng.randrange(0, 200))
            residues.add(crypto.crc32_value(data + crypto.crc32_icv(data)))
        assert len(residues) == 1

    def test_matches_bitwise_oracle(self):
        rng = random.Random(5)
        for _ in range(200):
            data = rng.randbytes(rng.randrange(0, 256))
            assert crypto.crc32_value(data) == oracles.ref_crc32(data)
            assert crypto.crc32_raw(data) == oracles.ref_crc32_raw(data)

    @settings(max_examples=60, deadline=None)
    @given(st.binary(max_size=256), st.binary(max_size=256))
    def test_raw_register_linearity(self, a, b):
        n = min(len(a), len(b))
        a, b = a[:n], b[:n]
        xored = bytes(x ^ y for x, y in zip(a, b))
        assert crypto.crc32_raw(xored) == crypto.crc32_raw(a) ^ crypto.crc32_raw(b)


class TestMichael:
    def test_frozen_vectors(self):
        assert vectordata.check_michael() >= 10

    def test_reference_chain(self):
        # chained table: each MIC keys the next entry
        mic = crypto.michael(bytes(8), b"")
        assert mic.hex() == "82925c1ca1d130b8"
        for message, expect in [
            (b"M", "434721ca40639b3f"),
            (b"Mi", "e8f9becae97e5d29"),
            (b"Mic", "90038fc6cf13c1db"),
            (b"Mich", "d55e100510128986"),
            (b"Michael", "0a942b124ecaa546"),
        ]:
            mic = crypto.michael(mic, message)
            assert mic.hex() == expect

    def test_deterministic(self):
        key, msg = b"8octets!", b"same message"
        assert crypto.michael(key, msg) == crypto.michael(key, msg)

    def test_key_length(self):
        with pytest.raises(InvalidKeyLength):
            crypto.michael(b"short", b"")

    def test_padding_boundaries_match_oracle(self):
        # every residue class of the 0x5a+zeros padding rule
        key = bytes.fromhex("0123456789abcdef")
        for n in range(16):
            msg = bytes(range(n))
            assert crypto.michael(key, msg) == oracles.ref_michael(key, msg)

    def test_padded_prefix_collisions_only_by_construction(self):
        # messages agreeing after padding must agree on the padded words: a
        # message that pre-builds another's padding yields a different MIC
        # because the terminating word rule shifts
        key = bytes(8)
        assert crypto.michael(key, b"ab") != crypto.michael(key, b"ab\x5a")
        assert crypto.michael(key, b"") != crypto.michael(key, b"\x5a")

    def test_matches_oracle(self):
        rng = random.Random(6)
        for _ in range(300):
            key = rng.randbytes(8)
            msg = rng.randbytes(rng.randrange(0, 200))
            assert crypto.michael(key, msg) == oracles.ref_michael(key, msg)
