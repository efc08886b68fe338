#!/usr/bin/env python3
"""Regenerate the packaged test-vector files.

The values come from the reference transcriptions in tests/oracles.py
(which were checked against published vectors and an independent RC4
implementation before anything in src/ existed).  The generated files are
frozen inputs for the unit tests, ``motkip keymix --check`` and
``motkip selftest``; regeneration must be a no-op unless the oracles
themselves change.

Usage: python scripts/gen_vectors.py
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

OUT_DIR = ROOT / "src" / "motkip" / "vectors"

BANNER = "# generated by scripts/gen_vectors.py -- do not edit\n"


def write(name: str, lines: list[str]) -> None:
    path = OUT_DIR / name
    path.write_text(BANNER + "\n".join(lines) + "\n")
    print(f"wrote {path} ({len(lines)} entries)")


def gen_rc4() -> None:
    rng = random.Random(0x52C4)
    lines = ["# format: NAME key=<hex> msg=<hex> out=<hex>"]

    def add(name: str, key: bytes, msg: bytes) -> None:
        lines.append(f"{name} key={key.hex()} msg={msg.hex()} out={oracles.ref_rc4(key, msg).hex()}")

    add("rc4_40bit_keystream", bytes([1, 2, 3, 4, 5]), bytes(16))
    add("rc4_key_plaintext", b"Key", b"Plaintext")
    add("rc4_wiki_pedia", b"Wiki", b"pedia")
    add("rc4_secret_dawn", b"Secret", b"Attack at dawn")
    add("rc4_max_key", bytes(range(256)), b"max-length key schedule")
    for i in range(6):
        key = rng.randbytes(rng.choice([5, 13, 16, 32]))
        msg = rng.randbytes(rng.randrange(0, 64))
        add(f"rc4_gen{i}", key, msg)
    write("rc4.txt", lines)


def gen_crc32() -> None:
    rng = random.Random(0xC3C3)
    lines = ["# format: NAME key= msg=<hex> out=<hex little-endian ICV>"]

    def add(name: str, msg: bytes) -> None:
        icv = oracles.ref_crc32(msg).to_bytes(4, "little")
        lines.append(f"{name} key= msg={msg.hex()} out={icv.hex()}")

    add("crc_check_value", b"123456789")
    add("crc_empty", b"")
    add("crc_zero_octet", b"\x00")
    add("crc_ff_run", b"\xff" * 32)
    for i in range(6):
        add(f"crc_gen{i}", rng.randbytes(rng.randrange(1, 128)))
    write("crc32.txt", lines)


def gen_michael() -> None:
    rng = random.Random(0x3C1A)
    lines = ["# format: NAME key=<hex> msg=<hex> out=<hex>"]

    def add(name: str, key: bytes, msg: bytes) -> bytes:
        mic = oracles.ref_michael(key, msg)
        lines.append(f"{name} key={key.hex()} msg={msg.hex()} out={mic.hex()}")
        return mic

    # the chained reference table: each key is the previous MIC
    mic = add("michael_empty", bytes(8), b"")
    for label in (b"M", b"Mi", b"Mic", b"Mich", b"Michael"):
        mic = add(f"michael_{label.decode().lower()}", mic, label)
    for i in range(6):
        add(f"michael_gen{i}", rng.randbytes(8), rng.randbytes(rng.randrange(0, 40)))
    write("michael.txt", lines)


def gen_sbox() -> None:
    table = oracles.ref_tkip_sbox_table()
    lines = ["# format: TBL key= msg=<index hex> out=<table entry hex>",
             "#         SBOX key= msg=<word hex> out=<substituted word hex>"]
    for i, entry in enumerate(table):
        lines.append(f"TBL key= msg={i:02x} out={entry:04x}")
    for w in list(range(0, 0x10000, 0x777)) + [0x0000, 0xFFFF, 0x1234]:
        lines.append(f"SBOX key= msg={w:04x} out={oracles.ref_sbox(w):04x}")
    write("sbox.txt", lines)


def gen_keymix() -> None:
    rng = random.Random(0x1337)
    lines = [
        "# format: P1 tk=<32hex> ta=<12hex> iv32=<8hex> -> p1k=<20hex>",
        "#         P2 p1k=<20hex> tk=<32hex> iv16=<4hex> -> seed=<32hex>",
    ]

    def p1k_hex(p1k: list[int]) -> str:
        return b"".join(w.to_bytes(2, "little") for w in p1k).hex()

    def add_pair(tag: str, tk: bytes, ta: bytes, iv32: int, iv16: int) -> None:
        p1k = oracles.ref_phase1(tk, ta, iv32)
        seed = oracles.ref_phase2(p1k, tk, iv16)
        lines.append(f"P1 tk={tk.hex()} ta={ta.hex()} iv32={iv32:08x} -> p1k={p1k_hex(p1k)}")
        lines.append(f"P2 p1k={p1k_hex(p1k)} tk={tk.hex()} iv16={iv16:04x} -> seed={seed.hex()}")

    # the standard's counter-increment pair
    tk1 = bytes(range(16))
    ta1 = bytes.fromhex("102233445566")
    add_pair("tv1", tk1, ta1, 0x00000000, 0x0000)
    add_pair("tv2", tk1, ta1, 0x00000000, 0x0001)
    for _ in range(4):
        add_pair(
            "gen",
            rng.randbytes(16),
            rng.randbytes(6),
            rng.getrandbits(32),
            rng.getrandbits(16),
        )
    write("keymix.txt", lines)


def gen_wep() -> None:
    # frozen regression frames: header(iv||keyid) + RC4(iv||key, payload||ICV)
    rng = random.Random(0x0EF)
    lines = ["# format: NAME key=<iv3+key13 hex> msg=<payload hex> out=<header+body hex>"]
    for i in range(4):
        iv = rng.randbytes(3)
        key = rng.randbytes(13)
        payload = rng.randbytes(rng.randrange(8, 96))
        icv = oracles.ref_crc32(payload).to_bytes(4, "little")
        body = oracles.ref_rc4(iv + key, payload + icv)
        frame = iv + b"\x00" + body
        lines.append(f"wep_gen{i} key={(iv + key).hex()} msg={payload.hex()} out={frame.hex()}")
    write("wep.txt", lines)


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    gen_rc4()
    gen_crc32()
    gen_michael()
    gen_sbox()
    gen_keymix()
    gen_wep()


if __name__ == "__main__":
    main()
