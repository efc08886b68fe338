"""Loading and checking of the packaged hex vector files.

Files are line oriented; ``#`` starts a comment.  Crypto vectors use
``NAME key=<hex> msg=<hex> out=<hex>``; the key-mixing file uses
``P1 tk= ta= iv32= -> p1k=`` and ``P2 p1k= tk= iv16= -> seed=`` records.
The checkers recompute every entry with the shipped implementation and
raise :class:`VectorMismatch` naming the first failing entry, which is
what ``motkip selftest`` and ``motkip keymix --check`` report.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import crypto, keymix


class VectorMismatch(Exception):
    """A recorded vector no longer matches the implementation."""


@dataclass
class VectorEntry:
    name: str
    fields: dict[str, str]
    line_no: int


def packaged_vector_path(filename: str):
    return resources.files("motkip").joinpath("vectors", filename)


def _read_lines(source) -> list[tuple[int, str]]:
    if hasattr(source, "read_text"):
        text = source.read_text()
    else:
        text = Path(source).read_text()
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            out.append((no, line))
    return out


def parse_vector_file(source) -> list[VectorEntry]:
    entries = []
    for no, line in _read_lines(source):
        parts = line.replace("->", "").split()
        name, fields = parts[0], {}
        for part in parts[1:]:
            if "=" not in part:
                raise VectorMismatch(f"line {no}: malformed field {part!r}")
            k, _, v = part.partition("=")
            fields[k] = v
        entries.append(VectorEntry(name, fields, no))
    return entries


def _unhex(entry: VectorEntry, field: str) -> bytes:
    try:
        return bytes.fromhex(entry.fields[field])
    except (KeyError, ValueError) as exc:
        raise VectorMismatch(f"{entry.name} (line {entry.line_no}): bad {field} field") from exc


def _expect(entry: VectorEntry, got: bytes, want: bytes) -> None:
    if got != want:
        raise VectorMismatch(
            f"{entry.name} (line {entry.line_no}): got {got.hex()}, recorded {want.hex()}"
        )


def check_rc4(source=None) -> int:
    entries = parse_vector_file(source or packaged_vector_path("rc4.txt"))
    for e in entries:
        _expect(e, crypto.rc4_apply(_unhex(e, "key"), _unhex(e, "msg")), _unhex(e, "out"))
    return len(entries)


def check_crc32(source=None) -> int:
    entries = parse_vector_file(source or packaged_vector_path("crc32.txt"))
    for e in entries:
        _expect(e, crypto.crc32_icv(_unhex(e, "msg")), _unhex(e, "out"))
    return len(entries)


def check_michael(source=None) -> int:
    entries = parse_vector_file(source or packaged_vector_path("michael.txt"))
    for e in entries:
        _expect(e, crypto.michael(_unhex(e, "key"), _unhex(e, "msg")), _unhex(e, "out"))
    return len(entries)


def check_sbox(source=None) -> int:
    entries = parse_vector_file(source or packaged_vector_path("sbox.txt"))
    for e in entries:
        value = int(e.fields["msg"], 16)
        want = int(e.fields["out"], 16)
        if e.name == "TBL":
            got = keymix.TKIP_SBOX[value]
        else:
            got = keymix.sbox(value)
        if got != want:
            raise VectorMismatch(
                f"{e.name} {e.fields['msg']} (line {e.line_no}): got {got:04x}, recorded {want:04x}"
            )
    return len(entries)


def check_keymix(source=None) -> int:
    entries = parse_vector_file(source or packaged_vector_path("keymix.txt"))
    for e in entries:
        if e.name == "P1":
            p1k = keymix.phase1(_unhex(e, "tk"), _unhex(e, "ta"), int(e.fields["iv32"], 16))
            got = b"".join(w.to_bytes(2, "little") for w in p1k)
            _expect(e, got, _unhex(e, "p1k"))
        elif e.name == "P2":
            raw = _unhex(e, "p1k")
            p1k = tuple(int.from_bytes(raw[i : i + 2], "little") for i in range(0, 10, 2))
            got = keymix.phase2(p1k, _unhex(e, "tk"), int(e.fields["iv16"], 16))
            _expect(e, got, _unhex(e, "seed"))
        else:
            raise VectorMismatch(f"line {e.line_no}: unknown record {e.name!r}")
    return len(entries)


def check_wep(source=None) -> int:
    from .frames import wep_encap

    entries = parse_vector_file(source or packaged_vector_path("wep.txt"))
    for e in entries:
        blob = _unhex(e, "key")
        iv24 = int.from_bytes(blob[:3], "big")
        mpdu = wep_encap(blob[3:], iv24, _unhex(e, "msg"))
        _expect(e, mpdu.header + mpdu.body, _unhex(e, "out"))
    return len(entries)


ALL_CHECKS = {
    "rc4": check_rc4,
    "crc32": check_crc32,
    "michael": check_michael,
    "sbox": check_sbox,
    "keymix": check_keymix,
    "wep": check_wep,
}
