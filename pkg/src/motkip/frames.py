"""Encapsulation and decapsulation of service data units into wire frames.

Four schemes share one MPDU container:

* ``plain``   — no header, no trailer.
* ``wep``     — 4-octet header (3 IV octets in transmit order + key octet),
  RC4(iv || key) over payload || ICV.
* ``tkip``    — 8-octet header ``[TSC1, (TSC1|0x20)&0x7F, TSC0,
  keyid|ExtIV, TSC2..TSC5]``; body RC4-encrypted with the two-phase
  per-packet seed; 8-octet Michael MIC over DA||SA||priority||zeros||payload
  appended to the MSDU before fragmentation; 4-octet ICV per fragment.
* ``motkip``  — same body encryption, but the MIC additionally covers the
  48-bit counter, and the header shrinks: the epoch-first frame carries
  ``[flags, TSC0..TSC5 each XOR ks, keyid, 0]`` (9 octets) and every
  subsequent frame carries ``[flags, TSC0, TSC1, keyid, 0]`` (5 octets),
  the receiver reconstructing the upper counter bits from its cached
  epoch.

Flag octet, bit i = Fi, F0 least significant: F0 ext-IV present, F1 same
upper-IV as cached, F2 lower-IV is unit increment of the previous frame,
F3 MSDU fragmented, F4 continuation fragment, F5..F7 reserved zero.

Every MPDU also carries a 16-octet stub (sequence number, fragment index,
fragment flags, DA, SA) standing in for the fields of the real MAC header
that the codec consumes; byte accounting charges the configurable
full-size MAC header instead, so the stub never shows up in overhead
numbers.

Check order on receive is fixed: parse, replay check, decrypt, ICV check,
then (only after reassembly) the MIC check.  The counters prove that no
Michael work happens for a frame rejected earlier in the chain.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

from .crypto import ICV_LEN, MIC_LEN, crc32_icv, rc4_apply
from . import crypto
from .errors import (
    DuplicateFragment,
    EpochMismatch,
    IcvMismatch,
    MalformedFrame,
    MicFailure,
    MissingFragment,
    ReplayDetected,
    ReservedBitsSet,
    TscExhausted,
)
from .keymix import phase1, phase2
from .session import KeyMaterial, OpCounters, SecurityAssociation, Tsc48

SCHEME_PLAIN = "plain"
SCHEME_WEP = "wep"
SCHEME_TKIP = "tkip"
SCHEME_MOTKIP_FIRST = "motkip-first"
SCHEME_MOTKIP_NEXT = "motkip-next"

FAMILY_PLAIN = "plain"
FAMILY_WEP = "wep"
FAMILY_TKIP = "tkip"
FAMILY_MOTKIP = "motkip"
FAMILIES = (FAMILY_PLAIN, FAMILY_WEP, FAMILY_TKIP, FAMILY_MOTKIP)

HEADER_LEN = {
    SCHEME_PLAIN: 0,
    SCHEME_WEP: 4,
    SCHEME_TKIP: 8,
    SCHEME_MOTKIP_FIRST: 9,
    SCHEME_MOTKIP_NEXT: 5,
}

# per-MPDU wire expansion: scheme header plus ICV trailer
EXPANSION = {
    SCHEME_PLAIN: 0,
    SCHEME_WEP: HEADER_LEN[SCHEME_WEP] + ICV_LEN,
    SCHEME_TKIP: HEADER_LEN[SCHEME_TKIP] + ICV_LEN,
    SCHEME_MOTKIP_FIRST: HEADER_LEN[SCHEME_MOTKIP_FIRST] + ICV_LEN,
    SCHEME_MOTKIP_NEXT: HEADER_LEN[SCHEME_MOTKIP_NEXT] + ICV_LEN,
}

MIC_PER_MSDU = {FAMILY_PLAIN: 0, FAMILY_WEP: 0, FAMILY_TKIP: MIC_LEN, FAMILY_MOTKIP: MIC_LEN}

MAX_MSDU_OCTETS = 4096
MAX_FRAGMENTS = 255
MIN_FRAGMENT = 16

EXT_IV_BIT = 0x20

_STUB = struct.Struct("<HBB6s6s")
STUB_LEN = _STUB.size

DUMP_MAGIC = b"MTKP"
DUMP_VERSION = 1
SCHEME_TAGS = {FAMILY_PLAIN: 0, FAMILY_WEP: 1, FAMILY_TKIP: 2, FAMILY_MOTKIP: 3}
_TAG_TO_FAMILY = {v: k for k, v in SCHEME_TAGS.items()}


def scheme_family(scheme: str) -> str:
    if scheme in (SCHEME_MOTKIP_FIRST, SCHEME_MOTKIP_NEXT, FAMILY_MOTKIP):
        return FAMILY_MOTKIP
    if scheme in FAMILIES:
        return scheme
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass
class Msdu:
    """Service data unit: addresses, reserved priority, payload."""

    da: bytes
    sa: bytes
    priority: int = 0
    payload: bytes = b""

    def __post_init__(self):
        if len(self.da) != 6 or len(self.sa) != 6:
            raise ValueError("addresses must be 6 octets")
        if self.priority != 0:
            raise ValueError("priority is reserved and must be 0")
        if len(self.payload) > MAX_MSDU_OCTETS:
            raise ValueError(f"payload exceeds {MAX_MSDU_OCTETS} octets")


@dataclass(frozen=True)
class FlagByte:
    """The MoTKIP status octet, decoded."""

    ext_iv: bool = False        # F0
    same_iv32: bool = False     # F1
    unit_increment: bool = False  # F2
    fragmented: bool = False    # F3
    continuation: bool = False  # F4

    def encode(self) -> int:
        return (
            (1 if self.ext_iv else 0)
            | (2 if self.same_iv32 else 0)
            | (4 if self.unit_increment else 0)
            | (8 if self.fragmented else 0)
            | (16 if self.continuation else 0)
        )

    @classmethod
    def decode(cls, octet: int) -> "FlagByte":
        if octet & 0xE0:
            raise ReservedBitsSet(f"reserved flag bits set: 0x{octet:02X}")
        return cls(
            ext_iv=bool(octet & 1),
            same_iv32=bool(octet & 2),
            unit_increment=bool(octet & 4),
            fragmented=bool(octet & 8),
            continuation=bool(octet & 16),
        )


@dataclass(frozen=True)
class Fragment:
    index: int
    more: bool
    data: bytes


def fragment(data: bytes, max_fragment: int) -> list[Fragment]:
    """Split ``data`` into indexed chunks of at most ``max_fragment`` octets."""
    if max_fragment < MIN_FRAGMENT:
        raise ValueError(f"max_fragment must be >= {MIN_FRAGMENT}")
    chunks = [data[i : i + max_fragment] for i in range(0, len(data), max_fragment)] or [b""]
    if len(chunks) > MAX_FRAGMENTS:
        raise ValueError("too many fragments for one MSDU")
    last = len(chunks) - 1
    return [Fragment(i, i != last, c) for i, c in enumerate(chunks)]


def reassemble(fragments: Iterable[Fragment]) -> bytes:
    """Concatenate fragments back into the original octets.

    Order-independent; raises on duplicate indices or an incomplete set.
    """
    by_index: dict[int, Fragment] = {}
    for frag in fragments:
        if frag.index in by_index:
            raise DuplicateFragment(f"fragment {frag.index} seen twice")
        by_index[frag.index] = frag
    if not by_index:
        raise MissingFragment("no fragments")
    count = len(by_index)
    if sorted(by_index) != list(range(count)):
        raise MissingFragment("gap in fragment indices")
    if by_index[count - 1].more or any(by_index[i].more is False for i in range(count - 1)):
        raise MissingFragment("final-fragment flags inconsistent")
    return b"".join(by_index[i].data for i in range(count))


@dataclass
class Mpdu:
    """One wire frame plus the MAC-stub fields the codec needs."""

    scheme: str
    da: bytes
    sa: bytes
    msdu_seq: int
    frag_index: int
    more_fragments: bool
    header: bytes
    body: bytes

    @property
    def wire_len(self) -> int:
        """Octets the scheme itself puts on the air (header + body)."""
        return len(self.header) + len(self.body)

    def pack(self) -> bytes:
        stub = _STUB.pack(
            self.msdu_seq, self.frag_index, 1 if self.more_fragments else 0, self.da, self.sa
        )
        return stub + self.header + self.body

    @classmethod
    def unpack(cls, family: str, data: bytes) -> "Mpdu":
        family = scheme_family(family)
        if len(data) < STUB_LEN:
            raise MalformedFrame("frame shorter than the MAC stub")
        seq, frag_index, fragflags, da, sa = _STUB.unpack_from(data)
        rest = data[STUB_LEN:]
        if family == FAMILY_PLAIN:
            scheme, hlen = SCHEME_PLAIN, 0
        elif family == FAMILY_WEP:
            scheme, hlen = SCHEME_WEP, HEADER_LEN[SCHEME_WEP]
        elif family == FAMILY_TKIP:
            scheme, hlen = SCHEME_TKIP, HEADER_LEN[SCHEME_TKIP]
        else:
            if not rest:
                raise MalformedFrame("missing flag octet")
            flags = FlagByte.decode(rest[0])
            scheme = SCHEME_MOTKIP_FIRST if flags.ext_iv else SCHEME_MOTKIP_NEXT
            hlen = HEADER_LEN[scheme]
        min_len = hlen + (ICV_LEN if family != FAMILY_PLAIN else 0)
        if len(rest) < min_len:
            raise MalformedFrame(f"{scheme} frame of {len(rest)} octets is too short")
        return cls(
            scheme=scheme,
            da=da,
            sa=sa,
            msdu_seq=seq,
            frag_index=frag_index,
            more_fragments=bool(fragflags & 1),
            header=rest[:hlen],
            body=rest[hlen:],
        )


@dataclass
class RxFragment:
    """A decrypted, ICV-verified fragment awaiting reassembly."""

    msdu_seq: int
    frag_index: int
    more: bool
    data: bytes
    tsc: Tsc48 | None
    da: bytes
    sa: bytes


# ---------------------------------------------------------------------------
# MIC input construction
# ---------------------------------------------------------------------------

def mic_header(da: bytes, sa: bytes, priority: int) -> bytes:
    return da + sa + bytes((priority, 0, 0, 0))


def tkip_mic_message(msdu: Msdu) -> bytes:
    return mic_header(msdu.da, msdu.sa, msdu.priority) + msdu.payload


def motkip_mic_message(msdu: Msdu, tsc: Tsc48) -> bytes:
    """MoTKIP widens the MIC input with the clear 48-bit counter."""
    return mic_header(msdu.da, msdu.sa, msdu.priority) + tsc.to_bytes() + msdu.payload


def _michael(key: bytes, message: bytes, ops: OpCounters | None) -> bytes:
    if ops is not None:
        ops.michael_octets += len(message)
        ops.michael_invocations += 1
    return crypto.michael(key, message)


def _seal(seed: bytes, fragment_data: bytes, ops: OpCounters | None) -> bytes:
    body = fragment_data + crc32_icv(fragment_data)
    if ops is not None:
        ops.crc_octets += len(fragment_data)
        ops.rc4_octets += len(body)
    return rc4_apply(seed, body)


def _open(seed: bytes, body: bytes, ops: OpCounters | None) -> bytes:
    plain = rc4_apply(seed, body)
    if ops is not None:
        ops.rc4_octets += len(body)
        ops.crc_octets += len(plain) - ICV_LEN
    if crc32_icv(plain[:-ICV_LEN]) != plain[-ICV_LEN:]:
        raise IcvMismatch("ICV check failed")
    return plain[:-ICV_LEN]


# ---------------------------------------------------------------------------
# plain and WEP
# ---------------------------------------------------------------------------

_ZERO_ADDR = bytes(6)


def plain_encap_msdu(msdu: Msdu, max_fragment: int, *, msdu_seq: int = 0) -> list[Mpdu]:
    frags = fragment(msdu.payload, max_fragment)
    return [
        Mpdu(SCHEME_PLAIN, msdu.da, msdu.sa, msdu_seq, f.index, f.more, b"", f.data)
        for f in frags
    ]


def plain_decap_mpdu(mpdu: Mpdu) -> RxFragment:
    if mpdu.scheme != SCHEME_PLAIN:
        raise MalformedFrame(f"expected plain frame, got {mpdu.scheme}")
    return RxFragment(
        mpdu.msdu_seq, mpdu.frag_index, mpdu.more_fragments, mpdu.body, None, mpdu.da, mpdu.sa
    )


def wep_encap(
    key: bytes,
    iv24: int,
    payload: bytes,
    *,
    key_id: int = 0,
    da: bytes = _ZERO_ADDR,
    sa: bytes = _ZERO_ADDR,
    msdu_seq: int = 0,
    frag_index: int = 0,
    more: bool = False,
    ops: OpCounters | None = None,
) -> Mpdu:
    """WEP-128 baseline: header is the 3 IV octets (transmit order) + key octet."""
    if len(key) != 13:
        raise ValueError("WEP-128 key must be 13 octets")
    iv24 &= 0xFFFFFF
    header = bytes(((iv24 >> 16) & 0xFF, (iv24 >> 8) & 0xFF, iv24 & 0xFF, (key_id & 3) << 6))
    body = _seal(header[:3] + key, payload, ops)
    return Mpdu(SCHEME_WEP, da, sa, msdu_seq, frag_index, more, header, body)


def wep_decap(key: bytes, mpdu: Mpdu, *, ops: OpCounters | None = None) -> bytes:
    if len(key) != 13:
        raise ValueError("WEP-128 key must be 13 octets")
    if mpdu.scheme != SCHEME_WEP:
        raise MalformedFrame(f"expected wep frame, got {mpdu.scheme}")
    if len(mpdu.header) != 4 or len(mpdu.body) < ICV_LEN:
        raise MalformedFrame("wep frame runt")
    return _open(mpdu.header[:3] + key, mpdu.body, ops)


def wep_encap_msdu(
    keys: KeyMaterial,
    iv_source: Iterator[int] | SecurityAssociation,
    msdu: Msdu,
    max_fragment: int,
    *,
    ops: OpCounters | None = None,
    msdu_seq: int | None = None,
) -> list[Mpdu]:
    if isinstance(iv_source, SecurityAssociation):
        sa_obj = iv_source
        ivs = iter(sa_obj.next_wep_iv, None)
        ops = sa_obj.ops if ops is None else ops
        msdu_seq = sa_obj.next_msdu_seq() if msdu_seq is None else msdu_seq
    else:
        ivs = iter(iv_source)
        msdu_seq = 0 if msdu_seq is None else msdu_seq
    out = []
    for f in fragment(msdu.payload, max_fragment):
        out.append(
            wep_encap(
                keys.wep_key,
                next(ivs),
                f.data,
                key_id=keys.key_id,
                da=msdu.da,
                sa=msdu.sa,
                msdu_seq=msdu_seq,
                frag_index=f.index,
                more=f.more,
                ops=ops,
            )
        )
    return out


def wep_decap_mpdu(keys: KeyMaterial, mpdu: Mpdu, *, ops: OpCounters | None = None) -> RxFragment:
    data = wep_decap(keys.wep_key, mpdu, ops=ops)
    return RxFragment(
        mpdu.msdu_seq, mpdu.frag_index, mpdu.more_fragments, data, None, mpdu.da, mpdu.sa
    )


# ---------------------------------------------------------------------------
# classic TKIP
# ---------------------------------------------------------------------------

def _tx_seed(
    keys: KeyMaterial, sa_obj: SecurityAssociation | None, ta: bytes, tsc: Tsc48,
    ops: OpCounters | None,
) -> bytes:
    if sa_obj is not None:
        return sa_obj.tx_seed(ta, tsc)
    if ops is not None:
        ops.phase1 += 1
        ops.phase2 += 1
    return phase2(phase1(keys.tk, ta, tsc.iv32), keys.tk, tsc.iv16)


def _draw_tscs(
    tsc_source: Iterable[Tsc48] | SecurityAssociation, count: int
) -> tuple[list[Tsc48], SecurityAssociation | None]:
    if isinstance(tsc_source, SecurityAssociation):
        if tsc_source.remaining_tsc < count:
            raise TscExhausted(f"{count} fragments exceed the remaining counter space")
        return [tsc_source.next_tsc() for _ in range(count)], tsc_source
    it = iter(tsc_source)
    try:
        return [next(it) for _ in range(count)], None
    except StopIteration:
        raise TscExhausted("counter source ran dry") from None


def tkip_encap_msdu(
    keys: KeyMaterial,
    tsc_source: Iterable[Tsc48] | SecurityAssociation,
    msdu: Msdu,
    max_fragment: int,
    *,
    ops: OpCounters | None = None,
    msdu_seq: int | None = None,
) -> list[Mpdu]:
    """MIC the MSDU, fragment, and seal each fragment under a fresh counter."""
    frags = fragment(msdu.payload + b"\x00" * MIC_LEN, max_fragment)
    tscs, sa_obj = _draw_tscs(tsc_source, len(frags))
    if sa_obj is not None:
        ops = sa_obj.ops if ops is None else ops
        if msdu_seq is None:
            msdu_seq = sa_obj.next_msdu_seq()
    msdu_seq = 0 if msdu_seq is None else msdu_seq

    mic = _michael(keys.mic_tx, tkip_mic_message(msdu), ops)
    frags = fragment(msdu.payload + mic, max_fragment)

    out = []
    for f, tsc in zip(frags, tscs):
        seed = _tx_seed(keys, sa_obj, msdu.sa, tsc, ops)
        header = bytes(
            (
                (tsc.iv16 >> 8) & 0xFF,
                (((tsc.iv16 >> 8) | 0x20) & 0x7F),
                tsc.iv16 & 0xFF,
                EXT_IV_BIT | ((keys.key_id & 3) << 6),
            )
        ) + tsc.iv32.to_bytes(4, "little")
        body = _seal(seed, f.data, ops)
        out.append(Mpdu(SCHEME_TKIP, msdu.da, msdu.sa, msdu_seq, f.index, f.more, header, body))
    return out


def tkip_decap_mpdu(
    keys: KeyMaterial, session: SecurityAssociation, mpdu: Mpdu
) -> RxFragment:
    """Parse, replay-check, decrypt, ICV-check, in that order."""
    if mpdu.scheme != SCHEME_TKIP:
        raise MalformedFrame(f"expected tkip frame, got {mpdu.scheme}")
    if len(mpdu.header) != HEADER_LEN[SCHEME_TKIP] or len(mpdu.body) < ICV_LEN:
        raise MalformedFrame("tkip frame runt")
    if not mpdu.header[3] & EXT_IV_BIT:
        raise MalformedFrame("extended-IV bit clear in tkip header")
    iv16 = (mpdu.header[0] << 8) | mpdu.header[2]
    iv32 = int.from_bytes(mpdu.header[4:8], "little")
    tsc = Tsc48(iv32, iv16)

    if not session.replay_check(tsc):
        raise ReplayDetected(f"counter {tsc.value} replayed or out of window")

    seed = session.rx_seed(mpdu.sa, tsc)
    data = _open(seed, mpdu.body, session.ops)
    return RxFragment(mpdu.msdu_seq, mpdu.frag_index, mpdu.more_fragments, data, tsc, mpdu.da, mpdu.sa)


# ---------------------------------------------------------------------------
# MoTKIP
# ---------------------------------------------------------------------------

def _xor6(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def motkip_encap_msdu(
    keys: KeyMaterial,
    session: SecurityAssociation,
    msdu: Msdu,
    max_fragment: int,
    *,
    msdu_seq: int | None = None,
) -> list[Mpdu]:
    """Encapsulate with the short-header scheme.

    The first frame since the epoch began carries the full counter masked
    by the session key; later frames carry only the two low counter octets.
    The MIC is computed over the first fragment's counter as well as the
    addresses and payload.
    """
    ops = session.ops
    frags = fragment(msdu.payload + b"\x00" * MIC_LEN, max_fragment)
    tscs, _ = _draw_tscs(session, len(frags))
    if msdu_seq is None:
        msdu_seq = session.next_msdu_seq()

    mic = _michael(keys.mic_tx, motkip_mic_message(msdu, tscs[0]), ops)
    frags = fragment(msdu.payload + mic, max_fragment)

    out = []
    fragmented = len(frags) > 1
    for f, tsc in zip(frags, tscs):
        # full-counter frame at session start, after rekey or recovery
        # request, and whenever the upper counter half rolls over
        first = session.epoch_first_pending or tsc.iv32 != session.tx_epoch_iv32
        unit_inc = (
            not first
            and session.last_tx_iv16 is not None
            and tsc.iv16 == session.last_tx_iv16 + 1
        )
        flags = FlagByte(
            ext_iv=first,
            same_iv32=not first,
            unit_increment=unit_inc,
            fragmented=fragmented,
            continuation=f.index > 0,
        )
        keyid_octet = (keys.key_id & 3) << 6
        if first:
            header = bytes((flags.encode(),)) + _xor6(tsc.to_bytes(), keys.ks) + bytes(
                (keyid_octet, 0)
            )
            session.epoch_first_pending = False
        else:
            header = bytes(
                (flags.encode(), tsc.iv16 & 0xFF, (tsc.iv16 >> 8) & 0xFF, keyid_octet, 0)
            )
        session.tx_epoch_iv32 = tsc.iv32
        session.last_tx_iv16 = tsc.iv16
        seed = session.tx_seed(msdu.sa, tsc)
        body = _seal(seed, f.data, ops)
        scheme = SCHEME_MOTKIP_FIRST if first else SCHEME_MOTKIP_NEXT
        out.append(Mpdu(scheme, msdu.da, msdu.sa, msdu_seq, f.index, f.more, header, body))
    return out


def motkip_decap_mpdu(
    keys: KeyMaterial, session: SecurityAssociation, mpdu: Mpdu
) -> RxFragment:
    """Recover the counter (unmasking or predicting), then check as TKIP."""
    if mpdu.scheme not in (SCHEME_MOTKIP_FIRST, SCHEME_MOTKIP_NEXT):
        raise MalformedFrame(f"expected motkip frame, got {mpdu.scheme}")
    if len(mpdu.body) < ICV_LEN:
        raise MalformedFrame("motkip frame runt")
    if len(mpdu.header) != HEADER_LEN[mpdu.scheme]:
        raise MalformedFrame("motkip header length mismatch")
    flags = FlagByte.decode(mpdu.header[0])
    keyid_octet = mpdu.header[-2]
    if mpdu.header[-1] != 0:
        raise MalformedFrame("nonzero reserved octet in motkip header")
    if keyid_octet & 0x3F:
        raise MalformedFrame("nonzero reserved bits in motkip key octet")
    if flags.continuation and not flags.fragmented:
        raise MalformedFrame("continuation flag without fragmentation flag")

    if flags.ext_iv:
        tsc = Tsc48.from_bytes(_xor6(mpdu.header[1:7], keys.ks))
    else:
        if not flags.same_iv32:
            raise MalformedFrame("short header must assert the cached upper IV")
        if session.rx_iv32 is None:
            raise EpochMismatch("short-header frame before any epoch-first frame")
        iv16 = mpdu.header[1] | (mpdu.header[2] << 8)
        if (
            flags.unit_increment
            and session.last_rx_iv16 is not None
            and iv16 != session.last_rx_iv16 + 1
        ):
            session.rx_resyncs += 1  # claim stale (loss/reorder); clear iv16 resyncs us
        tsc = Tsc48(session.rx_iv32, iv16)

    if not session.replay_check(tsc):
        raise ReplayDetected(f"counter {tsc.value} replayed or out of window")

    seed = session.rx_seed(mpdu.sa, tsc)
    data = _open(seed, mpdu.body, session.ops)

    if session.rx_iv32 != tsc.iv32:
        # new epoch: the low-counter prediction restarts
        session.rx_iv32 = tsc.iv32
        session.last_rx_iv16 = tsc.iv16
    elif session.last_rx_iv16 is None or tsc.iv16 > session.last_rx_iv16:
        session.last_rx_iv16 = tsc.iv16
    return RxFragment(mpdu.msdu_seq, mpdu.frag_index, mpdu.more_fragments, data, tsc, mpdu.da, mpdu.sa)


# ---------------------------------------------------------------------------
# scheme dispatch and MSDU reassembly
# ---------------------------------------------------------------------------

def encap_msdu(
    family: str,
    keys: KeyMaterial,
    session: SecurityAssociation,
    msdu: Msdu,
    max_fragment: int,
) -> list[Mpdu]:
    family = scheme_family(family)
    if family == FAMILY_PLAIN:
        return plain_encap_msdu(msdu, max_fragment, msdu_seq=session.next_msdu_seq())
    if family == FAMILY_WEP:
        return wep_encap_msdu(keys, session, msdu, max_fragment)
    if family == FAMILY_TKIP:
        return tkip_encap_msdu(keys, session, msdu, max_fragment)
    return motkip_encap_msdu(keys, session, msdu, max_fragment)


def decap_mpdu(keys: KeyMaterial, session: SecurityAssociation, mpdu: Mpdu) -> RxFragment:
    family = scheme_family(mpdu.scheme)
    session.ensure_traffic_allowed()
    if family == FAMILY_PLAIN:
        return plain_decap_mpdu(mpdu)
    if family == FAMILY_WEP:
        return wep_decap_mpdu(keys, mpdu, ops=session.ops)
    if family == FAMILY_TKIP:
        return tkip_decap_mpdu(keys, session, mpdu)
    return motkip_decap_mpdu(keys, session, mpdu)


class Reassembler:
    """Collects verified fragments into MSDUs and applies the MIC check last.

    Sequence numbers wrap at 2**16; an incomplete MSDU lingering a full
    wrap would collide, which the deterministic runs here never approach.
    """

    def __init__(self, family: str, keys: KeyMaterial, *, ops: OpCounters | None = None):
        self.family = scheme_family(family)
        self.keys = keys
        self.ops = ops
        self._pending: dict[int, dict[int, RxFragment]] = {}

    def add(self, rx: RxFragment) -> Msdu | None:
        """Feed one fragment; returns the MSDU when it completes."""
        frags = self._pending.setdefault(rx.msdu_seq, {})
        if rx.frag_index in frags:
            raise DuplicateFragment(f"fragment {rx.frag_index} of MSDU {rx.msdu_seq} seen twice")
        if frags:
            ref = next(iter(frags.values()))
            if ref.da != rx.da or ref.sa != rx.sa:
                raise MalformedFrame("fragments of one MSDU disagree on addresses")
        frags[rx.frag_index] = rx
        finals = [f for f in frags.values() if not f.more]
        if not finals:
            return None
        last = finals[0].frag_index
        if len(frags) != last + 1 or sorted(frags) != list(range(last + 1)):
            return None
        del self._pending[rx.msdu_seq]
        data = b"".join(frags[i].data for i in range(last + 1))
        return self._finish(frags[0], data)

    def _finish(self, head: RxFragment, data: bytes) -> Msdu:
        if self.family in (FAMILY_PLAIN, FAMILY_WEP):
            return Msdu(head.da, head.sa, 0, data)
        if len(data) < MIC_LEN:
            raise MalformedFrame("reassembled MSDU shorter than its MIC")
        payload, mic = data[:-MIC_LEN], data[-MIC_LEN:]
        msdu = Msdu(head.da, head.sa, 0, payload)
        if self.family == FAMILY_TKIP:
            message = tkip_mic_message(msdu)
        else:
            assert head.tsc is not None
            message = motkip_mic_message(msdu, head.tsc)
        if _michael(self.keys.mic_tx, message, self.ops) != mic:
            raise MicFailure(f"MIC check failed for MSDU {head.msdu_seq}")
        return msdu

    def incomplete(self) -> list[int]:
        """Sequence numbers of MSDUs still missing fragments."""
        return sorted(self._pending)


def decap_msdu(
    keys: KeyMaterial, session: SecurityAssociation, mpdus: Iterable[Mpdu]
) -> Msdu:
    """One-shot decapsulation of the fragments of a single MSDU."""
    mpdus = list(mpdus)
    if not mpdus:
        raise MissingFragment("no frames")
    asm = Reassembler(scheme_family(mpdus[0].scheme), keys, ops=session.ops)
    result = None
    for mpdu in mpdus:
        result = asm.add(decap_mpdu(keys, session, mpdu))
    if result is None:
        raise MissingFragment(f"incomplete MSDUs: {asm.incomplete()}")
    return result


# ---------------------------------------------------------------------------
# frame dump interchange format
# ---------------------------------------------------------------------------

def write_frames(fh: BinaryIO, mpdus: Iterable[Mpdu]) -> int:
    """Write records: magic, version, scheme tag, 2-octet length, frame."""
    count = 0
    for mpdu in mpdus:
        frame = mpdu.pack()
        if len(frame) > 0xFFFF:
            raise ValueError("frame too long for the dump format")
        tag = SCHEME_TAGS[scheme_family(mpdu.scheme)]
        fh.write(DUMP_MAGIC + bytes((DUMP_VERSION, tag)) + len(frame).to_bytes(2, "little") + frame)
        count += 1
    return count


def read_frames(fh: BinaryIO) -> Iterator[Mpdu]:
    """Parse dump records back into MPDUs; raises MalformedFrame on damage."""
    while True:
        head = fh.read(8)
        if not head:
            return
        if len(head) < 8 or head[:4] != DUMP_MAGIC:
            raise MalformedFrame("bad dump record header")
        if head[4] != DUMP_VERSION:
            raise MalformedFrame(f"unsupported dump version {head[4]}")
        family = _TAG_TO_FAMILY.get(head[5])
        if family is None:
            raise MalformedFrame(f"unknown scheme tag {head[5]}")
        length = int.from_bytes(head[6:8], "little")
        frame = fh.read(length)
        if len(frame) != length:
            raise MalformedFrame("truncated dump record")
        yield Mpdu.unpack(family, frame)
