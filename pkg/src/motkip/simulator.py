"""Deterministic seeded link simulator with byte and operation accounting.

One :class:`LinkSession` drives a transmitter association and a receiver
association through a lossy channel model: Bernoulli frame loss, bounded
random reordering (never deeper than the 16-frame burst window), and
per-octet bit corruption of the encrypted body region — the simplest
model that exercises the ICV path without perturbing headers into
unrelated error classes.

Everything is derived from the configured seed through two independent
PCG64 streams (payload bytes and channel behaviour), so identical inputs
give byte-identical metrics.  The clock advances by each frame's airtime
at the configured link rate, which makes countermeasure timing
reproducible as well.

Processing cost is reported as operation counts, not wall-clock: octets
through RC4/Michael/CRC plus phase-1/phase-2 invocation counts.  For
comparisons the counts collapse into "critical-path crypto octets", where
the mixing phases are weighted by their input sizes and precomputed
phase-2 work is excluded (it happens while the receiver is idle).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .crypto import ICV_LEN, crc32_raw
from .errors import (
    Blackout,
    DuplicateFragment,
    EpochMismatch,
    IcvMismatch,
    MalformedFrame,
    MicFailure,
    ReplayDetected,
)
from .frames import (
    FAMILY_MOTKIP,
    Mpdu,
    Reassembler,
    decap_mpdu,
    encap_msdu,
    Msdu,
    scheme_family,
)
from .session import Clock, KeyMaterial, SecurityAssociation, Tsc48

GENERATOR_NAME = "numpy-PCG64"
BURST_WINDOW = 16

# octets read per mixing invocation: TK+TA+IV32 and P1K+TK+IV16
PHASE1_INPUT_OCTETS = 26
PHASE2_INPUT_OCTETS = 28

DEFAULT_DA = bytes.fromhex("020000000002")
DEFAULT_SA = bytes.fromhex("020000000001")

CSV_COLUMNS = [
    "scheme",
    "seed",
    "loss",
    "msdu_octets",
    "msdu_count",
    "on_air_octets",
    "delivered",
    "goodput",
    "phase1",
    "phase2",
    "rc4_octets",
    "michael_octets",
    "mic_failures",
]


@dataclass
class ChannelConfig:
    seed: int = 0
    loss_prob: float = 0.0
    reorder_depth: int = 0
    corrupt_prob: float = 0.0
    mac_header_octets: int = 24
    per_frame_fixed_octets: int = 0
    link_rate_bits_per_sec: int = 11_000_000

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0 or not 0.0 <= self.corrupt_prob <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if not 0 <= self.reorder_depth <= BURST_WINDOW:
            raise ValueError(f"reorder_depth must be 0..{BURST_WINDOW}")
        if self.link_rate_bits_per_sec <= 0:
            raise ValueError("link rate must be positive")


@dataclass
class TrafficProfile:
    msdu_octets: int
    msdu_count: int
    scheme: str
    max_fragment: int = 2304

    def __post_init__(self):
        if self.msdu_octets <= 0 or self.msdu_count <= 0:
            raise ValueError("sizes and counts must be positive")
        self.scheme = scheme_family(self.scheme)


@dataclass
class SessionMetrics:
    scheme: str
    seed: int
    loss_prob: float
    corrupt_prob: float
    reorder_depth: int
    msdu_octets: int
    msdu_count: int
    on_air_octets: int = 0
    sent_mpdus: int = 0
    delivered_mpdus: int = 0
    delivered_msdus: int = 0
    verified_msdus: int = 0
    delivered_payload_octets: int = 0
    goodput_fraction: float = 0.0
    lost: int = 0
    corrupted: int = 0
    replay_rejects: int = 0
    icv_rejects: int = 0
    epoch_rejects: int = 0
    malformed_rejects: int = 0
    blackout_rejects: int = 0
    mic_failures: int = 0
    incomplete_msdus: int = 0
    op_counts: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    @property
    def rejected_mpdus(self) -> int:
        return (
            self.replay_rejects
            + self.icv_rejects
            + self.epoch_rejects
            + self.malformed_rejects
            + self.blackout_rejects
        )

    def modeled_throughput_kbps(self, link_rate_bits_per_sec: int) -> float:
        return self.goodput_fraction * link_rate_bits_per_sec / 1000.0

    def events_jsonl(self) -> str:
        """Event log as JSON lines: {t, event, tsc, details} per line."""
        import json

        return "\n".join(json.dumps(e, sort_keys=True) for e in self.events)

    def csv_row(self) -> list[str]:
        return [
            self.scheme,
            str(self.seed),
            f"{self.loss_prob:g}",
            str(self.msdu_octets),
            str(self.msdu_count),
            str(self.on_air_octets),
            str(self.delivered_msdus),
            f"{self.goodput_fraction:.9f}",
            str(self.op_counts.get("phase1", 0)),
            str(self.op_counts.get("phase2", 0)),
            str(self.op_counts.get("rc4_octets", 0)),
            str(self.op_counts.get("michael_octets", 0)),
            str(self.mic_failures),
        ]

    def json_row(self) -> dict:
        return dict(zip(CSV_COLUMNS, self.csv_row()))


def critical_crypto_octets(op_counts: dict) -> int:
    """Octets of crypto work on the packet critical path.

    Phase invocations are weighted by the octets each one reads; phase-2
    runs done by precomputation are excluded because they overlap idle
    time rather than packet handling.
    """
    online_phase2 = op_counts.get("phase2", 0) - op_counts.get("phase2_precomputed", 0)
    return (
        op_counts.get("rc4_octets", 0)
        + op_counts.get("michael_octets", 0)
        + op_counts.get("crc_octets", 0)
        + PHASE1_INPUT_OCTETS * op_counts.get("phase1", 0)
        + PHASE2_INPUT_OCTETS * online_phase2
    )


class LinkSession:
    """One transmitter, one lossy channel, one receiver.

    ``transmit()`` pushes MSDUs through the channel, ``inject_forgery()``
    hands an attacker-built frame to the receiver, ``finish()`` closes the
    books and returns the metrics.
    """

    def __init__(
        self,
        config: ChannelConfig,
        profile: TrafficProfile,
        keys: KeyMaterial,
        *,
        da: bytes = DEFAULT_DA,
        sa: bytes = DEFAULT_SA,
    ):
        self.config = config
        self.profile = profile
        self.keys = keys
        self.da = da
        self.sa = sa
        self.clock = Clock()
        self.tx = SecurityAssociation("transmitter", keys, ta=sa, clock=self.clock)
        self.rx = SecurityAssociation("receiver", keys, ta=sa, clock=self.clock)
        self.reassembler = Reassembler(profile.scheme, keys, ops=self.rx.ops)
        self._payload_rng = np.random.Generator(np.random.PCG64([config.seed, 0]))
        self._chan_rng = np.random.Generator(np.random.PCG64([config.seed, 1]))
        self._sent_payloads: dict[int, bytes] = {}
        self._next_frame_no = 0
        self._transmitted = 0
        self._finished = False
        self._intercepts: list[Callable[[Mpdu], Mpdu]] = []
        self.captured: list[Mpdu] = []
        self.sim_events: list[dict] = []
        self.metrics = SessionMetrics(
            scheme=profile.scheme,
            seed=config.seed,
            loss_prob=config.loss_prob,
            corrupt_prob=config.corrupt_prob,
            reorder_depth=config.reorder_depth,
            msdu_octets=profile.msdu_octets,
            msdu_count=profile.msdu_count,
        )
        if profile.scheme == FAMILY_MOTKIP:
            self._top_up_seeds()

    # -- channel ----------------------------------------------------------

    def _frame_cost(self, mpdu: Mpdu) -> int:
        return self.config.mac_header_octets + mpdu.wire_len + self.config.per_frame_fixed_octets

    def _airtime_ms(self, mpdu: Mpdu) -> float:
        return self._frame_cost(mpdu) * 8000.0 / self.config.link_rate_bits_per_sec

    def _corrupt(self, mpdu: Mpdu) -> Mpdu | None:
        """Flip one random bit in each Bernoulli-chosen body octet."""
        if self.config.corrupt_prob <= 0.0 or not mpdu.body:
            return None
        hits = np.flatnonzero(self._chan_rng.random(len(mpdu.body)) < self.config.corrupt_prob)
        if hits.size == 0:
            return None
        body = bytearray(mpdu.body)
        bits = self._chan_rng.integers(0, 8, size=hits.size)
        for pos, bit in zip(hits.tolist(), bits.tolist()):
            body[pos] ^= 1 << int(bit)
        return Mpdu(
            mpdu.scheme, mpdu.da, mpdu.sa, mpdu.msdu_seq, mpdu.frag_index,
            mpdu.more_fragments, mpdu.header, bytes(body),
        )

    def transmit(self, count: int | None = None) -> None:
        """Encapsulate and send the next ``count`` MSDUs (default: the rest)."""
        if self._finished:
            raise RuntimeError("session already finished")
        remaining = self.profile.msdu_count - self._transmitted
        n = remaining if count is None else min(count, remaining)
        schedule: list[tuple[int, int, Mpdu]] = []
        for _ in range(n):
            payload = self._payload_rng.integers(
                0, 256, self.profile.msdu_octets, dtype=np.uint8
            ).tobytes()
            msdu = Msdu(da=self.da, sa=self.sa, payload=payload)
            mpdus = encap_msdu(self.profile.scheme, self.keys, self.tx, msdu, self.profile.max_fragment)
            self._sent_payloads[mpdus[0].msdu_seq] = payload
            for mpdu in mpdus:
                self.metrics.sent_mpdus += 1
                self.metrics.on_air_octets += self._frame_cost(mpdu)
                self.captured.append(mpdu)
                frame_no = self._next_frame_no
                self._next_frame_no += 1
                if self.config.loss_prob > 0.0 and self._chan_rng.random() < self.config.loss_prob:
                    self.metrics.lost += 1
                    continue
                if self.config.reorder_depth > 0:
                    release = frame_no + int(self._chan_rng.integers(0, self.config.reorder_depth + 1))
                else:
                    release = frame_no
                damaged = self._corrupt(mpdu)
                if damaged is not None:
                    self.metrics.corrupted += 1
                    mpdu = damaged
                schedule.append((release, frame_no, mpdu))
        self._transmitted += n
        schedule.sort(key=lambda item: (item[0], item[1]))
        for _, _, mpdu in schedule:
            self.clock.advance(self._airtime_ms(mpdu))
            if self._intercepts:
                mpdu = self._intercepts.pop(0)(mpdu)
                outcome = self._receive(mpdu)
                self.sim_events.append(
                    {"t": self.clock.now_ms, "event": "ForgeryOutcome", "tsc": None,
                     "details": {"outcome": outcome, "kind": "intercept"}}
                )
            else:
                self._receive(mpdu)

    def _top_up_seeds(self) -> None:
        room = self.rx.seed_queue_cap - self.rx.seed_queue_len
        want = min(BURST_WINDOW, room)
        if want > 0:
            self.rx.precompute_phase2(want)

    def _receive(self, mpdu: Mpdu) -> str:
        m = self.metrics
        try:
            rxf = decap_mpdu(self.keys, self.rx, mpdu)
        except ReplayDetected:
            m.replay_rejects += 1
            return "ReplayDetected"
        except IcvMismatch:
            m.icv_rejects += 1
            return "IcvMismatch"
        except EpochMismatch:
            m.epoch_rejects += 1
            return "EpochMismatch"
        except Blackout:
            m.blackout_rejects += 1
            return "Blackout"
        except MalformedFrame:
            m.malformed_rejects += 1
            return "MalformedFrame"
        m.delivered_mpdus += 1
        if self.profile.scheme == FAMILY_MOTKIP:
            self._top_up_seeds()
        try:
            msdu = self.reassembler.add(rxf)
        except MicFailure:
            m.mic_failures += 1
            self.rx.record_mic_failure()
            return "MicFailure"
        except (DuplicateFragment, MalformedFrame):
            m.malformed_rejects += 1
            m.delivered_mpdus -= 1
            return "MalformedFrame"
        if msdu is None:
            return "ok"
        m.delivered_msdus += 1
        m.delivered_payload_octets += len(msdu.payload)
        if self._sent_payloads.get(rxf.msdu_seq) == msdu.payload:
            m.verified_msdus += 1
        return "ok"

    def intercept_next(self, tamper: Callable[[Mpdu], Mpdu]) -> None:
        """Queue an in-flight modification of the next transmitted frame.

        Models an adversary on the path: the receiver sees the tampered
        frame instead of the original, so its counter is still fresh.
        """
        self._intercepts.append(tamper)

    def inject_forgery(self, frame_mutator: Callable[["LinkSession"], Mpdu]) -> str:
        """Deliver one attacker-crafted frame; the outcome lands in the events."""
        if self._finished:
            raise RuntimeError("session already finished")
        frame = frame_mutator(self)
        outcome = self._receive(frame)
        self.sim_events.append(
            {"t": self.clock.now_ms, "event": "ForgeryOutcome", "tsc": None,
             "details": {"outcome": outcome, "kind": "injected"}}
        )
        return outcome

    def finish(self) -> SessionMetrics:
        if self._finished:
            return self.metrics
        self._finished = True
        m = self.metrics
        m.incomplete_msdus = len(self.reassembler.incomplete())
        ops = self.tx.ops.as_dict()
        for name, value in self.rx.ops.as_dict().items():
            ops[name] += value
        m.op_counts = ops
        m.events = sorted(
            self.tx.events + self.rx.events + self.sim_events, key=lambda e: e["t"]
        )
        if m.on_air_octets:
            m.goodput_fraction = m.delivered_payload_octets / m.on_air_octets
        return m


def run_session(config: ChannelConfig, profile: TrafficProfile, keys: KeyMaterial) -> SessionMetrics:
    """Transmit the whole profile through the channel and return the metrics."""
    session = LinkSession(config, profile, keys)
    session.transmit()
    return session.finish()


def sweep(
    configs: Sequence[ChannelConfig],
    profiles: Sequence[TrafficProfile],
    keys: KeyMaterial,
) -> list[SessionMetrics]:
    """Cross product of configs and profiles, rows in deterministic order."""
    return [run_session(c, p, keys) for c in configs for p in profiles]


# ---------------------------------------------------------------------------
# attacker frame constructions for inject_forgery and the security tests
# ---------------------------------------------------------------------------

def replay_mutator(index: int = -1) -> Callable[[LinkSession], Mpdu]:
    """Re-deliver a frame the channel already carried."""

    def build(session: LinkSession) -> Mpdu:
        return session.captured[index]

    return build


def crc_linearity_tamper(mpdu: Mpdu, flip_offset: int = 0, flip_mask: int = 0x01) -> Mpdu:
    """Flip payload bits and patch the encrypted ICV so it still verifies.

    CRC-32 is linear over the keystream XOR, so an attacker needs no key
    material: the ICV correction for a plaintext delta is the raw CRC
    register of the delta.  The Michael check is what catches the result.
    """
    data_len = len(mpdu.body) - ICV_LEN
    if not 0 <= flip_offset < data_len:
        raise ValueError("flip offset outside the payload region")
    delta = bytearray(data_len)
    delta[flip_offset] = flip_mask
    body = bytearray(mpdu.body)
    body[flip_offset] ^= flip_mask
    fix = crc32_raw(bytes(delta)).to_bytes(4, "little")
    for k in range(ICV_LEN):
        body[data_len + k] ^= fix[k]
    return Mpdu(
        mpdu.scheme, mpdu.da, mpdu.sa, mpdu.msdu_seq, mpdu.frag_index,
        mpdu.more_fragments, mpdu.header, bytes(body),
    )


def reencrypt_under_tsc(
    keys: KeyMaterial, session_sa: SecurityAssociation, mpdu: Mpdu, new_tsc: Tsc48
) -> Mpdu:
    """White-box construction: re-seal a captured frame under another counter.

    Decrypts with the true per-packet seed and re-encrypts (valid ICV)
    under ``new_tsc`` without touching the enclosed MIC.  Against the
    IV-covering MIC this must fail; against a MIC that ignores the IV it
    would pass.  Used by the forgery tests.
    """
    from .keymix import phase1, phase2
    from .crypto import rc4_apply, crc32_icv

    if mpdu.scheme == "tkip":
        iv16 = (mpdu.header[0] << 8) | mpdu.header[2]
        iv32 = int.from_bytes(mpdu.header[4:8], "little")
        old_tsc = Tsc48(iv32, iv16)
        header = bytes(
            (
                (new_tsc.iv16 >> 8) & 0xFF,
                ((new_tsc.iv16 >> 8) | 0x20) & 0x7F,
                new_tsc.iv16 & 0xFF,
                mpdu.header[3],
            )
        ) + new_tsc.iv32.to_bytes(4, "little")
    elif mpdu.scheme == "motkip-next":
        if session_sa.rx_iv32 is None:
            raise ValueError("receiver epoch unknown")
        old_tsc = Tsc48(session_sa.rx_iv32, mpdu.header[1] | (mpdu.header[2] << 8))
        header = bytes(
            (mpdu.header[0], new_tsc.iv16 & 0xFF, (new_tsc.iv16 >> 8) & 0xFF,
             mpdu.header[3], mpdu.header[4])
        )
    else:
        raise ValueError(f"unsupported scheme {mpdu.scheme}")

    old_seed = phase2(phase1(keys.tk, mpdu.sa, old_tsc.iv32), keys.tk, old_tsc.iv16)
    plain = rc4_apply(old_seed, mpdu.body)
    if crc32_icv(plain[:-ICV_LEN]) != plain[-ICV_LEN:]:
        raise ValueError("captured frame did not decrypt cleanly")
    new_seed = phase2(phase1(keys.tk, mpdu.sa, new_tsc.iv32), keys.tk, new_tsc.iv16)
    fragment = plain[:-ICV_LEN]
    body = rc4_apply(new_seed, fragment + crc32_icv(fragment))
    return Mpdu(
        mpdu.scheme, mpdu.da, mpdu.sa, mpdu.msdu_seq, mpdu.frag_index,
        mpdu.more_fragments, header, body,
    )
