"""Per-association mutable state.

A :class:`SecurityAssociation` owns everything one direction of a secured
link mutates: the 48-bit packet counter with its carry/exhaustion rules,
the phase-1 cache epoch, the precomputed phase-2 seed queue, the 16-entry
replay memory, the MIC-failure countermeasure timer, and the operation
counters the simulator reports.  Associations are single-writer; two
associations never share state.

Time never comes from the environment: an injected :class:`Clock` makes
the one-minute countermeasure window exactly testable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import Blackout, QueueFull, TscExhausted
from .keymix import P1kCache, phase2
from .crypto import MICHAEL_KEY_LEN

TSC_MAX = (1 << 48) - 1
DEFAULT_REKEY_BUDGET = 1 << 16
COUNTERMEASURE_WINDOW_MS = 60_000
BLACKOUT_MS = 60_000
REPLAY_WINDOW_SIZE = 16
SEED_QUEUE_CAP = 64

EVENT_DISASSOCIATE = "Disassociate"
EVENT_REKEY_REQUIRED = "RekeyRequired"
EVENT_REKEY_RECOMMENDED = "RekeyRecommended"
EVENT_BLACKOUT = "Blackout"
EVENT_MIC_FAILURE = "MicFailure"


@dataclass(frozen=True, order=True)
class Tsc48:
    """48-bit packet sequence counter, split high/low as carried on the wire."""

    iv32: int
    iv16: int

    def __post_init__(self):
        if not 0 <= self.iv32 <= 0xFFFFFFFF:
            raise ValueError("iv32 out of range")
        if not 0 <= self.iv16 <= 0xFFFF:
            raise ValueError("iv16 out of range")

    @property
    def value(self) -> int:
        return (self.iv32 << 16) | self.iv16

    @classmethod
    def from_value(cls, value: int) -> "Tsc48":
        if not 0 <= value <= TSC_MAX:
            raise ValueError("TSC value out of range")
        return cls(value >> 16, value & 0xFFFF)

    def next(self) -> "Tsc48":
        """Increment with iv16 -> iv32 carry.  Raises past the 48-bit space."""
        if self.value >= TSC_MAX:
            raise TscExhausted("48-bit TSC space exhausted")
        if self.iv16 == 0xFFFF:
            return Tsc48(self.iv32 + 1, 0)
        return Tsc48(self.iv32, self.iv16 + 1)

    def to_bytes(self) -> bytes:
        """Six octets, little-endian (TSC0 first)."""
        return self.value.to_bytes(6, "little")

    @classmethod
    def from_bytes(cls, octets: bytes) -> "Tsc48":
        if len(octets) != 6:
            raise ValueError("TSC is 6 octets")
        return cls.from_value(int.from_bytes(octets, "little"))


@dataclass
class Clock:
    """Injected monotone millisecond clock (fractional ms allowed)."""

    now_ms: float = 0

    def advance(self, ms: float) -> None:
        if ms < 0:
            raise ValueError("clock cannot run backwards")
        self.now_ms += ms


@dataclass
class KeyMaterial:
    """Keys one association holds.

    ``tk`` drives the per-packet mixing, ``mic_tx``/``mic_rx`` are the
    directional Michael keys, ``ks`` masks the first-packet counter of the
    short-header scheme, and ``wep_key`` serves the WEP-128 baseline codec.
    """

    tk: bytes
    mic_tx: bytes
    mic_rx: bytes
    ks: bytes
    wep_key: bytes
    key_id: int = 0

    def __post_init__(self):
        if len(self.tk) != 16:
            raise ValueError("tk must be 16 octets")
        if len(self.mic_tx) != MICHAEL_KEY_LEN or len(self.mic_rx) != MICHAEL_KEY_LEN:
            raise ValueError("MIC keys must be 8 octets")
        if len(self.ks) != 6:
            raise ValueError("ks must be 6 octets")
        if len(self.wep_key) != 13:
            raise ValueError("wep_key must be 13 octets")
        if not 0 <= self.key_id <= 3:
            raise ValueError("key_id is a 2-bit value")


@dataclass
class OpCounters:
    """Deterministic work accounting, the stand-in for wall-clock cost."""

    phase1: int = 0
    phase2: int = 0
    phase2_precomputed: int = 0
    phase2_rx_online: int = 0
    rc4_octets: int = 0
    michael_octets: int = 0
    michael_invocations: int = 0
    crc_octets: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "phase1": self.phase1,
            "phase2": self.phase2,
            "phase2_precomputed": self.phase2_precomputed,
            "phase2_rx_online": self.phase2_rx_online,
            "rc4_octets": self.rc4_octets,
            "michael_octets": self.michael_octets,
            "michael_invocations": self.michael_invocations,
            "crc_octets": self.crc_octets,
        }

    def add(self, other: "OpCounters") -> "OpCounters":
        for name in self.as_dict():
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self


class ReplayWindow:
    """Remembers the last 16 accepted counter values.

    A value is accepted when it was never seen and lies within 16 of the
    highest accepted value — the weakest rule compatible with 16-frame
    burst acknowledgements.
    """

    def __init__(self, size: int = REPLAY_WINDOW_SIZE):
        self.size = size
        self.highest: int | None = None
        self._seen: set[int] = set()

    def check_and_record(self, value: int) -> bool:
        if self.highest is None:
            self.highest = value
            self._seen = {value}
            return True
        if value in self._seen:
            return False
        if value + self.size <= self.highest:
            return False
        self._seen.add(value)
        if value > self.highest:
            self.highest = value
        floor = self.highest - self.size
        self._seen = {v for v in self._seen if v > floor}
        return True

    def reset(self) -> None:
        self.highest = None
        self._seen = set()


class SecurityAssociation:
    """One direction of a secured link: keys plus all sequencing state.

    ``ta`` is the transmitter address of this direction (the local MAC for
    a transmitter, the peer MAC for a receiver); phase-1 mixing and seed
    precomputation key off it.
    """

    def __init__(
        self,
        role: str,
        keys: KeyMaterial,
        ta: bytes,
        clock: Clock | None = None,
        rekey_budget: int = DEFAULT_REKEY_BUDGET,
        seed_queue_cap: int = SEED_QUEUE_CAP,
    ):
        if role not in ("transmitter", "receiver"):
            raise ValueError("role must be 'transmitter' or 'receiver'")
        if len(ta) != 6:
            raise ValueError("ta must be 6 octets")
        if not 1 <= rekey_budget <= TSC_MAX + 1:
            raise ValueError("rekey budget out of range")
        self.role = role
        self.keys = keys
        self.ta = ta
        self.clock = clock if clock is not None else Clock()
        self.rekey_budget = rekey_budget
        self.seed_queue_cap = seed_queue_cap

        self.tsc = Tsc48(0, 0)
        self.packets_used = 0
        self._exhausted = False
        self._msdu_seq = 0
        self._wep_iv = 0

        self.p1k_cache = P1kCache()
        self.ops = OpCounters()
        self.events: list[dict] = []

        self.epoch_first_pending = True
        self.tx_epoch_iv32: int | None = None
        self.last_tx_iv16: int | None = None

        self.replay = ReplayWindow()
        self.rx_iv32: int | None = None
        self.last_rx_iv16: int | None = None
        self.rx_resyncs = 0

        self._seed_queue: dict[int, bytes] = {}
        self._seed_queue_iv32: int | None = None

        self._failure_times: list[int] = []
        self.blackout_until: int | None = None

    # -- countermeasures ----------------------------------------------------

    @property
    def in_blackout(self) -> bool:
        return self.blackout_until is not None and self.clock.now_ms < self.blackout_until

    def ensure_traffic_allowed(self) -> None:
        if self.in_blackout:
            raise Blackout(f"traffic suspended until t={self.blackout_until}ms")

    def record_mic_failure(self, now: int | None = None) -> bool:
        """Record one MIC failure; returns True when countermeasures fire."""
        t = self.clock.now_ms if now is None else now
        self.emit(EVENT_MIC_FAILURE, t=t)
        triggered = any(t - prev < COUNTERMEASURE_WINDOW_MS for prev in self._failure_times)
        self._failure_times.append(t)
        if triggered:
            self.blackout_until = t + BLACKOUT_MS
            self._failure_times = []
            self.emit(EVENT_BLACKOUT, t=t, details={"until": self.blackout_until})
            self.emit(EVENT_DISASSOCIATE, t=t)
            self.emit(EVENT_REKEY_REQUIRED, t=t)
        return triggered

    # -- transmit-side sequencing -------------------------------------------

    @property
    def remaining_tsc(self) -> int:
        if self._exhausted:
            return 0
        return TSC_MAX - self.tsc.value + 1

    def next_tsc(self) -> Tsc48:
        """Hand out the current counter value and advance it.

        Crossing an iv16 boundary invalidates the phase-1 cache and seed
        queue and re-arms the epoch-first frame; crossing the configured
        rekey budget emits a RekeyRecommended event; running past the
        48-bit space raises.
        """
        self.ensure_traffic_allowed()
        if self._exhausted:
            raise TscExhausted("48-bit TSC space exhausted")
        current = self.tsc
        if current.value >= TSC_MAX:
            self._exhausted = True
        else:
            self.tsc = current.next()
            if self.tsc.iv32 != current.iv32:
                self.p1k_cache.clear()
                self._seed_queue.clear()
                self._seed_queue_iv32 = None
        self.packets_used += 1
        if self.packets_used == self.rekey_budget:
            self.emit(EVENT_REKEY_RECOMMENDED, tsc=current.value)
        return current

    def tsc_stream(self):
        """Iterator view of :meth:`next_tsc` for the encapsulation helpers."""
        while True:
            yield self.next_tsc()

    def request_epoch_first(self) -> None:
        """Force the next short-header transmission to carry the full counter.

        Recovery hook: lets a transmitter resynchronize a receiver that
        signalled epoch loss.
        """
        self.epoch_first_pending = True

    def next_msdu_seq(self) -> int:
        seq = self._msdu_seq
        self._msdu_seq = (self._msdu_seq + 1) & 0xFFFF
        return seq

    def next_wep_iv(self) -> int:
        iv = self._wep_iv
        self._wep_iv = (self._wep_iv + 1) & 0xFFFFFF
        return iv

    # -- receive-side sequencing ---------------------------------------------

    def replay_check(self, tsc: Tsc48) -> bool:
        """Accept and record, or reject a received counter value."""
        return self.replay.check_and_record(tsc.value)

    # -- per-packet seeds -----------------------------------------------------

    def _phase1(self, ta: bytes, iv32: int) -> tuple[int, ...]:
        before = self.p1k_cache.computations
        p1k = self.p1k_cache.get(self.keys.tk, ta, iv32)
        self.ops.phase1 += self.p1k_cache.computations - before
        return p1k

    def tx_seed(self, ta: bytes, tsc: Tsc48) -> bytes:
        p1k = self._phase1(ta, tsc.iv32)
        self.ops.phase2 += 1
        return phase2(p1k, self.keys.tk, tsc.iv16)

    def rx_seed(self, ta: bytes, tsc: Tsc48) -> bytes:
        """Seed for an arriving frame: queue hit, or an on-line computation."""
        seed = self._consume_seed(ta, tsc)
        if seed is not None:
            return seed
        p1k = self._phase1(ta, tsc.iv32)
        self.ops.phase2 += 1
        self.ops.phase2_rx_online += 1
        return phase2(p1k, self.keys.tk, tsc.iv16)

    def _consume_seed(self, ta: bytes, tsc: Tsc48) -> bytes | None:
        if ta != self.ta or self._seed_queue_iv32 != tsc.iv32:
            return None
        seed = self._seed_queue.pop(tsc.iv16, None)
        if seed is not None:
            # everything at or below the consumed counter is history now
            stale = [k for k in self._seed_queue if k <= tsc.iv16]
            for k in stale:
                del self._seed_queue[k]
        return seed

    def precompute_phase2(self, n: int) -> int:
        """Fill the seed queue for the next ``n`` expected iv16 values.

        Runs off the critical path: the work is counted when performed, not
        when a frame arrives.  Returns the number of seeds computed.
        """
        if n < 0:
            raise ValueError("n must be non-negative")
        if len(self._seed_queue) + n > self.seed_queue_cap:
            raise QueueFull(f"seed queue capacity is {self.seed_queue_cap}")
        iv32 = self.rx_iv32 if self.rx_iv32 is not None else 0
        if self._seed_queue_iv32 != iv32:
            self._seed_queue.clear()
            self._seed_queue_iv32 = iv32
        if self._seed_queue:
            start = max(self._seed_queue) + 1
        elif self.last_rx_iv16 is not None:
            start = self.last_rx_iv16 + 1
        else:
            start = 0
        p1k = self._phase1(self.ta, iv32)
        computed = 0
        for iv16 in range(start, min(start + n, 0x10000)):
            self._seed_queue[iv16] = phase2(p1k, self.keys.tk, iv16)
            self.ops.phase2 += 1
            self.ops.phase2_precomputed += 1
            computed += 1
        return computed

    @property
    def seed_queue_len(self) -> int:
        return len(self._seed_queue)

    # -- rekeying --------------------------------------------------------------

    def rekey(self, new_keys: KeyMaterial) -> None:
        """Install fresh keys and reset every per-key structure.

        Permitted during blackout and clears it; the next short-header
        transmission will be an epoch-first frame.
        """
        self.keys = new_keys
        self.tsc = Tsc48(0, 0)
        self.packets_used = 0
        self._exhausted = False
        self.replay.reset()
        self.p1k_cache.clear()
        self._seed_queue.clear()
        self._seed_queue_iv32 = None
        self._failure_times = []
        self.blackout_until = None
        self.epoch_first_pending = True
        self.tx_epoch_iv32 = None
        self.last_tx_iv16 = None
        self.rx_iv32 = None
        self.last_rx_iv16 = None

    # -- events ------------------------------------------------------------------

    def emit(self, event: str, tsc: int | None = None, t: int | None = None, details: dict | None = None) -> None:
        self.events.append(
            {
                "t": self.clock.now_ms if t is None else t,
                "event": event,
                "tsc": tsc,
                "details": details or {},
            }
        )
