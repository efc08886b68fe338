"""Link-layer security codecs (WEP, TKIP, MoTKIP) with overhead benchmarks.

The package implements the classic TKIP encapsulation pipeline (two-phase
per-packet key mixing, Michael MIC, CRC-32 ICV, 48-bit sequence counter,
replay window, MIC-failure countermeasures) alongside a reduced-overhead
variant that elides the redundant extended IV on all but the first packet
of a counter epoch, masks the first packet's counter with a session key,
and extends the MIC to cover the counter.  A deterministic, seeded link
simulator quantifies per-packet overhead and modeled throughput against
WEP and no-encryption baselines, and the ``motkip`` CLI exposes the key
mixing, the codecs, and the benchmark reports.
"""

from ._backend import USING_NUMBA, backend_name
from .crypto import (
    ICV_LEN,
    MIC_LEN,
    Rc4State,
    crc32_icv,
    crc32_raw,
    crc32_value,
    michael,
    rc4_apply,
    rc4_init,
)
from .errors import (
    Blackout,
    DuplicateFragment,
    EpochMismatch,
    IcvMismatch,
    InvalidKeyLength,
    MalformedFrame,
    MicFailure,
    MissingFragment,
    MotkipError,
    QueueFull,
    ReplayDetected,
    ReservedBitsSet,
    TscExhausted,
)
from .frames import (
    FlagByte,
    Fragment,
    Mpdu,
    Msdu,
    Reassembler,
    RxFragment,
    decap_mpdu,
    decap_msdu,
    encap_msdu,
    fragment,
    motkip_decap_mpdu,
    motkip_encap_msdu,
    plain_encap_msdu,
    read_frames,
    reassemble,
    tkip_decap_mpdu,
    tkip_encap_msdu,
    wep_decap,
    wep_encap,
    write_frames,
)
from .keymix import P1kCache, mk16, phase1, phase2, sbox
from .session import (
    Clock,
    KeyMaterial,
    OpCounters,
    ReplayWindow,
    SecurityAssociation,
    Tsc48,
)
from .simulator import (
    ChannelConfig,
    LinkSession,
    SessionMetrics,
    TrafficProfile,
    critical_crypto_octets,
    run_session,
    sweep,
)

__version__ = "0.1.0"
