"""Command-line front end.

Subcommands: ``keymix`` (phase-1/phase-2 vector tool), ``encap``/``decap``
(file to frame-dump codec), ``bench`` (scheme comparison reports) and
``selftest`` (recorded vectors plus the invariant quick-suite).

Exit codes: 0 success, 1 usage or format problem, 2 integrity failure
(ICV/MIC), 3 replay rejection, 4 countermeasure blackout.  All input is
explicit (flags, files, seeds); reports never include timestamps, so a
repeated invocation is byte-identical.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from ._backend import backend_name
from .errors import (
    Blackout,
    IcvMismatch,
    MicFailure,
    MotkipError,
    ReplayDetected,
)
from .frames import (
    FAMILIES,
    Msdu,
    Reassembler,
    decap_mpdu,
    encap_msdu,
    read_frames,
    scheme_family,
    write_frames,
)
from .keymix import phase1, phase2
from .session import Clock, KeyMaterial, SecurityAssociation
from .simulator import (
    ChannelConfig,
    GENERATOR_NAME,
    TrafficProfile,
    critical_crypto_octets,
    run_session,
)
from . import vectordata

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTEGRITY = 2
EXIT_REPLAY = 3
EXIT_BLACKOUT = 4

TABLE1_SCHEMES = ("plain", "wep", "tkip", "motkip")

_KEYFILE_FIELDS = {"tk": 16, "mic_tx": 8, "mic_rx": 8, "ks": 6, "wep_key": 13}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1, not argparse's default 2
        raise UsageError(message)


def load_key_file(path: str) -> KeyMaterial:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read key file: {exc}") from exc
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected name = hex")
        name, _, value = line.partition("=")
        values[name.strip()] = value.strip()
    kwargs = {}
    for name, length in _KEYFILE_FIELDS.items():
        if name not in values:
            raise UsageError(f"{path}: missing {name}")
        try:
            octets = bytes.fromhex(values[name])
        except ValueError as exc:
            raise UsageError(f"{path}: {name} is not valid hex") from exc
        if len(octets) != length:
            raise UsageError(f"{path}: {name} must be {length} octets")
        kwargs[name] = octets
    try:
        key_id = int(values.get("key_id", "0"), 0)
        return KeyMaterial(key_id=key_id, **kwargs)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _hex_arg(value: str, octets: int, what: str) -> bytes:
    try:
        data = bytes.fromhex(value)
    except ValueError as exc:
        raise UsageError(f"{what} is not valid hex") from exc
    if len(data) != octets:
        raise UsageError(f"{what} must be {octets} octets ({2 * octets} hex digits)")
    return data


def _hex_int(value: str, bits: int, what: str) -> int:
    try:
        number = int(value, 16)
    except ValueError as exc:
        raise UsageError(f"{what} is not valid hex") from exc
    if not 0 <= number < (1 << bits):
        raise UsageError(f"{what} must fit {bits} bits")
    return number


# ---------------------------------------------------------------------------
# keymix
# ---------------------------------------------------------------------------

def cmd_keymix(args) -> int:
    if args.check:
        try:
            count = vectordata.check_keymix(args.check)
        except vectordata.VectorMismatch as exc:
            print(f"FAIL {exc}", file=sys.stderr)
            return EXIT_USAGE
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        print(f"ok keymix vectors: {count} entries")
        return EXIT_OK
    if args.mode == "p1":
        if args.tk is None or args.ta is None or args.iv32 is None:
            raise UsageError("p1 requires --tk, --ta and --iv32")
        tk = _hex_arg(args.tk, 16, "--tk")
        ta = _hex_arg(args.ta, 6, "--ta")
        iv32 = _hex_int(args.iv32, 32, "--iv32")
        p1k = phase1(tk, ta, iv32)
        p1k_hex = b"".join(w.to_bytes(2, "little") for w in p1k).hex()
        print(f"P1 tk={tk.hex()} ta={ta.hex()} iv32={iv32:08x} -> p1k={p1k_hex}")
        return EXIT_OK
    if args.mode == "p2":
        if args.p1k is None or args.tk is None or args.iv16 is None:
            raise UsageError("p2 requires --p1k, --tk and --iv16")
        raw = _hex_arg(args.p1k, 10, "--p1k")
        tk = _hex_arg(args.tk, 16, "--tk")
        iv16 = _hex_int(args.iv16, 16, "--iv16")
        p1k = tuple(int.from_bytes(raw[i : i + 2], "little") for i in range(0, 10, 2))
        seed = phase2(p1k, tk, iv16)
        print(f"P2 p1k={raw.hex()} tk={tk.hex()} iv16={iv16:04x} -> seed={seed.hex()}")
        return EXIT_OK
    raise UsageError("keymix needs a mode (p1 or p2) or --check FILE")


# ---------------------------------------------------------------------------
# encap / decap
# ---------------------------------------------------------------------------

def _exit_code_for(exc: MotkipError) -> int:
    if isinstance(exc, (IcvMismatch, MicFailure)):
        return EXIT_INTEGRITY
    if isinstance(exc, ReplayDetected):
        return EXIT_REPLAY
    if isinstance(exc, Blackout):
        return EXIT_BLACKOUT
    return EXIT_USAGE


def cmd_encap(args) -> int:
    keys = load_key_file(args.key_file)
    family = scheme_family(args.scheme)
    da = _hex_arg(args.da, 6, "--da")
    sa = _hex_arg(args.sa, 6, "--sa")
    if args.hex is not None:
        # single-frame hex mode: one MSDU in, dump records as hex lines out
        try:
            payload = bytes.fromhex(args.hex)
        except ValueError as exc:
            raise UsageError("--hex payload is not valid hex") from exc
        tx = SecurityAssociation("transmitter", keys, ta=sa)
        msdu = Msdu(da=da, sa=sa, payload=payload)
        buf = io.BytesIO()
        for mpdu in encap_msdu(family, keys, tx, msdu, args.max_fragment):
            buf.seek(0)
            buf.truncate()
            write_frames(buf, [mpdu])
            print(buf.getvalue().hex())
        return EXIT_OK
    if not args.infile or not args.out:
        raise UsageError("encap needs --in and --out (or --hex PAYLOAD)")
    try:
        payload = Path(args.infile).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc
    tx = SecurityAssociation("transmitter", keys, ta=sa)
    frames_out = []
    for off in range(0, len(payload), args.msdu_size) or [0]:
        chunk = payload[off : off + args.msdu_size]
        msdu = Msdu(da=da, sa=sa, payload=chunk)
        frames_out.extend(encap_msdu(family, keys, tx, msdu, args.max_fragment))
    with open(args.out, "wb") as fh:
        count = write_frames(fh, frames_out)
    print(f"encapsulated {len(payload)} octets into {count} {family} frames -> {args.out}")
    return EXIT_OK


def _decap_hex(args, keys: KeyMaterial) -> int:
    frames_hex = args.hex.split(",") if args.hex else []
    rx = None
    asm = None
    try:
        records = b"".join(bytes.fromhex(part) for part in frames_hex)
    except ValueError as exc:
        raise UsageError("--hex frames are not valid hex") from exc
    frame_no = 0
    try:
        for mpdu in read_frames(io.BytesIO(records)):
            frame_no += 1
            if rx is None:
                rx = SecurityAssociation("receiver", keys, ta=mpdu.sa)
                asm = Reassembler(scheme_family(mpdu.scheme), keys, ops=rx.ops)
            msdu = asm.add(decap_mpdu(keys, rx, mpdu))
            if msdu is not None:
                print(msdu.payload.hex())
    except MotkipError as exc:
        print(f"frame {max(frame_no, 1)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code_for(exc)
    return EXIT_OK


def cmd_decap(args) -> int:
    keys = load_key_file(args.key_file)
    if args.hex is not None:
        return _decap_hex(args, keys)
    if not args.infile or not args.out:
        raise UsageError("decap needs --in and --out (or --hex FRAMES)")
    rx = None
    asm = None
    family = None
    out = io.BytesIO()
    frame_no = 0
    try:
        with open(args.infile, "rb") as fh:
            for mpdu in read_frames(fh):
                frame_no += 1
                if family is None:
                    family = scheme_family(mpdu.scheme)
                    rx = SecurityAssociation("receiver", keys, ta=mpdu.sa)
                    asm = Reassembler(family, keys, ops=rx.ops)
                elif scheme_family(mpdu.scheme) != family:
                    raise UsageError("dump mixes schemes")
                msdu = asm.add(decap_mpdu(keys, rx, mpdu))
                if msdu is not None:
                    out.write(msdu.payload)
    except OSError as exc:
        raise UsageError(f"cannot read dump: {exc}") from exc
    except MotkipError as exc:
        kind = type(exc).__name__
        print(f"frame {max(frame_no, 1)}: {kind}: {exc}", file=sys.stderr)
        return _exit_code_for(exc)
    if asm is not None and asm.incomplete():
        print(f"incomplete MSDUs: {asm.incomplete()}", file=sys.stderr)
        return EXIT_USAGE
    try:
        Path(args.out).write_bytes(out.getvalue())
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from exc
    print(f"decapsulated {frame_no} frames into {out.tell()} octets -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


_CONFIG_KEYS = {
    "msdu": int, "count": int, "bytes": int, "seed": int, "loss": float,
    "corrupt": float, "reorder": int, "link_rate": int, "mac_header": int,
    "per_frame_fixed": int, "max_fragment": int, "schemes": str,
}


def _bench_settings(args) -> dict:
    settings = {
        "msdu": 1500, "count": 1000, "bytes": None, "seed": 7, "loss": 0.0,
        "corrupt": 0.0, "reorder": 0, "link_rate": 11_000_000, "mac_header": 24,
        "per_frame_fixed": 0, "max_fragment": 2304, "schemes": ",".join(TABLE1_SCHEMES),
    }
    if args.config:
        for key, value in _read_config_file(args.config).items():
            if key not in _CONFIG_KEYS:
                raise UsageError(f"unknown config key {key!r}")
            try:
                settings[key] = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise UsageError(f"config key {key}: {exc}") from exc
    for key in _CONFIG_KEYS:
        flag = getattr(args, key if key != "bytes" else "bytes_", None)
        if flag is not None:
            settings[key] = flag
    if args.table2 and settings["bytes"] is None:
        settings["bytes"] = 5 * 1024 * 1024
    if settings["bytes"] is not None:
        settings["count"] = max(1, math.ceil(settings["bytes"] / settings["msdu"]))
    return settings


def _bench_keys(seed: int) -> KeyMaterial:
    import random as _random

    rng = _random.Random(seed ^ 0x6D6F746B)
    return KeyMaterial(
        tk=rng.randbytes(16),
        mic_tx=rng.randbytes(8),
        mic_rx=rng.randbytes(8),
        ks=rng.randbytes(6),
        wep_key=rng.randbytes(13),
    )


def cmd_bench(args) -> int:
    settings = _bench_settings(args)
    schemes = [s.strip() for s in settings["schemes"].split(",") if s.strip()]
    for s in schemes:
        if scheme_family(s) not in FAMILIES:
            raise UsageError(f"unknown scheme {s!r}")
    keys = _bench_keys(settings["seed"])
    config = ChannelConfig(
        seed=settings["seed"],
        loss_prob=settings["loss"],
        reorder_depth=settings["reorder"],
        corrupt_prob=settings["corrupt"],
        mac_header_octets=settings["mac_header"],
        per_frame_fixed_octets=settings["per_frame_fixed"],
        link_rate_bits_per_sec=settings["link_rate"],
    )
    rows = []
    wallclock = {}
    for scheme in schemes:
        profile = TrafficProfile(
            msdu_octets=settings["msdu"],
            msdu_count=settings["count"],
            scheme=scheme,
            max_fragment=settings["max_fragment"],
        )
        started = time.perf_counter()
        rows.append(run_session(config, profile, keys))
        wallclock[scheme] = (time.perf_counter() - started) * 1000.0

    header = {
        "artifact": f"motkip {__version__}",
        "backend": backend_name(),
        "generator": GENERATOR_NAME,
        "preset": "table2" if args.table2 else ("table1" if args.table1 else "custom"),
    }
    header.update({k: settings[k] for k in sorted(settings)})
    plain_row = next((r for r in rows if r.scheme == "plain"), None)

    derived = {}
    for row in rows:
        entry = {
            "modeled_throughput_kbps": round(
                row.modeled_throughput_kbps(settings["link_rate"]), 3
            ),
            "critical_crypto_octets": critical_crypto_octets(row.op_counts),
        }
        if plain_row is not None and plain_row.on_air_octets:
            entry["byte_overhead_pct"] = round(
                100.0 * (row.on_air_octets - plain_row.on_air_octets) / plain_row.on_air_octets, 3
            )
            if plain_row.goodput_fraction:
                entry["throughput_degradation_pct"] = round(
                    100.0 * (1.0 - row.goodput_fraction / plain_row.goodput_fraction), 3
                )
        if args.wallclock:
            entry["wallclock_ms_informative"] = round(wallclock[row.scheme], 3)
        derived[row.scheme] = entry

    if args.format == "json":
        doc = {
            "header": header,
            "rows": [r.json_row() for r in rows],
            "op_counts": {r.scheme: r.op_counts for r in rows},
            "derived": derived,
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        from .simulator import CSV_COLUMNS

        lines = [f"# {k}={v}" for k, v in header.items()]
        lines.append(",".join(CSV_COLUMNS + ["critical_crypto_octets", "modeled_kbps"]))
        for row in rows:
            extra = [
                str(derived[row.scheme]["critical_crypto_octets"]),
                f"{derived[row.scheme]['modeled_throughput_kbps']:.3f}",
            ]
            lines.append(",".join(row.csv_row() + extra))
        for scheme, entry in derived.items():
            parts = [f"{k}={v}" for k, v in sorted(entry.items())]
            lines.append(f"# derived {scheme}: " + " ".join(parts))
        text = "\n".join(lines) + "\n"

    if args.out:
        Path(args.out).write_text(text)
        print(f"report -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def _selftest_roundtrip() -> None:
    import random as _random

    rng = _random.Random(0x5357)
    keys = _bench_keys(1)
    for family in FAMILIES:
        clock = Clock()
        sta = bytes.fromhex("020000000001")
        tx = SecurityAssociation("transmitter", keys, ta=sta, clock=clock)
        rx = SecurityAssociation("receiver", keys, ta=sta, clock=clock)
        asm = Reassembler(family, keys, ops=rx.ops)
        for _ in range(25):
            payload = rng.randbytes(rng.randrange(1, 3000))
            msdu = Msdu(da=bytes.fromhex("020000000002"), sa=sta, payload=payload)
            got = None
            for mpdu in encap_msdu(family, keys, tx, msdu, 1024):
                got = asm.add(decap_mpdu(keys, rx, mpdu))
            assert got is not None and got.payload == payload, f"{family} round trip broke"


def _selftest_weak_key_mask() -> None:
    keys = _bench_keys(2)
    p1k = phase1(keys.tk, bytes.fromhex("020000000001"), 0x1234)
    for iv16 in range(0x10000):
        seed = phase2(p1k, keys.tk, iv16)
        # dummy octet: repeat of seed[0] with bit 5 forced on, top bit off
        assert seed[1] == (seed[0] | 0x20) & 0x7F, f"weak-key mask broken at {iv16:#x}"
        assert seed[0] == iv16 >> 8 and seed[2] == iv16 & 0xFF


def _selftest_rc4_involution() -> None:
    import random as _random

    from .crypto import rc4_apply

    rng = _random.Random(0x117)
    for _ in range(64):
        key = rng.randbytes(rng.randrange(1, 64))
        data = rng.randbytes(rng.randrange(0, 512))
        assert rc4_apply(key, rc4_apply(key, data)) == data


def _selftest_replay_window() -> None:
    from .session import ReplayWindow

    win = ReplayWindow()
    assert win.check_and_record(100)
    for value in range(99, 84, -1):
        assert win.check_and_record(value), value
    assert not win.check_and_record(84)
    assert not win.check_and_record(100)


def _selftest_flag_byte() -> None:
    from .frames import FlagByte
    from .errors import ReservedBitsSet

    for octet in range(32):
        assert FlagByte.decode(octet).encode() == octet
    try:
        FlagByte.decode(0xE0)
    except ReservedBitsSet:
        pass
    else:
        raise AssertionError("reserved bits accepted")


def cmd_selftest(args) -> int:
    suites = [(f"vectors:{name}", check) for name, check in vectordata.ALL_CHECKS.items()]
    suites += [
        ("invariants:rc4-involution", _selftest_rc4_involution),
        ("invariants:weak-key-mask", _selftest_weak_key_mask),
        ("invariants:round-trip", _selftest_roundtrip),
        ("invariants:replay-window", _selftest_replay_window),
        ("invariants:flag-byte", _selftest_flag_byte),
    ]
    failed = 0
    for name, check in suites:
        try:
            if name.startswith("vectors:") and args.vectors:
                check(Path(args.vectors) / f"{name.split(':', 1)[1]}.txt")
            else:
                check()
        except (AssertionError, vectordata.VectorMismatch, OSError) as exc:
            print(f"FAIL {name}: {exc}")
            failed += 1
        else:
            print(f"ok {name}")
    return EXIT_OK if failed == 0 else EXIT_USAGE


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="motkip", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"motkip {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keymix", help="phase-1/phase-2 key mixing vectors")
    p.add_argument("mode", nargs="?", choices=["p1", "p2"])
    p.add_argument("--tk")
    p.add_argument("--ta")
    p.add_argument("--iv32")
    p.add_argument("--p1k")
    p.add_argument("--iv16")
    p.add_argument("--check", metavar="FILE", help="validate a vector file")
    p.set_defaults(func=cmd_keymix)

    p = sub.add_parser("encap", help="encapsulate a file (or hex payload) into frames")
    p.add_argument("--scheme", required=True, choices=list(FAMILIES))
    p.add_argument("--key-file", required=True)
    p.add_argument("--in", dest="infile")
    p.add_argument("--out")
    p.add_argument("--hex", metavar="PAYLOAD", help="single-MSDU mode: hex in, hex records out")
    p.add_argument("--msdu-size", type=int, default=1500)
    p.add_argument("--max-fragment", type=int, default=2304)
    p.add_argument("--da", default="020000000002")
    p.add_argument("--sa", default="020000000001")
    p.set_defaults(func=cmd_encap)

    p = sub.add_parser("decap", help="decapsulate a frame dump (or hex records)")
    p.add_argument("--key-file", required=True)
    p.add_argument("--in", dest="infile")
    p.add_argument("--out")
    p.add_argument("--hex", metavar="FRAMES", help="comma-separated hex records in, payload hex out")
    p.set_defaults(func=cmd_decap)

    p = sub.add_parser("bench", help="overhead / throughput comparison report")
    p.add_argument("--table1", action="store_true", help="throughput comparison preset")
    p.add_argument("--table2", action="store_true", help="processing-cost preset (5 MiB)")
    p.add_argument("--msdu", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--bytes", dest="bytes_", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--loss", type=float)
    p.add_argument("--corrupt", type=float)
    p.add_argument("--reorder", type=int)
    p.add_argument("--link-rate", dest="link_rate", type=int)
    p.add_argument("--mac-header", dest="mac_header", type=int)
    p.add_argument("--per-frame-fixed", dest="per_frame_fixed", type=int)
    p.add_argument("--max-fragment", dest="max_fragment", type=int)
    p.add_argument("--schemes")
    p.add_argument("--config", help="key=value settings file; flags override")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.add_argument("--wallclock", action="store_true",
                   help="append informative (non-reproducible) timings")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="recorded vectors and invariant quick-suite")
    p.add_argument("--vectors", help="directory overriding the packaged vector files")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MotkipError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
