"""Channel determinism, accounting identities, forgery outcomes, sweeps."""

import pytest

from motkip import frames
from motkip.simulator import (
    ChannelConfig,
    LinkSession,
    TrafficProfile,
    crc_linearity_tamper,
    critical_crypto_octets,
    reencrypt_under_tsc,
    replay_mutator,
    run_session,
    sweep,
)
from motkip.session import Tsc48


def metrics_fingerprint(m):
    return (m.csv_row(), sorted(m.op_counts.items()), m.events, m.on_air_octets,
            m.sent_mpdus, m.delivered_mpdus, m.lost, m.corrupted, m.rejected_mpdus)


class TestDeterminism:
    def test_identical_seeds_identical_metrics(self, keys):
        config = ChannelConfig(seed=42, loss_prob=0.05, reorder_depth=8, corrupt_prob=0.02)
        profile = TrafficProfile(msdu_octets=700, msdu_count=300, scheme="motkip")
        a = run_session(config, profile, keys)
        b = run_session(config, profile, keys)
        assert metrics_fingerprint(a) == metrics_fingerprint(b)

    def test_different_seeds_differ(self, keys):
        profile = TrafficProfile(msdu_octets=700, msdu_count=200, scheme="tkip")
        a = run_session(ChannelConfig(seed=1, loss_prob=0.1), profile, keys)
        b = run_session(ChannelConfig(seed=6, loss_prob=0.1), profile, keys)
        assert a.lost != b.lost


class TestPerfectChannel:
    @pytest.mark.parametrize("scheme", ["plain", "wep", "tkip", "motkip"])
    def test_everything_delivered(self, keys, scheme):
        metrics = run_session(
            ChannelConfig(seed=5), TrafficProfile(msdu_octets=900, msdu_count=120, scheme=scheme), keys
        )
        assert metrics.delivered_msdus == 120
        assert metrics.verified_msdus == 120
        assert metrics.lost == metrics.corrupted == metrics.rejected_mpdus == 0

    def test_plain_goodput_arithmetic(self, keys):
        config = ChannelConfig(seed=6)
        metrics = run_session(config, TrafficProfile(msdu_octets=1500, msdu_count=50, scheme="plain"), keys)
        assert metrics.goodput_fraction == pytest.approx(1500 / (1500 + 24), abs=1e-12)

    def test_per_frame_fixed_octets_accounted(self, keys):
        config = ChannelConfig(seed=6, per_frame_fixed_octets=10)
        metrics = run_session(config, TrafficProfile(msdu_octets=1500, msdu_count=10, scheme="plain"), keys)
        assert metrics.on_air_octets == 10 * (1500 + 24 + 10)


class TestCorruption:
    def test_corruption_lands_on_icv_never_mic(self, keys):
        config = ChannelConfig(seed=7, corrupt_prob=0.01)
        profile = TrafficProfile(msdu_octets=1000, msdu_count=1500, scheme="tkip")
        metrics = run_session(config, profile, keys)
        assert metrics.corrupted > 0
        assert metrics.icv_rejects == metrics.corrupted
        assert metrics.mic_failures == 0
        assert not any(e["event"] == "Blackout" for e in metrics.events)

    def test_conservation_ledger(self, keys):
        config = ChannelConfig(seed=8, loss_prob=0.1, corrupt_prob=0.02, reorder_depth=8)
        for scheme in ("plain", "wep", "tkip", "motkip"):
            profile = TrafficProfile(msdu_octets=600, msdu_count=400, scheme=scheme)
            m = run_session(config, profile, keys)
            assert m.sent_mpdus == m.delivered_mpdus + m.lost + m.rejected_mpdus, scheme
            assert m.delivered_msdus <= m.msdu_count


class TestOverheadIdentities:
    def test_loss_free_on_air_matches_constants(self, keys):
        config = ChannelConfig(seed=9)
        msdu_octets, count, max_frag = 1500, 40, 2304
        for scheme in ("plain", "wep", "tkip", "motkip"):
            profile = TrafficProfile(msdu_octets=msdu_octets, msdu_count=count, scheme=scheme, max_fragment=max_frag)
            m = run_session(config, profile, keys)
            per_msdu_payload = msdu_octets + frames.MIC_PER_MSDU[scheme]
            if scheme == "plain":
                per_msdu_payload = msdu_octets
            # unfragmented at this size: one MPDU per MSDU
            if scheme == "motkip":
                headers = frames.EXPANSION["motkip-first"] + (count - 1) * frames.EXPANSION["motkip-next"]
            else:
                key = {"plain": "plain", "wep": "wep", "tkip": "tkip"}[scheme]
                headers = count * frames.EXPANSION[key]
            expected = count * (24 + per_msdu_payload) + headers
            assert m.on_air_octets == expected, scheme

    @pytest.mark.parametrize("n", [2, 10, 100])
    def test_motkip_vs_tkip_identity(self, keys, n):
        config = ChannelConfig(seed=10)
        tkip = run_session(config, TrafficProfile(msdu_octets=64, msdu_count=n, scheme="tkip"), keys)
        motkip = run_session(config, TrafficProfile(msdu_octets=64, msdu_count=n, scheme="motkip"), keys)
        assert motkip.on_air_octets == tkip.on_air_octets + 1 - 3 * (n - 1)

    def test_motkip_cheaper_for_multi_frame_epochs(self, keys):
        config = ChannelConfig(seed=11)
        for n in (2, 5, 50):
            tkip = run_session(config, TrafficProfile(msdu_octets=128, msdu_count=n, scheme="tkip"), keys)
            motkip = run_session(config, TrafficProfile(msdu_octets=128, msdu_count=n, scheme="motkip"), keys)
            assert motkip.on_air_octets < tkip.on_air_octets


class TestReorder:
    def test_full_depth_reorder_all_accepted(self, keys):
        config = ChannelConfig(seed=12, reorder_depth=16)
        profile = TrafficProfile(msdu_octets=400, msdu_count=600, scheme="tkip")
        m = run_session(config, profile, keys)
        assert m.replay_rejects == 0
        assert m.delivered_msdus == 600


class TestForgery:
    def test_replayed_frame_detected(self, keys):
        config = ChannelConfig(seed=13)
        session = LinkSession(config, TrafficProfile(msdu_octets=300, msdu_count=20, scheme="tkip"), keys)
        session.transmit()
        outcome = session.inject_forgery(replay_mutator(index=4))
        assert outcome == "ReplayDetected"
        m = session.finish()
        assert m.replay_rejects == 1
        assert any(
            e["event"] == "ForgeryOutcome" and e["details"]["outcome"] == "ReplayDetected"
            for e in m.events
        )

    def test_crc_linearity_forgery_caught_by_mic(self, keys):
        config = ChannelConfig(seed=14)
        session = LinkSession(config, TrafficProfile(msdu_octets=300, msdu_count=10, scheme="tkip"), keys)
        session.transmit(3)
        session.intercept_next(lambda mpdu: crc_linearity_tamper(mpdu, flip_offset=7, flip_mask=0x08))
        session.transmit(1)
        m_partial = session.metrics
        assert m_partial.mic_failures == 1
        assert m_partial.icv_rejects == 0  # the patched ICV verified
        session.transmit()
        m = session.finish()
        assert m.mic_failures == 1

    def test_two_forgeries_trigger_blackout(self, keys):
        config = ChannelConfig(seed=15)
        session = LinkSession(config, TrafficProfile(msdu_octets=300, msdu_count=30, scheme="tkip"), keys)
        session.intercept_next(lambda mpdu: crc_linearity_tamper(mpdu, 1, 0x01))
        session.transmit(1)
        session.clock.advance(10_000)
        session.intercept_next(lambda mpdu: crc_linearity_tamper(mpdu, 2, 0x02))
        session.transmit(1)
        session.transmit()  # the rest of the traffic arrives inside the blackout
        m = session.finish()
        assert m.mic_failures == 2
        assert any(e["event"] == "Blackout" for e in m.events)
        assert any(e["event"] == "Disassociate" for e in m.events)
        assert m.blackout_rejects > 0  # the rest of the traffic hit the blackout

    def test_counter_shift_replay_beats_tkip_but_not_motkip(self, keys):
        # classic TKIP: the MIC ignores the counter, so a re-encrypted copy
        # under a fresh counter is accepted as new traffic
        config = ChannelConfig(seed=16)
        tkip_session = LinkSession(config, TrafficProfile(msdu_octets=200, msdu_count=5, scheme="tkip"), keys)
        tkip_session.transmit()
        src = tkip_session.captured[2]
        shifted = reencrypt_under_tsc(keys, tkip_session.rx, src, Tsc48(0, 100))
        outcome = tkip_session.inject_forgery(lambda s: shifted)
        assert outcome == "ok"
        assert tkip_session.finish().delivered_msdus == 6  # forged duplicate counted as delivered

        # the counter-covering MIC rejects the same construction
        motkip_session = LinkSession(config, TrafficProfile(msdu_octets=200, msdu_count=5, scheme="motkip"), keys)
        motkip_session.transmit()
        src = motkip_session.captured[2]
        shifted = reencrypt_under_tsc(keys, motkip_session.rx, src, Tsc48(0, 100))
        outcome = motkip_session.inject_forgery(lambda s: shifted)
        assert outcome == "MicFailure"
        assert motkip_session.finish().mic_failures == 1


class TestSweep:
    def test_rows_and_order(self, keys):
        configs = [ChannelConfig(seed=1)]
        profiles = [TrafficProfile(msdu_octets=500, msdu_count=30, scheme=s)
                    for s in ("plain", "wep", "tkip", "motkip")]
        rows = sweep(configs, profiles, keys)
        assert [r.scheme for r in rows] == ["plain", "wep", "tkip", "motkip"]

    def test_doubling_count_roughly_doubles_on_air(self, keys):
        config = ChannelConfig(seed=2)
        small = run_session(config, TrafficProfile(msdu_octets=800, msdu_count=100, scheme="motkip"), keys)
        big = run_session(config, TrafficProfile(msdu_octets=800, msdu_count=200, scheme="motkip"), keys)
        per_frame = small.on_air_octets / 100
        assert abs(big.on_air_octets - 2 * small.on_air_octets) <= per_frame

    def test_goodput_ordering_at_mtu(self, keys):
        config = ChannelConfig(seed=3)
        rows = {s: run_session(config, TrafficProfile(msdu_octets=1500, msdu_count=100, scheme=s), keys)
                for s in ("plain", "wep", "tkip", "motkip")}
        assert (rows["plain"].goodput_fraction > rows["wep"].goodput_fraction
                > rows["motkip"].goodput_fraction > rows["tkip"].goodput_fraction)


class TestOpAccounting:
    def test_critical_octets_excludes_precompute(self):
        counts = {"rc4_octets": 100, "michael_octets": 50, "crc_octets": 30,
                  "phase1": 2, "phase2": 10, "phase2_precomputed": 6}
        assert critical_crypto_octets(counts) == 100 + 50 + 30 + 2 * 26 + 4 * 28

    def test_motkip_receiver_runs_no_online_phase2_in_order(self, keys):
        m = run_session(ChannelConfig(seed=4),
                        TrafficProfile(msdu_octets=500, msdu_count=200, scheme="motkip"), keys)
        assert m.op_counts["phase2_rx_online"] == 0
        assert m.op_counts["phase2_precomputed"] >= 200

    def test_plain_does_no_crypto(self, keys):
        m = run_session(ChannelConfig(seed=4),
                        TrafficProfile(msdu_octets=500, msdu_count=50, scheme="plain"), keys)
        assert critical_crypto_octets(m.op_counts) == 0


class TestEventLog:
    def test_jsonl_serialization(self, keys):
        import json

        config = ChannelConfig(seed=17)
        session = LinkSession(config, TrafficProfile(msdu_octets=200, msdu_count=4, scheme="tkip"), keys)
        session.intercept_next(lambda m: crc_linearity_tamper(m, 0, 0x01))
        session.transmit()
        m = session.finish()
        lines = m.events_jsonl().splitlines()
        assert lines
        for line in lines:
            event = json.loads(line)
            assert set(event) == {"t", "event", "tsc", "details"}
        assert any(json.loads(l)["event"] == "MicFailure" for l in lines)


class TestValidation:
    def test_probability_bounds(self):
        with pytest.raises(ValueError):
            ChannelConfig(loss_prob=1.5)

    def test_reorder_bound(self):
        with pytest.raises(ValueError):
            ChannelConfig(reorder_depth=17)

    def test_profile_bounds(self):
        with pytest.raises(ValueError):
            TrafficProfile(msdu_octets=0, msdu_count=1, scheme="plain")
        with pytest.raises(ValueError):
            TrafficProfile(msdu_octets=10, msdu_count=1, scheme="nonsense")
