"""P&M session: encoding, detection, sifting, the attacker."""

import math

import numpy as np
import pytest

from dpsqkd.optics import InterferometerConfig, PulseTrain, propagate_analytic
from dpsqkd.protocol import (AliceRecord, ClickRecord, DetectorModel,
                             SessionConfig, detect, extract_bob_bits,
                             intercept_resend, load_session_config,
                             prepare_pulse_train, run_session, sift,
                             SessionStats)


def test_alice_record_key_relation():
    rec = AliceRecord(np.array([0, 1, 1, 0, 1]), 0.45)
    assert list(rec.s) == [1, 0, 1, 1]
    assert rec.n_key_bins == 4
    with pytest.raises(ValueError):
        AliceRecord(np.array([0, 2]), 0.45)
    with pytest.raises(ValueError):
        AliceRecord(np.array([], dtype=np.uint8), 0.45)


def test_prepare_pulse_train_signs():
    tr = prepare_pulse_train(AliceRecord(np.array([0, 0, 0]), 0.45))
    assert np.allclose(tr.amplitudes, [0.45, 0.45, 0.45])
    tr2 = prepare_pulse_train(AliceRecord(np.array([0, 1, 0]), 0.45))
    assert np.allclose(tr2.amplitudes, [0.45, -0.45, 0.45])
    tr3 = prepare_pulse_train(AliceRecord(np.array([0, 1]), 0.0))
    assert np.all(tr3.amplitudes == 0.0)


def test_prepare_warns_above_one_photon():
    with pytest.warns(UserWarning):
        prepare_pulse_train(AliceRecord(np.array([0, 1]), 1.5))


def test_detector_model_validation():
    with pytest.raises(ValueError):
        DetectorModel(efficiency=1.2)
    with pytest.raises(ValueError):
        DetectorModel(dark_click_prob=-0.1)
    m = DetectorModel(efficiency=0.5)
    p = m.click_probabilities(np.array([0.45]))
    assert abs(p[0] - (1 - math.exp(-0.5 * 0.2025))) < 1e-14


def test_detect_table_rows():
    # constant phases: D0 clicks at rate 1-exp(-|alpha|^2), D1 never
    cfg = InterferometerConfig.compensated()
    rng = np.random.default_rng(0)
    n = 40000
    rec = AliceRecord(np.zeros(n + 1, dtype=np.uint8), math.sqrt(0.2))
    o4, o5 = propagate_analytic(prepare_pulse_train(rec), cfg)
    clicks = detect(o4, o5, DetectorModel.ideal(), rng)
    p = 1 - math.exp(-0.2)
    rate = clicks.d0.mean()
    assert abs(rate - p) < 3 * math.sqrt(p * (1 - p) / n)
    assert not clicks.d1.any()

    # alternating phases: all bits 1, only D1 clicks
    rec2 = AliceRecord(np.arange(n + 1) % 2, math.sqrt(0.2))
    o4, o5 = propagate_analytic(prepare_pulse_train(rec2), cfg)
    clicks2 = detect(o4, o5, DetectorModel.ideal(), rng)
    assert not clicks2.d0.any()
    assert abs(clicks2.d1.mean() - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_click_probability_phase_independent():
    # alpha -> -alpha leaves |amplitudes|^2, hence the click law, unchanged
    cfg = InterferometerConfig.compensated(phi2=0.4, phi_delta=0.1)
    model = DetectorModel(efficiency=0.7)
    rec = AliceRecord(np.array([0, 1, 1, 0]), 0.45)
    neg = AliceRecord(rec.s_prime, -0.45)
    for a, b in ((rec, neg),):
        oa = propagate_analytic(prepare_pulse_train(a), cfg)
        ob = propagate_analytic(prepare_pulse_train(b), cfg)
        for ta, tb in zip(oa, ob):
            pa = model.click_probabilities(ta.amplitudes)
            pb = model.click_probabilities(tb.amplitudes)
            assert np.allclose(pa, pb, atol=1e-15)


def test_extract_bob_bits_cases():
    clicks = ClickRecord(d0=[True, False, True, False],
                         d1=[False, False, True, True])
    bits, disclosed, n_double = extract_bob_bits(clicks)
    assert list(bits) == [0, -1, -1, 1]
    assert list(disclosed) == [1, 4]
    assert n_double == 1


def test_sift_cases():
    rec = AliceRecord(np.array([0, 1, 1, 0, 1]), 0.45)  # s = 1,0,1,1
    bits = np.array([1, -1, 1, 0], dtype=np.int8)
    ak, bk, qber = sift(rec, bits, np.array([1, 3, 4]))
    assert list(ak) == [1, 1, 1]
    assert list(bk) == [1, 1, 0]
    assert abs(qber - 1 / 3) < 1e-15

    ak, bk, qber = sift(rec, bits, np.array([], dtype=int))
    assert qber is None and ak.size == 0

    with pytest.raises(ValueError):
        sift(rec, bits, np.array([5]))


def test_sift_constructed_error_rate():
    rng = np.random.default_rng(8)
    rec = AliceRecord.random(100, 0.45, rng)
    bits = rec.s.astype(np.int8).copy()
    bits[41] ^= 1  # one flipped bin out of 100 disclosed
    ak, bk, qber = sift(rec, bits, np.arange(1, 101))
    assert qber == 0.01


def test_intercept_resend_noop_at_zero():
    rng = np.random.default_rng(1)
    tr = PulseTrain(0, np.array([0.45, -0.45, 0.45]))
    out, transcript = intercept_resend(tr, 0.0, rng)
    assert out is tr
    assert not transcript.intercepted.any()


def test_intercept_resend_full_knowledge_zero_qber():
    # amplified pulses: Eve resolves every interval, resend is faithful
    rng = np.random.default_rng(2)
    rec = AliceRecord.random(500, 6.0, rng)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = prepare_pulse_train(rec)
    out, transcript = intercept_resend(tr, 1.0, rng)
    assert transcript.known_bins.size == 500
    cfg = InterferometerConfig.compensated()
    o4, o5 = propagate_analytic(out, cfg)
    clicks = detect(o4, o5, DetectorModel.ideal(), rng)
    bits, disclosed, _ = extract_bob_bits(clicks)
    _, _, qber = sift(rec, bits, disclosed)
    assert qber == 0.0


def test_intercept_resend_full_attack_qber():
    # frozen from an independent straight-loop Monte Carlo oracle:
    # QBER -> 0.5*exp(-|alpha|^2) = 0.40937 at |alpha|^2 = 0.2 (sd 0.0037)
    stats = run_session(SessionConfig(n_bins=100000, alpha2=0.2,
                                      eve_fraction=1.0, seed=20))
    sigma = 0.003652
    assert abs(stats.qber - 0.409365) < 3 * sigma


def test_run_session_examples():
    p = 1 - math.exp(-0.2)
    sigma = math.sqrt(p * (1 - p) / 100000)
    st = run_session(SessionConfig(n_bins=100000, alpha2=0.2, seed=5))
    assert abs(st.sifted_rate - p) < 3 * sigma
    assert st.qber == 0.0 and st.double_clicks == 0 and st.errors == 0

    p2 = 1 - math.exp(-0.1)
    st2 = run_session(SessionConfig(n_bins=100000, alpha2=0.2,
                                    efficiency=0.5, seed=6))
    assert abs(st2.sifted_rate - p2) < 3 * math.sqrt(p2 * (1 - p2) / 100000)

    st3 = run_session(SessionConfig(n_bins=0))
    assert st3.sifted_length == 0 and st3.qber is None


def test_seed_determinism_bitwise():
    cfg = SessionConfig(n_bins=20000, alpha2=0.3, efficiency=0.8,
                        dark_click_prob=1e-4, eve_fraction=0.35, seed=99)
    a = run_session(cfg)
    b = run_session(cfg)
    assert a.csv_row() == b.csv_row()
    assert np.array_equal(a.disclosed_bins, b.disclosed_bins)


def test_dark_clicks_make_doubles_possible():
    st = run_session(SessionConfig(n_bins=50000, alpha2=0.2,
                                   dark_click_prob=0.05, seed=12))
    assert st.double_clicks > 0
    assert st.qber is not None and st.qber > 0.0


def test_session_config_file_roundtrip(tmp_path):
    p = tmp_path / "session.cfg"
    p.write_text("# demo\nN = 1000\nalphaSquared = 0.25\nphi2 = 0.1\n"
                 "efficiency = 0.9\ndarkClickProb = 0.001\n"
                 "eveFraction = 0.5\nseed = 42\n")
    cfg = load_session_config(p)
    assert cfg.n_bins == 1000 and cfg.alpha2 == 0.25 and cfg.seed == 42
    assert cfg.eve_fraction == 0.5


def test_session_config_file_errors(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("N = 10\nbogusKey = 3\n")
    with pytest.raises(ValueError, match="bogusKey"):
        load_session_config(p)
    p.write_text("alphaSquared = 0.2\n")
    with pytest.raises(ValueError, match="'N'"):
        load_session_config(p)
    p.write_text("N = ten\n")
    with pytest.raises(ValueError, match="invalid value"):
        load_session_config(p)


def test_csv_schema():
    st = run_session(SessionConfig(n_bins=100, seed=1))
    header = SessionStats.csv_header()
    row = st.csv_row()
    assert header.startswith("schema_version,")
    assert len(row.split(",")) == len(header.split(","))
    assert row.split(",")[0] == "1"
