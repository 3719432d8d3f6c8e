"""Top-level acceptance gate.

Each test here is one shipping criterion, run at its stated tolerance
and (where applicable) its stated runtime budget. They intentionally
re-derive expectations from scratch (brute-force oracles, scripted
clients) rather than trusting library internals.

Known red: the Bessel family cannot reach 30 dB stopband attenuation at
1.5x cutoff for orders 6-10 — its maximally-flat-delay prototype rolls
off far too slowly (measured ~18 dB forward-backward at order 10). The
stopband check is parametrized per family so that failure stays
isolated and the other four families still gate the build.
"""

import json
import threading
import time
import urllib.request
import urllib.error

import numpy as np
import pytest

from phaserepair import (
    DegradeConfig,
    FilterFamily,
    FilterSpec,
    GroundTruth,
    LossConfig,
    StftParams,
    Waveform,
    istft,
    lsd,
    mrstft_loss,
    mrwave_loss,
    repair,
    replace_phase,
    stft,
    total_loss,
    write_wav,
)
from phaserepair.cli import main as cli_main
from phaserepair.degrade import DEFAULT_ATTEN_DB, DEFAULT_RIPPLE_DB, degrade
from phaserepair.filters import design_lowpass_sos, sos_response, sosfiltfilt
from phaserepair.repair import griffin_lim
from phaserepair.spectral import ComplexSpectrogram, magnitude
from phaserepair.server import build_server
from phaserepair.session import aggregate, blinded_id, load_responses, load_session

from signals import make_piano_clip
from test_metrics import oracle_mrstft, oracle_mrwave

FS = 16000
CUTOFFS_KHZ = (2500.0, 3000.0, 3500.0, 4000.0)
IIR = ("butterworth", "cheby1", "cheby2", "elliptic", "bessel")


def test_stft_round_trip_100_signals():
    """Max abs reconstruction error < 1e-6 over 100 random 1-s signals,
    all loss resolutions plus the default; < 30 s."""
    params = [
        StftParams(fft_size=512, hop=256, win_length=512),
        StftParams(fft_size=1024, hop=256, win_length=1024),  # default
        StftParams(fft_size=1024, hop=512, win_length=1024),
        StftParams(fft_size=2048, hop=1024, win_length=2048),
    ]
    rng = np.random.default_rng(2024)
    t0 = time.monotonic()
    worst = 0.0
    for _ in range(100):
        x = 0.5 * rng.standard_normal(FS)
        w = Waveform(x, FS)
        for p in params:
            back = istft(stft(w, p), length=FS)
            worst = max(worst, float(np.max(np.abs(back.samples - x))))
    elapsed = time.monotonic() - t0
    assert worst < 1e-6, f"worst reconstruction error {worst:.3e}"
    assert elapsed < 30.0, f"round-trip suite took {elapsed:.1f} s"


def test_ground_truth_phase_identity_20_clips():
    """repair(x, GroundTruth{x}) = x within 1e-6 on 20 clips."""
    worst = 0.0
    for seed in range(20):
        w = Waveform(make_piano_clip(seed=seed, duration_s=1.0), FS)
        out = repair(w, GroundTruth(w), StftParams())
        worst = max(worst, float(np.max(np.abs(out.samples - w.samples))))
    assert worst < 1e-6, f"worst identity error {worst:.3e}"


def test_phase_replacement_magnitude_exact_1000_trials():
    """|replace_phase(A, B)| equals |A| within 1e-9, 1000 random trials."""
    rng = np.random.default_rng(7)
    p = StftParams(fft_size=256, hop=64, win_length=256)
    worst = 0.0
    for _ in range(1000):
        shape = (int(rng.integers(2, 12)), p.n_bins)
        a = ComplexSpectrogram(
            (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)), p, FS)
        b = ComplexSpectrogram(
            (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)), p, FS)
        out = replace_phase(a, b)
        worst = max(worst, float(np.max(np.abs(magnitude(out) - magnitude(a)))))
    assert worst < 1e-9, f"worst magnitude deviation {worst:.3e}"


def test_input_row_lsd_trend():
    """LSD(GT, degraded) strictly decreasing across 2.5/3/3.5/4 kHz for
    every family; per-cutoff means within [1.0, 3.5]; < 2 min."""
    t0 = time.monotonic()
    clips = [Waveform(make_piano_clip(seed=s), FS) for s in range(5)]
    table = {}
    for family in FilterFamily:
        row = []
        for cutoff in CUTOFFS_KHZ:
            spec = FilterSpec(family=family, order=8, cutoff_hz=cutoff,
                              passband_ripple_db=DEFAULT_RIPPLE_DB,
                              stopband_atten_db=DEFAULT_ATTEN_DB)
            row.append(float(np.mean([lsd(c, degrade(c, spec)) for c in clips])))
        table[family.value] = row
    elapsed = time.monotonic() - t0

    for family, row in table.items():
        assert all(row[i] > row[i + 1] for i in range(len(row) - 1)), (
            f"{family}: LSD not strictly decreasing: {row}")
    for i, cutoff in enumerate(CUTOFFS_KHZ):
        mean = float(np.mean([table[f][i] for f in table]))
        assert 1.0 <= mean <= 3.5, f"mean LSD at {cutoff:.0f} Hz = {mean:.3f}"
    assert elapsed < 120.0, f"trend suite took {elapsed:.1f} s"


def _conformance_sweep(family):
    """Worst passband deviation and worst forward-backward stopband
    attenuation over orders 6-10 x cutoffs 2.5-4 kHz."""
    worst_pass = 0.0
    worst_stop = np.inf
    rng = np.random.default_rng(11)
    for order in range(6, 11):
        for cutoff in CUTOFFS_KHZ:
            sos = design_lowpass_sos(family, order, cutoff, FS,
                                     ripple_db=DEFAULT_RIPPLE_DB,
                                     atten_db=DEFAULT_ATTEN_DB)
            for section in sos:
                assert np.all(np.abs(np.roots(section[3:])) < 1.0), (
                    f"{family} order {order} cutoff {cutoff}: unstable")
            pb = np.linspace(10.0, 0.8 * cutoff, 120)
            h = np.abs(sos_response(sos, pb, FS))
            worst_pass = max(worst_pass, float(np.max(np.abs(
                20 * np.log10(np.maximum(h, 1e-300))))))
            # forward-backward attenuation via a long probe per stopband tone
            sb = np.linspace(1.5 * cutoff, FS / 2 * 0.98, 25)
            hsb = np.abs(sos_response(sos, sb, FS)) ** 2  # two passes
            worst_stop = min(worst_stop, float(np.min(
                -20 * np.log10(np.maximum(hsb, 1e-300)))))
    return worst_pass, worst_stop


@pytest.mark.parametrize("family", IIR)
def test_filter_conformance_passband(family):
    """Passband deviation <= 2 dB (<= ripple for rippled families)."""
    limit = DEFAULT_RIPPLE_DB if family in ("cheby1", "elliptic") else 2.0
    worst_pass, _ = _conformance_sweep(family)
    assert worst_pass <= limit + 1e-6, (
        f"{family}: passband deviation {worst_pass:.3f} dB > {limit} dB")


@pytest.mark.parametrize("family", IIR)
def test_filter_conformance_stopband(family):
    """Stopband attenuation >= 30 dB at >= 1.5x cutoff, forward-backward."""
    _, worst_stop = _conformance_sweep(family)
    assert worst_stop >= 30.0, (
        f"{family}: stopband attenuation {worst_stop:.1f} dB < 30 dB")


def test_filter_conformance_runtime():
    """The full 100-design sweep finishes inside a minute."""
    t0 = time.monotonic()
    for family in IIR:
        _conformance_sweep(family)
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0, f"conformance sweep took {elapsed:.1f} s"


def test_loss_oracle_equivalence_50_pairs():
    """mrstft, mrwave, total match brute-force reimplementations within
    1e-9 relative; all zero at identity."""
    rng = np.random.default_rng(99)
    cfg = LossConfig()
    for _ in range(50):
        n = int(rng.integers(3000, 9000))
        y = Waveform(0.4 * rng.standard_normal(n), FS)
        y_hat = Waveform(y.samples + 0.05 * rng.standard_normal(n), FS)

        got, want = mrstft_loss(y, y_hat, cfg), oracle_mrstft(y.samples, y_hat.samples)
        assert got == pytest.approx(want, rel=1e-9)
        got, want = mrwave_loss(y, y_hat, cfg), oracle_mrwave(y.samples, y_hat.samples, FS)
        assert got == pytest.approx(want, rel=1e-9)
        assert total_loss(y, y_hat, cfg) == pytest.approx(
            oracle_mrstft(y.samples, y_hat.samples)
            + 1000.0 * oracle_mrwave(y.samples, y_hat.samples, FS), rel=1e-9)

    w = Waveform(0.4 * rng.standard_normal(5000), FS)
    assert mrstft_loss(w, w, cfg) == 0.0
    assert mrwave_loss(w, w, cfg) == 0.0
    assert total_loss(w, w, cfg) == 0.0


def test_lsd_constant_log_shift():
    """lsd(y, 10*y) = 2.0 +- 1e-6 on full-band noise."""
    rng = np.random.default_rng(5)
    y = Waveform(0.05 * rng.standard_normal(FS), FS)
    y10 = Waveform(10.0 * y.samples, FS)
    assert lsd(y10, y) == pytest.approx(2.0, abs=1e-6)


def test_griffin_lim_consistency_non_increasing():
    """c_k non-increasing over 100 iterations on 10 random magnitudes
    (slack 1e-7)."""
    rng = np.random.default_rng(31)
    p = StftParams(fft_size=512, hop=128, win_length=512)
    for trial in range(10):
        mag = np.abs(stft(Waveform(0.3 * rng.standard_normal(4000), FS), p).data)
        _, errs = griffin_lim(mag, p, iterations=100, sample_rate_hz=FS,
                              return_errors=True)
        for i in range(len(errs) - 1):
            assert errs[i + 1] <= errs[i] + 1e-7, (
                f"trial {trial}: c_{i + 1}={errs[i + 1]:.9f} > c_{i}={errs[i]:.9f}")


def test_cmd_degrade_byte_determinism(tmp_path):
    """Byte-identical outputs across two runs and across workers {1, 4}."""
    src = tmp_path / "src"
    src.mkdir()
    for i in range(6):
        w = Waveform(make_piano_clip(seed=40 + i, duration_s=1.0), FS)
        write_wav(src / f"c{i}.wav", w, format="float32")

    outs = {}
    for name, workers in (("r1", 1), ("r2", 1), ("w4", 4)):
        out = tmp_path / name
        code = cli_main(["degrade", str(src / "*.wav"), "--out", str(out),
                         "--seed", "123", "--workers", str(workers)])
        assert code == 0
        outs[name] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}

    assert outs["r1"] == outs["r2"], "two identical runs diverged"
    assert outs["r1"] == outs["w4"], "worker counts {1, 4} diverged"


def test_listening_protocol_conformance(tmp_path):
    """Scripted headless client: 11-trial AB session counts exactly 10
    evaluation trials per participant; out-of-range MOS rejected; no
    condition label in any served URL or payload."""
    rng = np.random.default_rng(0)
    trials = []
    for i in range(11):
        stem = "practice" if i == 0 else f"t{i - 1}"
        for cond in ("repaired", "degraded"):
            write_wav(tmp_path / f"{stem}_{cond}.wav",
                      Waveform(0.1 * rng.standard_normal(800), FS),
                      format="float32")
        trials.append({
            "id": stem, "is_practice": i == 0,
            "a": {"condition": "repaired", "path": f"{stem}_repaired.wav"},
            "b": {"condition": "degraded", "path": f"{stem}_degraded.wav"},
        })
    (tmp_path / "session.json").write_text(json.dumps(
        {"id": "acc-ab", "protocol": "AB", "randomize": True, "trials": trials}))
    cfg = load_session(tmp_path / "session.json")
    results = tmp_path / "results.jsonl"
    srv = build_server(cfg, results, port=0)
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{srv.server_address[1]}"

    def get(url):
        with urllib.request.urlopen(url) as r:
            return r.read()

    def post(payload):
        req = urllib.request.Request(
            f"{base}/api/response", data=json.dumps(payload).encode(),
            headers={"Content-Type": "application/json"}, method="POST")
        try:
            with urllib.request.urlopen(req) as r:
                return r.status
        except urllib.error.HTTPError as e:
            return e.code

    try:
        served_text = []
        for participant in ("p1", "p2"):
            raw = get(f"{base}/api/session/{cfg.id}?participant={participant}")
            served_text.append(raw.decode())
            man = json.loads(raw)
            assert len(man["items"]) == 11
            for item in man["items"]:
                served_text.append(item["sample_a"])
                served_text.append(item["sample_b"])
                get(base + item["sample_a"])
                get(base + item["sample_b"])
                status = post({"session": cfg.id, "protocol": "AB",
                               "participant": participant, "trial": item["id"],
                               "choice": "B",
                               "playback_complete": {"a": True, "b": True}})
                assert status == 200

        agg = aggregate(load_responses(results), cfg)
        assert agg["n_responses"] == 20, "exactly 10 eval trials x 2 participants"
        assert agg["n_participants"] == 2

        # MOS ratings outside 1..5 must be rejected by the same endpoint
        mos_doc = {
            "id": "acc-mos", "protocol": "MOS",
            "trials": [{"id": "m0", "reference": "practice_repaired.wav",
                        "stimuli": [
                            {"condition": "repaired", "path": "t0_repaired.wav"},
                            {"condition": "degraded", "path": "t0_degraded.wav"}]}],
        }
        (tmp_path / "mos.json").write_text(json.dumps(mos_doc))
        mos_cfg = load_session(tmp_path / "mos.json")
        mos_srv = build_server(mos_cfg, tmp_path / "mos.jsonl", port=0)
        threading.Thread(target=mos_srv.serve_forever, daemon=True).start()
        mos_base = f"http://127.0.0.1:{mos_srv.server_address[1]}"
        try:
            stim = blinded_id(mos_cfg, "m0", "repaired")
            played = {"reference": True,
                      blinded_id(mos_cfg, "m0", "repaired"): True,
                      blinded_id(mos_cfg, "m0", "degraded"): True}
            for bad in (0, 6, -1, 99):
                req = urllib.request.Request(
                    f"{mos_base}/api/response",
                    data=json.dumps({"session": "acc-mos", "protocol": "MOS",
                                     "participant": "p1", "trial": "m0",
                                     "stimulus": stim, "choice": bad,
                                     "playback_complete": played}).encode(),
                    method="POST")
                try:
                    with urllib.request.urlopen(req) as r:
                        status = r.status
                except urllib.error.HTTPError as e:
                    status = e.code
                assert status == 400, f"MOS rating {bad} was not rejected"
        finally:
            mos_srv.shutdown()

        blob = "\n".join(served_text)
        for label in ("repaired", "degraded", ".wav"):
            assert label not in blob, f"condition leak: {label!r}"
    finally:
        srv.shutdown()
