"""Command-line entry point.

Subcommands:
  degrade    simulate band-limited inputs (randomized low-pass pipeline)
  repair     phase-repair magnitude-donor files from a chosen phase source
  metrics    score estimate files against references (LSD + losses)
  spectro    dump a magnitude matrix or single-bin phase track as CSV
  slice      cut recordings into fixed-duration evaluation clips
  serve      run the listening-test HTTP service
  aggregate  summarize listening-test responses per condition

Batch subcommands process files in sorted path order with a fixed seed,
so outputs and reports are byte-stable across runs and worker counts.
The environment variable PHASEREPAIR_OUT provides the default output
root when --out is omitted.
"""

import argparse
import csv
import glob
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .audio import Waveform, read_wav, write_wav
from .degrade import DegradeConfig, FilterFamily, degrade, sample_spec
from .metrics import LossConfig, lsd, mrstft_loss, mrwave_loss, total_loss
from .repair import External, GriffinLim, GroundTruth, repair
from .session import aggregate, load_responses, load_session
from .spectral import StftParams, magnitude, phase, stft

log = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "PHASEREPAIR_OUT"


def _expand_inputs(patterns):
    paths = set()
    for pat in patterns:
        if Path(pat).exists():
            paths.add(str(pat))
        else:
            paths.update(glob.glob(pat, recursive=True))
    return sorted(paths)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUTPUT_ROOT_ENV)
    if not out:
        print(f"error: no output directory (--out or ${OUTPUT_ROOT_ENV})", file=sys.stderr)
        raise SystemExit(2)
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _stft_params(args) -> StftParams:
    win = args.win if args.win else args.fft
    return StftParams(fft_size=args.fft, hop=args.hop, win_length=win)


def _run_jobs(jobs, workers):
    """Run callables in a pool; report failures per job, keep going."""
    failures = 0
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for name, result in pool.map(lambda j: (j[0], _safe(j[1])), jobs):
            if result is not None:
                failures += 1
                print(f"error: {name}: {result}", file=sys.stderr)
    return failures


def _safe(fn):
    try:
        fn()
        return None
    except Exception as e:  # noqa: BLE001 - batch jobs report and continue
        return str(e) or type(e).__name__


def _write_report(rows, fmt, out):
    """Emit report rows as CSV or JSON to a file or stdout."""
    if fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()) if rows else ["file"])
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# degrade
# ---------------------------------------------------------------------------

def cmd_degrade(args) -> int:
    inputs = _expand_inputs(args.inputs)
    if not inputs:
        print("error: no inputs", file=sys.stderr)
        return 2
    out = _out_dir(args)
    families = (
        tuple(FilterFamily(f) for f in args.families.split(","))
        if args.families
        else tuple(FilterFamily)
    )
    cfg = DegradeConfig(
        bandwidth_lo_hz=args.bw_lo,
        bandwidth_hi_hz=args.bw_hi,
        families=families,
        seed=args.seed,
        order_lo=args.order_lo,
        order_hi=args.order_hi,
    )

    def job(index, path):
        def run():
            w = read_wav(path)
            spec = sample_spec(cfg, index)
            y = degrade(w, spec)
            stem = Path(path).stem
            write_wav(out / f"{stem}.wav", y, format="float32")
            provenance = {
                "family": spec.family.value,
                "order": spec.order,
                "cutoff_hz": spec.cutoff_hz,
                "ripple_db": spec.passband_ripple_db,
                "atten_db": spec.stopband_atten_db,
                "seed": cfg.seed,
                "draw_index": index,
            }
            (out / f"{stem}.json").write_text(json.dumps(provenance, indent=2) + "\n")

        return run

    jobs = [(path, job(i, path)) for i, path in enumerate(inputs)]
    return 1 if _run_jobs(jobs, args.workers) else 0


# ---------------------------------------------------------------------------
# repair
# ---------------------------------------------------------------------------

def _phase_source(token, input_path, iters):
    """Parse --phase-from: a WAV path, gt:path, gt:self, or griffinlim[:N]."""
    if token.startswith("griffinlim"):
        n = int(token.split(":", 1)[1]) if ":" in token else iters
        return GriffinLim(iterations=n)
    if token.startswith("gt:"):
        ref = token[3:]
        path = input_path if ref == "self" else ref.replace("{stem}", Path(input_path).stem)
        return GroundTruth(read_wav(path))
    path = token.replace("{stem}", Path(input_path).stem)
    return External(read_wav(path))


def cmd_repair(args) -> int:
    inputs = _expand_inputs(args.inputs)
    if not inputs:
        print("error: no inputs", file=sys.stderr)
        return 2
    file_based = not args.phase_from.startswith("griffinlim")
    multi_ok = "{stem}" in args.phase_from or args.phase_from == "gt:self"
    if file_based and len(inputs) > 1 and not multi_ok:
        print(
            "error: multiple inputs with a single phase file; use a {stem} "
            "placeholder (e.g. gt:refs/{stem}.wav) or gt:self",
            file=sys.stderr,
        )
        return 2
    out = _out_dir(args)
    p = _stft_params(args)

    def job(path):
        def run():
            donor = read_wav(path)
            source = _phase_source(args.phase_from, path, args.iters)
            write_wav(out / f"{Path(path).stem}.wav", repair(donor, source, p), format="float32")

        return run

    jobs = [(path, job(path)) for path in inputs]
    return 1 if _run_jobs(jobs, args.workers) else 0


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def cmd_metrics(args) -> int:
    ref_dir, est_dir = Path(args.ref), Path(args.est)
    ref_files = {p.stem: p for p in sorted(ref_dir.glob("*.wav"))}
    est_files = {p.stem: p for p in sorted(est_dir.glob("*.wav"))}
    stems = sorted(set(ref_files) & set(est_files))
    if not stems:
        print("error: no matching file stems between ref and est", file=sys.stderr)
        return 2

    cfg = LossConfig(lam=args.lam)
    p = _stft_params(args)
    rows = []
    failures = 0
    for stem in stems:
        try:
            ref = read_wav(ref_files[stem])
            est = read_wav(est_files[stem])
            cutoff, family = "", ""
            sidecar = est_dir / f"{stem}.json"
            if sidecar.is_file():
                prov = json.loads(sidecar.read_text())
                cutoff = prov.get("cutoff_hz", "")
                family = prov.get("family", "")
            rows.append(
                {
                    "file": f"{stem}.wav",
                    "cutoff_hz": cutoff,
                    "family": family,
                    "lsd": round(lsd(ref, est, p), 6),
                    "mrstft": round(mrstft_loss(ref, est, cfg), 6),
                    "mrwave": round(mrwave_loss(ref, est, cfg), 6),
                    "total": round(total_loss(ref, est, cfg), 6),
                }
            )
        except Exception as e:  # noqa: BLE001
            failures += 1
            print(f"error: {stem}: {e}", file=sys.stderr)
    if rows:
        _write_report(rows, args.format, args.out)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# spectro
# ---------------------------------------------------------------------------

def cmd_spectro(args) -> int:
    import numpy as np

    w = read_wav(args.input)
    s = stft(w, _stft_params(args))
    if args.kind == "phase":
        if args.bin is None:
            print("error: --kind phase requires --bin", file=sys.stderr)
            return 2
        track = phase(s)[:, args.bin]
        rows = [{"frame": i, "phase_rad": round(float(v), 9)} for i, v in enumerate(track)]
        _write_report(rows, "csv", args.out)
        return 0

    mag_db = 20.0 * np.log10(np.maximum(magnitude(s), 1e-7))
    freqs = s.bin_frequencies_hz
    if args.bin is not None:
        rows = [
            {"frame": i, f"mag_db_{freqs[args.bin]:.0f}hz": round(float(v), 4)}
            for i, v in enumerate(mag_db[:, args.bin])
        ]
    else:
        rows = [
            {"frame": i, **{f"{freqs[k]:.0f}": round(float(v), 4) for k, v in enumerate(row)}}
            for i, row in enumerate(mag_db)
        ]
    _write_report(rows, "csv", args.out)
    return 0


# ---------------------------------------------------------------------------
# slice
# ---------------------------------------------------------------------------

def cmd_slice(args) -> int:
    inputs = _expand_inputs(args.inputs)
    if not inputs:
        print("error: no inputs", file=sys.stderr)
        return 2
    out = _out_dir(args)
    failures = 0
    for path in inputs:
        try:
            w = read_wav(path)
            n = int(round(args.dur * w.sample_rate_hz))
            start = int(round(args.offset * w.sample_rate_hz))
            k = 0
            while start + n <= len(w.samples):
                clip = Waveform(w.samples[start : start + n], w.sample_rate_hz)
                write_wav(out / f"{Path(path).stem}_{k:03d}.wav", clip, format=args.sample_format)
                start += n
                k += 1
            if k == 0:
                raise ValueError(f"shorter than one {args.dur}s clip")
        except Exception as e:  # noqa: BLE001
            failures += 1
            print(f"error: {path}: {e}", file=sys.stderr)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# serve / aggregate
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    from .server import build_server

    cfg = load_session(args.session)
    results = args.results or str(Path(args.session).with_suffix(".results.jsonl"))
    static = args.static if args.static and Path(args.static).is_dir() else None
    server = build_server(cfg, results, port=args.port, host=args.host, static_dir=static)
    host, port = server.server_address[:2]
    print(f"session {cfg.id!r} ({cfg.protocol}, {len(cfg.trials)} trials)")
    print(f"results -> {results}")
    print(f"serving on http://{host}:{port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_aggregate(args) -> int:
    cfg = load_session(args.session)
    summary = aggregate(load_responses(args.results), cfg)
    if args.format == "csv":
        if summary["protocol"] == "AB":
            rows = [
                {"condition": c, "votes": summary["votes"][c], "preference_pct": round(p, 2)}
                for c, p in summary["preference_pct"].items()
            ]
        else:
            rows = [{"condition": c, **stats} for c, stats in summary["conditions"].items()]
        _write_report(rows, "csv", args.out)
    else:
        _write_report(summary, "json", args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_stft_flags(sp):
    sp.add_argument("--fft", type=int, default=1024, help="FFT size (default 1024)")
    sp.add_argument("--hop", type=int, default=256, help="hop length (default 256)")
    sp.add_argument("--win", type=int, default=None, help="window length (default: FFT size)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phaserepair", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("degrade", help="simulate band-limited inputs")
    d.add_argument("inputs", nargs="+", help="WAV files or globs")
    d.add_argument("--out", help=f"output directory (default ${OUTPUT_ROOT_ENV})")
    d.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    d.add_argument("--bw-lo", type=float, default=2500.0, help="min cutoff Hz (default 2500)")
    d.add_argument("--bw-hi", type=float, default=4000.0, help="max cutoff Hz (default 4000)")
    d.add_argument(
        "--families",
        help="comma-separated subset of: "
        + ",".join(f.value for f in FilterFamily)
        + " (default: all)",
    )
    d.add_argument("--order-lo", type=int, default=6, help="min IIR order (default 6)")
    d.add_argument("--order-hi", type=int, default=10, help="max IIR order (default 10)")
    d.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    d.set_defaults(func=cmd_degrade)

    r = sub.add_parser("repair", help="replace distorted phase from a chosen source")
    r.add_argument("inputs", nargs="+", help="magnitude-donor WAV files or globs")
    r.add_argument("--out", help=f"output directory (default ${OUTPUT_ROOT_ENV})")
    r.add_argument(
        "--phase-from",
        required=True,
        metavar="SOURCE",
        help="phase source: a WAV path (supports {stem}), gt:path, gt:self, or griffinlim[:N]",
    )
    r.add_argument("--iters", type=int, default=64, help="Griffin-Lim iterations (default 64)")
    r.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    _add_stft_flags(r)
    r.set_defaults(func=cmd_repair)

    m = sub.add_parser("metrics", help="score estimates against references")
    m.add_argument("ref", help="directory of reference WAVs")
    m.add_argument("est", help="directory of estimate WAVs (+ provenance sidecars)")
    m.add_argument("--lambda", dest="lam", type=float, default=1000.0, help="wave-term weight")
    m.add_argument("--format", choices=("csv", "json"), default="csv")
    m.add_argument("--out", help="report file (default stdout)")
    _add_stft_flags(m)
    m.set_defaults(func=cmd_metrics)

    s = sub.add_parser("spectro", help="dump magnitude (dB) or one bin's phase as CSV")
    s.add_argument("input", help="WAV file")
    s.add_argument("--kind", choices=("mag", "phase"), default="mag")
    s.add_argument("--bin", type=int, default=None, help="restrict to one frequency bin")
    s.add_argument("--out", help="CSV file (default stdout)")
    _add_stft_flags(s)
    s.set_defaults(func=cmd_spectro)

    c = sub.add_parser("slice", help="cut recordings into fixed-duration clips")
    c.add_argument("inputs", nargs="+", help="WAV files or globs")
    c.add_argument("--out", help=f"output directory (default ${OUTPUT_ROOT_ENV})")
    c.add_argument("--dur", type=float, default=5.0, help="clip duration in seconds (default 5)")
    c.add_argument("--offset", type=float, default=0.0, help="start offset in seconds")
    c.add_argument("--sample-format", choices=("int16", "float32"), default="int16")
    c.set_defaults(func=cmd_slice)

    v = sub.add_parser("serve", help="run the listening-test HTTP service")
    v.add_argument("session", help="session JSON file")
    v.add_argument("--port", type=int, default=8765)
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--results", help="JSONL results file (default: <session>.results.jsonl)")
    v.add_argument("--static", help="directory with the built browser UI")
    v.set_defaults(func=cmd_serve)

    g = sub.add_parser("aggregate", help="summarize listening-test responses")
    g.add_argument("--session", required=True, help="session JSON file")
    g.add_argument("--results", required=True, help="JSONL results file")
    g.add_argument("--format", choices=("csv", "json"), default="json")
    g.add_argument("--out", help="report file (default stdout)")
    g.set_defaults(func=cmd_aggregate)

    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as e:  # usage errors raised below parse_args
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
