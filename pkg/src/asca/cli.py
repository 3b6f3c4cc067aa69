"""Command-line front end: synth, extract, filter, train, eval, verify.

Exit codes: 0 success, 1 domain error, 2 usage error, and 3 when a
verification verdict is a mismatch (so scripts can tell mismatch from
failure).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .audio_io import read_wav, write_wav
from .errors import AscaError, LabelError
from .filters import AmplitudeGateSpec, ButterworthSpec, spectrum_peaks
from .harness import (
    ExperimentResult,
    ExperimentSpec,
    load_manifest,
    render_report,
    results_to_jsonl,
    run_experiment,
)
from .models import (
    CLASSIFIER_KINDS,
    TrainConfig,
    evaluate,
    fit_classifier,
    load_model,
    minmax_apply,
    minmax_fit,
    save_model,
)
from .models.common import Dataset
from .synth import (
    DISTANCES_MM,
    MIC_DISTANCES_CM,
    MOVEMENTS,
    SPEEDS_MM_S,
    SynthSpec,
    WORKFLOWS,
    synth_dataset,
)
from .verify import verify


def _float_or_off(text: str):
    return None if text.lower() in ("off", "none") else float(text)


def _csv_floats(text: str):
    return tuple(float(v) for v in text.split(","))


def _add_filter_flags(p):
    p.add_argument("--filter", choices=("none", "amplitude", "lowpass"),
                   default="none", help="denoise audio before featurizing")
    p.add_argument("--threshold-db", type=float, default=-30.0)
    p.add_argument("--attenuation-db", type=float, default=-60.0)
    p.add_argument("--gate-window-ms", type=float, default=10.0)
    p.add_argument("--cutoff-hz", type=float, default=1000.0)
    p.add_argument("--order", type=int, default=4)


def _filter_specs(args):
    gate = AmplitudeGateSpec(
        threshold_dbfs=args.threshold_db,
        attenuation_db=args.attenuation_db,
        window_ms=args.gate_window_ms,
    )
    butter = ButterworthSpec(order=args.order, cutoff_hz=args.cutoff_hz)
    return gate, butter


def _add_train_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )


def _emit(text: str, out_path):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_synth(args) -> int:
    labels = MOVEMENTS if args.labels == "movement" else WORKFLOWS
    cells = []
    for label in labels:
        for s in args.speeds:
            for d in args.distances:
                for mic in args.mic_distances:
                    kw = {"movement" if args.labels == "movement" else "workflow": label}
                    cells.append(
                        SynthSpec(
                            speed_mm_s=s,
                            move_distance_mm=d,
                            mic_distance_cm=mic,
                            duration_s=args.duration,
                            hum_db=args.hum_db,
                            noise_db=args.noise_db,
                            **kw,
                        )
                    )
    manifest = synth_dataset(cells, args.clips_per_cell, args.out, base_seed=args.seed)
    print(manifest)
    return 0


def cmd_extract(args) -> int:
    gate, butter = _filter_specs(args)
    dataset = load_manifest(args.manifest, args.filter, gate, butter)
    from .features import FEATURE_NAMES

    buf = []
    writer = csv.writer(_ListWriter(buf))
    writer.writerow(["path", "chunk_index", "label_kind", "label", *FEATURE_NAMES])
    counters: dict[str, int] = {}
    for i in range(len(dataset)):
        m = dataset.meta[i]
        chunk_index = counters.get(m.source, 0)
        counters[m.source] = chunk_index + 1
        writer.writerow(
            [m.source, chunk_index, m.label_kind, m.label, *dataset.X[i].tolist()]
        )
    _emit("".join(buf), args.out)
    return 0


class _ListWriter:
    """File-like shim so csv.writer can fill a string buffer."""

    def __init__(self, sink):
        self.sink = sink

    def write(self, text):
        self.sink.append(text)


def cmd_filter(args) -> int:
    gate, butter = _filter_specs(args)
    clip = read_wav(args.input)
    if args.mode == "amplitude":
        from .filters import amplitude_gate

        out = amplitude_gate(clip, gate)
    else:
        from .filters import apply_filter, butter_design

        out = apply_filter(clip, butter_design(butter, clip.sample_rate_hz))
    write_wav(out, args.output)
    if args.spectrum:
        from .plots import spectrum_figure

        spectrum_figure(spectrum_peaks(out), args.spectrum)
    return 0


def cmd_train(args) -> int:
    gate, butter = _filter_specs(args)
    dataset = load_manifest(args.manifest, args.filter, gate, butter)
    scaler = minmax_fit(dataset.X)
    scaled = Dataset(
        minmax_apply(scaler, dataset.X), dataset.y, dataset.label_names, dataset.meta
    )
    model = fit_classifier(args.classifier, scaled, _train_config(args), scaler=scaler)
    save_model(model, args.out)
    print(f"trained {args.classifier} on {len(dataset)} chunks -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    gate, butter = _filter_specs(args)
    dataset = load_manifest(args.manifest, args.filter, gate, butter)
    if args.model:
        model = load_model(args.model)
        try:
            mapped = [model.label_names.index(dataset.label_names[v]) for v in dataset.y]
        except ValueError:
            raise LabelError(
                f"manifest labels {dataset.label_names} do not all exist in the "
                f"model's label set {list(model.label_names)}"
            )
        X = minmax_apply(model.scaler, dataset.X) if model.scaler else dataset.X
        report = evaluate(model, X, mapped)
        results = [
            ExperimentResult(
                axis="eval",
                axis_value=None,
                classifier=model.kind,
                report=report,
                n_train=0,
                n_validation=len(dataset),
                seed=args.seed,
            )
        ]
    else:
        spec = ExperimentSpec(
            axis=args.axis,
            classifiers=tuple(args.classifier) if args.classifier else CLASSIFIER_KINDS,
            filter_mode=args.filter,
            train=_train_config(args),
            seed=args.seed,
        )
        results = run_experiment(spec, dataset)
    text = results_to_jsonl(results) if args.format == "json" else render_report(results)
    _emit(text, args.out)
    if args.figures:
        from .plots import save_report_figures

        for path in save_report_figures(results, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    gate, butter = _filter_specs(args)
    verdict = verify(
        args.audio,
        args.expected,
        args.model,
        threshold=args.threshold,
        filter_mode=args.filter,
        gate=gate,
        butter=butter,
    )
    if args.format == "json":
        print(json.dumps(verdict.to_dict(), sort_keys=True))
    else:
        state = "MATCH" if verdict.match else "MISMATCH"
        tie = " (tied vote)" if verdict.tied else ""
        print(
            f"{state}: expected {verdict.expected_label}, heard "
            f"{verdict.predicted_label} with {verdict.agreement_fraction:.0%} "
            f"agreement{tie}"
        )
    return 0 if verdict.match else 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="asca",
        description="Verify robot behaviour from passively recorded sound.",
    )
    p.add_argument("--version", action="version", version=f"asca {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", help="render a synthetic recording grid")
    ps.add_argument("--out", required=True, help="output directory")
    ps.add_argument("--labels", choices=("movement", "workflow"), default="movement")
    ps.add_argument("--clips-per-cell", type=int, default=10)
    ps.add_argument("--duration", type=float, default=5.0)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--speeds", type=_csv_floats, default=(12.5,),
                    help=f"comma list from {SPEEDS_MM_S}")
    ps.add_argument("--distances", type=_csv_floats, default=(1.0,),
                    help=f"comma list from {DISTANCES_MM}")
    ps.add_argument("--mic-distances", type=_csv_floats, default=(30.0,),
                    help=f"comma list from {MIC_DISTANCES_CM}")
    ps.add_argument("--noise-db", type=_float_or_off, default=-45.0)
    ps.add_argument("--hum-db", type=_float_or_off, default=-35.0)
    ps.set_defaults(func=cmd_synth)

    pe = sub.add_parser("extract", help="featurize a manifest into CSV")
    pe.add_argument("--manifest", required=True)
    pe.add_argument("--out", help="CSV path (default stdout)")
    _add_filter_flags(pe)
    pe.set_defaults(func=cmd_extract)

    pf = sub.add_parser("filter", help="denoise one WAV file")
    pf.add_argument("input")
    pf.add_argument("output")
    pf.add_argument("--mode", choices=("amplitude", "lowpass"), required=True)
    pf.add_argument("--threshold-db", type=float, default=-30.0)
    pf.add_argument("--attenuation-db", type=float, default=-60.0)
    pf.add_argument("--gate-window-ms", type=float, default=10.0)
    pf.add_argument("--cutoff-hz", type=float, default=1000.0)
    pf.add_argument("--order", type=int, default=4)
    pf.add_argument("--spectrum", help="also render the output's peak spectrum PNG")
    pf.set_defaults(func=cmd_filter)

    pt = sub.add_parser("train", help="fit one classifier on a manifest")
    pt.add_argument("--manifest", required=True)
    pt.add_argument("--classifier", choices=CLASSIFIER_KINDS, required=True)
    pt.add_argument("--out", required=True, help="model container path")
    _add_filter_flags(pt)
    _add_train_flags(pt)
    pt.set_defaults(func=cmd_train)

    pv = sub.add_parser("eval", help="evaluate a model or run the experiment grid")
    pv.add_argument("--manifest", required=True)
    pv.add_argument("--model", help="score this container on the manifest")
    pv.add_argument(
        "--axis",
        choices=("baseline", "move_distance", "speed", "mic_distance", "workflow"),
        default="baseline",
        help="grid axis when no --model is given",
    )
    pv.add_argument("--classifier", action="append", choices=CLASSIFIER_KINDS,
                    help="repeatable; default all four")
    pv.add_argument("--format", choices=("text", "json"), default="text")
    pv.add_argument("--out", help="write the report here instead of stdout")
    pv.add_argument("--figures", help="directory for rendered figures")
    _add_filter_flags(pv)
    _add_train_flags(pv)
    pv.set_defaults(func=cmd_eval)

    pw = sub.add_parser("verify", help="check a clip against an expected label")
    pw.add_argument("audio")
    pw.add_argument("--expected", required=True)
    pw.add_argument("--model", required=True)
    pw.add_argument("--threshold", type=float, default=0.5)
    pw.add_argument("--format", choices=("text", "json"), default="text")
    _add_filter_flags(pw)
    pw.set_defaults(func=cmd_verify)
    return p


def cli_dispatch(argv) -> int:
    """Parse and run; returns the process exit code instead of raising."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (AscaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
