"""Command-line surface: generate / train / eval / constellation / gradcheck.

Every output artifact gets a JSON manifest written beside it (path plus
".manifest.json") recording the exact argv, flags, seeds, paths, version and
wall-clock duration, so any run can be replayed bit-identically.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .dataset import (
    COMPONENTS,
    Dataset,
    DatasetConfig,
    DatasetFormatError,
    QualityTier,
    generate_dataset,
    read_dataset,
    write_dataset,
)
from .impairments import ImpairmentParams, apply_chain
from .metrics import component_report, write_metrics_csv
from .mtlmodel import (
    CheckpointFormatError,
    MtlArchitecture,
    TrainConfig,
    build,
    evaluate_accuracy,
    forward,
    load_checkpoint,
    preset_config,
    save_checkpoint,
    threshold_bits,
    train,
    write_history_csv,
)
from .neuralnet import grad_check, seeded_check_case
from .waveform import WaveformConfig, generate_frame

GRADCHECK_TOLERANCE = 1e-4


class UsageError(Exception):
    """Flag-level problem; reported with exit code 2."""


def _write_manifest(command: str, argv: list, args: argparse.Namespace,
                    seeds: dict, inputs: list, outputs: list, start: float) -> None:
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    manifest = {
        "command": command,
        "argv": argv,
        "flags": flags,
        "seeds": seeds,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "duration_seconds": round(time.monotonic() - start, 3),
    }
    for out in outputs:
        with open(f"{out}.manifest.json", "w") as f:
            json.dump(manifest, f, indent=2, default=str)
            f.write("\n")


def _parse_split(text: str, total: int) -> tuple[int, int, int]:
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--split must be three comma-separated integers, got {text!r}") from exc
    if len(parts) != 3:
        raise UsageError(f"--split must have three fields, got {len(parts)}")
    if sum(parts) != total:
        raise UsageError(f"--split {text} sums to {sum(parts)}, not --samples {total}")
    return parts


def cmd_generate(args, argv, threads, start) -> int:
    split = _parse_split(args.split, args.samples)
    try:
        config = DatasetConfig(
            tier=QualityTier(args.tier),
            total_samples=args.samples,
            split=split,
            master_seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    dataset = generate_dataset(config, threads=threads)
    write_dataset(dataset, args.out)
    _write_manifest("generate", argv, args, {"master_seed": args.seed}, [],
                    [args.out], start)
    print(f"wrote {config.total_samples} samples "
          f"(split {split[0]}/{split[1]}/{split[2]}, tier {args.tier}) to {args.out}")
    return 0


def cmd_train(args, argv, threads, start) -> int:
    if args.preset:
        overrides = {}
        if args.epochs is not None:
            overrides["epochs"] = args.epochs
        if args.batch_size is not None:
            overrides["batch_size"] = args.batch_size
        if args.lr is not None:
            overrides["learning_rate"] = args.lr
        try:
            config = preset_config(args.preset, seed=args.seed,
                                   shuffle=not args.no_shuffle, **overrides)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        if args.epochs is None:
            raise UsageError("either --preset or --epochs is required")
        try:
            config = TrainConfig(
                epochs=args.epochs,
                batch_size=args.batch_size if args.batch_size is not None else 16,
                learning_rate=args.lr if args.lr is not None else 1e-6,
                seed=args.seed,
                shuffle=not args.no_shuffle,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    data = read_dataset(args.data)
    arch = MtlArchitecture(input_width=data.feature_width)
    model = build(arch, seed=args.seed)
    history = train(model, data.split("train"), data.split("validation"), config)
    save_checkpoint(model, args.out)
    outputs = [args.out]
    if args.log:
        write_history_csv(history, args.log)
        outputs.append(args.log)
    _write_manifest("train", argv, args,
                    {"train_seed": args.seed, "dataset_master_seed": data.config.master_seed},
                    [args.data], outputs, start)
    final = history.val_accuracy[-1]
    pretty = ", ".join(
        f"{task}={'NA' if np.isnan(final[k]) else format(final[k], '.4f')}"
        for k, task in enumerate(COMPONENTS)
    )
    print(f"final validation accuracy: {pretty}")
    return 0


def cmd_eval(args, argv, threads, start) -> int:
    data = read_dataset(args.data)
    model = load_checkpoint(args.model, expected_input_width=data.feature_width)
    view = data.split(args.split)
    if len(view) == 0:
        print(f"error: dataset {args.data} has no {args.split} samples", file=sys.stderr)
        return 1
    bits = np.empty((len(view), len(COMPONENTS)), dtype=np.uint8)
    for lo in range(0, len(view), 1024):
        x = np.asarray(view.features[lo:lo + 1024], dtype=np.float64)
        bits[lo:lo + 1024] = threshold_bits(forward(model, x), args.threshold)
    report = component_report(bits, view.labels)
    write_metrics_csv(report, args.out, tier=data.config.tier.value)
    _write_manifest("eval", argv, args, {}, [args.model, args.data], [args.out], start)
    print(f"{'component':<10} {'accuracy':>9} {'precision':>10} {'recall':>9} {'f1':>9}")
    for name in ("filter", "mixer", "lo", "ps"):
        m = report[name]
        cells = ["NA" if v is None else f"{v:.3f}"
                 for v in (m.accuracy, m.precision, m.recall, m.f1)]
        print(f"{name:<10} {cells[0]:>9} {cells[1]:>10} {cells[2]:>9} {cells[3]:>9}")
    return 0


def cmd_constellation(args, argv, threads, start) -> int:
    try:
        params = ImpairmentParams(
            i_gain=args.i_gain,
            q_gain=args.q_gain,
            quad_offset_deg=args.quad_offset,
            phase_noise_deg=args.phase_noise,
            freq_offset_hz=args.freq_offset,
            i_offset=args.i_offset,
            q_offset=args.q_offset,
        )
        config = WaveformConfig(symbol_count=args.symbols, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    clean = generate_frame(config)
    distorted = apply_chain(clean, params)
    with open(args.out, "w") as f:
        f.write("frame,n,re,im\n")
        for label, frame in (("clean", clean), ("distorted", distorted)):
            for n, z in enumerate(frame.samples):
                f.write(f"{label},{n},{z.real:.17g},{z.imag:.17g}\n")
    _write_manifest("constellation", argv, args, {"waveform_seed": args.seed}, [],
                    [args.out], start)
    print(f"wrote {2 * len(clean)} constellation points to {args.out}")
    return 0


def cmd_gradcheck(args, argv, threads, start) -> int:
    if args.seeds < 1:
        raise UsageError(f"--seeds must be positive, got {args.seeds}")
    fault = 1.01 if args.inject_fault else None
    worst = 0.0
    for seed in range(args.seeds):
        layers, x, targets = seeded_check_case(seed)
        err = grad_check(layers, x, targets, h=args.h, fault_scale=fault)
        worst = max(worst, err)
        print(f"seed {seed}: max relative error {err:.3e}")
    ok = worst < GRADCHECK_TOLERANCE
    print(f"worst over {args.seeds} seeds: {worst:.3e} "
          f"({'PASS' if ok else 'FAIL'}, tolerance {GRADCHECK_TOLERANCE:.0e})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfdiag",
        description="Simulate RF front-end impairments on QPSK frames and train "
                    "a multi-task classifier to identify the distorted components.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a labeled dataset")
    g.add_argument("--tier", required=True, choices=[t.value for t in QualityTier])
    g.add_argument("--samples", type=int, default=60000)
    g.add_argument("--split", default="40000,10000,10000",
                   help="train,validation,test counts (must sum to --samples)")
    g.add_argument("--seed", type=int, default=0, help="master seed for parameter draws")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train the multi-task classifier")
    t.add_argument("--data", required=True)
    t.add_argument("--preset", choices=["desk", "paper"],
                   help="desk: 300 epochs, batch 64, lr 1e-3; "
                        "paper: full-scale recipe, 10000 epochs, batch 16, lr 1e-6")
    t.add_argument("--epochs", type=int)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--no-shuffle", action="store_true")
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--log", help="training-history CSV path")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint and write a metrics CSV")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--split", default="test", choices=Dataset.SPLITS)
    e.add_argument("--threshold", type=float, default=0.5)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("constellation", help="dump clean and distorted I/Q points")
    c.add_argument("--i-gain", type=float, default=1.0)
    c.add_argument("--q-gain", type=float, default=1.0)
    c.add_argument("--quad-offset", type=float, default=0.0, help="degrees")
    c.add_argument("--phase-noise", type=float, default=0.0, help="degrees")
    c.add_argument("--freq-offset", type=float, default=0.0, help="Hz")
    c.add_argument("--i-offset", type=float, default=0.0)
    c.add_argument("--q-offset", type=float, default=0.0)
    c.add_argument("--symbols", type=int, default=500)
    c.add_argument("--seed", type=int, default=0, help="symbol-sequence seed")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_constellation)

    gc = sub.add_parser("gradcheck", help="finite-difference check of the gradient engine")
    gc.add_argument("--seeds", type=int, default=20)
    gc.add_argument("--h", type=float, default=1e-5)
    gc.add_argument("--inject-fault", action="store_true",
                    help="corrupt one analytic gradient; the check must then fail")
    gc.set_defaults(func=cmd_gradcheck)

    for p in (g, t, e, c, gc):
        p.add_argument("--threads", type=int,
                       help="cap internal parallelism (default: RFDIAG_THREADS or 1)")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    threads = args.threads
    if threads is None:
        try:
            threads = int(os.environ.get("RFDIAG_THREADS", "1"))
        except ValueError:
            threads = 1
    if threads < 1:
        print(f"error: --threads must be positive, got {threads}", file=sys.stderr)
        return 2
    start = time.monotonic()
    try:
        with threadpool_limits(limits=threads):
            return args.func(args, argv, threads, start)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DatasetFormatError, CheckpointFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())
