"""Command-line interface: ``fma {decompose, dealias, synth, bench}``.

Exit codes: 0 success, 2 malformed input or arguments, 3 analysis error (or
degenerate extraction, after writing the partial result), 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bench, corrections, windows
from .analyzer import ExtractionConfig, InnerProductSpace, decompose
from .dealias import analyze_dual
from .exceptions import DomainError, FMAError
from .qpsignal import (QPModel, QPTerm, SampledSignal, f1_sample, f2_model, read_csv,
                       sample_model, write_csv)

log = logging.getLogger("fma")

EXIT_OK, EXIT_INPUT, EXIT_ANALYSIS, EXIT_IO = 0, 2, 3, 4
FAILED_STATUSES = ("no_peak", "basis_degenerate")


class InputError(Exception):
    """Bad input data or flag values (exit code 2)."""


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "NA" if not math.isfinite(x) else f"{x:.15g}"


# ---------------------------------------------------------------------------
# signal sources


def _parse_tones(text: str) -> QPModel:
    """``tone:X[pi][,Y[pi]...]`` -> unit-amplitude tones at angular frequencies."""
    terms = []
    for part in text.split(","):
        part = part.strip().lower()
        scale = 1.0
        if part.endswith("pi"):
            part, scale = part[:-2], np.pi
        try:
            terms.append(QPTerm(float(part) * scale, 1.0))
        except ValueError:
            raise InputError(f"cannot parse tone frequency {part!r}") from None
    return QPModel(terms, label="tones")


def _synth_signal(spec: str, span: float, step: float, omega: float) -> SampledSignal:
    """Sample a generator spec.

    For ``f1`` and ``f2`` the span is given as ``T / 2 pi``; for tones it is
    the half span ``T`` itself.
    """
    spec = spec.strip()
    if not (span > 0 and step > 0):
        raise InputError("--span and --step must be positive")
    if spec == "f1":
        return f1_sample(2.0 * np.pi * span, step, omega)
    if spec == "f2":
        return sample_model(f2_model(omega), 2.0 * np.pi * span, step)
    if spec.startswith("tone:"):
        return sample_model(_parse_tones(spec[5:]), span, step)
    raise InputError(f"unknown generator {spec!r} (expected f1, f2 or tone:X[pi])")


def _load(path: str) -> SampledSignal:
    try:
        return read_csv(path)
    except DomainError as exc:
        raise InputError(f"{path}: {exc}") from None


def _window(token: str):
    try:
        return windows.from_token(token)
    except DomainError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------------------
# output


def _emit(text: str, out: str | None, meta: dict | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    path.write_text(text)
    if meta is not None:
        path.with_suffix(".json").write_text(
            json.dumps(meta, indent=2, sort_keys=True, default=bench._json_default) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def run_decompose(args) -> int:
    if (args.input is None) == (args.synth is None):
        raise InputError("give exactly one of --input or --synth")
    w = _window(args.window)
    if args.input is not None:
        sig = _load(args.input)
    else:
        sig = _synth_signal(args.synth, args.span, args.step, args.omega)
    config = ExtractionConfig(max_terms=args.terms)
    space = InnerProductSpace.for_signal(sig, w)
    dec = decompose(space, sig.samples, config)

    corrected = None
    if args.correct != "none" and dec.terms:
        inp = corrections.CorrectionInput(dec.terms[0], dec.terms[1:args.correct_terms], w,
                                          space.half_span)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fn = corrections.correct_theorem1 if args.correct == "t1" else corrections.correct_theorem2
            corrected = fn(inp)

    header = ["index", "freq", "period", "amp_abs", "amp_phase", "residual_norm"]
    if corrected is not None:
        header.append("freq_corrected")
    lines = ["\t".join(header)]
    for i, t in enumerate(dec.terms):
        period = "" if t.freq == 0 else _fmt(2.0 * np.pi / abs(t.freq))
        row = [str(i + 1), _fmt(t.freq), period, _fmt(abs(t.amp)), _fmt(np.angle(t.amp)),
               _fmt(dec.residual_norms[i + 1])]
        if corrected is not None:
            row.append(_fmt(corrected) if i == 0 else "")
        lines.append("\t".join(row))
    meta = {"command": "decompose", "status": dec.status, "grid": space.describe(),
            "config": {k: getattr(config, k) for k in config.__dataclass_fields__},
            "correction": args.correct, "correct_terms": args.correct_terms,
            "initial_norm": dec.residual_norms[0]}
    _emit("\n".join(lines) + "\n", args.out, meta)
    if dec.status in FAILED_STATUSES:
        print(f"fma: extraction stopped early: {dec.status}", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


def run_dealias(args) -> int:
    w = _window(args.window)
    if args.synth is not None:
        if args.input_a or args.input_b:
            raise InputError("give either --synth or --input-a/--input-b, not both")
        if args.step2 is None:
            raise InputError("--synth needs --step2")
        a = _synth_signal(args.synth, args.span, args.step, args.omega)
        b = _synth_signal(args.synth, args.span, args.step2, args.omega)
    else:
        if not (args.input_a and args.input_b):
            raise InputError("give --input-a and --input-b, or --synth")
        a, b = _load(args.input_a), _load(args.input_b)
    if b.step < a.step:
        a, b = b, a
    terms = analyze_dual(a, b, w, ExtractionConfig(max_terms=args.terms))
    angular = args.units == "angular-over-pi"

    def conv(x):
        return None if x is None else (2.0 * x if angular else x)

    lines = ["\t".join(["nu0", "nu", "nu_prime", "k", "k_residue", "amp", "note"])]
    for t in terms:
        lines.append("\t".join([_fmt(conv(t.nu0)), _fmt(conv(t.nu)), _fmt(conv(t.nu_prime)),
                                _fmt(t.k), _fmt(t.residue), _fmt(abs(t.amp)), t.note]))
    meta = {"command": "dealias", "units": args.units, "h": a.step, "h_prime": b.step,
            "window": w.token}
    _emit("\n".join(lines) + "\n", args.out, meta)
    return EXIT_OK


def run_synth(args) -> int:
    sig = _synth_signal(args.model, args.span, args.step, args.omega)
    write_csv(sig, sys.stdout if args.out is None else args.out)
    return EXIT_OK


def run_bench(args) -> int:
    threads = args.threads
    if args.table == "table1":
        table = bench.table1(quick=args.quick, threads=threads)
    elif args.table == "table2":
        table = bench.table2()
    elif args.table == "table3":
        table = bench.table3()
    else:
        w = _window(args.window)
        lo, hi = bench.QUICK_RANGE if args.quick else bench.FULL_RANGE
        corr = bench.Correction(args.correct, args.correct_terms if args.correct != "none" else 1)
        run = bench.run_convergence(
            bench.ConvergenceSpec(args.model, w, corr, tuple(bench.t_grid(lo, hi))), threads)
        try:
            slope, intercept = bench.fit_slope(run)
        except FMAError:
            slope = intercept = math.nan
        rows = [[_fmt(T / (2.0 * np.pi)), _fmt(e), "1" if m else "0"]
                for T, e, m in zip(run.t_points, run.errors, run.fit_mask())]
        meta = dict(run.metadata, slope=slope, intercept=intercept, fit_t_min=run.fit_t_min,
                    fit_floor=run.fit_floor, t_points=run.t_points, errors=run.errors)
        table = bench.Table(["T/2pi", "err", "in_fit"], rows, meta)
    _emit(table.to_tsv(), args.out, table.meta)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fma", description="Frequency analysis of quasiperiodic signals.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, synth_flag="--synth"):
        sp.add_argument("--window", default="p1", help="p0..p8 or exp (default p1)")
        sp.add_argument(synth_flag, dest="synth" if synth_flag == "--synth" else "model",
                        help="generator: f1, f2 or tone:X[pi][,Y[pi]...]")
        sp.add_argument("--span", type=float, default=100.0,
                        help="half span: T/2pi for f1/f2, T for tones (default 100)")
        sp.add_argument("--step", type=float, default=bench.DEFAULT_STEP,
                        help="sampling step h (default 2pi/128)")
        sp.add_argument("--omega", type=float, default=2.02, help="F1 frequency omega")
        sp.add_argument("--out", help="output file (default stdout); JSON metadata beside it")

    d = sub.add_parser("decompose", help="extract quasiperiodic terms from a signal")
    common(d)
    d.add_argument("--input", help="CSV signal file with header t,re,im")
    d.add_argument("--terms", type=int, default=50, help="maximum number of terms")
    d.add_argument("--correct", choices=["none", "t1", "t2"], default="none",
                   help="correct the leading frequency with the asymptotic formulas")
    d.add_argument("--correct-terms", type=int, default=10,
                   help="terms (leading one included) used by the correction")
    d.set_defaults(func=run_decompose)

    a = sub.add_parser("dealias", help="recover super-Nyquist frequencies from two steps")
    common(a)
    a.add_argument("--input-a", help="CSV sampled with the shorter step")
    a.add_argument("--input-b", help="CSV sampled with the longer step")
    a.add_argument("--step2", type=float, help="second (longer) step for --synth")
    a.add_argument("--terms", type=int, default=10, help="maximum terms per decomposition")
    a.add_argument("--units", choices=["cycles", "angular-over-pi"], default="cycles")
    a.set_defaults(func=run_dealias)

    s = sub.add_parser("synth", help="write a sampled test signal as CSV")
    common(s, synth_flag="--model")
    s.set_defaults(func=run_synth)

    b = sub.add_parser("bench", help="convergence runs and reference tables")
    b.add_argument("table", choices=["table1", "table2", "table3", "convergence"])
    b.add_argument("--quick", action="store_true", help="short T range (and p <= 2 for table1)")
    b.add_argument("--out", help="TSV output file; JSON sidecar written beside it")
    b.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    b.add_argument("--model", choices=["f1", "f2"], default="f1")
    b.add_argument("--window", default="p1")
    b.add_argument("--correct", choices=["none", "t1", "t2"], default="none")
    b.add_argument("--correct-terms", type=int, default=50)
    b.set_defaults(func=run_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.command == "synth" and args.model is None:
        parser.error("synth needs --model")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"fma: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FMAError as exc:
        print(f"fma: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except OSError as exc:
        print(f"fma: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
