"""Convergence experiments, log-log slope fits and the reference tables.

A convergence run samples a test function over a range of half spans ``T``,
extracts its leading frequency (optionally corrected with the asymptotic
formulas) and records the absolute error against the exact value. Slopes are
fitted in ``(log10(T / 2 pi), log10(err))``.

Test functions are

* ``"f1"``: ``1 / (1 + exp(i t)/2 + exp(-i omega t)/4)``, whose leading term is
  the constant (frequency 0, amplitude 1);
* ``"f2"``: the 50 largest terms of the expansion of ``f1``;
* any explicit :class:`~fma.qpsignal.QPModel`, whose largest term is the target.
"""
from __future__ import annotations

import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import corrections, windows
from .analyzer import ExtractionConfig, InnerProductSpace, decompose
from .dealias import analyze_dual
from .exceptions import DomainError, FMAError, InsufficientData, UnsupportedWindow
from .qpsignal import QPModel, QPTerm, f1_expansion, f1_sample, f2_model, sample_model
from .windows import WeightWindow

__all__ = [
    "DEFAULT_STEP",
    "Correction",
    "ConvergenceSpec",
    "ConvergenceRun",
    "Table",
    "t_grid",
    "run_convergence",
    "run_columns",
    "fit_slope",
    "table1",
    "table2",
    "table3",
    "TABLE2_TONES",
    "TABLE3_TONES",
]

log = logging.getLogger(__name__)

# 64 samples per unit of time on the 2 pi scale: every F1 term folded across
# the Nyquist frequency pi/h = 64 has amplitude below 1e-18.
DEFAULT_STEP = 2.0 * np.pi / 128
GRID_POINTS = 25
FULL_RANGE = (1e1, 1e4)
QUICK_RANGE = (1e1, 1e3)
ERROR_FLOOR = 1e-15
SATURATION_FLOOR = 1e-13
MIN_FIT_POINTS = 5
# perturbers weaker than this (relative to the target) do not limit the fit range
SIGNIFICANT_AMP = 1e-6

TABLE2_TONES = tuple(round(0.990 + 0.001 * i, 3) for i in range(20))
TABLE3_TONES = (tuple(0.5 * i for i in range(1, 11))
                + tuple(990.0 + 0.5 * i for i in range(21))
                + tuple(1000.5 + 0.5 * i for i in range(6)))


@dataclass(frozen=True)
class Correction:
    """``kind`` is ``"none"``, ``"t1"`` or ``"t2"``; ``nterms`` counts the leading term."""

    kind: str = "none"
    nterms: int = 1

    def __post_init__(self):
        if self.kind not in ("none", "t1", "t2"):
            raise DomainError(f"unknown correction {self.kind!r}")
        if self.nterms < 1:
            raise DomainError("nterms must be >= 1")

    @property
    def label(self) -> str:
        return "none" if self.kind == "none" else f"{self.kind}({self.nterms})"


def t_grid(lo: float = FULL_RANGE[0], hi: float = FULL_RANGE[1],
           points: int = GRID_POINTS) -> np.ndarray:
    """Log-spaced half spans with ``T / 2 pi`` from ``lo`` to ``hi``."""
    return 2.0 * np.pi * np.logspace(math.log10(lo), math.log10(hi), points)


@dataclass(frozen=True)
class ConvergenceSpec:
    """What to run: test function, window, correction and the ``T`` grid."""

    model: object = "f1"
    window: WeightWindow = field(default_factory=lambda: windows.cosine(1))
    correction: Correction = field(default_factory=Correction)
    t_points: tuple = field(default_factory=lambda: tuple(t_grid()))
    step: float = DEFAULT_STEP
    config: ExtractionConfig = field(default_factory=ExtractionConfig)

    def __post_init__(self):
        object.__setattr__(self, "t_points", tuple(float(t) for t in self.t_points))
        if isinstance(self.model, str) and self.model not in ("f1", "f2"):
            raise DomainError(f"unknown model {self.model!r}")


@dataclass
class ConvergenceRun:
    """Errors ``|nu_exact - nu_estimated|`` (angular) versus half span.

    ``fit_t_min`` is the smallest ``T`` admitted into slope fits and
    ``fit_floor`` the error level below which points are dropped.
    """

    model: str
    window: WeightWindow
    correction: Correction
    t_points: np.ndarray
    errors: np.ndarray
    fit_t_min: float = 0.0
    fit_floor: float = ERROR_FLOOR
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t_points = np.asarray(self.t_points, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.t_points.shape != self.errors.shape:
            raise DomainError("t_points and errors must have the same length")
        if np.any(np.diff(self.t_points) <= 0):
            raise DomainError("t_points must be strictly increasing")
        if np.any(self.errors[np.isfinite(self.errors)] < 0):
            raise DomainError("errors must be non-negative")

    def fit_mask(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return (np.isfinite(self.errors) & (self.errors > self.fit_floor)
                    & (self.t_points >= self.fit_t_min))


def fit_slope(run: ConvergenceRun) -> tuple:
    """Least-squares line through ``(log10(T / 2 pi), log10(err))``.

    Returns ``(slope, intercept)``.

    Raises
    ------
    InsufficientData
        If fewer than five points survive the exclusions.
    """
    mask = run.fit_mask()
    if int(mask.sum()) < MIN_FIT_POINTS:
        raise InsufficientData(
            f"{int(mask.sum())} usable points, need at least {MIN_FIT_POINTS}")
    x = np.log10(run.t_points[mask] / (2.0 * np.pi))
    y = np.log10(run.errors[mask])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


# ---------------------------------------------------------------------------
# running


def _reference(model) -> QPModel:
    """Term list used for the target frequency and the fit range."""
    if model == "f1":
        return f1_expansion(40)
    if model == "f2":
        return f2_model()
    return model


def _model_name(model) -> str:
    return model if isinstance(model, str) else (model.label or "custom")


def _sample(model, half_span, step):
    if model == "f1":
        return f1_sample(half_span, step)
    if model == "f2":
        return sample_model(f2_model(), half_span, step)
    return sample_model(model, half_span, step)


def nearest_offset(model) -> float:
    """Distance from the target to the closest significant other frequency."""
    ref = _reference(model)
    lead = ref.terms[0]
    freqs = np.array([t.freq for t in ref.terms[1:]
                      if abs(t.amp) >= SIGNIFICANT_AMP * abs(lead.amp)])
    if freqs.size == 0:
        return math.inf
    return float(np.min(np.abs(freqs - lead.freq)))


def lobe_clear_span(model, window: WeightWindow) -> float:
    """Smallest ``T`` at which every significant perturber has left the main lobe.

    Below it the nearest perturber is unresolved and the error sits on a
    plateau that no power law describes.
    """
    off = nearest_offset(model)
    return 0.0 if math.isinf(off) else windows.main_lobe_edge(window) / off


def _point(args):
    """Errors of all requested corrections at one half span (one decomposition)."""
    model, window, half_span, step, config, corrs = args
    target = _reference(model).terms[0].freq
    nmax = max(c.nterms for c in corrs)
    out = []
    try:
        sig = _sample(model, half_span, step)
        space = InnerProductSpace.for_signal(sig, window)
        dec = decompose(space, sig.samples, replace(config, max_terms=nmax))
    except FMAError as exc:
        log.warning("extraction failed at T = %g: %s", half_span, exc)
        return [math.nan] * len(corrs)
    if not dec.terms:
        return [math.nan] * len(corrs)
    lead = dec.terms[0]
    for c in corrs:
        if c.kind == "none":
            nu = lead.freq
        else:
            inp = corrections.CorrectionInput(lead, dec.terms[1:c.nterms], window, space.half_span)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    if c.kind == "t1":
                        nu = corrections.correct_theorem1(inp)
                    else:
                        nu = corrections.correct_theorem2(inp)
            except UnsupportedWindow:
                nu = math.nan
        out.append(abs(nu - target))
    return out


def _pool_map(func, items, threads):
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    # largest spans first for load balance; results come back in input order
    order = sorted(range(len(items)), key=lambda i: -items[i][2])
    with ProcessPoolExecutor(max_workers=threads) as pool:
        done = list(pool.map(func, [items[i] for i in order], chunksize=1))
    out = [None] * len(items)
    for i, r in zip(order, done):
        out[i] = r
    return out


def run_columns(model, window: WeightWindow, corrs, t_points=None, step: float = DEFAULT_STEP,
                config: ExtractionConfig | None = None, threads: int | None = 1) -> list:
    """Several corrections on one model/window, sharing each decomposition."""
    corrs = list(corrs)
    t_points = np.asarray(t_grid() if t_points is None else t_points, dtype=float)
    config = config or ExtractionConfig()
    items = [(model, window, float(T), step, config, corrs) for T in t_points]
    errs = np.array(_pool_map(_point, items, threads), dtype=float).reshape(len(items), len(corrs))
    floor = ERROR_FLOOR
    if model == "f1" and window.is_cosine and window.order >= 3:
        floor = SATURATION_FLOOR
    t_min = lobe_clear_span(model, window)
    meta = {
        "model": _model_name(model),
        "target": "largest-amplitude term of the reference expansion"
                  + (" (the constant term, frequency 0)" if model == "f1" else ""),
        "window": window.token,
        "step": step,
        "config": asdict(config),
        "nearest_perturber_offset": nearest_offset(model),
        "seed": None,
    }
    return [ConvergenceRun(_model_name(model), window, c, t_points, errs[:, j], t_min, floor,
                           dict(meta, correction=c.label))
            for j, c in enumerate(corrs)]


def run_convergence(spec: ConvergenceSpec, threads: int | None = 1) -> ConvergenceRun:
    """Execute one convergence experiment.

    Extraction failures at individual spans are recorded as NaN and skipped
    by :func:`fit_slope`.
    """
    return run_columns(spec.model, spec.window, [spec.correction], spec.t_points,
                       spec.step, spec.config, threads)[0]


# ---------------------------------------------------------------------------
# tables


@dataclass
class Table:
    """Tab-separated table with a metadata dictionary for the JSON sidecar."""

    header: list
    rows: list
    meta: dict = field(default_factory=dict)

    def to_tsv(self) -> str:
        lines = ["\t".join(self.header)]
        lines += ["\t".join(r) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.meta, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(type(x))


def _num(x) -> str:
    return "NA" if x is None or not math.isfinite(x) else f"{x:.15g}"


TABLE1_COLUMNS = (
    ("a_0", "f1", Correction("none")),
    ("a_10", "f1", Correction("t1", 10)),
    ("a_50", "f1", Correction("t1", 50)),
    ("a'_50", "f1", Correction("t2", 50)),
    ("b_0", "f2", Correction("none")),
    ("b_50", "f2", Correction("t1", 50)),
    ("b'_50", "f2", Correction("t2", 50)),
)


def table1(quick: bool = False, threads: int | None = 1, step: float = DEFAULT_STEP,
           windows_list=None, columns=None) -> Table:
    """Fitted slopes of the leading-frequency error on F1 and F2.

    Rows are windows, columns the correction variants. Slopes are signed
    (negative for converging errors); ``NA`` marks an inapplicable correction
    or too few usable points.
    """
    lo, hi = QUICK_RANGE if quick else FULL_RANGE
    ts = t_grid(lo, hi)
    if windows_list is None:
        tokens = ["p0", "p1", "p2"] if quick else ["p0", "p1", "p2", "p3", "p4", "p5", "exp"]
        windows_list = [windows.from_token(t) for t in tokens]
    cols = [c for c in TABLE1_COLUMNS if columns is None or c[0] in columns]
    rows, runs_meta = [], []
    for w in windows_list:
        row = [w.token]
        results = {}
        for model in ("f1", "f2"):
            wanted = [c for c in cols if c[1] == model]
            if not wanted:
                continue
            runs = run_columns(model, w, [c[2] for c in wanted], ts, step, threads=threads)
            for (name, _, corr), run in zip(wanted, runs):
                results[name] = run
        for name, _, corr in cols:
            run = results[name]
            try:
                slope, intercept = fit_slope(run)
            except InsufficientData:
                slope, intercept = math.nan, math.nan
            try:
                full_slope = fit_slope(replace(run, fit_t_min=0.0))[0]
            except InsufficientData:
                full_slope = math.nan
            row.append(_num(slope))
            runs_meta.append({
                "window": w.token, "column": name, **run.metadata,
                "slope": slope, "intercept": intercept,
                "slope_without_lobe_cut": full_slope,
                "fit_t_min": run.fit_t_min, "fit_floor": run.fit_floor,
                "fit_points": int(run.fit_mask().sum()),
                "t_points": run.t_points, "errors": run.errors,
            })
        rows.append(row)
    meta = {
        "table": "table1", "quick": quick, "step": step,
        "t_over_2pi_range": [lo, hi], "grid_points": len(ts),
        "fit": "OLS on (log10(T/2pi), log10(err)); points with err <= fit_floor, NaN, "
               "or T < fit_t_min (nearest perturber inside the main lobe) are excluded",
        "runs": runs_meta,
    }
    return Table(["window"] + [c[0] for c in cols], rows, meta)


def _tone(nu0: float, half_span: float, step: float):
    return sample_model(QPModel([QPTerm(nu0, 1.0)]), half_span, step)


def table2(window: WeightWindow | None = None) -> Table:
    """Single tones just below and above the Nyquist frequency (h = 1).

    Columns: ``nu0/pi``, recovered ``nu/pi`` (band [-1, 1)), ``(nu0 - nu)/pi``.
    """
    window = window or windows.cosine(1)
    rows, meta_rows = [], []
    for x in TABLE2_TONES:
        sig = _tone(x * np.pi, 1000.0, 1.0)
        space = InnerProductSpace.for_signal(sig, window)
        nu = decompose(space, sig.samples, ExtractionConfig(max_terms=1)).terms[0].freq
        rows.append([f"{x:.3f}", f"{nu / np.pi:.12f}", f"{(x * np.pi - nu) / np.pi:.12f}"])
        meta_rows.append({"nu0_over_pi": x, "nu": nu})
    meta = {"table": "table2", "span": [-1000.0, 1000.0], "step": 1.0,
            "window": window.token, "rows": meta_rows}
    return Table(["nu0/pi", "nu/pi", "(nu0-nu)/pi"], rows, meta)


def table3(window: WeightWindow | None = None, h: float = 1.0, h_prime: float = 1.001) -> Table:
    """Dual-rate reconstruction of tones up to and beyond the validity limit.

    Columns: ``nu0/pi``, ``nu/pi`` and ``nu' h'/pi`` (the two aliased
    frequencies, each expressed as a fraction of its own Nyquist frequency),
    reconstructed ``nu_f/pi``, turn count ``k`` and its rounding residue.
    """
    window = window or windows.cosine(1)
    rows, meta_rows = [], []
    for x in TABLE3_TONES:
        a = _tone(x * np.pi, 1000.0, h)
        b = _tone(x * np.pi, 1000.0, h_prime)
        term = analyze_dual(a, b, window, ExtractionConfig(max_terms=1))[0]
        nu_f = math.nan if term.nu0 is None else 2.0 * term.nu0
        rows.append([f"{x:.3f}", f"{term.sigma * h / np.pi:.12f}",
                     f"{term.sigma_prime * h_prime / np.pi:.12f}", f"{nu_f:.12f}",
                     "NA" if term.k is None else str(term.k),
                     "NA" if term.residue is None else f"{term.residue:.3g}"])
        meta_rows.append({"nu0_over_pi": x, "nu_cycles": term.nu, "nu_prime_cycles": term.nu_prime,
                          "nu0_cycles": term.nu0, "k": term.k, "residue": term.residue,
                          "note": term.note})
    meta = {"table": "table3", "span": [-1000.0, 1000.0], "h": h, "h_prime": h_prime,
            "window": window.token, "rows": meta_rows}
    return Table(["nu0/pi", "nu/pi", "nu'h'/pi", "nu_f/pi", "k", "k_residue"], rows, meta)
