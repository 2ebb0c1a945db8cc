"""Quasiperiodic models, test functions and symmetric sampling grids."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DomainError

__all__ = [
    "QPTerm",
    "QPModel",
    "SampledSignal",
    "grid_size",
    "sample_times",
    "evaluate_model",
    "sample_model",
    "f1",
    "f1_sample",
    "f1_expansion",
    "f2_model",
    "alias_frequency",
    "read_csv",
    "write_csv",
]

DEFAULT_OMEGA = 2.02
MIN_HALF_COUNT = 8


@dataclass(frozen=True)
class QPTerm:
    """One periodic term ``amp * exp(i * freq * t)`` (angular frequency)."""

    freq: float
    amp: complex

    def __post_init__(self):
        if self.amp == 0:
            raise DomainError("stored terms must have a nonzero amplitude")


def _order_key(term: QPTerm):
    return (-abs(term.amp), abs(term.freq), term.freq)


@dataclass(frozen=True)
class QPModel:
    """Ordered collection of terms, largest amplitude first."""

    terms: tuple
    label: str = ""

    def __init__(self, terms: Iterable[QPTerm], label: str = ""):
        terms = tuple(sorted(terms, key=_order_key))
        freqs = [t.freq for t in terms]
        if len(set(freqs)) != len(freqs):
            raise DomainError("model frequencies must be pairwise distinct")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "label", label)

    @classmethod
    def from_arrays(cls, freqs, amps, label: str = ""):
        return cls((QPTerm(float(f), complex(a)) for f, a in zip(freqs, amps)), label)

    @property
    def freqs(self) -> np.ndarray:
        return np.array([t.freq for t in self.terms])

    @property
    def amps(self) -> np.ndarray:
        return np.array([t.amp for t in self.terms], dtype=complex)

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def head(self, n: int) -> "QPModel":
        return QPModel(self.terms[:n], self.label)


@dataclass(frozen=True)
class SampledSignal:
    """Samples at ``t_j = (j - M) h``, ``j = 0..2M``, on the span ``[-T, T]``.

    The grid is fixed by the integer ``half_count`` (M) and the step ``h``;
    ``T = M h`` follows.
    """

    half_count: int
    step: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.half_count < MIN_HALF_COUNT:
            raise DomainError(f"need at least {MIN_HALF_COUNT} samples per half span")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise DomainError("sampling step must be positive")
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (2 * self.half_count + 1,):
            raise DomainError(
                f"expected {2 * self.half_count + 1} samples, got {samples.shape}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def half_span(self) -> float:
        return self.half_count * self.step

    @property
    def times(self) -> np.ndarray:
        return sample_times(self.half_count, self.step)

    def __len__(self):
        return self.samples.size


def grid_size(half_span: float, step: float) -> int:
    """Number of steps per half span: ``ceil(T / h)`` ignoring rounding noise."""
    if not (half_span > 0 and step > 0):
        raise DomainError("half span and step must be positive")
    m = math.ceil(round(half_span / step, 9))
    if m < MIN_HALF_COUNT:
        raise DomainError(f"grid too coarse: T/h = {half_span / step:.3g} < {MIN_HALF_COUNT}")
    return m


def sample_times(half_count: int, step: float) -> np.ndarray:
    return (np.arange(2 * half_count + 1, dtype=float) - half_count) * step


def evaluate_model(model: QPModel, t):
    """``sum_k a_k exp(i nu_k t)`` at scalar or array ``t``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for term in model.terms:
        out += term.amp * np.exp(1j * term.freq * t)
    return out if out.ndim else complex(out)


def sample_model(model: QPModel, half_span: float, step: float) -> SampledSignal:
    m = grid_size(half_span, step)
    return SampledSignal(m, step, evaluate_model(model, sample_times(m, step)))


# ---------------------------------------------------------------------------
# the F1 / F2 test functions


def f1(t, omega: float = DEFAULT_OMEGA):
    """``1 / (1 + exp(i t)/2 + exp(-i omega t)/4)``.

    The denominator never vanishes: the two exponentials sum to at most 3/4 in
    modulus.
    """
    t = np.asarray(t, dtype=float)
    out = 1.0 / (1.0 + 0.5 * np.exp(1j * t) + 0.25 * np.exp(-1j * omega * t))
    return out if out.ndim else complex(out)


def f1_sample(half_span: float, step: float, omega: float = DEFAULT_OMEGA) -> SampledSignal:
    m = grid_size(half_span, step)
    return SampledSignal(m, step, f1(sample_times(m, step), omega))


def f1_expansion(cutoff: int, omega: float = DEFAULT_OMEGA) -> QPModel:
    """Geometric expansion of F1 truncated at total order ``cutoff``.

    ``1/(1+u+v) = sum (-1)^(p+q) C(p+q, p) u^p v^q`` with ``u = exp(i t)/2`` and
    ``v = exp(-i omega t)/4``, so the (p, q) term has frequency ``p - q omega``.
    """
    if not (0 <= cutoff <= 60):
        raise DomainError("cutoff order must be in [0, 60]")
    terms = []
    for p in range(cutoff + 1):
        for q in range(cutoff + 1 - p):
            amp = (-1) ** (p + q) * math.comb(p + q, p) * 0.5**p * 0.25**q
            terms.append(QPTerm(p - q * omega, complex(amp)))
    return QPModel(terms, label=f"f1_expansion(N={cutoff}, omega={omega})")


def f2_model(omega: float = DEFAULT_OMEGA, nterms: int = 50) -> QPModel:
    """The ``nterms`` largest terms of the F1 expansion."""
    full = f1_expansion(40, omega)
    return QPModel(full.terms[:nterms], label=f"f2(omega={omega}, n={nterms})")


# ---------------------------------------------------------------------------
# aliasing


def alias_frequency(nu0: float, h: float) -> float:
    """Angular frequency observed when ``exp(i nu0 t)`` is sampled with step ``h``.

    Returns ``nu0 - 2 pi k / h`` with ``k = [nu0 h / 2 pi]`` so that the result,
    in cycles per sample, lies in (-1/2, 1/2].
    """
    from .dealias import bracket

    if not h > 0:
        raise DomainError("sampling step must be positive")
    k = bracket(nu0 * h / (2.0 * np.pi))
    return nu0 - 2.0 * np.pi * k / h


# ---------------------------------------------------------------------------
# CSV signal files: header ``t,re,im``


def write_csv(signal: SampledSignal, dest) -> None:
    """Write ``t,re,im`` rows to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_rows(signal, dest)
        return
    with open(dest, "w", newline="") as fh:
        _write_rows(signal, fh)


def _write_rows(signal: SampledSignal, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["t", "re", "im"])
    for tj, z in zip(signal.times, signal.samples):
        writer.writerow([repr(float(tj)), repr(float(z.real)), repr(float(z.imag))])


def read_csv(path) -> SampledSignal:
    """Read a ``t,re,im`` file; the grid must be uniform and symmetric about 0."""
    rows: list[Sequence[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["t", "re", "im"]:
            raise DomainError("line 1: expected header 't,re,im'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DomainError(f"line {lineno}: expected 3 columns, got {len(row)}")
            try:
                rows.append(tuple(float(c) for c in row))
            except ValueError:
                raise DomainError(f"line {lineno}: non-numeric value") from None
    if len(rows) < 2 * MIN_HALF_COUNT + 1:
        raise DomainError(f"need at least {2 * MIN_HALF_COUNT + 1} samples, got {len(rows)}")
    data = np.array(rows)
    t = data[:, 0]
    dt = np.diff(t)
    if np.any(dt <= 0):
        bad = int(np.argmax(dt <= 0)) + 3
        raise DomainError(f"line {bad}: times must be strictly increasing")
    h = (t[-1] - t[0]) / (t.size - 1)
    off = np.abs(dt - h) > 1e-9 * h
    if np.any(off):
        bad = int(np.argmax(off)) + 3
        raise DomainError(f"line {bad}: non-uniform sampling step")
    if t.size % 2 == 0:
        raise DomainError("grid must have an odd number of samples centred on t = 0")
    m = (t.size - 1) // 2
    if abs(t[m]) > 1e-9 * h or abs(t[0] + t[-1]) > 1e-9 * h * m:
        raise DomainError("grid must be symmetric about t = 0")
    return SampledSignal(m, h, data[:, 1] + 1j * data[:, 2])
