"""Recovery of frequencies above the Nyquist limit from two sampling steps.

A tone ``exp(2 pi i nu0 t)`` sampled with step ``h`` is seen at the aliased
frequency ``nu`` with ``nu0 h = nu h + k`` for an integer turn count ``k``.
Sampling the same signal again with a slightly longer step ``h' = h + eps``
gives a second alias ``nu'``; comparing the two recovers ``k`` and therefore
``nu0``, provided ``|nu0 eps| < 1/2``.

All frequencies in this module are in cycles per unit time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analyzer import ExtractionConfig, InnerProductSpace, decompose
from .exceptions import DegenerateStep, DomainError, InconsistentMeasurement
from .qpsignal import SampledSignal
from .windows import WeightWindow

__all__ = [
    "bracket",
    "DualRateMeasurement",
    "Reconstruction",
    "reconstruct",
    "DualTerm",
    "analyze_dual",
    "INCONSISTENCY_THRESHOLD",
    "AMPLITUDE_MATCH",
]

INCONSISTENCY_THRESHOLD = 0.25
AMPLITUDE_MATCH = 0.10
_BAND_SLACK = 1e-9


def bracket(x: float) -> int:
    """The integer ``[x]`` with ``x - [x]`` in (-1/2, 1/2].

    >>> bracket(0.5), bracket(-0.5), bracket(2.49), bracket(2.51)
    (0, -1, 2, 3)
    """
    x = float(x)
    if not abs(x) < 2.0**52:
        raise DomainError("bracket argument must satisfy |x| < 2^52")
    return int(math.ceil(x - 0.5))


@dataclass(frozen=True)
class DualRateMeasurement:
    """Aliased frequencies ``nu`` (step ``h``) and ``nu_prime`` (step ``h_prime``)."""

    nu: float
    nu_prime: float
    h: float
    h_prime: float

    def __post_init__(self):
        if not (self.h > 0 and self.h_prime > 0):
            raise DomainError("sampling steps must be positive")
        if self.h_prime == self.h:
            raise DegenerateStep("the two sampling steps are equal")
        if self.h_prime < self.h:
            raise DomainError("expected h_prime > h")
        if abs(self.nu * self.h) > 0.5 + _BAND_SLACK:
            raise DomainError(f"nu = {self.nu!r} lies outside the Nyquist band of h")
        if abs(self.nu_prime * self.h_prime) > 0.5 + _BAND_SLACK:
            raise DomainError(f"nu_prime = {self.nu_prime!r} lies outside the Nyquist band of h'")

    @property
    def eps(self) -> float:
        return self.h_prime - self.h


@dataclass(frozen=True)
class Reconstruction:
    nu0: float
    k: int
    residue: float


def reconstruct(m: DualRateMeasurement) -> Reconstruction:
    """True frequency and turn count from a dual-rate measurement.

    ``k_raw = h / eps * ((nu' - nu) h' - [nu' h' - nu h])`` should be an
    integer; it is rounded with :func:`bracket` and ``nu0 = nu + k / h``.

    Raises
    ------
    InconsistentMeasurement
        If ``k_raw`` is further than 0.25 from an integer.
    """
    h, hp = m.h, m.h_prime
    k_raw = h / m.eps * ((m.nu_prime - m.nu) * hp - bracket(m.nu_prime * hp - m.nu * h))
    k = bracket(k_raw)
    residue = abs(k_raw - k)
    if residue > INCONSISTENCY_THRESHOLD:
        raise InconsistentMeasurement(
            f"turn count {k_raw:.6g} is not close to an integer (residue {residue:.3g})")
    return Reconstruction(nu0=m.nu + k / h, k=k, residue=float(residue))


@dataclass(frozen=True)
class DualTerm:
    """One reconstructed term; ``k`` and ``nu0`` are ``None`` when unpaired.

    ``nu`` and ``nu_prime`` are in cycles; ``sigma`` and ``sigma_prime`` are
    the angular frequencies exactly as returned by the analyser.
    """

    nu0: float | None
    amp: complex
    k: int | None
    nu: float
    nu_prime: float | None
    residue: float | None = None
    note: str = ""
    sigma: float | None = None
    sigma_prime: float | None = None


def _cycles(space: InnerProductSpace, sigma: float) -> float:
    """Angular frequency to cycles, folded into (-1/2h, 1/2h]."""
    x = sigma * space.step / (2.0 * np.pi)
    return (x - bracket(x)) / space.step


def analyze_dual(f_h: SampledSignal, f_hprime: SampledSignal, window: WeightWindow,
                 config: ExtractionConfig | None = None) -> list:
    """Decompose both samplings and reconstruct each paired term.

    Terms are paired positionally after sorting each decomposition by
    decreasing amplitude; a pair is reconstructed only if the two amplitudes
    agree within 10 %. Mismatched, inconsistent or surplus terms are returned
    with ``k = None`` and an explanatory ``note``.
    """
    if not f_hprime.step > f_h.step:
        if f_hprime.step == f_h.step:
            raise DegenerateStep("the two sampling steps are equal")
        raise DomainError("the second signal must use the longer step")
    out = []
    spaces = [InnerProductSpace.for_signal(s, window) for s in (f_h, f_hprime)]
    decs = [decompose(sp, s.samples, config) for sp, s in zip(spaces, (f_h, f_hprime))]
    lists = [sorted(d.terms, key=lambda t: -abs(t.amp)) for d in decs]
    for ta, tb in zip(*lists):
        nu = _cycles(spaces[0], ta.freq)
        nup = _cycles(spaces[1], tb.freq)
        scale = max(abs(ta.amp), abs(tb.amp))
        if abs(abs(ta.amp) - abs(tb.amp)) > AMPLITUDE_MATCH * scale:
            out.append(DualTerm(None, ta.amp, None, nu, nup, note="amplitude mismatch",
                                sigma=ta.freq, sigma_prime=tb.freq))
            continue
        try:
            rec = reconstruct(DualRateMeasurement(nu, nup, f_h.step, f_hprime.step))
        except InconsistentMeasurement as exc:
            out.append(DualTerm(None, ta.amp, None, nu, nup, note=str(exc),
                                sigma=ta.freq, sigma_prime=tb.freq))
            continue
        out.append(DualTerm(rec.nu0, ta.amp, rec.k, nu, nup, rec.residue,
                            sigma=ta.freq, sigma_prime=tb.freq))
    n = min(len(lists[0]), len(lists[1]))
    for which, terms, sp in ((0, lists[0], spaces[0]), (1, lists[1], spaces[1])):
        for t in terms[n:]:
            nu = _cycles(sp, t.freq)
            label = "unpaired (step h)" if which == 0 else "unpaired (step h')"
            out.append(DualTerm(None, t.amp, None, nu if which == 0 else float("nan"),
                                nu if which == 1 else None, note=label,
                                sigma=t.freq if which == 0 else None,
                                sigma_prime=t.freq if which == 1 else None))
    return out
