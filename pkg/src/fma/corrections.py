"""Asymptotic corrections of the leading frequency and amplitude.

After a first analysis the leading term ``A1 exp(i nu1 t)`` and a list of
perturbing terms ``a_k exp(i nu_k t)`` are known approximately. The windowed
estimate of ``nu1`` is biased by the perturbers; to leading order in ``1/T``
the bias is

* ``nu1 - nu1^T = (-1)^(p+1) pi^(2p) (p!)^2 / (phi''(0) T^(2p+2))
  * sum_k Re(a_k) cos(Omega_k T) / Omega_k^(2p+1)`` for the cosine window of
  order ``p`` (:func:`correct_theorem1`), and
* ``nu1 - nu1^T = -1 / (T phi''(0)) * sum_k Re(a_k) phi'(Omega_k T)`` for any
  window (:func:`correct_theorem2`, accurate to a higher order),

with ``Omega_k = nu_k - nu1`` and amplitudes normalised by ``A1``. The
approximate frequencies from the analysis may be used in place of the exact
ones without changing the order of the correction.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import windows
from .exceptions import DomainError, UnsupportedWindow
from .qpsignal import QPTerm
from .windows import WeightWindow

__all__ = [
    "CorrectionInput",
    "correct_theorem1",
    "correct_theorem2",
    "amplitude_error_estimate",
    "frequency_shift_theorem1",
    "frequency_shift_theorem2",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorrectionInput:
    """Leading term, perturbing terms, window and half span of one analysis.

    Perturbers closer to the leading frequency than ``2 pi / T`` sit inside the
    main lobe of the window transform where the asymptotic formulas do not
    apply; they are skipped (with a warning) when a correction is evaluated.
    """

    leading: QPTerm
    perturbers: tuple = field(default_factory=tuple)
    window: WeightWindow = field(default_factory=lambda: windows.cosine(1))
    half_span: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "perturbers", tuple(self.perturbers))
        if not (self.half_span > 0 and math.isfinite(self.half_span)):
            raise DomainError("half span must be positive")
        if self.leading.amp == 0:
            raise DomainError("leading amplitude must be nonzero")

    def usable(self):
        """``(Omega', a/A1)`` arrays for the perturbers outside the main lobe."""
        if not self.perturbers:
            return np.zeros(0), np.zeros(0, dtype=complex)
        omega = np.array([p.freq for p in self.perturbers]) - self.leading.freq
        rel = np.array([p.amp for p in self.perturbers], dtype=complex) / self.leading.amp
        keep = np.abs(omega) * self.half_span >= 2.0 * np.pi
        if not np.all(keep):
            warnings.warn(
                f"skipping {int((~keep).sum())} perturber(s) with |Omega T| < 2 pi",
                RuntimeWarning, stacklevel=3)
        return omega[keep], rel[keep]


def frequency_shift_theorem1(inp: CorrectionInput) -> float:
    """The shift ``nu1 - nu1^T`` predicted by the cosine-window series."""
    w = inp.window
    if not w.is_cosine:
        raise UnsupportedWindow("the closed-form series needs a cosine window")
    omega, rel = inp.usable()
    if omega.size == 0:
        return 0.0
    p, T = w.order, inp.half_span
    pref = (-1) ** (p + 1) * np.pi ** (2 * p) * math.factorial(p) ** 2
    pref /= windows.phi_second_zero(w) * T ** (2 * p + 2)
    terms = rel.real * np.cos(omega * T) / omega ** (2 * p + 1)
    return float(pref * math.fsum(terms))


def frequency_shift_theorem2(inp: CorrectionInput) -> float:
    """The shift ``nu1 - nu1^T`` from the transform derivative at ``Omega T``."""
    omega, rel = inp.usable()
    if omega.size == 0:
        return 0.0
    T = inp.half_span
    dphi = np.atleast_1d(windows.phi_prime(inp.window, omega * T))
    return float(-math.fsum(rel.real * dphi) / (T * windows.phi_second_zero(inp.window)))


def correct_theorem1(inp: CorrectionInput) -> float:
    """Corrected leading frequency using the cosine-window series.

    Raises
    ------
    UnsupportedWindow
        For the exponential window, whose transform has no such series.
    """
    return inp.leading.freq + frequency_shift_theorem1(inp)


def correct_theorem2(inp: CorrectionInput) -> float:
    """Corrected leading frequency using ``phi'`` directly; any window."""
    return inp.leading.freq + frequency_shift_theorem2(inp)


def amplitude_error_estimate(inp: CorrectionInput) -> complex:
    """Predicted ``A1^T / A1 - 1``, i.e. ``sum_k (a_k / A1) phi(Omega_k T)``.

    Multiply by the leading amplitude to get the absolute amplitude error.
    """
    omega, rel = inp.usable()
    if omega.size == 0:
        return 0j
    ph = np.atleast_1d(windows.phi(inp.window, omega * inp.half_span))
    return complex(np.sum(rel * ph))
