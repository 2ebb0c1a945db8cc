"""Weighted correlation, peak search and iterative quasiperiodic decomposition.

Every evaluation of ``C(sigma) = sum_j w_j f_j exp(-i sigma t_j)`` uses a block
factorisation of the uniform grid: with ``j = a B + b`` the exponential splits
into ``exp(-i sigma tau_a) * exp(-i sigma s_b)``, so one evaluation costs a
single (A x B) matrix-vector product plus ``A + B`` complex exponentials.
Tones are synthesised on the grid the same way.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.optimize import brentq

from . import windows
from .exceptions import DomainError, EmptyResidual, PeakNotFound
from .qpsignal import QPModel, QPTerm, SampledSignal, sample_times
from .windows import WeightWindow

__all__ = [
    "InnerProductSpace",
    "ExtractionConfig",
    "Decomposition",
    "inner_product",
    "correlation",
    "coarse_peak",
    "refine_peak",
    "decompose",
    "residual_norm",
]

log = logging.getLogger(__name__)

_SCAN_POINTS = 9
DEGENERATE_NORM = 1e-6


class InnerProductSpace:
    """Discrete weighted scalar product on a symmetric grid.

    The weights are trapezoidal weights times ``chi(t_j / T)``, rescaled so that
    they sum to one; ``<1, 1> = 1`` then holds to rounding.
    """

    def __init__(self, half_count: int, step: float, window: WeightWindow):
        self.half_count = int(half_count)
        self.step = float(step)
        self.window = window
        n = 2 * self.half_count + 1
        t = sample_times(self.half_count, self.step)
        trap = np.ones(n)
        trap[0] = trap[-1] = 0.5
        w = trap * windows.chi(window, t / self.half_span)
        w = 0.5 * (w + w[::-1])
        self.weights = w / math.fsum(w)
        self.weights.setflags(write=False)

        # block layout: index j = a * nb + b
        nb = int(math.ceil(math.sqrt(n)))
        na = int(math.ceil(n / nb))
        self._na, self._nb = na, nb
        self._tau = (np.arange(na) * nb - self.half_count) * self.step
        self._s = np.arange(nb) * self.step
        self._w_block = self._block(self.weights.astype(complex))

    @classmethod
    def for_signal(cls, signal: SampledSignal, window: WeightWindow) -> "InnerProductSpace":
        return cls(signal.half_count, signal.step, window)

    @property
    def size(self) -> int:
        return 2 * self.half_count + 1

    @property
    def half_span(self) -> float:
        return self.half_count * self.step

    @property
    def times(self) -> np.ndarray:
        return sample_times(self.half_count, self.step)

    @property
    def resolution(self) -> float:
        """Angular frequency unit ``2 pi / T``."""
        return 2.0 * np.pi / self.half_span

    @property
    def nyquist(self) -> float:
        return np.pi / self.step

    def wrap(self, sigma: float) -> float:
        """Map an angular frequency into the band [-pi/h, pi/h)."""
        period = 2.0 * np.pi / self.step
        return float(sigma - period * math.floor((sigma + 0.5 * period) / period))

    def describe(self) -> dict:
        return {"half_count": self.half_count, "step": self.step,
                "half_span": self.half_span, "window": self.window.token}

    # -- block helpers -----------------------------------------------------

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        if f.shape != (self.size,):
            raise DomainError(f"array length {f.shape} does not match grid size {self.size}")
        return f

    def _block(self, x: np.ndarray) -> np.ndarray:
        pad = self._na * self._nb - x.size
        if pad:
            x = np.concatenate([x, np.zeros(pad, dtype=x.dtype)])
        return x.reshape(self._na, self._nb)

    def prepare(self, f) -> np.ndarray:
        """Weighted signal in block layout, reused across correlation calls."""
        return self._block(self.weights * self._check(f))

    def corr_block(self, block: np.ndarray, sigma: float, deriv: bool = False):
        ea = np.exp(-1j * sigma * self._tau)
        eb = np.exp(-1j * sigma * self._s)
        if not deriv:
            return complex(ea @ (block @ eb))
        y = block @ np.stack([eb, self._s * eb], axis=1)
        c = complex(ea @ y[:, 0])
        dc = -1j * complex((self._tau * ea) @ y[:, 0] + ea @ y[:, 1])
        return c, dc

    def corr_many(self, block: np.ndarray, sigmas, deriv: bool = False):
        """Vectorised :meth:`corr_block` over an array of frequencies."""
        sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
        ea = np.exp(-1j * np.outer(sigmas, self._tau))
        eb = np.exp(-1j * np.outer(self._s, sigmas))
        y = block @ eb
        c = np.einsum("ka,ak->k", ea, y)
        if not deriv:
            return c
        ys = block @ (self._s[:, None] * eb)
        dc = -1j * (np.einsum("ka,ak->k", ea * self._tau, y) + np.einsum("ka,ak->k", ea, ys))
        return c, dc

    def tone_overlap(self, dnu: float) -> complex:
        """``<exp(i (mu + dnu) t), exp(i mu t)>`` for any ``mu``."""
        return self.corr_block(self._w_block, -dnu)

    def synthesize(self, freqs, coefs) -> np.ndarray:
        """``sum_k coefs[k] exp(i freqs[k] t_j)`` on the grid."""
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        coefs = np.atleast_1d(np.asarray(coefs, dtype=complex))
        ea = np.exp(1j * np.outer(freqs, self._tau))
        eb = np.exp(1j * np.outer(freqs, self._s))
        out = (ea.T * coefs) @ eb
        return out.ravel()[: self.size]


def inner_product(space: InnerProductSpace, f, g) -> complex:
    """``sum_j w_j f_j conj(g_j)``."""
    f = space._check(f)
    g = space._check(g)
    return complex(np.dot(space.weights * f, np.conj(g)))


def residual_norm(space: InnerProductSpace, f) -> float:
    f = space._check(f)
    return math.sqrt(max(float(np.dot(space.weights, (f * f.conj()).real)), 0.0))


def correlation(space: InnerProductSpace, f, sigma: float) -> complex:
    """Projection coefficient ``<f, exp(i sigma t)>``."""
    return space.corr_block(space.prepare(f), sigma)


# ---------------------------------------------------------------------------
# peak search


@dataclass(frozen=True)
class ExtractionConfig:
    max_terms: int = 50
    amp_floor: float = 1e-10
    min_separation: float = 1.0
    refine_tol: float = 1e-14
    fft_oversample: int = 4

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")
        if not (0.0 <= self.amp_floor < 1.0):
            raise DomainError("amp_floor must be in [0, 1)")
        if not self.min_separation > 0:
            raise DomainError("min_separation must be positive")
        if not self.refine_tol > 0:
            raise DomainError("refine_tol must be positive")
        if self.fft_oversample < 1:
            raise DomainError("fft_oversample must be >= 1")


def _coarse(space: InnerProductSpace, f, oversample: int):
    wf = space.weights * space._check(f)
    if not np.any(wf):
        raise EmptyResidual("empty residual")
    length = scipy.fft.next_fast_len(oversample * space.size)
    # only the bin index is used downstream, single precision is enough
    buf = np.zeros(length, dtype=np.complex64)
    scale = float(np.abs(wf).max())
    buf[: wf.size] = wf / scale
    del wf
    spec = scipy.fft.fft(buf, overwrite_x=True)
    del buf
    power = np.multiply(spec.real, spec.real)
    power += spec.imag * spec.imag
    del spec
    top = float(power.max())
    ties = np.flatnonzero(power == top)
    width = 2.0 * np.pi / (length * space.step)
    # bin k <-> k * width, folded into [-pi/h, pi/h)
    sig = np.where(ties < (length + 1) // 2, ties, ties - length) * width
    k = int(np.argmin(np.abs(sig)))
    return float(sig[k]), scale * math.sqrt(top), width


def coarse_peak(space: InnerProductSpace, f, oversample: int = 4) -> float:
    """Centre of the windowed-DFT bin with the largest modulus.

    Raises :class:`EmptyResidual` for an all-zero signal.
    """
    return _coarse(space, f, oversample)[0]


def _refine(space, block, sigma0, half_width, tol):
    def slope(s):
        c, dc = space.corr_block(block, s, deriv=True)
        return (c.conjugate() * dc).real

    for width in (half_width, 2.0 * half_width):
        grid = sigma0 + np.linspace(-width, width, _SCAN_POINTS)
        c, dc = space.corr_many(block, grid, deriv=True)
        g = (c.conj() * dc).real
        ups = np.flatnonzero((g[:-1] > 0) & (g[1:] <= 0))
        if ups.size == 0:
            log.debug("no interior maximum within +/-%g of %g", width, sigma0)
            continue
        mid = np.abs(space.corr_many(block, 0.5 * (grid[ups] + grid[ups + 1])))
        best = ups[int(np.argmax(mid))]
        lo, hi = grid[best], grid[best + 1]
        if g[best + 1] == 0:
            return float(hi)
        xtol = tol * max(1.0, abs(sigma0)) * space.resolution
        return float(brentq(slope, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200))
    raise PeakNotFound(f"no interior maximum of |C| near sigma = {sigma0:.17g}")


def refine_peak(space: InnerProductSpace, f, sigma0: float, refine_tol: float = 1e-14,
                oversample: int = 4) -> float:
    """Local maximiser of ``|<f, exp(i sigma t)>|`` near ``sigma0``.

    The search bracket is one coarse bin either side of ``sigma0``, widened
    once if it holds no interior maximum. The maximum is located as the root of
    ``d|C|^2/dsigma``, computed analytically, which keeps full precision where
    ``|C|^2`` itself is flat.
    """
    length = scipy.fft.next_fast_len(oversample * space.size)
    width = 2.0 * np.pi / (length * space.step)
    nu = _refine(space, space.prepare(f), sigma0, width, refine_tol)
    return space.wrap(nu)


# ---------------------------------------------------------------------------
# decomposition


@dataclass
class Decomposition:
    """Result of :func:`decompose`.

    ``basis[k]`` holds the coefficients of the k-th orthonormal vector over the
    raw tones ``exp(i nu_j t)``, ``j <= k``; ``ortho_coefs[k]`` is the projection
    of the signal on it.
    """

    terms: list
    residual_norms: list
    space: InnerProductSpace
    ortho_diag: list
    status: str
    basis: np.ndarray = field(repr=False)
    ortho_coefs: np.ndarray = field(repr=False)
    identity_gap: list = field(default_factory=list, repr=False)
    residual: np.ndarray = field(default=None, repr=False)

    @property
    def freqs(self) -> np.ndarray:
        return np.array([t.freq for t in self.terms])

    @property
    def amps(self) -> np.ndarray:
        return np.array([t.amp for t in self.terms], dtype=complex)

    def model(self, label: str = "") -> QPModel:
        return QPModel(self.terms, label)

    def orthonormal_vector(self, k: int) -> np.ndarray:
        return self.space.synthesize(self.freqs[: k + 1], self.basis[k, : k + 1])


def _ginner(gram, u, v):
    return complex(u @ gram @ v.conj())


def decompose(space: InnerProductSpace, f, config: ExtractionConfig | None = None) -> Decomposition:
    """Iteratively extract ``f ~ sum_k A_k exp(i nu_k t)``.

    Each step maximises the correlation of the current residual, orthonormalises
    the new tone against the accepted ones (modified Gram-Schmidt plus one
    re-orthogonalisation pass, carried out on tone coefficients through the
    Gram matrix), and removes the projection. Raw amplitudes are recovered from
    the orthonormal coefficients at the end.
    """
    config = config or ExtractionConfig()
    f = space._check(f)
    nmax = config.max_terms
    freqs: list[float] = []
    basis = np.zeros((nmax, nmax), dtype=complex)
    gram = np.zeros((nmax, nmax), dtype=complex)
    coefs = np.zeros(nmax, dtype=complex)
    ortho_diag: list[float] = []
    gaps: list[float] = []

    residual = f.copy()
    norms = [residual_norm(space, residual)]
    length = scipy.fft.next_fast_len(config.fft_oversample * space.size)
    bin_width = 2.0 * np.pi / (length * space.step)
    lead = None
    status = "max_terms"

    while len(freqs) < nmax:
        n = len(freqs)
        try:
            sigma0, coarse_mod, _ = _coarse(space, residual, config.fft_oversample)
        except EmptyResidual:
            status = "empty_residual"
            break
        if lead is not None and coarse_mod < 0.5 * config.amp_floor * lead:
            status = "amp_floor"
            break
        block = space.prepare(residual)
        try:
            nu = space.wrap(_refine(space, block, sigma0, bin_width, config.refine_tol))
        except PeakNotFound:
            status = "no_peak"
            break
        direct = space.corr_block(block, nu)
        if lead is not None and abs(direct) < config.amp_floor * lead:
            status = "amp_floor"
            break
        if freqs and np.min(np.abs(np.asarray(freqs) - nu)) < config.min_separation * space.resolution:
            status = "resolution_limit"
            break

        for i, mu in enumerate(freqs):
            gram[i, n] = space.tone_overlap(mu - nu)  # <e_i, e_n>
            gram[n, i] = gram[i, n].conjugate()
        gram[n, n] = space.tone_overlap(0.0).real
        g = gram[: n + 1, : n + 1]
        v = np.zeros(n + 1, dtype=complex)
        v[n] = 1.0
        first = 0.0
        for sweep in range(2):
            for k in range(n):
                ck = basis[k, : n + 1]
                r = _ginner(g, v, ck)
                if sweep == 0:
                    first = max(first, abs(r))
                v -= r * ck
        vnorm = math.sqrt(max(_ginner(g, v, v).real, 0.0))
        if vnorm < DEGENERATE_NORM:
            status = "basis_degenerate"
            break
        v /= vnorm

        freqs.append(nu)
        basis[n, : n + 1] = v
        ortho_diag.append(first)
        corr = space.corr_many(block, freqs)
        c = complex(np.dot(corr, v.conj()))
        coefs[n] = c
        gaps.append(abs(c - direct / vnorm))
        if lead is None:
            lead = abs(c)
        residual = residual - space.synthesize(freqs, c * v)
        norms.append(residual_norm(space, residual))

    n = len(freqs)
    basis = basis[:n, :n]
    coefs = coefs[:n]
    amps = basis.T @ coefs
    terms = [QPTerm(nu, complex(a)) for nu, a in zip(freqs, amps) if a != 0]
    return Decomposition(terms=terms, residual_norms=norms, space=space, ortho_diag=ortho_diag,
                         status=status, basis=basis, ortho_coefs=coefs, identity_gap=gaps,
                         residual=residual)
