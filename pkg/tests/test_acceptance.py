"""Acceptance criteria 1-9.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion (see ``conftest.py``). Frozen expected values
come from the reference tables or from quantities known by construction,
never from earlier runs of this package.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from fma import analyzer as A
from fma import bench as B
from fma import corrections as C
from fma import dealias as D
from fma import qpsignal as Q
from fma import windows as W

C1 = "Table 2 tones recovered to machine precision within 1 minute"
C2 = "Table 3 reconstruction column within 1e-9, including the failure block"
C3 = "Table 1 uncorrected F1 slopes (a_0) over T/2pi in [10, 1e4]"
C4 = "Table 1 corrected slopes a_50, b_50, b'_50 for p = 1"
C5 = "Leading-frequency rate law err(T)/err(2T) ~ 2^(2p+2) for a two-term signal"
C6 = "De-alias roundtrip on 1e4 random cases"
C7 = "Window identities: closed form vs quadrature, phi''(0), |phi|, |phi'| <= 1"
C8 = "Five-term decomposition oracle at T = 2 pi 1000 with p = 2"
C9 = "Amplitude error estimate and its T^-(2p+1) decay"


# ---------------------------------------------------------------------------
# 1. Table 2


@pytest.mark.criterion(1, C1)
def test_criterion1_table2():
    start = time.perf_counter()
    table = B.table2()
    elapsed = time.perf_counter() - start
    assert len(table.rows) == 20
    for row in table.meta["rows"]:
        x, nu = row["nu0_over_pi"], row["nu"]
        diff = (x * np.pi - nu) / np.pi
        # below the Nyquist frequency nothing moves; from pi upwards the
        # tone is folded by one full band, 2 pi
        expected = 0.0 if x < 1.0 else 2.0
        assert abs(diff - expected) <= 1e-12, (x, diff)
    assert elapsed <= 60.0


# ---------------------------------------------------------------------------
# 2. Table 3

# the reference nu_f / pi column, keyed by nu0 / pi
TABLE3_REFERENCE = {x: x for x in B.TABLE3_TONES if x <= 1000.0}
TABLE3_REFERENCE.update({1000.5: -999.5, 1001.0: -999.0, 1001.5: -998.5, 1002.0: -998.0,
                         1002.5: -997.5, 1003.0: -997.0})


@pytest.mark.criterion(2, C2)
def test_criterion2_table3():
    start = time.perf_counter()
    table = B.table3()
    elapsed = time.perf_counter() - start
    assert len(table.rows) == 37 == len(TABLE3_REFERENCE)
    for row in table.meta["rows"]:
        x = row["nu0_over_pi"]
        assert row["nu0_cycles"] is not None, x
        assert abs(2.0 * row["nu0_cycles"] - TABLE3_REFERENCE[x]) <= 1e-9, x
    assert elapsed <= 120.0


# ---------------------------------------------------------------------------
# 3 and 4. Table 1 (full T range)


@pytest.fixture(scope="module")
def uncorrected_f1():
    """a_0 runs for every window over the full grid (one extracted term)."""
    out = {}
    for token in ("p0", "p1", "p2", "p3", "p4", "p5", "exp"):
        w = W.from_token(token)
        out[token] = B.run_columns("f1", w, [B.Correction()], B.t_grid(), threads=None)[0]
    return out


@pytest.fixture(scope="module")
def corrected_p1():
    w = W.cosine(1)
    ts = B.t_grid()
    (a50,) = B.run_columns("f1", w, [B.Correction("t1", 50)], ts, threads=None)
    b50, bp50 = B.run_columns("f2", w, [B.Correction("t1", 50), B.Correction("t2", 50)], ts,
                              threads=None)
    return {"a_50": a50, "b_50": b50, "b'_50": bp50}


REFERENCE_A0 = {"p0": (-1.98, 0.15), "p1": (-3.94, 0.3), "p2": (-5.82, 0.4),
                "exp": (-5.46, 0.6)}


@pytest.mark.criterion(3, C3)
@pytest.mark.parametrize("token", ["p0", "p1", "p2", "exp"])
def test_criterion3_low_order_slopes(uncorrected_f1, token):
    slope, _ = B.fit_slope(uncorrected_f1[token])
    target, tol = REFERENCE_A0[token]
    print(f"a_0[{token}] = {slope:.3f} (reference {target} +/- {tol})")
    assert abs(slope - target) <= tol


@pytest.mark.criterion(3, C3)
@pytest.mark.parametrize("p", [3, 4, 5])
def test_criterion3_saturating_slopes(uncorrected_f1, p):
    """At least 7 in magnitude, and saturated: not steeper than about 9 (or the theory)."""
    slope, _ = B.fit_slope(uncorrected_f1[f"p{p}"])
    print(f"a_0[p{p}] = {slope:.3f}")
    assert abs(slope) >= 7.0
    assert abs(slope) <= min(2 * p + 2, 9.0) + 1.5


@pytest.mark.criterion(3, C3)
def test_criterion3_quick_mode_runtime():
    start = time.perf_counter()
    B.table1(quick=True, threads=None)
    elapsed = time.perf_counter() - start
    print(f"quick table1: {elapsed:.1f} s")
    assert elapsed <= 120.0


REFERENCE_CORRECTED = {"a_50": (-4.90, 0.5), "b_50": (-4.81, 0.5), "b'_50": (-6.04, 0.8)}


@pytest.mark.criterion(4, C4)
@pytest.mark.parametrize("column", ["a_50", "b_50", "b'_50"])
def test_criterion4_corrected_slopes(corrected_p1, column):
    slope, _ = B.fit_slope(corrected_p1[column])
    target, tol = REFERENCE_CORRECTED[column]
    print(f"{column}[p1] = {slope:.3f} (reference {target} +/- {tol})")
    assert abs(slope - target) <= tol


# ---------------------------------------------------------------------------
# 5. rate law


def leading_error(p, half_span, step=2 * np.pi / 32):
    """Frequency error of the leading term of 1 + 0.1 exp(i t).

    The refinement tolerance is set far below the default so the stopping
    rule does not mask errors of order 1e-18 (p = 2, T = 2 pi 400).
    """
    model = Q.QPModel.from_arrays([0.0, 1.0], [1.0, 0.1])
    sig = Q.sample_model(model, half_span, step)
    sp = A.InnerProductSpace.for_signal(sig, W.cosine(p))
    return abs(A.refine_peak(sp, sig.samples, A.coarse_peak(sp, sig.samples), refine_tol=1e-19))


@pytest.mark.criterion(5, C5)
@pytest.mark.parametrize("p", [0, 1, 2])
def test_criterion5_rate_law(p):
    errs = [leading_error(p, 2 * np.pi * m) for m in (50, 100, 200, 400)]
    expected = 2.0 ** (2 * p + 2)
    for a, b in zip(errs, errs[1:]):
        assert expected / 2 <= a / b <= expected * 2, (errs, a / b)


# ---------------------------------------------------------------------------
# 6. de-aliasing roundtrip


def exact_alias(nu0, h):
    x = Fraction(nu0) * Fraction(h)
    k = math.ceil(x - Fraction(1, 2))
    return float((x - k) / Fraction(h)), k


@pytest.mark.criterion(6, C6)
def test_criterion6_dealias_roundtrip():
    start = time.perf_counter()
    rng = np.random.default_rng(20240601)
    n = 10_000
    h = rng.uniform(0.05, 5.0, n)
    eps = h * 10 ** rng.uniform(-6, -1, n)
    nu0 = np.clip(rng.uniform(-1, 1, n) * 0.45 / eps, -1e5 / h, 1e5 / h)
    worst_rel, worst_res = 0.0, 0.0
    for a, b, e in zip(nu0, h, eps):
        nu, k = exact_alias(a, b)
        nup, _ = exact_alias(a, b + e)
        rec = D.reconstruct(D.DualRateMeasurement(nu, nup, b, b + e))
        assert rec.k == k
        worst_rel = max(worst_rel, abs(rec.nu0 - a) / max(1.0, abs(a)))
        worst_res = max(worst_res, rec.residue)
    assert worst_rel <= 1e-12
    assert worst_res < 1e-6
    assert time.perf_counter() - start < 30.0


# ---------------------------------------------------------------------------
# 7. window identities


@pytest.mark.criterion(7, C7)
@pytest.mark.parametrize("p", range(6))
def test_criterion7_closed_form_vs_quadrature(p):
    w = W.cosine(p)
    xs = np.linspace(-50, 50, 201)
    closed = W.phi(w, xs)
    for x, c in zip(xs, closed):
        ref, _ = quad(lambda t: math.cos(x * t) * W.chi(w, t), 0.0, 1.0, limit=400,
                      epsabs=1e-14, epsrel=1e-13)
        assert abs(c - ref) <= 1e-10


@pytest.mark.criterion(7, C7)
@pytest.mark.parametrize("w", [W.cosine(p) for p in range(6)] + [W.exponential()], ids=str)
def test_criterion7_second_derivative(w):
    d = 1e-3
    fd = (W.phi(w, d) - 2 * W.phi(w, 0.0) + W.phi(w, -d)) / d**2
    assert abs(W.phi_second_zero(w) - fd) <= 1e-6


@pytest.mark.criterion(7, C7)
@pytest.mark.parametrize("p", range(6))
def test_criterion7_bounds(p):
    x = np.random.default_rng(p).uniform(-1e4, 1e4, 10_000)
    w = W.cosine(p)
    assert np.max(np.abs(W.phi(w, x))) <= 1.0
    assert np.max(np.abs(W.phi_prime(w, x))) <= 1.0


# ---------------------------------------------------------------------------
# 8. decomposition oracle


@pytest.mark.criterion(8, C8)
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_criterion8_decomposition(seed):
    rng = np.random.default_rng(seed)
    T = 2 * np.pi * 1000
    res = 2 * np.pi / T
    freqs = []
    while len(freqs) < 5:
        f = rng.uniform(-3.0, 3.0)
        if all(abs(f - g) >= 20 * res for g in freqs):
            freqs.append(f)
    amps = rng.uniform(0.2, 1.0, 5) * np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
    model = Q.QPModel.from_arrays(freqs, amps)
    sig = Q.sample_model(model, T, 2 * np.pi / 16)
    sp = A.InnerProductSpace.for_signal(sig, W.cosine(2))
    dec = A.decompose(sp, sig.samples, A.ExtractionConfig(max_terms=5))
    assert len(dec.terms) == 5
    truth = dict(zip(model.freqs, model.amps))
    for t in dec.terms:
        f = min(truth, key=lambda g: abs(g - t.freq))
        assert abs(t.freq - f) <= 1e-8 * abs(f)
        assert abs(t.amp - truth[f]) <= 1e-6 * abs(truth[f])
    norm0 = A.residual_norm(sp, sig.samples)
    assert dec.residual_norms[-1] <= 1e-8 * norm0
    assert np.all(np.diff(dec.residual_norms) <= 1e-14)
    for k in range(5):
        assert abs(A.inner_product(sp, dec.residual, dec.orthonormal_vector(k))) <= 1e-10 * norm0


# ---------------------------------------------------------------------------
# 9. amplitude error law


def leading_amplitude_error(p, half_span, a=0.2, omega=2.0):
    model = Q.QPModel.from_arrays([0.0, omega], [1.0, a])
    sig = Q.sample_model(model, half_span, 2 * np.pi / 32)
    sp = A.InnerProductSpace.for_signal(sig, W.cosine(p))
    nu = A.refine_peak(sp, sig.samples, A.coarse_peak(sp, sig.samples), refine_tol=1e-19)
    return A.correlation(sp, sig.samples, nu) - 1.0, nu, sp.half_span


@pytest.mark.criterion(9, C9)
@pytest.mark.parametrize("p", [0, 1, 2])
def test_criterion9_amplitude_law(p):
    # T = 2 pi (m + 1/8) puts Omega T on a crest of sin for Omega = 2
    spans = [2 * np.pi * (m + 0.125) for m in (50, 100, 200)]
    measured = []
    for T in spans:
        err, nu, TT = leading_amplitude_error(p, T)
        est = C.amplitude_error_estimate(
            C.CorrectionInput(Q.QPTerm(nu, 1.0 + err), [Q.QPTerm(2.0, 0.2)], W.cosine(p), TT))
        assert 0.5 <= abs(est) / abs(err) <= 2.0, (T, est, err)
        measured.append(abs(err))
    for (t1, e1), (t2, e2) in zip(zip(spans, measured), zip(spans[1:], measured[1:])):
        law = (t2 / t1) ** (2 * p + 1)
        assert 0.5 <= (e1 / e2) / law <= 2.0
