"""Decomposing the test function F1 and correcting its leading frequency.

F1(t) = 1 / (1 + s(t)) with s = 0.5 exp(i t) + 0.25 exp(-i omega t) is a
quasiperiodic signal whose exact expansion is the geometric series
sum (-s)^n. We extract its leading terms, compare them with that expansion,
then use the asymptotic error formulas to correct the first frequency.

Run:  python demos/02_decompose_f1.py
"""
import numpy as np

from fma import analyzer as A
from fma import corrections as C
from fma import qpsignal as Q
from fma import windows as W

T = 2 * np.pi * 300
h = 2 * np.pi / 128
window = W.cosine(1)

sig = Q.f1_sample(T, h)
space = A.InnerProductSpace.for_signal(sig, window)
dec = A.decompose(space, sig.samples, A.ExtractionConfig(max_terms=12))
print(f"grid: {sig.samples.size} samples, status: {dec.status}")

oracle = Q.f1_expansion(40)
print("\n  k   frequency          |amplitude|      closest expansion term")
for k, t in enumerate(dec.terms, 1):
    ref = min(oracle.terms, key=lambda r: abs(r.freq - t.freq))
    print(f"{k:3d}   {t.freq:+.12f}   {abs(t.amp):.10f}   {ref.freq:+.4f}  {abs(ref.amp):.10f}")

print(f"\nresidual norm after each step: "
      + ", ".join(f"{r:.2e}" for r in dec.residual_norms[:6]) + ", ...")

# The leading term has exact frequency 0. Its estimate is biased by every
# other term through phi'(Omega T); the corrections subtract that bias using
# the other extracted terms as stand-ins for the true ones.
lead = dec.terms[0]
inp = C.CorrectionInput(lead, dec.terms[1:], window, space.half_span)
print(f"\nleading frequency error, uncorrected:  {abs(lead.freq):.3e}")
print(f"after the series correction:          {abs(C.correct_theorem1(inp)):.3e}")
print(f"after the derivative correction:      {abs(C.correct_theorem2(inp)):.3e}")
print(f"amplitude error estimate:             {abs(C.amplitude_error_estimate(inp)):.3e}"
      f"   (measured {abs(lead.amp - 1):.3e})")
