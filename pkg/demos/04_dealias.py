"""Recovering frequencies above the Nyquist limit with two sampling steps.

A tone exp(i nu0 t) sampled with step h = 1 is only seen modulo 2 pi. Sampling
the same tone again with h' = 1.001 moves the alias by an amount that
reveals how many bands were folded, which works while |nu0 (h' - h)| < pi
(in cycles: |nu0 eps| < 1/2).

Run:  python demos/04_dealias.py
"""
import numpy as np

from fma import dealias as D
from fma import qpsignal as Q
from fma import windows as W
from fma.analyzer import ExtractionConfig

h, h2 = 1.0, 1.001
window = W.cosine(1)

print(" nu0/pi      nu/pi    nu'h'/pi   recovered   turns")
for x in (2.5, 990.5, 999.5, 1000.0, 1000.5, 1003.0):
    tone = Q.QPModel([Q.QPTerm(x * np.pi, 1.0)])
    a = Q.sample_model(tone, 1000.0, h)
    b = Q.sample_model(tone, 1000.0, h2)
    (t,) = D.analyze_dual(a, b, window, ExtractionConfig(max_terms=1))
    print(f"{x:8.1f}  {t.sigma / np.pi:+9.5f}  {t.sigma_prime * h2 / np.pi:+9.5f}"
          f"  {2 * t.nu0:+10.4f}  {t.k:5d}")
print("beyond nu0/pi = 1000 the method folds by 1/eps: 1000.5 comes back as -999.5")

# Several tones at once: terms are paired across the two runs by amplitude.
model = Q.QPModel.from_arrays(np.pi * np.array([0.3, 5.5, 12.25]), [1.0, 0.5, 0.25])
terms = D.analyze_dual(Q.sample_model(model, 1000.0, h), Q.sample_model(model, 1000.0, h2),
                       window, ExtractionConfig(max_terms=3))
print("\nthree tones at 0.3, 5.5, 12.25 (x pi):",
      ", ".join(f"{2 * t.nu0:.10f}" for t in terms))
