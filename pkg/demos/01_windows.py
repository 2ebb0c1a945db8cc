"""Weight windows and their transforms.

The frequency of a tone is located at the peak of the windowed correlation
phi(x); how fast the side lobes of phi decay sets how strongly distant
terms of a quasiperiodic signal bias that peak. This script tabulates the
cosine windows (1 + cos pi t)^p and the exponential bump window.

Run:  python demos/01_windows.py
"""
import math

import numpy as np

from fma import windows as W

family = [W.cosine(p) for p in range(6)] + [W.exponential()]

print("window   phi''(0)        first zero of phi")
for w in family:
    print(f"{w.token:>6}   {W.phi_second_zero(w):+.10f}   {W.main_lobe_edge(w):.6f}")

# Side-lobe decay: |phi_p(x)| x^(2p+1) / (pi^2p (p!)^2) tends to |sin x|, so
# the envelope of phi_p falls off like x^-(2p+1).
print("\nside-lobe envelope  max |phi(x)| over a lobe near x")
xs = [30.0, 100.0, 300.0, 1000.0]
print("window " + "".join(f"{x:>14.0f}" for x in xs))
for w in family:
    vals = []
    for x in xs:
        grid = np.linspace(x, x + np.pi, 400)
        vals.append(np.max(np.abs(W.phi(w, grid))))
    print(f"{w.token:>6} " + "".join(f"{v:14.3e}" for v in vals))

print("\nfitted decay exponent between x = 100 and x = 1000:")
for w in family[:6]:
    a = np.max(np.abs(W.phi(w, np.linspace(100, 100 + np.pi, 400))))
    b = np.max(np.abs(W.phi(w, np.linspace(1000, 1000 + np.pi, 400))))
    print(f"  {w.token}: {math.log10(b / a):+.2f}   (expected {-(2 * w.order + 1)})")

# The exponential window is infinitely smooth: its transform decays faster
# than any power, but with a wide main lobe.
