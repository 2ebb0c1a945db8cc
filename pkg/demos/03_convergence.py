"""How fast the leading-frequency error falls with the length of the record.

For a cosine window of order p the error of the first frequency falls like
T^-(2p+2). We measure it on F1 over T/2pi in [10, 300] and fit the slope in
log-log coordinates, with and without a correction. Spans where the nearest
term of F1 (at frequency -0.02) is still inside the main lobe are left out
of the fit; they sit on a plateau.

Run:  python demos/03_convergence.py          (about a minute)
"""
from fma import bench as B
from fma import windows as W

ts = B.t_grid(10, 300, 13)
for p in (0, 1, 2):
    w = W.cosine(p)
    none, t1 = B.run_columns("f1", w, [B.Correction(), B.Correction("t1", 10)], ts)
    print(f"\nwindow p{p}: fit from T/2pi >= {none.fit_t_min / (2 * 3.141592653589793):.0f}")
    print("   T/2pi      error        corrected")
    for T, e, c in zip(none.t_points, none.errors, t1.errors):
        print(f"  {T / 6.283185307179586:7.1f}   {e:.3e}   {c:.3e}")
    for label, run in (("uncorrected", none), ("10-term correction", t1)):
        try:
            slope = f"{B.fit_slope(run)[0]:+.2f}"
        except Exception as exc:  # too few points above the lobe cut
            slope = f"n/a ({exc})"
        print(f"  slope, {label}: {slope}")
