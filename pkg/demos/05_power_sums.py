"""Eigenvalue power sums against density power integrals.

Scaled power sums of the wrapped spectrum converge to the corresponding
integrals of the scaled spectral density: sum_m psiHat_m^q / T tends to
(1/2pi) * integral (2pi f)^q.  For the unit exponential model the exact
limits are 1, 1, 1.5, 2.5 for q = 1..4.  The q = 2 case splits exactly into
a Parseval part (which carries the limit) and a wrap cross term (which dies
out with the horizon) — a sharp internal consistency check.

Run:  python demos/05_power_sums.py
"""

from szegolab import SpectralModel, power_sum_check

model = SpectralModel.ornstein_uhlenbeck(1.0, 1.0)

print("scaled power sums at (T, n) = (100, 4000):")
print(f"{'q':>3} {'sum psiHat^q / T':>18} {'density integral':>18} {'gap':>12}")
for q in (1, 2, 3, 4):
    res = power_sum_check(model, 100.0, 4000, q)
    print(f"{q:>3} {res.lhs:>18.10f} {res.rhs:>18.10f} {res.gap:>12.4e}")

print("\ntwo-term split of the q = 2 sum (Parseval part + wrap cross term):")
for T, n in ((25.0, 1000), (50.0, 2000), (100.0, 4000)):
    res = power_sum_check(model, T, n, 2)
    print(
        f"  T = {T:>5g}, n = {n:>5}: s1 = {res.s1:.10f}   s2 = {res.s2:.3e}"
        f"   (s1 + s2 = lhs to machine precision)"
    )
print(
    "\nThe cross term s2 collapses exponentially with the horizon — the wrap\n"
    "only touches coefficient pairs whose lags add up to n, and those\n"
    "covariances are already negligible."
)
