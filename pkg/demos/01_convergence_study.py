"""Information-rate convergence study.

For a stationary Gaussian signal integrated over time and read through an
additive white-noise channel, the per-time mutual information has a closed
limit: an integral of log(1 + scaled spectral density) over frequency.  This
demo evaluates the finite-horizon sampled rate on a growing schedule and
compares it with that limit.

Run:  python demos/01_convergence_study.py
"""

from szegolab import (
    DEFAULT_SCHEDULE,
    RATE_COLUMNS,
    SpectralModel,
    rate_convergence,
    refinement_stability,
)

model = SpectralModel.ornstein_uhlenbeck(power=1.0, rate=1.0)
print("model: exponential covariance, P = 1, alpha = 1")
print("limit rate has the closed form (sqrt(3) - 1) / 2 = 0.36602540378\n")

report = rate_convergence(model, DEFAULT_SCHEDULE)
print(f"integrated target rate: {report.target_rate:.10f}\n")

header = f"{'T':>6} {'n':>6} {'h':>6} {'sampledRate':>14} {'relErr':>12}"
print(header)
for p in report.points:
    print(f"{p.T:>6g} {p.n:>6} {p.h:>6g} {p.sampled_rate:>14.8e} {p.rel_err:>12.4e}")

print(
    "\nAt a fixed step h the sampled rate carries a discretization bias, so\n"
    "once the horizon-truncation error drops below that floor the per-point\n"
    "relative error stops shrinking.  Refining the grid at a fixed horizon\n"
    "shows the missing information being recovered, with diminishing returns:\n"
)

refinement = refinement_stability(model, 10.0, (50, 100, 200, 400))
for n, mi in zip((50, 100, 200, 400), refinement.mi_values):
    print(f"  n = {n:>4}: total information {mi:.8f}")
print("  successive gains:", ", ".join(f"{g:.6f}" for g in refinement.gaps))

print(f"\nfull report columns available per point: {', '.join(RATE_COLUMNS)}")
