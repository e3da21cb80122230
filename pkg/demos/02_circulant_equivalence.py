"""Toeplitz/circulant asymptotic equivalence.

The sampled Gram matrix A is Toeplitz.  Wrapping its coefficient sequence
(gammaHat_l = gamma_l + gamma_{n-l}) produces a circulant companion whose
eigenvalues are a plain DFT — cheap and explicit.  The two matrices agree in
every sense that matters asymptotically: their scaled Frobenius distance
decays like 1/T, their scaled trace powers converge to each other, and the
information computed through either route converges to the same limit.

Run:  python demos/02_circulant_equivalence.py
"""

import numpy as np

from szegolab import (
    SamplingGrid,
    SpectralModel,
    circulant_eigs,
    gamma_sequence,
    norm_report,
    rate_convergence,
    ConvergenceSchedule,
)

model = SpectralModel.ornstein_uhlenbeck(1.0, 1.0)

print("scaled squared Frobenius distance ||A - Ahat||_F^2 / T at fixed h = 0.025:")
for T, n in ((25.0, 1000), (50.0, 2000), (100.0, 4000), (200.0, 8000)):
    gs = gamma_sequence(model, SamplingGrid(T=T, n=n))
    rep = norm_report(gs)
    print(f"  T = {T:>5g}, n = {n:>5}: {rep.wrap_diff_frob_sq_over_t:.6e}")
print("  -> halves with every doubling of the horizon (~ c/T)\n")

schedule = ConvergenceSchedule(((25.0, 500), (50.0, 1000), (100.0, 2000)))
report = rate_convergence(model, schedule)
print("scaled trace gaps |tr(A^k) - tr(Ahat^k)| / T along the study schedule:")
print(f"{'T':>6} {'n':>6}  " + "  ".join(f"{'k=' + str(k):>12}" for k in (1, 2, 3, 4)))
for p in report.points:
    print(f"{p.T:>6g} {p.n:>6}  " + "  ".join(f"{g:>12.6e}" for g in p.trace_gaps))
print(
    "  -> the k = 1 gap is exactly zero (the wrap preserves the diagonal);\n"
    "     higher powers converge as the horizon grows\n"
)

print("information rate through both routes (log-det vs wrapped spectrum):")
for p in report.points:
    print(
        f"  T = {p.T:>5g}: sampled {p.sampled_rate:.8f}   circulant {p.circulant_rate:.8f}"
        f"   gap {p.log_sum_gap:.3e}"
    )

gs = gamma_sequence(model, SamplingGrid(T=100.0, n=2000))
psi = circulant_eigs(gs.gamma_hat, gs.grid)
print(
    f"\nthe circulant route is a single FFT: {len(psi.eigenvalues)} eigenvalues, "
    f"min {psi.eigenvalues.min():.6f}, max {psi.eigenvalues.max():.6f}"
)
print("largest wrapped-spectrum value vs density supremum 2.0:",
      f"{np.max(np.abs(psi.dft_values)):.10f}")
