"""Assembling the leading constant and setting it beside exact counts.

The asymptotic is only proved for large n, so at n = 2 this is trend data:
the ratio of observed to predicted counts, and a hyperbolic fit of the shell
sums, are printed rather than checked.
"""

from trilinear_manin import assemble, compare_counts, diagonal_form
from trilinear_manin.hyperbolic import ShellCounter, fit_leading, sum_hyperbolic

form = diagonal_form(2)
rep = assemble(form, pmax=13, phi=8.0, samples=1 << 18, Q=4, seed=0)
print(f"J = {rep.J:.2f} +- {rep.J_stderr:.2f}   sinc J(8) = {rep.J_sinc[0]:.2f}")
print(f"Euler product = {float(rep.euler):.4f}   series S(4) = {float(rep.series):.4f}")
print(f"sigma = {rep.sigma:.2f}  sigma' = {rep.sigma_prime:.2f}  C(V) = {rep.C_V:.4f}  identity residual {rep.identity_residual:.1e}")
print("bridge:", {k: str(v) for k, v in rep.bridge.items()})

compare_counts(form, [4, 8, 12], rep)
for row in rep.comparisons:
    print(f"B={row['B']:3d}  affine {row['affine_observed']:9d} / {row['affine_predicted']:12.1f} = {row['affine_ratio']:.3f}"
          f"   projective {float(row['projective_observed']):8.1f} / {row['projective_predicted']:9.1f} = {row['projective_ratio']:.3f}")

h = ShellCounter(form)
Ps = [4, 6, 8, 10, 12]
fit = fit_leading([sum_hyperbolic(h, P) for P in Ps], Ps, beta=2.0)
print(f"shell-sum fit: C_hat = {fit.C_hat:.3f}  (compare sigma = {rep.sigma:.2f}; small P, trend only)")
