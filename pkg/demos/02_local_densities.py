"""Local densities: complete sums, the singular series and p-adic densities.

Every quantity here is an exact rational.  The complete sum S_{a,q} collapses
to a count of residue pairs with B(b, b') = 0 mod q, which gives A(q); partial
sums of A over powers of p reproduce M(p^N) / p^{N(3n+2)}.
"""

from trilinear_manin import A_of_q, M_of_q, N_star, diagonal_form, random_generic_form, sigma_p, singular_series_trunc
from trilinear_manin.local import check_primitive_density, euler_product

diag = diagonal_form(1)
print("diagonal n=1: A(2) =", A_of_q(diag, 2), " M(2) =", M_of_q(diag, 2), " N*(1) at p=2 =", N_star(diag, 2, 1))

form = random_generic_form(2, 2, seed=1)
for p in (2, 3):
    dens = sigma_p(form, p, 2 if p == 2 else 1)
    print(f"p={p}: sigma_p sequence", [str(v) for _, v in dens.seq], "stabilised" if dens.stabilized else "")
    for N, v in dens.seq:
        assert v == sum(A_of_q(form, p**k) for k in range(N + 1))

st = singular_series_trunc(form, 6)
print("singular series up to q=6:", float(st.partial), " tail diagnostic", round(st.tail_diagnostic, 4))
ep = euler_product(form, 7, residue_budget=10**5)
print("Euler product p<=7:", float(ep.value), " heuristic tail", round(ep.tail_estimate, 4))

rep = check_primitive_density(form, 2, 2)
for r, prim, target, gap in rep.rows:
    print(f"r={r}: N*(r)/p^(r(3n+2)) = {float(prim):.5f}   (1-p^-n)^3 sigma_p(r) = {float(target):.5f}   gap {float(gap):.5f}")
