"""One fibre at a time: z with B(x, y) . z = 0 form a lattice of rank n.

Its covolume is ||B|| / gcd(B), the slice of the cube has an exactly computable
volume, and the ratio predicts the number of lattice points in [-P, P]^{n+1}.
"""

from trilinear_manin import Contraction, contract, count_fiber_z, kernel_basis, lattice_det, predict_fiber, random_generic_form, slice_volume

form = random_generic_form(2, 2, seed=3)
for x, y in [((1, 0, 1), (0, 1, 1)), ((1, -1, 1), (1, 1, 0)), ((2, 1, 0), (1, 0, -1))]:
    b = contract(form, Contraction.B, x, y)
    det_sq, det = lattice_det(b.values)
    vol = slice_volume(b.values)
    print(f"x={x} y={y}  B={b.values}  basis={kernel_basis(b.values)}  det^2={det_sq}  slice volume={vol.value:.4f}")
    for P in (25, 50, 100, 200):
        exact = count_fiber_z(form, x, y, P, "all")
        pred = predict_fiber(b.values, P)
        print(f"    P={P:4d}  exact={exact:7d}  predicted={pred:10.1f}  ratio={exact / pred:.4f}")
