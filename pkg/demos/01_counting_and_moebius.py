"""Counting points on a trilinear hypersurface, and recovering primitive counts.

We draw a random generic form with n = 1, count the integer triples of bounded
height on F = 0 that lie in the open set U, and check that Moebius inversion in
each of the three vector blocks turns the plain count into the primitive one.
"""

from trilinear_manin import CountVariant, count_box, count_height, moebius_primitive, random_generic_form
from trilinear_manin.enumeration import height_histogram

form = random_generic_form(1, 3, seed=1)
print("form id", form.form_id(), "coefficients", form.to_json()["coeffs"])

# Box counts under the nested variants: each extra condition can only remove points.
for tag in ("all", "nondeg3", "n1", "nprime", "u"):
    print(f"  box P=(3,3,3) {tag:8s}", count_box(form, 3, 3, 3, tag).count)

# Height counts |x| |y| |z| <= B, plain and primitive.
for B in (5, 10, 20, 30):
    plain = count_height(form, B).count
    prim = count_height(form, B, primitive=True).count
    inv = moebius_primitive(form, B)
    print(f"B={B:3d}  all={plain:7d}  primitive={prim:6d}  via Moebius={inv:6d}")

# The histogram behind the counts: every height carries a multiple of 8 points,
# one for each sign choice on (x, y, z).
hist = height_histogram(form, 12, CountVariant.U())
print("points per exact height 1..12:", hist[1:].tolist())
