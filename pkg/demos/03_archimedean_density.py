"""Two routes to the archimedean density, and why they disagree at small n.

The Leray route integrates Vol(C_{x,y}) / ||B(x, y)|| over (x, y) with the
slice volume in closed form.  The sinc route integrates sin(2 pi phi F)/(pi F)
over the whole box, which equals the integral of I(beta) over |beta| <= phi.
For n = 1 the tail of that beta-integral decays slowly, so J(phi) creeps up
toward the Leray value as phi grows.
"""

from trilinear_manin import random_generic_form
from trilinear_manin.expsums import J_of_phi
from trilinear_manin.local import leray_fiber_integral
from trilinear_manin.quadrature import QuadSpec

form = random_generic_form(1, 3, seed=2)
leray = leray_fiber_integral(form, QuadSpec(samples=1 << 20, seed=0))
print(f"Leray fibre integral: {leray.value:.3f} +- {leray.stderr:.3f}")
for phi in (4, 8, 16, 32, 64):
    j = J_of_phi(form, phi, QuadSpec(samples=1 << 20, seed=phi))
    print(f"J({phi:3d}) = {j.value:8.3f} +- {j.stderr:.3f}   gap to Leray {leray.value - j.value:7.3f}")
