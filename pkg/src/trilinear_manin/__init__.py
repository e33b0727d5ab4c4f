"""Exact counts, local densities and leading constants for trilinear hypersurfaces
F(x, y, z) = sum a_ijk x_i y_j z_k = 0 in P^n x P^n x P^n."""

from .arith import BudgetError
from .assembly import PredictionReport, alpha_V, assemble, beta_V, compare_counts
from .enumeration import (
    CountReport,
    CountVariant,
    DegenerateFiberError,
    count_box,
    count_fiber_z,
    count_height,
    h_function,
    moebius_primitive,
    scaled_projective_count,
)
from .expsums import (
    ArcSpec,
    A_of_q,
    I_beta,
    J_of_phi,
    M_of_q,
    S_alpha,
    S_aq,
    SeriesTruncation,
    count_M3,
    in_major_arc,
    singular_series_trunc,
)
from .fiber import FiberDensity, fiber_J, fiber_predict, fiber_series, fiber_sum
from .form import (
    BilinearVector,
    Contraction,
    DimensionError,
    FormFileError,
    GenerationError,
    TrilinearForm,
    check_genericity,
    contract,
    diagonal_form,
    eval_F,
    fiber_kernel_dim,
    is_in_A,
    random_generic_form,
)
from .hyperbolic import BBParams, fit_leading, spot_check_conditions, sum_hyperbolic
from .lattice import kernel_basis, lattice_det, predict_fiber, slice_volume
from .local import (
    ArchDensity,
    LocalDensity,
    N_star,
    a_of_p,
    check_primitive_density,
    sigma_infinity,
    sigma_p,
    tamagawa_inf,
    tamagawa_p,
)
from .quadrature import Estimate, QuadSpec

__version__ = "0.1.0"
