"""Matrix-weighted L^p spaces on a periodic grid: interpolation formulas,
Muckenhoupt characteristics, and commutator estimates with discrete
Calderon-Zygmund operators."""

from .linalg import (
    Eigendecomposition,
    absolute_value,
    bracket,
    eig_hermitian,
    matrix_function,
    polar_diagonalize,
)
from .fields import (
    DyadicCubeFamily,
    GeneralWeightField,
    GridDomain,
    MatrixWeightField,
    VectorField,
    ap_characteristic,
    bmo_norm,
    gen_commuting_pair,
    gen_rotating_weight,
    identity_weight,
    load_weight_field,
    save_weight_field,
    scalar_weight_field,
    weighted_norm,
)
from .complex_interp import (
    InterpParams,
    couple_transform,
    extremal_section,
    interp_weight_plain,
    interp_weight_tilde,
    omega_complex,
    polar_diagonalize_field,
)
from .couples import (
    CoupleSpec,
    Decomposition,
    LogGrid,
    e_functional,
    intersection_norm,
    k_functional,
    k_sweep,
    selector,
    sum_norm,
)
from .real_method import (
    beurling_norm_approx,
    l_space_norm,
    lifted_matrix_derivation,
    lorentz_norm,
    omega_real,
    phi_norm,
    real_interp_norm,
)
from .operators import (
    OperatorHandle,
    c_n_operator,
    charact_strip_function,
    hilbert_operator,
    hilbert_transform,
    iterated_commutator,
    martingale_operator,
    martingale_transform,
    matrix_multiplication_operator,
    operator_norm_weighted,
)

__version__ = "0.1.0"
