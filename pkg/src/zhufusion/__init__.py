"""Exact Zhu-algebra and intertwining-operator computations for the Virasoro VOA."""

from .exactla import binomial, kernel_basis, span_membership, to_rational
from .formalcalc import BivariateSeries, LaurentPoly, MonomialJKL, iota_expand, res
from .virasoro import (ModuleElement, ModuleId, apply_virasoro, basis_at_degree, dual_verma,
                       omega, pairing, state_mode, vacuum, verma)
from .zhu import AVModule, NormalForm, circle, o_matrix, reduce_vacuum, reduce_verma, star
from .intertwine import (TruncatedModeFamily, build_constraints, check_borcherds_residual,
                         extract_hom, fusion_dim_hom, generalized_verma, solve_mode_families)
from .logtransform import GradedOperatorData, from_z_graded, jordan_split, to_z_graded, x_pow_l0

__version__ = "0.1.0"
