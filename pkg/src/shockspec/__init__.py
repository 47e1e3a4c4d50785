"""Spectral stability of viscous shocks for piecewise-linear conservation laws.

Jump matrices at the discontinuity interfaces, matrix spectral branches in
each linear region, Evans-type determinants, right-half-plane eigenvalue
counts, and a smoothing/ODE oracle that checks the jump calculus.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (Equilibrium, Heteroclinic, Hyperplane, LinearPiece, PLModel, build_heteroclinic,
                    build_model, classify_equilibrium, compressivity_index)
from .jump import BACKWARD, FORWARD, JumpMatrix, block_jump, crossing_jump, jump_matrix
from .spectral import (STABLE, UNSTABLE, HalfPlaneRegion, SpectralBranch, asymptotic_constant,
                       asymptotic_ratio, evans_det, evans_function, quadratic_root_count, sigma_branch,
                       stable_branch_matrix, theta_det, theta_matrix, zero_multiplicity)
from .rootfind import (BranchTrace, Circle, EigenvalueReport, HalfDisc, Rectangle, Root, auto_radius,
                       locate_eigenvalues, real_axis_roots, secant, trace_branch, winding_number)
from .scenarios import (BIFURCATION, BIFURCATION_UNSTABLE, HOPF_OVERCOMPRESSIVE,
                        REFERENCE_OVERCOMPRESSIVE, SCENARIOS, UNSTABLE_OVERCOMPRESSIVE,
                        BifurcationParams, OvercompressiveParams, bifurcation_function,
                        bifurcation_predictions, bifurcation_slope, make_bifurcation,
                        make_diagonal_shock, make_overcompressive, overcompressive_family,
                        overcompressive_predictions, random_diagonal_shock)
from .oracle import (Mollifier, integrate_smoothed_variational, jump_convergence_fit,
                     layer_crossing_time, layer_transfer, shooting_mismatch, smoothed_field_eval)
from .io import load_model, model_from_dict, model_to_dict
