"""Numerical toolkit for the cubic normal form of Lorenz/Chen-family flows.

Exact parameter/coordinate maps between the generalized Lorenz system and
its normal form, invariant-manifold computation, twisted-homoclinic-orbit
detection, Lyapunov-exponent classification, and parameter-plane sweeps.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (GlParams, RegionLabel, SaddleSpectrum, UnfParams,  # noqa: F401
                    characteristic_A, classify_region, equilibria,
                    family_gl_params, gl_jacobian, gl_vector_field,
                    hopf_threshold, map_p, map_v, map_v_inverse,
                    saddle_spectrum, shimizu_rescale, unf_jacobian,
                    unf_vector_field)
from .ode import (FieldHandle, IntegratorConfig, SectionCrossing,  # noqa: F401
                  Trajectory, gl_field, integrate, integrate_to_section,
                  trajectory_to_csv, unf_field)
from .manifolds import (DomainB, RiccatiLadder, StableCurve,  # noqa: F401
                        UnstableHit, absorbing_layer, aux_separatrix_x0,
                        domains_b, riccati_tau, section_fate, shoot_unstable,
                        small_alpha_zu, stable_curve, stable_x_at,
                        turning_point_check, wu_seed)
from .homoclinic import (BifurcationPoint, FateLabel, SplitResult,  # noqa: F401
                         Symbol, classify_wu_fate, find_alpha_k,
                         find_lambda0, scan_alpha_roots, split_function,
                         symbolic_sequence, winding_half_turns)
from .lyapunov import (LyapunovResult, classify_attractor,  # noqa: F401
                       largest_lyapunov, largest_lyapunov_gl)
from .sweep import (CurveTrace, SweepGrid, curve_to_csv, grid_to_csv,  # noqa: F401
                    parse_grid_csv, sweep_grid, trace_curve)
