"""Quaternionic pluripotential calculus: exact algebra, densities, measures.

The package is organized in layers:

- :mod:`qma.hamilton`   quaternions, quaternionic matrices, Moore determinant
- :mod:`qma.exterior`   exterior algebra over C^(2n) and positivity notions
- :mod:`qma.fields`     exact and black-box scalar fields on H^n = R^(4n)
- :mod:`qma.calculus`   the first-order operators, complex coordinates, forms
- :mod:`qma.monge_ampere`  density pipelines and the fundamental family
- :mod:`qma.quadrature` deterministic ball/sphere/level-set rules
- :mod:`qma.currents`   wedge currents, masses, regularization limits
- :mod:`qma.potential`  boundary measures and the Jensen-type identity
- :mod:`qma.cli`        the ``qma`` command line front end
"""

from .errors import (ConfigError, DegenerateLevelSetError, DimensionError,
                     NumericalInconsistencyError, OracleError, QuadratureError,
                     QmaError)
from .hamilton import (Quaternion, QMatrix, tau, tau_matrix, jmatrix,
                       is_hyperhermitian, moore_det, mixed_discriminant,
                       random_quaternion, random_qmatrix, random_hyperhermitian,
                       random_unitary)
from .exterior import (RationalComplex, ExtElement, HLinearMap, beta, omega_top,
                       top_coefficient, rho_j, is_real, pullback, elementary_sp,
                       random_elementary_sp, random_strongly_positive,
                       positivity_test, PositivityResult)
from .fields import (ScalarField, Polynomial, QuadraticForm, ClosedForm,
                     BlackBox, DerivedField, LinearSubstitution, ChainField,
                     GridField, InvShift, field_sum, field_scale, field_product,
                     normsq, quadform, invshift)
from .calculus import (CxField, nabla, nabla_matrices, nabla_value, z_field,
                       delta_field, delta_matrix, delta_matrices, laplace,
                       d_scalar, FormField, closedness_residual, is_closed,
                       real_rep, pullback_potential, change_of_variables_check)
from .monge_ampere import (ma_density, mixed_ma, psh_test, PshResult,
                           moore_equivalence_residual, fundamental_ma_density,
                           fundamental_delta_matrices, fundamental_mass_exact,
                           fundamental_mass_limit_coefficient)
from .quadrature import (integrate_polynomial_ball, integrate_polynomial_sphere,
                         ball_moment_coefficient, sphere_moment_coefficient,
                         sphere_area, sobol_sphere, radial_ball_integral,
                         BallQuadrature, SphereRule, EllipsoidRule,
                         StarShapedRule, gauss_legendre_panels)
from .currents import (RegularizedCurrent, wedge_top_density, bt_product,
                       sigma_mass, SigmaResult, cln_norm, cln_ratio,
                       RadialProfile, lelong_number, shell_identity_check,
                       bump_field, stokes_check, integration_by_parts_residual,
                       positivity_pairing_min, mollify, mollifier_weights,
                       kernel_second_moment, convergence_suite, ConvergenceReport)
from .potential import (NormalFrame, normal_frame, boundary_measure_density,
                        SurfaceResult, surface_integral, sublevel_integral,
                        JensenReport, lelong_jensen, boundary_mass_residual,
                        smooth_max_family)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
