"""Numerical toolkit for singular-minimal hypersurfaces.

Curvature of graph hypersurfaces, the alpha-catenary ODE, residuals of the
singular-minimal equation on translation / affine / cylinder families,
sampled classification, and minimization of the discrete alpha-energy.
"""

__version__ = "0.1.0"

from .catenary import (
    CatenaryIVP,
    FunctionSample,
    PlanarCurveSample,
    catenary_closed_form,
    curvature_residual_1d,
    integrate_catenary,
    richardson_endpoint,
    shoot_catenary_bvp,
)
from .classify import (
    Classification,
    Verdict,
    classify_affine,
    classify_cylinder,
    classify_translation,
    detect_linear,
    falsification_sweep,
    fit_catenary,
)
from .exceptions import (
    DomainError,
    EvaluationError,
    NonConvergenceError,
    SingMinError,
    SingularityError,
    ValidationError,
)
from .functions import Profile
from .geometry import (
    Direction,
    GraphFn,
    cross_product_n,
    first_fundamental,
    mean_curvature,
    second_fundamental,
    shape_operator,
    unit_normal,
)
from .minimize import (
    EnergyOpts,
    Field,
    MinimizeResult,
    discrete_energy,
    el_residual_of_field,
    energy_gradient,
    minimize_energy,
)
from .residuals import (
    AffineTranslationSpec,
    BaseCurve,
    CylinderSpec,
    GeneralizedTranslationSpec,
    ResidualReport,
    TranslationSpec,
    sm_residual_affine,
    sm_residual_cylinder,
    sm_residual_generalized,
    sm_residual_graph,
    sm_residual_translation,
)
