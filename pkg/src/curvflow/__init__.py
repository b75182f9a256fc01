"""curvflow: constrained mean curvature flow of hypersurfaces of revolution.

Build rotationally symmetric surfaces (elliptic torus, capped catenoid,
capped paraboloid, round spheres), evolve them under volume-preserving,
area-preserving or unconstrained mean curvature flow, and verify the
curvature identities and sign-loss phenomena quantitatively.
"""

from .profiles import (
    CurvatureField,
    DerivativeSource,
    FlowVariant,
    GeneratingProfile,
    ProfileError,
    Topology,
    area,
    curvature_field,
    enclosed_volume,
    evaluate_profile,
    global_term,
    integrate,
    is_embedded,
    laplace_beltrami,
    principal_curvatures,
    signed_enclosed_volume,
)
from .constructions import (
    BendingFunction,
    CertificationError,
    bending_function,
    capped_catenoid,
    capped_paraboloid,
    elliptic_torus,
    elliptic_torus_H_closed_form,
    round_sphere,
)
from .flow import (
    FlowConfig,
    FlowError,
    Trajectory,
    area_gradient,
    flow_velocity,
    project_conserved,
    reparametrize,
    run,
    step,
    volume_gradient,
)
from .diagnostics import (
    DiagnosticReport,
    evolution_residual_H,
    evolution_residual_study,
    initial_rate_H,
    initial_rate_R_neck,
    measured_first_step_rate,
    perturbation_experiment,
    sign_tracker,
    verify_all,
)
from .io import (
    load_profile,
    save_curvature,
    save_profile,
    save_report,
    save_trajectory,
)

__version__ = "0.1.0"
