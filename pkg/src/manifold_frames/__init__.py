"""Nearly tight spectral frames on compact manifolds and Besov norms of their coefficients."""

from .besov import (
    BesovParams,
    equivalence_experiment,
    lp_norm,
    min_l,
    seq_norm,
    standard_suite,
    synthesis_experiment,
)
from .errors import (
    AdmissibilityViolation,
    ConstraintViolation,
    MeanNotZero,
    ModelError,
    NotConverged,
    ScaleUnresolved,
)
from .filters import (
    FilterSpec,
    build_lp_window,
    calderon_constant,
    daubechies_bounds,
    eval_f,
    multiplier_G,
    multiplier_H,
)
from .frames import (
    CoefficientArray,
    FrameSystem,
    analyze,
    apply_Q,
    apply_Q_inverse,
    apply_S,
    build_frame,
    empirical_frame_bounds,
    invert_S,
    q_minus_s_norm,
    synthesize,
)
from .partition import build_level, build_multiscale, validate
from .spectral import (
    SpectralModel,
    apply_multiplier,
    build_sphere_model,
    build_torus_model,
    inner,
    kernel_row,
    load_mesh_model,
    localization_functional,
    norm_p,
    remove_mean,
    to_grid,
    to_spectral,
    zonal_kernel,
)

__version__ = "0.1.0"
