# Package initialization file
from .caldeira import (
    BathModel,
    NyquistReport,
    cl_dispersion,
    cl_epsilon_complex,
    cl_epsilon_real,
    cl_find_roots,
    cl_matrix_oracle,
    cl_nyquist,
    cl_time_integrate,
)
from .dispersion import (
    INDETERMINATE,
    DispersionRoot,
    RootCountRegion,
    classify_multiplet,
    complete_spectrum,
    count_roots,
    epsilon_complex,
    find_roots,
    marginal_growth_rate,
    refine_root,
)
from .equilibria import (
    CriticalPoint,
    EquilibriumProfile,
    ProfileFamily,
    bi_maxwellian,
    critical_points,
    load_profile,
    maxwellian,
    maxwellian_sum,
    profile_from_descriptor,
)
from .errors import AnalysisError, ConfigError
from .gtransform import diagonal_energy, evolve, g_forward, g_inverse, transform_context
from .hilbert import SampledRealFunction, hilbert_at, hilbert_on_grid
from .penrose import (
    CriticalState,
    WindingReport,
    dielectric,
    find_critical_state,
    penrose_winding,
    signature_profile,
    winding_number,
)
from .settings import Settings, load_settings
from .structural import (
    ChiPerturbation,
    accessibility_gate,
    chi_hilbert_center,
    chi_norms,
    destabilize,
    krein_like_verdict,
)
