"""Joint frame subsampling and latent-image extraction for turbulence-degraded sequences."""

from .core import (
    EnergyTrace,
    FrameStack,
    ModelParams,
    SubsampleSet,
    TraceRecord,
    model_energy,
    stack_matrix,
    subsample_reward,
    temporal_mean,
    unstack_matrix,
)
from .drivers import RestorationResult, iris, liris, restore, tviris
from .metrics import MetricReport, psnr, ssim
from .quality import laplacian_l1, normalize_sharpness, tv_value
from .rpca import Decomposition, rpca_ealm, svt
from .selector import (
    SeparationDiagnostics,
    brute_force_select,
    select_subsample,
    separation_diagnostics,
)
from .simulator import (
    MotionField,
    SimulatedSequence,
    TurbulenceConfig,
    generate_motion_field,
    simulate_sequence,
    warp,
)
from .tvsolver import shrink, solve_screened_poisson, tv_restore

__version__ = "0.1.0"
