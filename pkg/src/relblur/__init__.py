"""Relative Gaussian defocus blur estimation between image pairs.

Given a sharper reference image and a blurrier view of the same scene,
the package estimates the per-pixel standard deviation of the Gaussian
kernel relating the two, and validates the estimate by reconstructing
the blurrier image from the sharper one.
"""

__version__ = "0.1.0"

from .config import RunConfig
from .errors import (
    DivergenceError,
    EmptyDomainError,
    ImageIOError,
    InvalidParameterError,
    MemoryCapExceededError,
    NoRealFocusError,
    OutOfSupportError,
    RelblurError,
    ShapeError,
    SingularDepthError,
)
from .estimation import (
    BlurMap,
    CandidateField,
    MatchCandidates,
    disambiguate,
    estimate_blur_map,
    match_candidate_field,
    match_sigma,
)
from .framework import (
    CandidateVector,
    Patch,
    WeightMatrix,
    build_weight_matrix,
    direct_blur_oracle,
    extract_patch,
    forward_candidates,
    gaussian_kernel,
    ivec,
    radial_average,
    vec,
)
from .grids import (
    QuadratureVector,
    RadialGrid,
    SigmaGrid,
    default_radial_grid,
    default_sigma_grid,
    make_quadrature_vector,
    make_radial_grid,
    make_sigma_grid,
    required_patch_side,
)
from .imgio import load_gray, save_gray
from .optics import (
    CameraSettings,
    DepthScenario,
    c_max_bounded,
    c_max_foreground,
    coc_diameter,
    depth_from_coc,
    focus_distance,
    image_distance,
    recommend_decimation,
    solve_focal_length,
)
from .partition import (
    PairEvaluation,
    SharpnessPartition,
    evaluate_pair,
    local_sharpness,
    partition_pair,
)
from .reconstruct import (
    ReconstructionReport,
    image_mae,
    reconstruction_report,
    spatially_varying_convolve,
    varying_gaussian_blur,
)
from .resample import FirFilter, decimate, frequency_response, kaiser_sinc_taps
from .synth import SigmaField, apply_sigma_field, linear_sigma_field, synthetic_accuracy_run
