"""Grid-search GCC-PHAT sound source localization for a cubical microphone
array, with a free-field scene simulator and a three-wheel omni-drive model."""

from .errors import (
    AmbiguousPeakError,
    InvalidArgumentError,
    LagOutOfRangeError,
    NoSignalError,
    SingularGeometryError,
)
from .geometry import (
    MicArray,
    MicPair,
    cubical_array,
    enumerate_pairs,
    farfield_tdoa,
    point_delay_difference,
)
from .pipeline import (
    ControllerParams,
    LocalizationResult,
    LocalizerConfig,
    TrackParams,
    Trajectory,
    localize,
    run_distance_sweep,
    track_and_drive,
)
from .scene import SceneConfig, SourceSpec, ground_truth_tdoas, noise_rms_for_snr, synthesize
from .spectral import (
    CorrelationFunction,
    SignalFrame,
    frame_stream,
    gcc_phat,
    interpolate_correlation,
    tdoa_from_correlation,
    xcorr_time,
)
from .srp_grid import (
    DelayTable,
    DoaEstimate,
    SphericalGrid,
    SrpMap,
    accumulate_srp,
    angular_distance,
    build_delay_table,
    build_grid,
    find_peaks,
)
from .vehicle import (
    BodyTwist,
    DriveGeometry,
    VehicleState,
    WheelSpeeds,
    forward_kinematics,
    heading_controller,
    inverse_kinematics,
    step,
)

__version__ = "0.1.0"
