"""Two-photon OAM states from SPDC pumped by perfect-vortex beams."""

from .engineering import (
    AmplitudeSource,
    NoSupportedModesError,
    RcfSpec,
    TwoPhotonState,
    build_filtered_state,
    diagonal_diagram,
    state_schmidt,
)
from .entanglement import (
    SpectrumSlice,
    concentration_fraction,
    full_slice,
    schmidt_number,
    schmidt_scan,
)
from .modes import (
    ModeKind,
    RadialMode,
    gaussian,
    normalize,
    pv_approx,
    pv_exact,
    radial_fidelity,
    radial_value,
)
from .spdc import (
    JointSpectrum,
    PumpFamily,
    PumpSpec,
    SignalGeometry,
    amplitude_limited,
    joint_spectrum,
    overlap_amplitude,
    peak_pump_width,
    scan_pump_width,
)
from .special_math import (
    QuadratureError,
    QuadratureSpec,
    bessel_i_scaled,
    integrate_radial,
)

__version__ = "0.1.0"
