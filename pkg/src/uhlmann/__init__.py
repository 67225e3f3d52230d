"""Finite-temperature Uhlmann geometry of two-band Chern insulators."""

from .errors import GapClosureError, NumericalError, ValidationError
from .geometry import (
    ThermalContext,
    berry_curvature,
    chern_fhs,
    chern_number,
    curvature_map,
    muc_closed_form,
    muc_sld,
    thermal_factor,
    uhlmann_number,
)
from .lehmann import LehmannSystem, muc_direct, muc_from_chi, muc_from_structure_factor
from .models import HVectorField, band_gap, get_model, qwz_field, sticlet_field
from .quadrature import BZGrid
from .response import (
    SpectralTrace,
    conductivity_trace,
    kernel_K,
    tknn_frequency_side,
    transverse_conductivity,
)
from .sweep import SweepSpec, run_sweep

__version__ = "0.1.0"
