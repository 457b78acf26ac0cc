"""Simulation and bound checking for deterministic K-identification over
Gaussian slow-fading channels."""

from .bounds import BoundReport, ChannelParams, CodeParams
from .channel import FadingModel, sample_fading, transmit
from .decoder import TargetSet, in_territory, k_identify
from .errors import (ConfigError, DimensionTooLarge, DKIError, IndexOutOfRange,
                     InvalidModel, InvalidParameter, ValidationFailed)
from .montecarlo import (ErrorEstimate, estimate_type1, estimate_type2, make_ggrid,
                         scaling_sweep)
from .packing import Codebook, build_codebook, coverage_certificate, validate_codebook

__version__ = "0.1.0"
