"""Energy propagation in deep convolutional scattering networks on periodic lattices."""
from .bounds import (BoundParams, bound, bound_exponential, bound_polynomial, layers_bandlimited,
                     layers_sobolev, layers_table)
from .filter_banks import (Filter, FilterBank, ModuleSequence, build_counterexample_bank,
                           build_meyer_2d_bank, build_meyer_wavelet_bank, build_weyl_heisenberg_bank,
                           check_admissibility, frame_bounds, normalize_to_parseval)
from .scattering import ScatteringResult, run_scattering
from .signals import gen_bandlimited, gen_cartoon2d, gen_counterexample_signal, gen_sobolev
from .spectral_core import FrequencyGrid, Signal, convolve, forward_transform, inverse_transform

__version__ = "0.1.0"

__all__ = [
    "BoundParams", "Filter", "FilterBank", "FrequencyGrid", "ModuleSequence", "ScatteringResult",
    "Signal", "bound", "bound_exponential", "bound_polynomial", "build_counterexample_bank",
    "build_meyer_2d_bank", "build_meyer_wavelet_bank", "build_weyl_heisenberg_bank",
    "check_admissibility", "convolve", "forward_transform", "frame_bounds", "gen_bandlimited",
    "gen_cartoon2d", "gen_counterexample_signal", "gen_sobolev", "inverse_transform",
    "layers_bandlimited", "layers_sobolev", "layers_table", "normalize_to_parseval",
    "run_scattering",
]
