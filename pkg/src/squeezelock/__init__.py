"""Simulation of coherently controlled audio-band squeezed vacuum.

The functional core lives in the submodules: :mod:`quadrature` (Gaussian
sideband states), :mod:`opo`, :mod:`control`, :mod:`detection`,
:mod:`spectra` and :mod:`michelson`. :mod:`scenarios` and :mod:`cli` run the
named scenarios; :mod:`estimators` wraps pieces for scikit-learn.
"""

from .config import ExperimentConfig, load_config
from .detection import HomodyneConfig, homodyne_spectrum, measure_variance
from .michelson import MichelsonConfig, run_mi_scenario
from .opo import OpoParams, amplify_control_field, calibrate_pump, squeezing_spectrum
from .quadrature import QuadratureState, apply_loss, rotate, squeezed_state, vacuum_state
from .spectra import SpectrumWindow, estimate_psd, default_window_plan

__all__ = [
    "ExperimentConfig",
    "HomodyneConfig",
    "MichelsonConfig",
    "OpoParams",
    "QuadratureState",
    "SpectrumWindow",
    "amplify_control_field",
    "apply_loss",
    "calibrate_pump",
    "estimate_psd",
    "homodyne_spectrum",
    "load_config",
    "measure_variance",
    "default_window_plan",
    "rotate",
    "run_mi_scenario",
    "squeezed_state",
    "squeezing_spectrum",
    "vacuum_state",
]
