"""
Scene Model Package

Experiment constants, array geometry, symbol frames and synthesis of the
received signal, plus the config loader and shared error types.
"""

from .errors import (
    ConfigError, DomainError, ShapeError, InfiniteRatioError, DegenerateColumnError,
    InfeasibleTargetError, InfeasibleStartError, NumericalFailureError,
)
from .scene_structure import (
    SceneConfig, PhaseSchedule, SymbolFrame, ReceivedFrame, SceneTruth,
    QPSK_POINTS, CONTINUOUS, TWO_PI,
)
from .geometry import steering_vector, steering_matrix, phase_matrix_apply, scene_geometry, SceneGeometry
from .signal_model import (
    synth_received, cnr_inr, echo_powers, qpsk_index, qpsk_indices, comm_coefficients, imaging_rows,
)
from .rng import make_rng, derive_seed
from .config_loader import load_scene_config, read_config_file, save_scene_config

__all__ = [
    'ConfigError', 'DomainError', 'ShapeError', 'InfiniteRatioError', 'DegenerateColumnError',
    'InfeasibleTargetError', 'InfeasibleStartError', 'NumericalFailureError',
    'SceneConfig', 'PhaseSchedule', 'SymbolFrame', 'ReceivedFrame', 'SceneTruth',
    'QPSK_POINTS', 'CONTINUOUS', 'TWO_PI',
    'steering_vector', 'steering_matrix', 'phase_matrix_apply', 'scene_geometry', 'SceneGeometry',
    'synth_received', 'cnr_inr', 'echo_powers', 'qpsk_index', 'qpsk_indices', 'comm_coefficients', 'imaging_rows',
    'make_rng', 'derive_seed',
    'load_scene_config', 'read_config_file', 'save_scene_config',
]
