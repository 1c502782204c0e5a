"""
Phase Optimization Package

Two-stage RIS phase design: softmax relaxation of the discrete phases,
sensing-matrix incoherence, loss gradients, the optimizer itself and the
resulting receive beam patterns.
"""

from .relaxation import SoftWeights, softmax_select, softmax_weights, temperature
from .sensing import SensingMatrix, sensing_matrix, sensing_rows, correlation_matrix, ortho_metric
from .losses import init_loss, init_loss_and_grad, refine_loss, refine_loss_and_grad, sample_target
from .phase_optimizer import (
    OptimizerReport, PhaseOptimizer, optimize_discrete, optimize_continuous, optimize_phases,
)
from .beam_pattern import (
    beam_pattern, direction_gain_db, roi_gain_db, peak_angles, beam_study, BeamStudyRow,
)
from .schedule_io import save_schedule_csv, load_schedule_csv, save_loss_trace_csv

__all__ = [
    'SoftWeights', 'softmax_select', 'softmax_weights', 'temperature',
    'SensingMatrix', 'sensing_matrix', 'sensing_rows', 'correlation_matrix', 'ortho_metric',
    'init_loss', 'init_loss_and_grad', 'refine_loss', 'refine_loss_and_grad', 'sample_target',
    'OptimizerReport', 'PhaseOptimizer', 'optimize_discrete', 'optimize_continuous', 'optimize_phases',
    'beam_pattern', 'direction_gain_db', 'roi_gain_db', 'peak_angles', 'beam_study', 'BeamStudyRow',
    'save_schedule_csv', 'load_schedule_csv', 'save_loss_trace_csv',
]
