"""
Execution Package

Monte Carlo experiment runner, noise calibration, letter scenes and the
CSV/plot artifacts of each run.
"""

from .letters import letter_scene, downsampled_letter_scene, letter_mask, LETTERS
from .experiment_runner import (
    ExperimentRunner, ScenarioSpec, ScenarioResult, MetricsRecord, METHODS,
    calibrate_noise, run_trial, run_trial_methods, run_scenario, aggregate, scene_for,
)
from . import artifacts

__all__ = [
    'letter_scene', 'downsampled_letter_scene', 'letter_mask', 'LETTERS',
    'ExperimentRunner', 'ScenarioSpec', 'ScenarioResult', 'MetricsRecord', 'METHODS',
    'calibrate_noise', 'run_trial', 'run_trial_methods', 'run_scenario', 'aggregate', 'scene_for',
    'artifacts',
]
