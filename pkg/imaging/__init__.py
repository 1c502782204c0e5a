"""
Imaging Package

Adaptive sparse Bayesian recovery of the RoI scene from the echo residual
left after removing the decoded communication signal.
"""

from .sbl_imager import (
    SparseEstimate, ImagingSystem, SBLImager, FixedSigmaImager,
    build_residual, posterior, sbl_step, run_sbl, nmse_db,
)
from .scene_io import scene_grid, save_scene_csv, load_scene_csv, save_scene_grid_csv

__all__ = [
    'SparseEstimate', 'ImagingSystem', 'SBLImager', 'FixedSigmaImager',
    'build_residual', 'posterior', 'sbl_step', 'run_sbl', 'nmse_db',
    'scene_grid', 'save_scene_csv', 'load_scene_csv', 'save_scene_grid_csv',
]
