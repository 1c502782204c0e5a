"""Shared small configurations for the test suites."""

import numpy as np
import pytest

from scene_model import SceneConfig, PhaseSchedule, SceneTruth, make_rng


@pytest.fixture
def small_cfg():
    """N=8, M=4, L=16, k=1, unit noise."""
    return SceneConfig(n_ris=8, n_pixels=4, frame_len=16, delay=1)


@pytest.fixture
def tiny_cfg():
    """N=4, M=2, L=6, k=1."""
    return SceneConfig(n_ris=4, n_pixels=2, frame_len=6, delay=1)


@pytest.fixture
def random_schedule():
    def build(cfg, seed=0):
        return PhaseSchedule.random(cfg.replace(n_bit="continuous"), make_rng(seed, 0, "test-schedule"))
    return build


@pytest.fixture
def random_scene():
    def build(n_pixels, seed=0):
        rng = make_rng(seed, 0, "test-scene")
        return SceneTruth(rng.standard_normal(n_pixels) + 1j * rng.standard_normal(n_pixels))
    return build
