"""
Letter Scenes

8 x 8 binary letter masks used as ground-truth scenes, flattened row-major
to sigma with unit-magnitude, zero-phase nonzero pixels. Smaller square
grids are obtained by OR-pooling the mask.
"""

import math
from typing import Dict

import numpy as np

from scene_model import SceneTruth, ConfigError

LETTER_SIDE = 8

_MASKS: Dict[str, tuple] = {
    "X": (
        "X......X",
        ".X....X.",
        "..X..X..",
        "...XX...",
        "...XX...",
        "..X..X..",
        ".X....X.",
        "X......X",
    ),
    "D": (
        "XXXXX...",
        "X....X..",
        "X.....X.",
        "X.....X.",
        "X.....X.",
        "X.....X.",
        "X....X..",
        "XXXXX...",
    ),
    "U": (
        "X......X",
        "X......X",
        "X......X",
        "X......X",
        "X......X",
        "X......X",
        "X......X",
        ".XXXXXX.",
    ),
}

LETTERS = tuple(_MASKS)


def letter_mask(letter: str) -> np.ndarray:
    """Boolean 8 x 8 mask of the letter."""
    key = str(letter).upper()
    if key not in _MASKS:
        raise ConfigError(f"Unknown letter {letter!r}. Available: {list(LETTERS)}")
    return np.array([[c == "X" for c in row] for row in _MASKS[key]], dtype=bool)


def letter_scene(letter: str, n_pixels: int = LETTER_SIDE * LETTER_SIDE) -> SceneTruth:
    """Full-resolution letter scene; only defined for M = 64."""
    if n_pixels != LETTER_SIDE * LETTER_SIDE:
        raise ConfigError(f"letter scenes need n_pixels = {LETTER_SIDE * LETTER_SIDE}, got {n_pixels}")
    return SceneTruth(letter_mask(letter).reshape(-1).astype(np.complex128))


def downsampled_letter_scene(letter: str, n_pixels: int) -> SceneTruth:
    """
    Letter scene on a sqrt(M) x sqrt(M) grid, M in {1, 4, 16, 64}.

    A coarse pixel is set when any fine pixel of its block is set.
    """
    side = math.isqrt(n_pixels)
    if side * side != n_pixels or side < 1 or LETTER_SIDE % side:
        raise ConfigError(f"n_pixels={n_pixels} is not one of 1, 4, 16, 64")
    block = LETTER_SIDE // side
    mask = letter_mask(letter).reshape(side, block, side, block).any(axis=(1, 3))
    return SceneTruth(mask.reshape(-1).astype(np.complex128))
