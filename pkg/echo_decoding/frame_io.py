"""
Frame persistence for the decode command: received samples as `t,re,im`
and decisions as `t,symbol_index,prob1..prob4` (1-based t).
"""

import csv
from pathlib import Path
from typing import List, Union

import numpy as np

from scene_model import ReceivedFrame, ShapeError

from .messages import SymbolBelief

RECEIVED_HEADER = ["t", "re", "im"]
DECISIONS_HEADER = ["t", "symbol_index", "prob1", "prob2", "prob3", "prob4"]


def save_received_csv(y: ReceivedFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(RECEIVED_HEADER)
        for t, v in enumerate(y.samples, start=1):
            writer.writerow([t, repr(float(v.real)), repr(float(v.imag))])
    return path


def load_received_csv(path: Union[str, Path]) -> ReceivedFrame:
    """Read a received frame; rows may come in any order but t must cover 1..T."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Received-frame file not found: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != RECEIVED_HEADER:
            raise ShapeError(f"{path}: expected header {','.join(RECEIVED_HEADER)}, got {header}")
        rows = sorted((int(t), complex(float(re), float(im))) for t, re, im in reader)
    if [t for t, _ in rows] != list(range(1, len(rows) + 1)):
        raise ShapeError(f"{path}: time indices must run 1..{len(rows)} without gaps")
    return ReceivedFrame(samples=np.array([v for _, v in rows], dtype=np.complex128))


def save_decisions_csv(beliefs: List[SymbolBelief], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(DECISIONS_HEADER)
        for t, belief in enumerate(beliefs, start=1):
            writer.writerow([t, belief.decided] + [repr(float(p)) for p in belief.probs])
    return path
