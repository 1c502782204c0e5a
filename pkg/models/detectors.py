'''
    Detection methods compared by the Monte Carlo harness.
'''

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from scene_model import (
    SceneConfig, PhaseSchedule, SymbolFrame, SceneTruth, ReceivedFrame, ConfigError, synth_received,
)
from echo_decoding import EchoDecoder, detect_ignoring_echo
from imaging import SBLImager, FixedSigmaImager, SparseEstimate, build_residual, run_sbl


@dataclass
class DetectionOutcome:
    """Symbol-error count and recovered scene of one method on one trial."""
    errors: int
    decided: Optional[np.ndarray] = None
    sigma_hat: Optional[np.ndarray] = None
    iterations: int = 1


def count_symbol_errors(decided: np.ndarray, frame: SymbolFrame) -> int:
    return int(np.count_nonzero(np.asarray(decided) != frame.indices))


class BaseDetector(ABC):
    """Abstract base class for detection methods."""

    reports_ser = True
    reports_nmse = False

    def __init__(self, cfg: SceneConfig, sched: PhaseSchedule):
        self.cfg = cfg
        self.sched = sched

    @abstractmethod
    def detect(self, frame: SymbolFrame, truth: SceneTruth, y: ReceivedFrame, seed: int) -> DetectionOutcome:
        """
        Run the method on one trial.

        Args:
            frame: Transmitted symbols (used only for scoring and by genie methods)
            truth: True scene (used only for scoring and by genie methods)
            y: Received coupled frame synthesized from frame, truth and seed
            seed: Noise seed of y, for methods that resynthesize
        """


class ProposedDetector(BaseDetector):
    """Message passing iterated with adaptive SBL."""

    reports_nmse = True

    def detect(self, frame, truth, y, seed):
        result = EchoDecoder(self.cfg, self.sched, y, SBLImager(self.cfg, self.sched, y)).decode()
        return DetectionOutcome(count_symbol_errors(result.indices, frame), result.indices,
                                result.estimate.sigma, result.iterations)


class IgnoreEchoDetector(BaseDetector):
    """Treats the imaging echo as absent: one forward pass, no iteration."""

    def detect(self, frame, truth, y, seed):
        decided = np.array([b.decided for b in detect_ignoring_echo(self.cfg, self.sched, y)])
        return DetectionOutcome(count_symbol_errors(decided, frame), decided)


class PureQpskDetector(BaseDetector):
    """Idealized benchmark: the same symbols and noise, received without any imaging echo."""

    def detect(self, frame, truth, y, seed):
        cfg = self.cfg.replace(alpha_i=0.0)
        clean = synth_received(cfg, self.sched, frame, truth, seed)
        decided = np.array([b.decided for b in detect_ignoring_echo(cfg, self.sched, clean)])
        return DetectionOutcome(count_symbol_errors(decided, frame), decided)


class GivenSigmaDetector(BaseDetector):
    """Message passing with the true scene in place of the imager (SER lower bound)."""

    def detect(self, frame, truth, y, seed):
        result = EchoDecoder(self.cfg, self.sched, y, FixedSigmaImager(truth)).decode(initial_sigma=truth.sigma)
        return DetectionOutcome(count_symbol_errors(result.indices, frame), result.indices,
                                result.estimate.sigma, result.iterations)


class GivenXDetector(BaseDetector):
    """SBL fed with the true symbols (NMSE lower bound)."""

    reports_ser = False
    reports_nmse = True

    def detect(self, frame, truth, y, seed):
        cfg = self.cfg
        sys = build_residual(cfg, self.sched, y, frame)
        est = run_sbl(sys, SparseEstimate.initial(sys.residual, cfg.n_pixels), cfg.sbl_max_iters,
                      cfg.sbl_tol, cfg.gamma_rate, cfg.noise_update)
        return DetectionOutcome(0, frame.indices, est.sigma, est.iterations)


class DetectorFactory:
    """Factory class to create detection methods by name."""

    _implementations = {
        'proposed': ProposedDetector,
        'ignore_echo': IgnoreEchoDetector,
        'pure_qpsk': PureQpskDetector,
        'given_sigma': GivenSigmaDetector,
        'given_x': GivenXDetector,
    }

    @classmethod
    def create_detector(cls, method: str, cfg: SceneConfig, sched: PhaseSchedule) -> BaseDetector:
        """
        Create a detector for the given method.

        Raises:
            ConfigError: If the method is not registered
        """
        if method not in cls._implementations:
            raise ConfigError(f"Unsupported method: {method}. Available: {list(cls._implementations.keys())}")
        return cls._implementations[method](cfg, sched)

    @classmethod
    def register_implementation(cls, name: str, implementation_class):
        """Register a new detection method."""
        cls._implementations[name] = implementation_class

    @classmethod
    def available(cls) -> List[str]:
        return list(cls._implementations.keys())

    @classmethod
    def get(cls, method: str):
        if method not in cls._implementations:
            raise ConfigError(f"Unsupported method: {method}. Available: {list(cls._implementations.keys())}")
        return cls._implementations[method]
