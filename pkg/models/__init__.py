"""
Models Package

Detection methods (the proposed receiver and its baselines) behind a
name-keyed factory.
"""

from .detectors import (
    BaseDetector, DetectionOutcome, DetectorFactory, count_symbol_errors,
    ProposedDetector, IgnoreEchoDetector, PureQpskDetector, GivenSigmaDetector, GivenXDetector,
)

__all__ = [
    'BaseDetector', 'DetectionOutcome', 'DetectorFactory', 'count_symbol_errors',
    'ProposedDetector', 'IgnoreEchoDetector', 'PureQpskDetector', 'GivenSigmaDetector', 'GivenXDetector',
]
