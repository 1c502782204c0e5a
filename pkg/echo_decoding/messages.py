"""
Gaussian Message Algebra

Scalar complex Gaussian messages in (mean, weight) form, where weight is the
inverse variance and weight 0 is the uninformative message, plus the node
rules of the symbol factor graph:

- linear node  y = c * x      : divide the observation through c
- subtraction  a = y - b      : subtract means, add variances
- projection onto QPSK        : exact moment matching of the tilted 4-point posterior
- belief                      : product of the forward and backward messages on the 4 points
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from scene_model import QPSK_POINTS

# below this modulus a linear coefficient carries no information
COEF_FLOOR = 1e-12
# variance floor so that noiseless frames give large but finite weights
VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class ScalarGaussian:
    """CN(mean, 1/weight); weight 0 encodes the uninformative message."""

    mean: complex = 0j
    weight: float = 0.0

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError(f"message weight must be nonnegative, got {self.weight}")

    @property
    def var(self) -> float:
        return float("inf") if self.weight == 0 else 1.0 / self.weight

    @property
    def is_informative(self) -> bool:
        return self.weight > 0

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.mean) and np.isfinite(self.weight))

    def product(self, other: "ScalarGaussian") -> "ScalarGaussian":
        """Product of two Gaussian densities: weights add, means combine by weight."""
        weight = self.weight + other.weight
        if weight == 0:
            return ScalarGaussian()
        mean = (self.weight * self.mean + other.weight * other.mean) / weight
        return ScalarGaussian(complex(mean), float(weight))

    def damped(self, previous: "ScalarGaussian", factor: float) -> "ScalarGaussian":
        """Convex combination factor * self + (1 - factor) * previous of mean and weight."""
        if factor >= 1.0:
            return self
        mean = factor * self.mean + (1.0 - factor) * previous.mean
        weight = factor * self.weight + (1.0 - factor) * previous.weight
        return ScalarGaussian(complex(mean), float(weight))

    @classmethod
    def uninformative(cls) -> "ScalarGaussian":
        return cls(0j, 0.0)


class MatchedMoments(NamedTuple):
    mean: complex
    var: float
    probs: np.ndarray


@dataclass(frozen=True, eq=False)
class SymbolBelief:
    """Normalized belief over the four QPSK points and the 1-based decision."""

    probs: np.ndarray
    decided: int

    @property
    def symbol(self) -> complex:
        return complex(QPSK_POINTS[self.decided - 1])


def _tilted_probs(*msgs: ScalarGaussian) -> np.ndarray:
    """Normalized prod_j exp(-|s_i - m_j|^2 w_j) over the four points."""
    log_p = np.zeros(4)
    for msg in msgs:
        if msg.weight > 0:
            log_p -= msg.weight * np.abs(QPSK_POINTS - msg.mean) ** 2
    log_p -= log_p.max()
    p = np.exp(log_p)
    return p / p.sum()


def moment_match(msg: ScalarGaussian) -> MatchedMoments:
    """
    Project the message times the uniform QPSK prior onto a Gaussian.

    Returns:
        (mean, var, probs) of the discrete posterior over the four points;
        an uninformative message gives (0, 1, uniform)
    """
    probs = _tilted_probs(msg)
    mean = complex(probs @ QPSK_POINTS)
    var = float(probs @ np.abs(QPSK_POINTS - mean) ** 2)
    return MatchedMoments(mean, var, probs)


def _through_linear_node(num_mean: complex, num_var: float, coef: complex) -> ScalarGaussian:
    """Message on x from an observation CN(num_mean, num_var) of coef * x."""
    if abs(coef) < COEF_FLOOR:
        return ScalarGaussian.uninformative()
    var = max(float(num_var), VAR_FLOOR)
    return ScalarGaussian(complex(num_mean / coef), float(abs(coef) ** 2 / var))


def fwd_msg_pure_comm(y_t: complex, comm_coef: complex, noise_var: float) -> ScalarGaussian:
    """Forward message for t <= k, where y_t = c x_t + w."""
    return _through_linear_node(y_t, noise_var, comm_coef)


def fwd_msg_overlap(y_t: complex, comm_coef: complex, h_prev: complex,
                    prev: MatchedMoments, noise_var: float) -> ScalarGaussian:
    """
    Forward message for k < t <= L, where y_t = c x_t + h_{t-k} x_{t-k} + w.

    The interfering echo is the point estimate h_{t-k} times the moment-matched
    symbol x_{t-k}; it is subtracted and its variance added to the noise.
    """
    mean_b = h_prev * prev.mean
    var_b = abs(h_prev) ** 2 * prev.var
    return _through_linear_node(y_t - mean_b, noise_var + var_b, comm_coef)


def bwd_msg_tail(y_tk: complex, h_point: complex, noise_var: float) -> ScalarGaussian:
    """Backward message for L - k < t <= L, where y_{t+k} = h_t x_t + w."""
    return _through_linear_node(y_tk, noise_var, h_point)


def bwd_msg_mid(y_tk: complex, h_point: complex, comm_next: complex,
                nxt: MatchedMoments, noise_var: float) -> ScalarGaussian:
    """Backward message for t <= L - k, where y_{t+k} = c_{t+k} x_{t+k} + h_t x_t + w."""
    mean_a = comm_next * nxt.mean
    var_a = abs(comm_next) ** 2 * nxt.var
    return _through_linear_node(y_tk - mean_a, noise_var + var_a, h_point)


def belief_and_decide(fwd: ScalarGaussian, bwd: ScalarGaussian) -> SymbolBelief:
    """Belief over the four points from both incoming messages; ties go to the smaller index."""
    probs = _tilted_probs(fwd, bwd)
    return SymbolBelief(probs=probs, decided=int(np.argmax(probs)) + 1)
