"""
Scene Structure Definitions

Defines the standardized structures shared by the optimizer, the decoder,
the imager and the experiment harness: experiment constants, RIS phase
schedules, symbol frames, received frames and the ground-truth scene.
"""

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, DomainError, ShapeError

CONTINUOUS = "continuous"
MAX_NBIT = 16
TWO_PI = 2.0 * math.pi

# e^{j(pi/2 * i - pi/4)}, i = 1..4, written exactly so that ties are exact ties.
QPSK_POINTS = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j], dtype=np.complex128) / np.sqrt(2.0)


def _check_angle(theta: float, name: str) -> None:
    if not (-90.0 < float(theta) < 90.0):
        raise DomainError(f"{name}={theta} deg is outside the open interval (-90, 90)")


def _parse_nbit(value: Any) -> Union[int, str]:
    if isinstance(value, str):
        text = value.strip().lower()
        if text == CONTINUOUS:
            return CONTINUOUS
        value = int(text)
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ConfigError(f"n_bit must be an integer in 1..{MAX_NBIT} or '{CONTINUOUS}', got {value!r}")
    return int(value)


def _parse_angles(value: Any) -> Tuple[float, ...]:
    if isinstance(value, str):
        parts = [p for p in value.replace(";", ",").split(",") if p.strip()]
        return tuple(float(p) for p in parts)
    return tuple(float(v) for v in value)


def _parse_bool(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


@dataclass(frozen=True)
class SceneConfig:
    """All physical and algorithmic constants of one experiment."""

    # geometry and sizes
    n_ris: int = 150
    n_pixels: int = 64
    frame_len: int = 1024
    delay: int = 1
    theta_bs: float = -45.0
    theta_ue: float = 70.0
    roi_angles: Optional[Tuple[float, ...]] = None  # None -> M points equispaced over 15..50 deg

    # link and noise
    alpha_c: float = 1.0
    alpha_i: float = 1.0
    noise_var: float = 1.0

    # phase design
    n_bit: Union[int, str] = 2
    rho: float = 0.5
    ortho_threshold: float = 0.1
    temp_rate: float = 0.005
    learning_rate: float = 0.01
    stage1_max_iters: int = 5000
    stage1_patience: int = 50
    stage1_rel_tol: float = 1e-4
    stage2_max_iters: int = 2000

    # decoding and imaging
    decoder_max_iters: int = 10
    decoder_tol: float = 1e-3
    damping: float = 1.0
    gamma_rate: float = 1e-6
    sbl_max_iters: int = 50
    sbl_tol: float = 1e-4
    noise_update: str = "standard"
    roi_gain_norm: str = "mean"

    def __post_init__(self):
        object.__setattr__(self, "n_bit", _parse_nbit(self.n_bit))
        if self.roi_angles is None:
            angles = tuple(float(a) for a in np.linspace(15.0, 50.0, self.n_pixels))
        else:
            angles = _parse_angles(self.roi_angles)
        object.__setattr__(self, "roi_angles", angles)
        self._validate()

    def _validate(self) -> None:
        for name in ("n_ris", "n_pixels", "frame_len", "decoder_max_iters",
                     "stage1_max_iters", "stage1_patience", "stage2_max_iters", "sbl_max_iters"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer, got {getattr(self, name)}")
        if not (0 <= self.delay < self.frame_len):
            raise ConfigError(f"delay must satisfy 0 <= delay < frame_len, got delay={self.delay}, frame_len={self.frame_len}")
        _check_angle(self.theta_bs, "theta_bs")
        _check_angle(self.theta_ue, "theta_ue")
        if len(self.roi_angles) != self.n_pixels:
            raise ConfigError(f"roi_angles has {len(self.roi_angles)} entries, expected n_pixels={self.n_pixels}")
        for angle in self.roi_angles:
            _check_angle(angle, "roi_angles")
        if any(b <= a for a, b in zip(self.roi_angles, self.roi_angles[1:])):
            raise ConfigError("roi_angles must be strictly increasing")
        if self.alpha_c < 0 or self.alpha_i < 0:
            raise ConfigError("alpha_c and alpha_i must be nonnegative")
        if self.noise_var < 0:
            raise ConfigError(f"noise_var must be nonnegative, got {self.noise_var}")
        if self.n_bit != CONTINUOUS and not (1 <= self.n_bit <= MAX_NBIT):
            raise ConfigError(f"n_bit must lie in 1..{MAX_NBIT} or be '{CONTINUOUS}', got {self.n_bit}")
        if not (0.0 <= self.rho <= 1.0):
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho}")
        if not (0.0 < self.ortho_threshold < 1.0):
            raise ConfigError(f"ortho_threshold must lie in (0, 1), got {self.ortho_threshold}")
        for name in ("temp_rate", "learning_rate", "decoder_tol", "gamma_rate", "sbl_tol", "stage1_rel_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not (0.0 < self.damping <= 1.0):
            raise ConfigError(f"damping must lie in (0, 1], got {self.damping}")
        if self.noise_update not in ("printed", "standard"):
            raise ConfigError(f"noise_update must be 'printed' or 'standard', got {self.noise_update!r}")
        if self.roi_gain_norm not in ("mean", "sum"):
            raise ConfigError(f"roi_gain_norm must be 'mean' or 'sum', got {self.roi_gain_norm!r}")

    @property
    def is_continuous(self) -> bool:
        return self.n_bit == CONTINUOUS

    @property
    def n_levels(self) -> int:
        """Number of admissible discrete phases, 2^n_bit."""
        if self.is_continuous:
            raise ConfigError("continuous phase model has no discrete grid")
        return 2 ** int(self.n_bit)

    @property
    def phase_grid(self) -> np.ndarray:
        """Admissible phases [0, 2pi/2^b, ..., 2pi(2^b - 1)/2^b]."""
        return TWO_PI * np.arange(self.n_levels) / self.n_levels

    @property
    def total_len(self) -> int:
        """Received frame length L + k."""
        return self.frame_len + self.delay

    def replace(self, **changes) -> "SceneConfig":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a plain dictionary (roi_angles as a list)."""
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["roi_angles"] = list(self.roi_angles)
        return data

    def to_text(self) -> str:
        """Render as the flat `key = value` format read by the config loader."""
        lines = []
        for key, value in self.to_dict().items():
            if key == "roi_angles":
                value = ",".join(repr(a) for a in value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SceneConfig":
        """
        Create a SceneConfig from a dictionary whose values may be strings.

        Unknown keys raise ConfigError; missing keys keep their defaults.
        """
        known = {f.name: f for f in fields(cls)}
        kwargs: Dict[str, Any] = {}
        for key, raw in data.items():
            if key not in known:
                raise ConfigError(f"Unknown config key: {key}")
            if raw is None:
                continue
            try:
                kwargs[key] = _coerce(key, known[key].type, raw)
            except (TypeError, ValueError) as e:
                if isinstance(e, ConfigError):
                    raise
                raise ConfigError(f"Cannot parse {key}={raw!r}: {e}") from e
        # a new pixel count invalidates the default RoI grid
        if "n_pixels" in kwargs and "roi_angles" not in kwargs:
            kwargs["roi_angles"] = None
        return cls(**kwargs)


def _coerce(key: str, annotation: Any, raw: Any) -> Any:
    if key == "n_bit":
        return _parse_nbit(raw)
    if key == "roi_angles":
        return _parse_angles(raw)
    if key in ("noise_update", "roi_gain_norm"):
        return str(raw).strip()
    text = str(annotation)
    if annotation is int or text == "int":
        if isinstance(raw, str):
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        return int(raw)
    if annotation is float or text == "float":
        return float(raw)
    if annotation is bool or text == "bool":
        return _parse_bool(raw)
    return raw


@dataclass(eq=False)
class PhaseSchedule:
    """Per-time RIS phases theta_{t,n}, shape (L + k) x N, entries in [0, 2pi)."""

    phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=np.float64)
        if phases.ndim != 2:
            raise ShapeError(f"phase schedule must be 2-D, got shape {phases.shape}")
        self.phases = np.mod(phases, TWO_PI)
        # np.mod can return exactly 2pi for tiny negative inputs
        self.phases[self.phases >= TWO_PI] = 0.0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.phases.shape

    def check_shape(self, cfg: SceneConfig) -> None:
        expected = (cfg.total_len, cfg.n_ris)
        if self.phases.shape != expected:
            raise ShapeError(f"phase schedule has shape {self.phases.shape}, expected {expected}")

    def is_on_grid(self, n_bit: int, tol: float = 1e-12) -> bool:
        step = TWO_PI / 2 ** int(n_bit)
        q = self.phases / step
        return bool(np.all(np.abs(q - np.round(q)) * step <= tol))

    def quantized(self, n_bit: int) -> "PhaseSchedule":
        """Snap every phase to the nearest admissible grid point (circularly)."""
        levels = 2 ** int(n_bit)
        q = np.mod(np.round(self.phases / (TWO_PI / levels)), levels)
        return PhaseSchedule(TWO_PI * q / levels)

    @classmethod
    def random(cls, cfg: SceneConfig, rng: np.random.Generator) -> "PhaseSchedule":
        shape = (cfg.total_len, cfg.n_ris)
        if cfg.is_continuous:
            return cls(rng.uniform(0.0, TWO_PI, size=shape))
        q = rng.integers(0, cfg.n_levels, size=shape)
        return cls(cfg.phase_grid[q])

    @classmethod
    def zeros(cls, cfg: SceneConfig) -> "PhaseSchedule":
        return cls(np.zeros((cfg.total_len, cfg.n_ris)))


@dataclass(eq=False)
class SymbolFrame:
    """QPSK symbol frame x(1..L)."""

    symbols: np.ndarray

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=np.complex128).reshape(-1)

    def __len__(self) -> int:
        return self.symbols.shape[0]

    @property
    def indices(self) -> np.ndarray:
        """Constellation indices 1..4 of each symbol."""
        from .signal_model import qpsk_indices
        return qpsk_indices(self.symbols)

    @classmethod
    def from_indices(cls, indices: np.ndarray) -> "SymbolFrame":
        idx = np.asarray(indices, dtype=np.int64)
        if np.any((idx < 1) | (idx > 4)):
            raise DomainError("QPSK indices must lie in 1..4")
        return cls(QPSK_POINTS[idx - 1])

    @classmethod
    def random(cls, frame_len: int, rng: np.random.Generator) -> "SymbolFrame":
        return cls.from_indices(rng.integers(1, 5, size=frame_len))


@dataclass(eq=False)
class ReceivedFrame:
    """Received baseband samples y(1..L+k) and the seed that drew their noise."""

    samples: np.ndarray
    noise_seed: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128).reshape(-1)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def check_shape(self, cfg: SceneConfig) -> None:
        if len(self) != cfg.total_len:
            raise ShapeError(f"received frame has length {len(self)}, expected {cfg.total_len}")


@dataclass(frozen=True, eq=False)
class SceneTruth:
    """Ground-truth scattering coefficients sigma of the RoI pixels."""

    sigma: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=np.complex128).reshape(-1)
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @property
    def sparsity(self) -> int:
        return int(np.count_nonzero(np.abs(self.sigma) > 0))

    @property
    def n_pixels(self) -> int:
        return self.sigma.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma": [[float(v.real), float(v.imag)] for v in self.sigma],
            "sparsity": self.sparsity,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SceneTruth":
        return cls(np.array([complex(re, im) for re, im in data["sigma"]]))
