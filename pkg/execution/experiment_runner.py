"""
Experiment Runner Module

Monte Carlo SER/NMSE sweeps over (CNR, INR) points for the proposed receiver
and its baselines. Every trial draws its symbols and noise from a seed
derived from (master seed, sweep point, trial), and every method sees the
same draws, so comparisons are paired and results do not depend on the
number of parallel workers.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from scene_model import (
    SceneConfig, PhaseSchedule, SymbolFrame, SceneTruth, ConfigError, InfeasibleTargetError,
    QPSK_POINTS, echo_powers, synth_received, make_rng, derive_seed,
)
from phase_optimization import optimize_phases, save_schedule_csv, save_loss_trace_csv
from imaging import nmse_db, save_scene_csv
from models import DetectorFactory, DetectionOutcome

from .letters import letter_scene, downsampled_letter_scene
from . import artifacts

logger = logging.getLogger(__name__)

METHODS = ("proposed", "ignore_echo", "pure_qpsk", "given_sigma", "given_x")
SYMBOL_STREAM = "symbols"


@dataclass
class ScenarioSpec:
    """One sweep of (CNR, INR) points on a letter scene."""
    id: int
    sweep: List[Tuple[float, float]]
    scene_letter: str
    trials: int = 200

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if not self.sweep:
            raise ConfigError("scenario sweep is empty")

    @property
    def sweep_axis(self) -> str:
        """'inr' when CNR is held fixed across the sweep, otherwise 'cnr'."""
        cnrs = {c for c, _ in self.sweep}
        return "inr" if len(cnrs) == 1 and len(self.sweep) > 1 else "cnr"

    @classmethod
    def default(cls, scenario_id: int, trials: int = 200) -> "ScenarioSpec":
        """
        Built-in scenarios:

        1: letter X, CNR 6..16 dB step 2, INR = CNR - 5
        2: letter D, CNR 12 dB, INR 4..8 dB step 1
        3: letter U, INR 6 dB, CNR 8..16 dB step 2
        """
        if scenario_id == 1:
            sweep = [(float(c), float(c - 5)) for c in range(6, 17, 2)]
            return cls(1, sweep, "X", trials)
        if scenario_id == 2:
            return cls(2, [(12.0, float(i)) for i in range(4, 9)], "D", trials)
        if scenario_id == 3:
            return cls(3, [(float(c), 6.0) for c in range(8, 17, 2)], "U", trials)
        raise ConfigError(f"Unknown scenario {scenario_id}. Available: [1, 2, 3]")


@dataclass
class MetricsRecord:
    """Aggregated result of one method at one sweep point."""
    cnr_db: float
    inr_db: float
    method: str
    ser: float
    stderr: float
    nmse_db: float
    trials: int
    errors_total: int


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    records: List[MetricsRecord] = field(default_factory=list)
    files: List[str] = field(default_factory=list)

    def select(self, method: str) -> List[MetricsRecord]:
        return [r for r in self.records if r.method == method]


def scene_for(letter: str, n_pixels: int) -> SceneTruth:
    """Letter scene at full resolution for M = 64, OR-pooled otherwise."""
    if n_pixels == 64:
        return letter_scene(letter)
    return downsampled_letter_scene(letter, n_pixels)


def calibrate_noise(cfg: SceneConfig, sched: PhaseSchedule, truth: SceneTruth,
                    target_cnr_db: Optional[float] = None,
                    target_inr_db: Optional[float] = None) -> SceneConfig:
    """
    Return cfg with noise_var (and alpha_i when both targets are given) set so
    the measured CNR/INR hit the targets.

    The noise variance follows from the CNR target when given, otherwise from
    the INR target. With both targets the imaging attenuation alpha_i is solved
    for the INR. Echo powers do not depend on the unit-modulus symbols.

    Raises:
        InfeasibleTargetError: If no target is given, a target is not finite,
            or the echo a target refers to is absent
    """
    if target_cnr_db is None and target_inr_db is None:
        raise InfeasibleTargetError("calibration needs a CNR or an INR target")
    for name, value in (("CNR", target_cnr_db), ("INR", target_inr_db)):
        if value is not None and not math.isfinite(value):
            raise InfeasibleTargetError(f"{name} target must be finite, got {value}")

    frame = SymbolFrame(np.full(cfg.frame_len, QPSK_POINTS[0]))
    unit_i = cfg.replace(alpha_i=1.0)
    p_comm, p_img_unit = echo_powers(unit_i, sched, frame, truth)

    if target_cnr_db is not None:
        if p_comm <= 0:
            raise InfeasibleTargetError("communication echo is absent; CNR target unreachable")
        noise_var = p_comm / 10.0 ** (target_cnr_db / 10.0)
        if target_inr_db is None:
            return cfg.replace(noise_var=noise_var)
        if p_img_unit <= 0:
            raise InfeasibleTargetError("imaging echo is absent; INR target unreachable")
        alpha_i = math.sqrt(10.0 ** (target_inr_db / 10.0) * noise_var / p_img_unit)
        return cfg.replace(noise_var=noise_var, alpha_i=alpha_i)

    p_img = cfg.alpha_i ** 2 * p_img_unit
    if p_img <= 0:
        raise InfeasibleTargetError("imaging echo is absent; INR target unreachable")
    return cfg.replace(noise_var=p_img / 10.0 ** (target_inr_db / 10.0))


def run_trial(cfg: SceneConfig, sched: PhaseSchedule, truth: SceneTruth, method: str,
              seed: int) -> DetectionOutcome:
    """
    Draw one frame and noise realization from seed and run one method on it.

    Methods called with the same seed see identical symbols and noise.
    """
    frame = SymbolFrame.random(cfg.frame_len, make_rng(seed, 0, SYMBOL_STREAM))
    y = synth_received(cfg, sched, frame, truth, seed)
    detector = DetectorFactory.create_detector(method, cfg, sched)
    return detector.detect(frame, truth, y, seed)


def run_trial_methods(cfg: SceneConfig, sched: PhaseSchedule, truth: SceneTruth,
                      methods: Sequence[str], seed: int) -> Dict[str, DetectionOutcome]:
    """All methods on one paired trial."""
    frame = SymbolFrame.random(cfg.frame_len, make_rng(seed, 0, SYMBOL_STREAM))
    y = synth_received(cfg, sched, frame, truth, seed)
    outcomes = {}
    for method in methods:
        detector = DetectorFactory.create_detector(method, cfg, sched)
        outcomes[method] = detector.detect(frame, truth, y, seed)
    return outcomes


def aggregate(cnr_db: float, inr_db: float, method: str, outcomes: List[DetectionOutcome],
              truth: SceneTruth, frame_len: int) -> MetricsRecord:
    """SER with its binomial standard error and mean per-trial NMSE, summed in trial order."""
    detector_cls = DetectorFactory.get(method)
    trials = len(outcomes)
    errors_total = int(sum(o.errors for o in outcomes))
    if detector_cls.reports_ser:
        n_symbols = trials * frame_len
        ser = errors_total / n_symbols
        stderr = math.sqrt(ser * (1.0 - ser) / n_symbols)
    else:
        ser = stderr = float("nan")
    nmse = float("nan")
    if detector_cls.reports_nmse and truth.sparsity > 0:
        total = 0.0
        for o in outcomes:
            total += nmse_db(o.sigma_hat, truth.sigma)
        nmse = total / trials
    return MetricsRecord(cnr_db=cnr_db, inr_db=inr_db, method=method, ser=ser, stderr=stderr,
                         nmse_db=nmse, trials=trials, errors_total=errors_total)


class ExperimentRunner:
    """Runs scenario sweeps and writes their CSV and plot artifacts."""

    def __init__(self, cfg: SceneConfig, out_dir: str = "results", master_seed: int = 0,
                 jobs: int = 1, methods: Sequence[str] = METHODS, progress: bool = True):
        """
        Initialize the runner.

        Args:
            cfg: Base configuration; noise_var and alpha_i are recalibrated per sweep point
            out_dir: Directory for CSVs and plots
            master_seed: Seed from which all trial seeds are derived
            jobs: joblib worker count (-1 for all cores)
            methods: Methods to compare
            progress: Show tqdm progress bars
        """
        for method in methods:
            DetectorFactory.get(method)
        self.cfg = cfg
        self.out_dir = Path(out_dir)
        self.master_seed = int(master_seed)
        self.jobs = jobs
        self.methods = list(methods)
        self.progress = progress
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def design_schedule(self) -> PhaseSchedule:
        """Optimize the phase schedule for the base configuration and save it with its trace."""
        sched, report = optimize_phases(self.cfg, self.master_seed, progress=self.progress)
        save_schedule_csv(sched, self.out_dir / "schedule.csv")
        save_loss_trace_csv(report, self.out_dir / "loss_trace.csv")
        artifacts.plot_loss_trace(report, self.out_dir / "loss_trace.png")
        return sched

    def run_point(self, point_index: int, cnr_db: float, inr_db: float, sched: PhaseSchedule,
                  truth: SceneTruth, trials: int) -> Tuple[List[MetricsRecord], Dict[str, List[DetectionOutcome]]]:
        cfg = calibrate_noise(self.cfg, sched, truth, cnr_db, inr_db)
        seeds = [derive_seed(self.master_seed, point_index, q) for q in range(trials)]
        results = Parallel(n_jobs=self.jobs)(
            delayed(run_trial_methods)(cfg, sched, truth, self.methods, s)
            for s in tqdm(seeds, desc=f"CNR {cnr_db:g} dB / INR {inr_db:g} dB",
                          disable=not self.progress, leave=False)
        )
        by_method = {m: [r[m] for r in results] for m in self.methods}
        records = [aggregate(cnr_db, inr_db, m, by_method[m], truth, cfg.frame_len) for m in self.methods]
        return records, by_method

    def run_scenario(self, spec: ScenarioSpec, sched: Optional[PhaseSchedule] = None) -> ScenarioResult:
        """
        Sweep all points of a scenario. CSVs are rewritten after every point,
        so a failure leaves the completed points on disk.
        """
        if sched is None:
            sched = self.design_schedule()
        sched.check_shape(self.cfg)
        truth = scene_for(spec.scene_letter, self.cfg.n_pixels)
        result = ScenarioResult(spec=spec)
        ser_path = self.out_dir / "ser_curve.csv"
        nmse_path = self.out_dir / "nmse_curve.csv"

        last_sigma = None
        for p, (cnr_db, inr_db) in enumerate(tqdm(spec.sweep, desc=f"Scenario {spec.id}",
                                                  disable=not self.progress)):
            records, outcomes = self.run_point(p, cnr_db, inr_db, sched, truth, spec.trials)
            result.records.extend(records)
            artifacts.write_ser_csv(result.records, ser_path)
            artifacts.write_nmse_csv(result.records, nmse_path)
            if "proposed" in outcomes and outcomes["proposed"]:
                last_sigma = outcomes["proposed"][0].sigma_hat
            logger.info("Point %d/%d done (CNR %g dB, INR %g dB)", p + 1, len(spec.sweep), cnr_db, inr_db)

        result.files = [str(ser_path), str(nmse_path)]
        result.files.append(str(artifacts.plot_ser_curve(result.records, spec.sweep_axis, self.out_dir / "ser_curve.png")))
        result.files.append(str(artifacts.plot_nmse_curve(result.records, spec.sweep_axis, self.out_dir / "nmse_curve.png")))
        if last_sigma is not None:
            result.files.append(str(save_scene_csv(last_sigma, self.out_dir / "sigma_hat.csv")))
            result.files.append(str(artifacts.plot_sigma_grid(last_sigma, truth.sigma, self.out_dir / "sigma_grid.png")))
        return result


def run_scenario(spec: ScenarioSpec, cfg: SceneConfig, out_dir: str = "results", master_seed: int = 0,
                 parallelism: int = 1, sched: Optional[PhaseSchedule] = None,
                 methods: Sequence[str] = METHODS, progress: bool = False) -> List[MetricsRecord]:
    """
    Convenience function to run one scenario.

    Returns:
        Metrics records in sweep order, one per method per point
    """
    runner = ExperimentRunner(cfg, out_dir, master_seed, parallelism, methods, progress)
    return runner.run_scenario(spec, sched).records
