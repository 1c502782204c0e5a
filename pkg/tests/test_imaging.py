"""Tests for residual construction, the SBL posterior and iterations, NMSE and scene files."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from scene_model import (
    SymbolFrame, SceneTruth, ReceivedFrame, PhaseSchedule, QPSK_POINTS, ShapeError, ConfigError,
    synth_received, make_rng,
)
from imaging import (
    SparseEstimate, ImagingSystem, build_residual, posterior, sbl_step, run_sbl, nmse_db,
    SBLImager, FixedSigmaImager, scene_grid, save_scene_csv, load_scene_csv, save_scene_grid_csv,
)


def _sparse_truth(n_pixels, support, seed=0):
    rng = make_rng(seed, 0, "sparse-scene")
    sigma = np.zeros(n_pixels, dtype=complex)
    sigma[support] = rng.standard_normal(len(support)) + 1j * rng.standard_normal(len(support))
    return SceneTruth(sigma)


def _random_system(rows, cols, seed=0):
    rng = make_rng(seed, 0, "system")
    g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    h = rng.standard_normal(rows) + 1j * rng.standard_normal(rows)
    return ImagingSystem(g, h)


class TestBuildResidual:

    def test_exact_model_with_true_symbols(self, small_cfg, random_schedule, random_scene):
        cfg = small_cfg.replace(noise_var=0.0)
        sched = random_schedule(cfg)
        truth = random_scene(cfg.n_pixels)
        frame = SymbolFrame.random(cfg.frame_len, make_rng(1))
        y = synth_received(cfg, sched, frame, truth, 0)
        sys = build_residual(cfg, sched, y, frame)
        assert sys.matrix.shape == (cfg.frame_len, cfg.n_pixels)
        assert_allclose(sys.matrix @ truth.sigma, sys.residual, atol=1e-10)

    def test_no_echo_gives_zero_matrix(self, small_cfg, random_schedule, random_scene):
        cfg = small_cfg.replace(alpha_i=0.0, noise_var=0.0)
        sched = random_schedule(cfg)
        frame = SymbolFrame.random(cfg.frame_len, make_rng(2))
        y = synth_received(cfg, sched, frame, random_scene(cfg.n_pixels), 0)
        sys = build_residual(cfg, sched, y, frame)
        assert not np.any(sys.matrix)
        assert_allclose(sys.residual, 0.0, atol=1e-12)

    def test_wrong_symbol_leaves_communication_residue(self, small_cfg, random_schedule, random_scene):
        cfg = small_cfg.replace(noise_var=0.0)
        sched = random_schedule(cfg)
        truth = random_scene(cfg.n_pixels)
        frame = SymbolFrame.random(cfg.frame_len, make_rng(3))
        y = synth_received(cfg, sched, frame, truth, 0)
        wrong = frame.symbols.copy()
        wrong[5] = -wrong[5]
        sys = build_residual(cfg, sched, y, SymbolFrame(wrong))
        mismatch = np.abs(sys.residual - sys.matrix @ truth.sigma) > 1e-9
        # x[5] enters entry 4 through the communication term and entry 5 through the echo
        assert mismatch[4] and mismatch[5]

    def test_length_check(self, small_cfg, random_schedule):
        y = ReceivedFrame(np.zeros(small_cfg.total_len))
        with pytest.raises(ShapeError):
            build_residual(small_cfg, random_schedule(small_cfg), y, SymbolFrame(np.ones(3)))


class TestPosterior:

    def test_matches_dense_solve(self):
        sys = _random_system(12, 5)
        gamma = np.linspace(0.5, 3.0, 5)
        sigma, cov_diag, regularized = posterior(sys, gamma, 0.7)
        w = sys.matrix.conj().T @ sys.matrix / 0.7 + np.diag(gamma)
        assert_allclose(sigma, np.linalg.solve(w, sys.matrix.conj().T @ sys.residual / 0.7), rtol=1e-10)
        assert_allclose(cov_diag, np.real(np.diag(np.linalg.inv(w))), rtol=1e-10)
        assert not regularized

    def test_zero_residual_gives_zero_mean(self):
        sys = _random_system(8, 4)
        sys = ImagingSystem(sys.matrix, np.zeros(8))
        sigma, _, _ = posterior(sys, np.ones(4), 1.0)
        assert_array_equal(sigma, 0)

    def test_row_phase_invariance(self):
        sys = _random_system(10, 4)
        phase = np.exp(1j * make_rng(5).uniform(0, 2 * np.pi, 10))
        rotated = ImagingSystem(phase[:, None] * sys.matrix, phase * sys.residual)
        a, _, _ = posterior(sys, np.ones(4), 0.3)
        b, _, _ = posterior(rotated, np.ones(4), 0.3)
        assert_allclose(a, b, atol=1e-12)

    def test_vanishing_precision_approaches_least_squares(self):
        sys = _random_system(20, 4)
        sigma, _, _ = posterior(sys, np.full(4, 1e-10), 1.0)
        ls, *_ = np.linalg.lstsq(sys.matrix, sys.residual, rcond=None)
        assert_allclose(sigma, ls, rtol=1e-6)


class TestSblIterations:

    def test_step_keeps_hyperparameters_positive(self):
        sys = _random_system(30, 6)
        est = SparseEstimate.initial(sys.residual, 6)
        nxt = sbl_step(sys, est, 1e-6, "standard")
        assert np.all(nxt.gamma > 0)
        assert nxt.epsilon >= 0
        assert nxt.noise_est > 0
        assert nxt.iterations == 1

    def test_printed_rule_holds_noise(self):
        # one row and large precisions make L - sum(gamma) negative
        sys = ImagingSystem(np.ones((1, 3), dtype=complex), np.array([0.5 + 0j]))
        est = SparseEstimate(sigma=np.zeros(3), gamma=np.full(3, 10.0), noise_est=0.2)
        nxt = sbl_step(sys, est, 1e-6, "printed")
        assert nxt.noise_held
        assert nxt.noise_est == 0.2

    def test_unknown_noise_rule(self):
        sys = _random_system(5, 2)
        with pytest.raises(ConfigError):
            sbl_step(sys, SparseEstimate.initial(sys.residual, 2), 1e-6, "other")

    def test_pixel_count_mismatch(self):
        sys = _random_system(5, 2)
        with pytest.raises(ShapeError):
            sbl_step(sys, SparseEstimate.initial(sys.residual, 3), 1e-6)

    def test_max_iters_validated(self):
        sys = _random_system(5, 2)
        with pytest.raises(ConfigError):
            run_sbl(sys, SparseEstimate.initial(sys.residual, 2), 0, 1e-4)

    def test_recovers_sparse_scene(self):
        rng = make_rng(6, 0, "matrix")
        g = (rng.standard_normal((64, 16)) + 1j * rng.standard_normal((64, 16))) / np.sqrt(2)
        truth = _sparse_truth(16, [2, 9, 13], seed=6)
        noise = 0.01 * (rng.standard_normal(64) + 1j * rng.standard_normal(64))
        sys = ImagingSystem(g, g @ truth.sigma + noise)
        est = run_sbl(sys, SparseEstimate.initial(sys.residual, 16), 200, 1e-6, noise_update="standard")
        assert nmse_db(est.sigma, truth.sigma) < -20.0
        top = set(np.argsort(-np.abs(est.sigma))[:3].tolist())
        assert top == {2, 9, 13}

    def test_noiseless_start_at_truth_stays(self):
        rng = make_rng(7, 0, "matrix")
        g = rng.standard_normal((40, 8)) + 1j * rng.standard_normal((40, 8))
        truth = _sparse_truth(8, [1, 5], seed=7)
        sys = ImagingSystem(g, g @ truth.sigma)
        init = SparseEstimate(sigma=truth.sigma, gamma=np.ones(8), noise_est=1e-6)
        est = run_sbl(sys, init, 50, 1e-8, noise_update="standard")
        assert nmse_db(est.sigma, truth.sigma) < -40.0

    def test_zero_residual_prunes_scene(self):
        rng = make_rng(11, 0, "matrix")
        g = rng.standard_normal((30, 6)) + 1j * rng.standard_normal((30, 6))
        sys = ImagingSystem(g, np.zeros(30))
        init = SparseEstimate(sigma=np.zeros(6), gamma=np.ones(6), noise_est=1.0)
        est = run_sbl(sys, init, 3, 1e-4)
        assert est.converged
        assert est.iterations <= 3
        assert_allclose(est.sigma, 0.0, atol=1e-12)

    def test_near_singular_matrix_stays_positive_definite(self):
        rng = make_rng(12, 0, "matrix")
        col = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        g = np.column_stack([col, col * (1 + 1e-9), rng.standard_normal(20) + 0j])
        sys = ImagingSystem(g, g @ np.array([1.0, 0.0, 0.5]) + 0.01 * rng.standard_normal(20))
        est = SparseEstimate.initial(sys.residual, 3)
        for _ in range(20):
            est = sbl_step(sys, est, 1e-6)
            w = g.conj().T @ g / est.noise_est + np.diag(est.gamma)
            assert_allclose(w, w.conj().T, atol=1e-9 * np.abs(w).max())
            assert np.all(np.linalg.eigvalsh(w) > 0)
            assert est.noise_est > 0
            assert np.all(np.isfinite(est.sigma))

    def test_default_rule_tracks_noise_variance(self, small_cfg):
        assert small_cfg.noise_update == "standard"
        cfg = small_cfg.replace(n_ris=16, n_pixels=8, frame_len=256, noise_var=0.4)
        sched = PhaseSchedule.random(cfg.replace(n_bit="continuous"), make_rng(13, 0, "schedule"))
        truth = _sparse_truth(cfg.n_pixels, [1, 6], seed=13)
        frame = SymbolFrame.random(cfg.frame_len, make_rng(13))
        y = synth_received(cfg, sched, frame, truth, 13)
        est = SBLImager(cfg, sched, y).update(frame)
        assert est.noise_est == pytest.approx(cfg.noise_var, rel=0.25)
        assert not est.noise_held


class TestNmse:

    def test_values(self):
        sigma = np.array([1 + 0j, 0, 0])
        assert nmse_db(sigma, sigma) == pytest.approx(-300.0)
        assert nmse_db(np.zeros(3), sigma) == pytest.approx(0.0)
        assert nmse_db(np.array([1.1 + 0j, 0, 0]), sigma) == pytest.approx(-20.0)

    def test_zero_reference(self):
        with pytest.raises(ValueError):
            nmse_db(np.ones(2), np.zeros(2))


class TestImagers:

    def test_sbl_imager_restarts_each_call(self, small_cfg, random_schedule, random_scene):
        sched = random_schedule(small_cfg)
        truth = random_scene(small_cfg.n_pixels)
        frame = SymbolFrame.random(small_cfg.frame_len, make_rng(8))
        y = synth_received(small_cfg, sched, frame, truth, 8)
        imager = SBLImager(small_cfg, sched, y)
        wrong = SymbolFrame(-frame.symbols)
        first = imager.update(frame)
        imager.update(wrong)
        again = imager.update(frame)
        assert imager.estimate is again
        assert again.iterations == first.iterations
        assert_array_equal(again.sigma, first.sigma)
        assert first.sigma.shape == (small_cfg.n_pixels,)

    def test_fixed_imager(self, random_scene):
        truth = random_scene(4)
        imager = FixedSigmaImager(truth)
        est = imager.update(SymbolFrame(QPSK_POINTS))
        assert_array_equal(est.sigma, truth.sigma)
        assert est.converged


class TestSceneIO:

    def test_grid(self):
        sigma = np.arange(9) * (1 - 1j)
        grid = scene_grid(sigma)
        assert grid.shape == (3, 3)
        assert grid[1, 2] == pytest.approx(5 * np.sqrt(2))
        with pytest.raises(ShapeError):
            scene_grid(np.ones(5))

    def test_csv_round_trip(self, tmp_path):
        sigma = np.array([0.5 - 1j, 0, 2 + 0.25j])
        gamma = np.array([1.0, 1e6, 0.3])
        path = save_scene_csv(sigma, tmp_path / "sigma.csv", gamma)
        loaded, loaded_gamma = load_scene_csv(path)
        assert_array_equal(loaded, sigma)
        assert_array_equal(loaded_gamma, gamma)

        save_scene_csv(sigma, tmp_path / "plain.csv")
        assert load_scene_csv(tmp_path / "plain.csv")[1] is None

    def test_grid_csv(self, tmp_path):
        path = save_scene_grid_csv(np.ones(4), tmp_path / "grid.csv")
        assert path.read_text().splitlines() == ["1.0,1.0", "1.0,1.0"]
