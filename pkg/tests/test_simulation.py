import numpy as np
import pytest

from rhscellfree.beamforming import sinr_mmse_closed_form, sinr_single_ue_sum
from rhscellfree.config import ExperimentConfig
from rhscellfree.simulation import (
    draw_realization,
    ergodic_rate,
    evaluate_rates,
    run_trial,
    sweep,
    trial_channels,
    validate_covariance,
    validate_symbol_level,
)

SMALL = ExperimentConfig(nx=8, ny=8, trials=8, seed=7)


def test_trial_is_deterministic():
    a = run_trial(SMALL.replace(num_ues=3), 5)
    b = run_trial(SMALL.replace(num_ues=3), 5)
    assert a.tobytes() == b.tobytes()


def test_trials_differ():
    assert not np.array_equal(run_trial(SMALL, 0), run_trial(SMALL, 1))


def test_single_ue_at_centre():
    _, ues = draw_realization(SMALL, 3)
    assert np.array_equal(ues.positions, [[0.0, 0.0]])


def test_phase_error_lowers_rate():
    cfg = SMALL.replace(num_ues=2)
    noisy = cfg.replace(phase_error="uniform", phase_error_power=0.2)
    for t in range(4):
        assert np.sum(run_trial(noisy, t)) < np.sum(run_trial(cfg, t))


def test_single_ue_matches_explicit_sum():
    cfg = SMALL.replace(epsilon_u=0.97, epsilon_v=0.95, phase_error="von_mises",
                        phase_error_power=0.2)
    for t in range(5):
        ch = trial_channels(cfg, t)
        closed = sinr_mmse_closed_form(ch.h, ch.q, cfg.xi, cfg.hardware, cfg.power, cfg.noise).sinr[0]
        explicit = sinr_single_ue_sum(ch.h[:, 0], ch.q[:, 0], cfg.xi, cfg.hardware, cfg.power, cfg.noise)
        assert closed == pytest.approx(explicit, rel=1e-10)


def test_empty_network_gives_zero_rate():
    cfg = SMALL.replace(density=1e-9, num_ues=3)
    assert np.array_equal(run_trial(cfg, 0), np.zeros(3))


def test_naive_combiner_not_better():
    cfg = SMALL.replace(num_ues=3, epsilon_v=0.9, phase_error="uniform", phase_error_power=0.5)
    for t in range(3):
        ch = trial_channels(cfg, t)
        aware = evaluate_rates(ch, cfg)
        naive = evaluate_rates(ch, cfg.replace(combiner="naive"))
        assert np.all(naive <= aware * (1 + 1e-10))


def test_parallelism_does_not_change_results():
    cfg = SMALL.replace(num_ues=2)
    a = sweep(cfg, "power", [0.0, 20.0], jobs=1)
    b = sweep(cfg, "power", [0.0, 20.0], jobs=4)
    assert a == b


def test_power_sweep_monotone_and_below_bound():
    res = sweep(SMALL.replace(trials=30), "power", [-10.0, 0.0, 10.0, 20.0, 30.0])
    assert np.all(np.diff(res.mean_rates) >= 0)
    for p in res.points:
        assert p.mean_rate <= p.sum_rate_bound + 3 * p.stderr
        assert p.trials == 30


def test_other_axes():
    res = sweep(SMALL.replace(trials=3), "elements", [4, 8])
    assert res.values.tolist() == [4, 8]
    assert res.mean_rates[1] > res.mean_rates[0]
    res = sweep(SMALL.replace(trials=3), "density", [5e-4, 2e-3])
    assert res.points[0].sum_rate_bound < res.points[1].sum_rate_bound


def test_unknown_axis():
    with pytest.raises(ValueError):
        sweep(SMALL, "height", [1.0])


def test_ergodic_rate_summary():
    p = ergodic_rate(SMALL.replace(trials=5))
    sums = [np.sum(run_trial(SMALL.replace(trials=5), t)) for t in range(5)]
    assert p.mean_rate == pytest.approx(np.mean(sums), rel=1e-15)
    assert p.stderr == pytest.approx(np.std(sums, ddof=1) / np.sqrt(5), rel=1e-12)


def test_covariance_without_phase_error_is_exact():
    chk = validate_covariance(SMALL.replace(num_ues=2), 100)
    assert chk.max_deviation < 1e-12


@pytest.mark.parametrize("kind,power", [("uniform", 1.0), ("von_mises", 0.1)])
def test_covariance_matches_closed_form(kind, power):
    cfg = SMALL.replace(num_ues=2, phase_error=kind, phase_error_power=power)
    chk = validate_covariance(cfg, 100_000)
    assert chk.empirical.shape == (4, 4)
    assert chk.max_deviation < 0.02


def test_symbol_level_ideal_single_ue():
    cfg = SMALL.replace(power=1e-4, noise=1e-12)
    rep = validate_symbol_level(cfg, 20_000)
    ch = trial_channels(cfg, 0)
    expected = cfg.power * np.sum(np.abs(ch.h) ** 2) / cfg.noise
    assert rep.predicted_sinr[0] == pytest.approx(expected, rel=1e-10)
    assert abs(rep.empirical_sinr[0] - expected) < 4 * rep.stderr[0]


def test_symbol_level_ue_distortion_ratio():
    cfg = SMALL.replace(epsilon_u=0.99)
    rep = validate_symbol_level(cfg, 20_000)
    assert rep.predicted_terms["ue_hwi"][0] / rep.desired[0] == pytest.approx(0.01 / 0.99, rel=1e-9)
    assert abs(rep.terms["ue_hwi"][0] - rep.predicted_terms["ue_hwi"][0]) < 4 * rep.term_stderr["ue_hwi"][0]


def test_symbol_level_inter_user_term():
    cfg = SMALL.replace(num_ues=2, epsilon_v=0.98, phase_error="uniform", phase_error_power=0.2)
    rep = validate_symbol_level(cfg, 40_000)
    for name in ("inter_user", "bs_hwi", "pse", "noise"):
        gap = np.abs(rep.terms[name] - rep.predicted_terms[name])
        assert np.all(gap < 4 * rep.term_stderr[name] + 1e-12 * rep.predicted_terms[name])
