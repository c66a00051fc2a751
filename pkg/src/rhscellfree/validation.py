"""Self-checks run by ``rhscellfree validate``.

Each check compares a closed-form quantity with an independent evaluation
(sampling, a second algebraic route or a symbol-level simulation) and
reports the observed discrepancy next to its tolerance.  All randomness
comes from ``SeedSequence([seed, 0, stream])`` so a report is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import (
    _cho_solve,
    mmse_combiner,
    sinr_general,
    sinr_mmse_closed_form,
    sinr_single_ue_sum,
)
from .impairments import HardwareQuality, PhaseErrorModel, sample_errors, xi
from .simulation import trial_rng, validate_covariance, validate_symbol_level

REFERENCE_MODELS = (
    PhaseErrorModel.from_power("uniform", 0.1),
    PhaseErrorModel.from_power("uniform", 1.0),
    PhaseErrorModel.von_mises(1.0),
    PhaseErrorModel.von_mises(10.0),
)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = np.maximum(np.abs(b), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b) / scale))


def _model_label(m):
    return f"{m.kind}({m.param:g})"


def check_mean_resultant(model, draws, rng):
    theta = sample_errors(model, draws, rng)
    emp = abs(np.mean(np.exp(1j * theta)))
    return Check(f"mean_resultant[{_model_label(model)}]", abs(emp - xi(model)), 3e-3)


def random_instance(rng, max_bs=16, max_ues=4):
    """Random channels, powers and impairments for the SINR identities."""
    L = int(rng.integers(1, max_bs + 1))
    K = int(rng.integers(1, max_ues + 1))
    scale = 10.0 ** rng.uniform(-6, -3, size=(L, 1))
    H = scale * (rng.standard_normal((L, K)) + 1j * rng.standard_normal((L, K)))
    Q = np.abs(H) ** 2 * rng.uniform(0.5, 4.0, size=(L, K))
    hw = HardwareQuality(rng.uniform(0.8, 1.0), rng.uniform(0.8, 1.0))
    return dict(H=H, Q=Q, xi=rng.uniform(0.3, 1.0), hw=hw,
                rho=10.0 ** rng.uniform(0, 3, size=K), noise=1e-12)


def check_combiner_identity(rng, instances=100):
    worst = 0.0
    for _ in range(instances):
        p = random_instance(rng)
        args = (p["H"], p["Q"], p["xi"], p["hw"], p["rho"], p["noise"])
        B = mmse_combiner(*args)
        worst = max(worst, _rel(sinr_general(B, *args).sinr,
                                sinr_mmse_closed_form(*args).sinr))
    return Check("mmse_sinr_closed_form", worst, 1e-10)


def check_single_ue_sum(rng, instances=100):
    worst = 0.0
    for _ in range(instances):
        p = random_instance(rng, max_ues=1)
        args = (p["H"], p["Q"], p["xi"], p["hw"], p["rho"], p["noise"])
        closed = sinr_mmse_closed_form(*args).sinr[0]
        explicit = sinr_single_ue_sum(p["H"][:, 0], p["Q"][:, 0], p["xi"], p["hw"],
                                      p["rho"][0], p["noise"])
        worst = max(worst, _rel(explicit, closed))
    return Check("single_ue_explicit_sum", worst, 1e-10)


def check_rank_one_update(rng, instances=100):
    """``c h^H (M - c h h^H)^-1 h = c a / (1 - c a)`` with ``a = h^H M^-1 h``."""
    worst = 0.0
    for _ in range(instances):
        L = int(rng.integers(1, 17))
        G = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
        Bm = G @ G.conj().T + L * np.eye(L)
        h = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        c = rng.uniform(0.1, 10.0)
        M = Bm + c * np.outer(h, h.conj())
        direct = c * np.real(np.vdot(h, _cho_solve(Bm, h)))
        a = np.real(np.vdot(h, _cho_solve(M, h)))
        worst = max(worst, _rel(c * a / (1.0 - c * a), direct))
    return Check("rank_one_update", worst, 1e-10)


def validation_config(config):
    """Small-surface variant of ``config`` used by the sampling checks."""
    changes = dict(nx=8, ny=8)
    if config.phase_error == "none":
        changes.update(phase_error="uniform", phase_error_power=1.0)
    if config.num_ues == 1:
        changes.update(num_ues=2)
    return config.replace(**changes)


def run_validation(config, xi_draws=1_000_000, cov_draws=100_000, symbols=20_000):
    """All checks for ``config``; returns a list of :class:`Check`."""
    seed = config.seed
    checks = []
    models = list(REFERENCE_MODELS)
    if config.phase_model.kind != "none" and config.phase_model not in models:
        models.append(config.phase_model)
    for i, m in enumerate(models):
        checks.append(check_mean_resultant(m, xi_draws, trial_rng(seed, 0, 10 + i)))

    small = validation_config(config)
    cov = validate_covariance(small, cov_draws)
    checks.append(Check("covariance", cov.max_deviation, 0.02))

    checks.append(check_combiner_identity(trial_rng(seed, 0, 30)))
    checks.append(check_single_ue_sum(trial_rng(seed, 0, 31)))
    checks.append(check_rank_one_update(trial_rng(seed, 0, 32)))

    rep = validate_symbol_level(small, symbols)
    z = np.abs(rep.empirical_sinr - rep.predicted_sinr) / rep.stderr
    checks.append(Check("symbol_level_sinr_zscore", float(np.max(z)), 5.0))
    return checks


def format_report(checks):
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"{status} {c.name}: {c.value:.3e} (tol {c.tolerance:.1e})")
    return "\n".join(lines)


__all__ = ["Check", "run_validation", "format_report", "validation_config",
           "REFERENCE_MODELS"]
