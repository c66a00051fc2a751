"""Monte Carlo estimation of the ergodic sum-rate.

Each trial draws a PPP network and UE layout from its own random substream
``SeedSequence([seed, trial_index])``, designs the holographic phases and
evaluates the MMSE SINR from the phase-error and hardware statistics.  The
symbol-level and covariance checks redraw the phase errors explicitly.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    BoundInputs,
    BoundReport,
    beta_o_vector,
    bound_high_power,
    bound_infinite_surface,
    bound_special_cases,
    sum_rate_bound,
    epsilon_integral,
    zeta,
)
from .beamforming import (
    covariance,
    effective_channels,
    element_terms,
    mmse_combiner,
    sinr_general,
    sinr_mmse_closed_form,
)
from .channel import feed_gain_vector
from .config import db_to_linear
from .geometry import (
    NetworkRealization,
    UeLayout,
    sample_ppp,
    sample_uniform_disk,
)
from .impairments import HardwareQuality, sample_errors

log = logging.getLogger(__name__)

AXES = ("power", "density", "elements", "wavelength")


def trial_rng(seed, trial_index, stream=0):
    return np.random.default_rng(np.random.SeedSequence([seed, trial_index, stream]))


def draw_realization(config, trial_index):
    """Network and UEs of one trial.

    A single UE sits at the centre of the disk; several UEs are placed
    uniformly at random after the BSs have been drawn.
    """
    rng = trial_rng(config.seed, trial_index)
    network = sample_ppp(config.region, config.density, rng, config.height)
    if config.num_ues == 1:
        ues = UeLayout(np.zeros((1, 2)))
    else:
        ues = UeLayout(sample_uniform_disk(config.radius, config.num_ues, rng))
    return network, ues


def trial_channels(config, trial_index):
    network, ues = draw_realization(config, trial_index)
    return effective_channels(network, ues, config.geometry, config.wavelength,
                              config.channel_mode)


def evaluate_rates(channels, config, power=None):
    """Per-UE rates of a realization; an empty network gives zero rates."""
    rho = config.power if power is None else power
    if channels.num_bs == 0:
        return np.zeros(channels.num_ues)
    H, Q = channels.h, channels.q
    xi, hw = config.xi, config.hardware
    if config.combiner == "aware":
        report = sinr_mmse_closed_form(H, Q, xi, hw, rho, config.noise)
    else:
        # combiner designed as if the RHS and BS hardware were ideal
        naive = HardwareQuality(config.epsilon_u, 1.0)
        B = mmse_combiner(H, Q, 1.0, naive, rho, config.noise)
        report = sinr_general(B, H, Q, xi, hw, rho, config.noise)
    return report.rate


def run_trial(config, trial_index):
    """Per-UE rates ``log2(1 + sinr_k)`` of one trial."""
    return evaluate_rates(trial_channels(config, trial_index), config)


def _map(fn, items, jobs):
    if jobs is None or jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def bound_inputs(config, power=None):
    geom = config.geometry
    return BoundInputs(
        feed_gains=feed_gain_vector(geom),
        beta_o=beta_o_vector(geom, config.region, config.height),
        density=config.density,
        area=config.region.area,
        num_ues=config.num_ues,
        power=config.power if power is None else power,
        eps_u=config.epsilon_u,
        eps_v=config.epsilon_v,
        xi=config.xi,
        noise=config.noise,
    )


def bound_report(config):
    b = bound_inputs(config)
    return BoundReport(
        finite_surface=sum_rate_bound(b),
        high_power=bound_high_power(b),
        special=bound_special_cases(b),
        infinite_surface=bound_infinite_surface(
            b, config.d0, config.alpha, config.geometry.area, config.height,
            config.radius),
        zeta=zeta(config.geometry.area, config.radius, config.height),
        epsilon=epsilon_integral(config.geometry.area, config.d0, config.alpha),
    )


@dataclass(frozen=True)
class SweepPoint:
    axis_value: float
    mean_rate: float
    stderr: float
    trials: int
    sum_rate_bound: float
    bound_limit: float


@dataclass(frozen=True)
class SweepResult:
    axis: str
    points: list = field(default_factory=list)

    @property
    def values(self):
        return np.array([p.axis_value for p in self.points])

    @property
    def mean_rates(self):
        return np.array([p.mean_rate for p in self.points])

    @property
    def stderrs(self):
        return np.array([p.stderr for p in self.points])


def _summarise(axis_value, sums, config, power=None):
    sums = np.asarray(sums, dtype=float)
    n = len(sums)
    mean = float(np.mean(sums))
    stderr = float(np.std(sums, ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    b = bound_inputs(config, power)
    return SweepPoint(axis_value, mean, stderr, n, sum_rate_bound(b),
                      bound_high_power(b))


def ergodic_rate(config, jobs=1, axis_value=None):
    """Mean sum-rate over ``config.trials`` trials with its standard error."""
    sums = _map(lambda t: float(np.sum(run_trial(config, t))),
                range(config.trials), jobs)
    return _summarise(axis_value, sums, config)


def _config_for(config, axis, value):
    if axis == "density":
        return config.replace(density=float(value))
    if axis == "elements":
        return config.replace(nx=int(value), ny=int(value))
    if axis == "wavelength":
        return config.replace(wavelength=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}")


def sweep(config, axis, values, jobs=1):
    """One ergodic-rate point per axis value with common random numbers.

    Power values are in dB; ``elements`` values are the side of a square
    grid.  For the power axis every trial's channels are built once and
    reused across all powers.
    """
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    if axis != "power":
        points = []
        for v in values:
            log.info("sweep %s=%g", axis, v)
            points.append(ergodic_rate(_config_for(config, axis, v), jobs, v))
        return SweepResult(axis, points)

    powers = [db_to_linear(v) for v in values]

    def one(t):
        ch = trial_channels(config, t)
        return [float(np.sum(evaluate_rates(ch, config, p))) for p in powers]

    table = np.array(_map(one, range(config.trials), jobs)).reshape(-1, len(values))
    points = [_summarise(v, table[:, i], config, p)
              for i, (v, p) in enumerate(zip(values, powers))]
    return SweepResult(axis, points)


# -- statistical validation paths -------------------------------------------


def _nearest_subnetwork(network, ue, count):
    d = np.linalg.norm(network.centers - ue, axis=1)
    keep = np.sort(np.argsort(d, kind="stable")[:count])
    return NetworkRealization(network.centers[keep], network.azimuths[keep],
                              network.height, network.region, network.density)


@dataclass(frozen=True)
class CovarianceCheck:
    max_deviation: float
    empirical: np.ndarray
    predicted: np.ndarray
    draws: int


def validate_covariance(config, draws, trial_index=0, max_bs=4, ue=0,
                        chunk=2000):
    """Compare ``E[h h^H]`` under redrawn phase errors with its closed form.

    Uses the ``max_bs`` BSs nearest to UE ``ue`` in one realization.  The
    deviation is the largest entrywise error relative to the largest
    diagonal entry of the predicted matrix.
    """
    network, ues = draw_realization(config, trial_index)
    if network.num_bs == 0:
        raise ValueError("realization has no BS")
    sub = _nearest_subnetwork(network, ues.positions[ue], max_bs)
    terms = element_terms(sub, ues, config.geometry, config.wavelength,
                          config.channel_mode)
    coef = terms.amplitude[:, ue, :] * np.exp(1j * terms.phase[:, ue, :])
    L, N = coef.shape
    model = config.phase_model
    rng = trial_rng(config.seed, trial_index, stream=1)
    acc = np.zeros((L, L), dtype=complex)
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        err = sample_errors(model, m * L * N, rng).reshape(m, L, N)
        h = np.einsum("mln,ln->ml", np.exp(1j * err), coef)
        acc += h.T @ h.conj()
        done += m
    emp = acc / draws
    h0 = coef.sum(axis=-1)
    q0 = np.sum(np.abs(coef) ** 2, axis=-1)
    pred = covariance(h0, q0, config.xi)
    dev = float(np.max(np.abs(emp - pred)) / np.max(np.real(np.diag(pred))))
    return CovarianceCheck(dev, emp, pred, draws)


@dataclass(frozen=True)
class SymbolLevelReport:
    """Empirical vs predicted SINR per UE from a symbol-by-symbol simulation.

    ``terms`` and ``predicted_terms`` map each distortion name to its power
    after combining.
    """

    empirical_sinr: np.ndarray
    predicted_sinr: np.ndarray
    stderr: np.ndarray
    terms: dict
    term_stderr: dict
    predicted_terms: dict
    desired: np.ndarray
    symbols: int


def _cn(rng, shape, var=1.0):
    return np.sqrt(var / 2.0) * (rng.standard_normal(shape)
                                 + 1j * rng.standard_normal(shape))


def validate_symbol_level(config, symbols, trial_index=0, combiner=None,
                          chunk=500):
    """Simulate the received signal symbol by symbol and measure the SINR.

    Every symbol gets fresh data, UE/BS distortions, noise and RHS phase
    errors.  The desired part is the signal through the mean channel
    ``xi * h``; everything else counts as interference plus noise.
    """
    network, ues = draw_realization(config, trial_index)
    if network.num_bs == 0:
        raise ValueError("realization has no BS")
    terms = element_terms(network, ues, config.geometry, config.wavelength,
                          config.channel_mode)
    H = terms.channels()
    Q = np.sum(terms.amplitude**2, axis=-1)
    L, K, N = terms.amplitude.shape
    xi, hw, s2 = config.xi, config.hardware, config.noise
    rho = np.broadcast_to(np.asarray(config.power, dtype=float), (K,))
    B = mmse_combiner(H, Q, xi, hw, rho, s2) if combiner is None else combiner
    predicted = sinr_general(B, H, Q, xi, hw, rho, s2)

    a_sig = np.sqrt(rho * hw.eps_u * hw.eps_v)
    a_ue = np.sqrt(rho * (1.0 - hw.eps_u) * hw.eps_v)
    a_bs = np.sqrt(rho * (1.0 - hw.eps_v))
    mean_proj = B.conj().T @ (xi * H)           # (K, K): b_k^H hbar_k'

    names = ("inter_user", "ue_hwi", "bs_hwi", "pse", "noise")
    sums = {n: np.zeros(K) for n in names}
    sq = {n: np.zeros(K) for n in names}
    rest_sum = np.zeros(K)
    rest_sq = np.zeros(K)
    rng = trial_rng(config.seed, trial_index, stream=2)
    model = config.phase_model
    done = 0
    while done < symbols:
        m = min(chunk, symbols - done)
        err = sample_errors(model, m * L * N, rng).reshape(m, L, N)
        h = terms.channels(err)                      # (m, L, K)
        s = np.exp(2j * np.pi * rng.random((m, K)))
        u = _cn(rng, (m, K))
        v = _cn(rng, (m, L, K))
        w = _cn(rng, (m, L), s2)
        sig = h * (a_sig * s)[:, None, :]
        ue_d = h * (a_ue * u)[:, None, :]
        bs_d = h * v * a_bs
        y = (sig + ue_d + bs_d).sum(axis=-1) + w     # (m, L)
        z = y @ B.conj()                             # (m, K): b_k^H y
        desired = a_sig * np.diagonal(mean_proj) * s
        rest = z - desired

        proj_sig = np.einsum("lk,mlk->mk", B.conj(), sig)
        comp = {
            "pse": proj_sig - desired,
            "ue_hwi": np.einsum("lk,mlk->mk", B.conj(), ue_d),
            "bs_hwi": np.einsum("lk,mlk->mk", B.conj(), bs_d),
            "noise": w @ B.conj(),
        }
        comp["inter_user"] = rest - sum(comp.values())
        for n in names:
            p = np.abs(comp[n]) ** 2
            sums[n] += p.sum(axis=0)
            sq[n] += (p * p).sum(axis=0)
        p = np.abs(rest) ** 2
        rest_sum += p.sum(axis=0)
        rest_sq += (p * p).sum(axis=0)
        done += m

    n = float(symbols)
    desired_power = np.abs(a_sig * np.diagonal(mean_proj)) ** 2
    rest_mean = rest_sum / n
    rest_var = rest_sq / n - rest_mean**2
    emp = desired_power / rest_mean
    stderr = emp * np.sqrt(np.maximum(rest_var, 0.0) / n) / rest_mean
    means = {k: sums[k] / n for k in names}
    errs = {k: np.sqrt(np.maximum(sq[k] / n - means[k] ** 2, 0.0) / n) for k in names}
    pred_terms = {k: getattr(predicted, k) for k in names}
    return SymbolLevelReport(emp, predicted.sinr, stderr, means, errs,
                             pred_terms, desired_power, symbols)
