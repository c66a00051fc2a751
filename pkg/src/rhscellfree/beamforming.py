"""Hybrid beamforming: holographic phase design and MMSE digital combining.

Every BS points its RHS at the nearest UE by cancelling the feed and UE
propagation phases.  The CPU then combines the ``L`` BS outputs with the
MMSE vector built from the phase-error statistics (``xi``, ``Q``) and the
RF-chain quality factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .channel import (
    FAR,
    NEAR,
    feed_gain_vector,
    feed_path_lengths,
    ue_gain_vector,
    ue_path_lengths,
    wrap_phase,
)
from .geometry import local_positions, nearest_ue

CHANNEL_MODES = ("near", "far-synthetic", "far-mismatched")


class SingularMatrixError(np.linalg.LinAlgError):
    pass


def holographic_phases(geom, q, wavelength, mode=NEAR):
    """Configured RHS phases in ``[0, 2 pi)`` focusing on the UE at ``q``."""
    path = feed_path_lengths(geom) + ue_path_lengths(geom, q, mode)
    return np.mod(-wrap_phase(path, wavelength), 2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class EffectiveChannels:
    """Error-free aggregated channels of one realization.

    Attributes:
        h: ``(L, K)`` complex channels from UE k to the RF chain of BS l.
        q: ``(L, K)`` incoherent powers ``||nu_l^(k)||^2``.
        focus: ``(L,)`` index of the UE each BS is focused on.
    """

    h: np.ndarray
    q: np.ndarray
    focus: np.ndarray

    @property
    def num_bs(self):
        return self.h.shape[0]

    @property
    def num_ues(self):
        return self.h.shape[1]


@dataclass(frozen=True, eq=False)
class ElementTerms:
    """Per-element amplitudes and residual phases, shape ``(L, K, N)``."""

    amplitude: np.ndarray
    phase: np.ndarray

    def channels(self, errors=None):
        """Aggregated channels ``(..., L, K)``; ``errors`` has shape ``(..., L, N)``."""
        coef = self.amplitude * np.exp(1j * self.phase)
        if errors is None:
            return coef.sum(axis=-1)
        return np.einsum("...ln,lkn->...lk", np.exp(1j * errors), coef)


def _iter_bs_terms(network, ues, geom, wavelength, mode):
    if mode not in CHANNEL_MODES:
        raise ValueError(f"unknown channel mode {mode!r}")
    if network.num_bs == 0:
        return
    sqrt_feed = np.sqrt(feed_gain_vector(geom))
    feed_path = feed_path_lengths(geom)
    local = local_positions(network.centers, network.azimuths, network.height,
                            ues.positions)
    focus = nearest_ue(network, ues)
    for l in range(network.num_bs):
        q = local.q[l]
        f = focus[l]
        near_path = feed_path + ue_path_lengths(geom, q, NEAR)
        if mode == "near":
            design = near_path[f]
        else:
            design = feed_path + ue_path_lengths(geom, q[f], FAR)
        if mode == "far-synthetic":
            eval_path = feed_path + ue_path_lengths(geom, q, FAR)
            rng = np.linalg.norm(q, axis=-1)
            beta_c = np.where(q[:, 2] > 0,
                              geom.area * q[:, 2] / (4.0 * math.pi * rng**3), 0.0)
            amp = sqrt_feed[None, :] * np.sqrt(beta_c)[:, None]
        else:
            eval_path = near_path
            amp = sqrt_feed[None, :] * np.sqrt(ue_gain_vector(geom, q).beta)
        phase = wrap_phase(eval_path, wavelength) - wrap_phase(design, wavelength)
        yield l, amp, phase


def effective_channels(network, ues, geom, wavelength, mode="near"):
    """Design the holographic phases of every BS and aggregate the channels.

    ``mode`` selects how the far-field comparison is made: ``near`` uses the
    spherical model throughout; ``far-synthetic`` designs and evaluates with
    planar-wavefront phases and centre-element amplitudes;
    ``far-mismatched`` designs with planar phases but evaluates on the true
    near-field channel.
    """
    K = ues.num_ues
    L = network.num_bs
    h = np.zeros((L, K), dtype=complex)
    q = np.zeros((L, K))
    for l, amp, phase in _iter_bs_terms(network, ues, geom, wavelength, mode):
        h[l] = np.sum(amp * np.exp(1j * phase), axis=-1)
        q[l] = np.sum(amp * amp, axis=-1)
    return EffectiveChannels(h, q, nearest_ue(network, ues))


def element_terms(network, ues, geom, wavelength, mode="near"):
    """Per-element channel terms; memory grows as ``L * K * N``."""
    L, K, N = network.num_bs, ues.num_ues, geom.n
    amp = np.zeros((L, K, N))
    phase = np.zeros((L, K, N))
    for l, a, p in _iter_bs_terms(network, ues, geom, wavelength, mode):
        amp[l], phase[l] = a, p
    return ElementTerms(amp, phase)


def covariance(h, q, xi):
    """Correlation matrix ``xi^2 h h^H + (1 - xi^2) diag(q)`` of one UE."""
    h = np.asarray(h, dtype=complex)
    return xi * xi * np.outer(h, h.conj()) + (1.0 - xi * xi) * np.diag(q)


def _powers(rho, K):
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (K,))
    if np.any(rho < 0):
        raise ValueError("transmit powers must be nonnegative")
    return rho


def _ue_terms(h, q, xi, eps_v):
    """Per-UE pieces of ``eps_v C + (1 - eps_v) C o I``: coherent part and diagonal."""
    x2 = xi * xi
    diag = (1.0 - eps_v) * x2 * np.abs(h) ** 2 + (1.0 - x2) * q
    return eps_v * x2, diag


def mmse_matrix(H, Q, xi, hw, rho, noise):
    """``sum_k rho_k (eps_v C_k + (1 - eps_v) C_k o I) + noise I``."""
    L, K = H.shape
    rho = _powers(rho, K)
    coh, diag = _ue_terms(H, Q, xi, hw.eps_v)
    M = coh * (H * rho) @ H.conj().T
    M[np.diag_indices(L)] += diag @ rho + noise
    return M


def _cho_solve(M, rhs):
    """Solve ``M x = rhs`` for Hermitian PD ``M`` with diagonal equilibration."""
    d = np.real(np.diag(M)).copy()
    if np.any(d <= 0) or not np.all(np.isfinite(M)):
        raise SingularMatrixError("singular MMSE matrix")
    s = 1.0 / np.sqrt(d)
    Ms = M * s[:, None] * s[None, :]
    try:
        factor = linalg.cho_factor(Ms, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularMatrixError("singular MMSE matrix") from exc
    rhs = np.asarray(rhs)
    scale = s if rhs.ndim == 1 else s[:, None]
    return linalg.cho_solve(factor, rhs * scale, check_finite=False) * scale


def mmse_combiner(H, Q, xi, hw, rho, noise):
    """MMSE combining vectors, one column per UE, shape ``(L, K)``.

    ``b_k = rho_k eps_u eps_v M^{-1} h_k`` with ``M`` factored once for all
    UEs.  Vectors are left unnormalised.
    """
    L, K = H.shape
    rho = _powers(rho, K)
    if L == 0:
        return np.zeros((0, K), dtype=complex)
    M = mmse_matrix(H, Q, xi, hw, rho, noise)
    return _cho_solve(M, H) * (rho * hw.eps_u * hw.eps_v)


@dataclass(frozen=True)
class SinrReport:
    """Per-UE SINR and rate; breakdown powers are ``None`` when not computed.

    The breakdown terms (after the combiner) add up to the SINR
    denominator: ``pse`` is the desired signal leaking through the random
    part of the channel.
    """

    sinr: np.ndarray
    desired: np.ndarray | None = None
    inter_user: np.ndarray | None = None
    ue_hwi: np.ndarray | None = None
    bs_hwi: np.ndarray | None = None
    pse: np.ndarray | None = None
    noise: np.ndarray | None = None

    @property
    def rate(self):
        return np.log2(1.0 + self.sinr)

    @property
    def denominator(self):
        return self.inter_user + self.ue_hwi + self.bs_hwi + self.pse + self.noise


def sinr_general(B, H, Q, xi, hw, rho, noise):
    """SINR of every UE for arbitrary combiners ``B`` (columns per UE).

    Each interference term is assembled as a nonnegative quadratic form so
    that no large terms cancel.
    """
    H = np.asarray(H, dtype=complex)
    B = np.asarray(B, dtype=complex).reshape(H.shape)
    L, K = H.shape
    rho = _powers(rho, K)
    eu, ev, x2 = hw.eps_u, hw.eps_v, xi * xi
    if L == 0:
        zero = np.zeros(K)
        return SinrReport(zero, zero, zero, zero, zero, zero, zero)

    proj = np.abs(B.conj().T @ H) ** 2          # |b_k^H h_k'|^2, (K, K)
    b2 = np.abs(B) ** 2                        # (L, K)
    diag_c = x2 * np.abs(H) ** 2 + (1.0 - x2) * Q
    cq = b2.T @ Q                              # b_k^H Q_k' b_k
    cd = b2.T @ diag_c                         # b_k^H (C_k' o I) b_k
    cfull = x2 * proj + (1.0 - x2) * cq        # b_k^H C_k' b_k

    own = np.arange(K)
    desired = rho * eu * ev * x2 * proj[own, own]
    pse = rho * eu * ev * (1.0 - x2) * cq[own, own]
    ue_hwi = rho * (1.0 - eu) * ev * cfull[own, own]
    bs_hwi = rho * (1.0 - ev) * cd[own, own]
    per_pair = (ev * cfull + (1.0 - ev) * cd) * rho[None, :]
    per_pair[own, own] = 0.0
    inter = per_pair.sum(axis=1)
    noise_p = noise * b2.sum(axis=0)
    denom = inter + ue_hwi + bs_hwi + pse + noise_p
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = np.where(desired > 0, desired / denom, 0.0)
    return SinrReport(sinr, desired, inter, ue_hwi, bs_hwi, pse, noise_p)


def interference_matrix(H, Q, xi, hw, rho, noise, k):
    """Interference-plus-noise matrix of UE ``k`` built term by term."""
    L, K = H.shape
    rho = _powers(rho, K)
    eu, ev, x2 = hw.eps_u, hw.eps_v, xi * xi
    coh, diag = _ue_terms(H, Q, xi, ev)
    w = rho * coh
    w[k] = rho[k] * (1.0 - eu) * ev * x2
    M = (H * w) @ H.conj().T
    M[np.diag_indices(L)] += diag @ rho + noise
    return M


def sinr_mmse_closed_form(H, Q, xi, hw, rho, noise):
    """MMSE SINR ``c_k h_k^H (M - c_k h_k h_k^H)^{-1} h_k`` per UE.

    The bracket is assembled directly as interference plus noise, so the
    subtraction of the desired term never happens numerically.
    """
    H = np.asarray(H, dtype=complex)
    L, K = H.shape
    rho = _powers(rho, K)
    sinr = np.zeros(K)
    if L == 0:
        return SinrReport(sinr)
    c = rho * hw.eps_u * hw.eps_v * xi * xi
    for k in range(K):
        if c[k] == 0:
            continue
        Bk = interference_matrix(H, Q, xi, hw, rho, noise, k)
        x = _cho_solve(Bk, H[:, k])
        sinr[k] = c[k] * max(np.real(np.vdot(H[:, k], x)), 0.0)
    return SinrReport(sinr)


def sinr_single_ue_sum(h, q, xi, hw, rho, noise):
    """Scalar-sum SINR for one UE with diagonal interference.

    Equals the MMSE SINR exactly when ``K = 1`` and upper-bounds it
    otherwise (inter-user interference dropped).
    """
    h = np.asarray(h, dtype=complex)
    q = np.asarray(q, dtype=float)
    eu, ev, x2 = hw.eps_u, hw.eps_v, xi * xi
    g = np.abs(h) ** 2
    s = np.sum(g / (rho * (1.0 - ev) * x2 * g + rho * (1.0 - x2) * q + noise))
    return rho * eu * ev * x2 * s / (1.0 + rho * (1.0 - eu) * ev * x2 * s)
