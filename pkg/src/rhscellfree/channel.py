"""Near-field RHS channel: feed link, UE link and aggregated scalar channel.

All positions are in the local panel frame of one BS: elements lie in the
``z = 0`` plane on a centred uniform grid and the RF feed sits on the
normal at ``(0, 0, -d0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import QuadratureError, quad_boxes

NEAR = "near"
FAR = "far"
FEED_CHUNK = 8192  # elements per quadrature batch; bounds peak memory


@dataclass(frozen=True)
class RhsGeometry:
    """Uniform rectangular RHS with an on-axis feed.

    Attributes:
        nx, ny: element counts along the horizontal and vertical axes.
        dx, dy: element pitch in metres (elements tile the aperture).
        d0: feed-to-surface distance in metres.
        alpha: feed gain exponent; the RF chain gain is ``2 (alpha + 1)``.
    """

    nx: int = 64
    ny: int = 64
    dx: float = 5e-3
    dy: float = 5e-3
    d0: float = 0.2
    alpha: float = 4.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("element counts must be positive")
        if self.dx <= 0 or self.dy <= 0 or self.d0 <= 0:
            raise ValueError("pitch and feed distance must be positive")

    @property
    def n(self):
        return self.nx * self.ny

    @property
    def area(self):
        return self.dx * self.dy

    @property
    def feed_position(self):
        return np.array([0.0, 0.0, -self.d0])

    @property
    def centers(self):
        """``(N, 3)`` element centres, x varying fastest."""
        return _centers(self.nx, self.ny, self.dx, self.dy)


@lru_cache(maxsize=32)
def _centers(nx, ny, dx, dy):
    x = (np.arange(nx) - 0.5 * (nx - 1)) * dx
    y = (np.arange(ny) - 0.5 * (ny - 1)) * dy
    xx, yy = np.meshgrid(x, y)
    p = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(nx * ny)])
    p.setflags(write=False)
    return p


def feed_density(x, y, d0, alpha):
    """Radiated power density of the feed on the surface plane."""
    return ((alpha + 1.0) * d0 ** (alpha + 1.0)
            / (2.0 * math.pi * (d0 * d0 + x * x + y * y) ** ((alpha + 3.0) / 2.0)))


def feed_gain_vector(geom, rtol=1e-10):
    """Power gains ``varsigma_n`` of the feed-to-element links.

    Each gain integrates the feed density over its element.  The result is
    cached per geometry and returned read-only.
    """
    if geom.alpha <= 1:
        raise ValueError("feed gain exponent alpha must exceed 1")
    return _feed_gains(geom, rtol)


@lru_cache(maxsize=16)
def _feed_gains(geom, rtol):
    p = geom.centers
    half = np.array([0.5 * geom.dx, 0.5 * geom.dy])
    lower = p[:, :2] - half
    upper = p[:, :2] + half

    def integrand(pts, _owner):
        return feed_density(pts[:, 0], pts[:, 1], geom.d0, geom.alpha)

    gains = np.empty(geom.n)
    for start in range(0, geom.n, FEED_CHUNK):
        sl = slice(start, min(start + FEED_CHUNK, geom.n))
        try:
            gains[sl] = quad_boxes(integrand, lower[sl], upper[sl], rtol=rtol).values
        except QuadratureError as exc:
            index = start + exc.index
            raise QuadratureError(f"feed gain quadrature failed at element {index}",
                                  exc.estimate, exc.error, index) from exc
    gains.setflags(write=False)
    return gains


@dataclass(frozen=True)
class LinkGains:
    """UE-to-element power gains ``beta`` (last axis runs over elements).

    ``grazing`` marks UE positions in the panel plane, whose gains are zero.
    """

    beta: np.ndarray
    grazing: np.ndarray


def _as_q(q):
    q = getattr(q, "q", q)
    return np.asarray(q, dtype=float)


def ue_gain_vector(geom, q, mode="approx", rtol=1e-10):
    """Power gains from a UE at local position ``q`` to every element.

    ``mode="approx"`` uses the small-element form
    ``A * |q| sin(psi) / (4 pi |q - p_n|^3)``; ``mode="exact"`` integrates
    the point gain over each element and is meant for validation.
    ``q`` may carry leading batch axes.
    """
    q = _as_q(q)
    if np.any(np.linalg.norm(q, axis=-1) == 0):
        raise ValueError("degenerate geometry: zero UE range")
    normal = q[..., 2]
    grazing = normal <= 0.0
    if mode == "approx":
        diff = q[..., None, :] - geom.centers
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        beta = geom.area * normal[..., None] / (4.0 * math.pi * dist**3)
    elif mode == "exact":
        flat = q.reshape(-1, 3)
        beta = np.stack([_exact_gains(geom, qi, rtol) for qi in flat])
        beta = beta.reshape(q.shape[:-1] + (geom.n,))
    else:
        raise ValueError(f"unknown gain mode {mode!r}")
    beta = np.where(grazing[..., None], 0.0, beta)
    return LinkGains(beta, grazing)


def _exact_gains(geom, q, rtol):
    if q[2] <= 0:
        return np.zeros(geom.n)
    p = geom.centers
    half = np.array([0.5 * geom.dx, 0.5 * geom.dy])

    def integrand(pts, _owner):
        dx = q[0] - pts[:, 0]
        dy = q[1] - pts[:, 1]
        r2 = dx * dx + dy * dy + q[2] * q[2]
        return q[2] / (4.0 * math.pi * r2**1.5)

    return quad_boxes(integrand, p[:, :2] - half, p[:, :2] + half, rtol=rtol).values


def wrap_phase(path_length, wavelength):
    """Phase ``-2 pi path / lambda`` reduced to ``[-pi, pi)``.

    The reduction happens on the cycle count so that long paths keep their
    sub-wavelength part exactly.
    """
    cycles = np.asarray(path_length, dtype=float) / wavelength
    frac = cycles - np.ceil(cycles - 0.5)
    return -2.0 * math.pi * frac


def ue_path_lengths(geom, q, mode=NEAR):
    """Distances from the UE to every element, or their planar approximation."""
    q = _as_q(q)
    p = geom.centers
    if mode == NEAR:
        diff = q[..., None, :] - p
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if mode == FAR:
        rng = np.linalg.norm(q, axis=-1)
        unit = q / rng[..., None]
        return rng[..., None] - unit @ p.T
    raise ValueError(f"unknown propagation mode {mode!r}")


def feed_path_lengths(geom):
    return np.linalg.norm(geom.centers - geom.feed_position, axis=-1)


def propagation_phases(geom, q, wavelength, mode=NEAR):
    """Total feed + UE propagation phase per element, wrapped to ``[-pi, pi)``.

    In ``far`` mode only the UE leg is linearised; the feed is always in the
    near field of the surface.
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    path = feed_path_lengths(geom) + ue_path_lengths(geom, q, mode)
    return wrap_phase(path, wavelength)


def aggregate_channel(amplitude, prop_phase, config_phase, error_phase=0.0):
    """Aggregated scalar channel ``sum_n a_n exp(j(theta_n + err_n + phi_n))``.

    The element axis is the last one; other axes broadcast.
    """
    amplitude = np.asarray(amplitude, dtype=float)
    prop_phase = np.asarray(prop_phase, dtype=float)
    config_phase = np.asarray(config_phase, dtype=float)
    n = amplitude.shape[-1]
    for arr in (prop_phase, config_phase, np.asarray(error_phase)):
        if arr.ndim and arr.shape[-1] != n:
            raise ValueError("phase vectors must match the element count")
    total = config_phase + error_phase + prop_phase
    return np.sum(amplitude * np.exp(1j * total), axis=-1)
