"""Stochastic network layout and per-BS local coordinates.

BSs form a homogeneous PPP on a disk.  Each BS carries a vertical RHS panel
at height ``H`` whose horizontal axis points along a random azimuth in
``[0, pi)``.  In the panel frame, ``x`` runs horizontally along the panel,
``y`` vertically and ``z`` along the panel normal; UEs sit on the ground.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Region:
    """Disk of BS deployment centred at the origin."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("region radius must be positive")

    @property
    def area(self):
        return math.pi * self.radius**2


@dataclass(frozen=True)
class BsSite:
    center: tuple
    height: float
    azimuth: float


@dataclass(frozen=True, eq=False)
class NetworkRealization:
    """One PPP draw: BS ground positions, common height and panel azimuths."""

    centers: np.ndarray
    azimuths: np.ndarray
    height: float
    region: Region
    density: float

    def __post_init__(self):
        object.__setattr__(self, "centers",
                           _frozen(self.centers).reshape(-1, 2))
        object.__setattr__(self, "azimuths", _frozen(self.azimuths).ravel())
        if len(self.centers) != len(self.azimuths):
            raise ValueError("one azimuth per BS is required")
        if not self.height > 0:
            raise ValueError("BS height must be positive")

    @property
    def num_bs(self):
        return len(self.centers)

    @property
    def sites(self):
        return [BsSite(tuple(c), self.height, float(a))
                for c, a in zip(self.centers, self.azimuths)]


@dataclass(frozen=True, eq=False)
class UeLayout:
    positions: np.ndarray = field()

    def __post_init__(self):
        pos = _frozen(self.positions).reshape(-1, 2)
        if len(pos) < 1:
            raise ValueError("at least one UE is required")
        object.__setattr__(self, "positions", pos)

    @property
    def num_ues(self):
        return len(self.positions)


@dataclass(frozen=True)
class LocalUePosition:
    """UE position ``q`` in a BS panel frame (arrays broadcast over pairs)."""

    q: np.ndarray
    omega: np.ndarray

    @property
    def range(self):
        return np.linalg.norm(self.q, axis=-1)

    @property
    def sin_psi(self):
        return self.q[..., 2] / self.range


def sample_uniform_disk(radius, n, rng):
    """``n`` points uniform on the disk, drawn as (radius, angle) pairs."""
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def sample_ppp(region, density, rng, height=10.0):
    """Draw a homogeneous PPP of BSs on ``region``.

    Draw order is fixed (count, positions, azimuths) so that a seeded
    stream reproduces the same network.  A zero count yields an empty
    realization.
    """
    if not density > 0:
        raise ValueError("density must be positive")
    count = int(rng.poisson(density * region.area))
    centers = sample_uniform_disk(region.radius, count, rng)
    azimuths = math.pi * rng.random(count)
    return NetworkRealization(centers, azimuths, height, region, density)


def local_positions(centers, azimuths, height, ues):
    """Local panel-frame positions for every (BS, UE) pair.

    Args:
        centers: ``(L, 2)`` BS ground positions.
        azimuths: ``(L,)`` panel azimuths.
        height: BS height ``H``.
        ues: ``(K, 2)`` UE ground positions.

    Returns:
        LocalUePosition with ``q`` of shape ``(L, K, 3)``.  UEs behind a
        panel are folded into its front half-space (``z >= 0``), which
        leaves every element-to-UE distance unchanged.
    """
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    azimuths = np.asarray(azimuths, dtype=float).reshape(-1)
    ues = np.asarray(ues, dtype=float).reshape(-1, 2)
    c = ues[None, :, :] - centers[:, None, :]
    dist = np.hypot(c[..., 0], c[..., 1])
    rel = np.arctan2(c[..., 1], c[..., 0]) - azimuths[:, None]
    along = dist * np.cos(rel)
    normal = dist * np.abs(np.sin(rel))
    if np.any((dist == 0) & (height == 0)):
        raise ValueError("degenerate geometry: UE coincides with a panel")
    q = np.stack([along, np.full_like(dist, -height), normal], axis=-1)
    omega = np.arccos(np.clip(np.cos(rel), -1.0, 1.0))
    return LocalUePosition(q, omega)


def local_frame_position(site, ue):
    """Position of a single ground UE in the frame of ``site``."""
    lp = local_positions([site.center], [site.azimuth], site.height, [ue])
    return LocalUePosition(lp.q[0, 0], lp.omega[0, 0])


def bs_ue_distances(network, ues):
    """3-D distances ``(L, K)`` between BS panel centres and UEs."""
    c = ues.positions[None, :, :] - network.centers[:, None, :]
    return np.sqrt(np.sum(c * c, axis=-1) + network.height**2)


def nearest_ue(network, ues):
    """Index of the nearest UE for each BS; ties go to the lower index."""
    if network.num_bs == 0:
        return np.zeros(0, dtype=int)
    # ranking by ground distance avoids the height swamping small offsets
    c = ues.positions[None, :, :] - network.centers[:, None, :]
    return np.argmin(np.sum(c * c, axis=-1), axis=1)


def serving_sets(network, ues):
    """Partition of the BSs by the UE each one focuses on.

    Returns a list with one sorted index array per UE; a UE nobody is
    nearest to gets an empty array.
    """
    focus = nearest_ue(network, ues)
    return [np.flatnonzero(focus == k) for k in range(ues.num_ues)]
