"""Closed-form ergodic sum-rate upper bounds.

Everything here is deterministic: the bound formulas for a finite RHS, their
high-power and ideal-hardware special cases, and the infinite-aperture
envelope together with the integrals (``beta_o``, ``zeta``, ``epsilon``)
they need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import QuadratureError, quad_boxes, quad_nd

EPSILON_TRUNCATION = 50.0  # in units of d0


def _beta_o_integrand(area):
    def f(points, owner, x, y, height):
        r, w = points[:, 0], points[:, 1]
        xn = x[owner]
        vy = height + y[owner]
        d2 = r * r + 2.0 * r * xn * np.cos(w) + xn * xn + vy * vy
        return area * r * r * np.sin(w) / (2.0 * math.pi * d2**1.5)
    return f


def beta_o_vector(geom, region, height, rtol=1e-8):
    """Orientation- and position-integrated UE gains, one per element.

    The integrand depends on the BS offset only through its length, so the
    disk integral reduces to ``2 pi r dr`` and each element costs a 2-D
    ``(r, omega)`` quadrature.  Cached per (geometry, radius, height).
    """
    if not height > 0:
        raise ValueError("BS height must be positive")
    return _beta_o(geom, float(region.radius), float(height), rtol)


@lru_cache(maxsize=16)
def _beta_o(geom, radius, height, rtol):
    p = geom.centers
    x, y = p[:, 0], p[:, 1]
    base = _beta_o_integrand(geom.area)

    def integrand(points, owner):
        return base(points, owner, x, y, height)

    lower = np.zeros((geom.n, 2))
    upper = np.tile([radius, math.pi], (geom.n, 1))
    out = np.empty(geom.n)
    chunk = 2048
    for start in range(0, geom.n, chunk):
        sl = slice(start, min(start + chunk, geom.n))
        idx = np.arange(geom.n)[sl]

        def sub(points, owner, idx=idx):
            return integrand(points, idx[owner])

        try:
            res = quad_boxes(sub, lower[sl], upper[sl], rtol=rtol)
        except QuadratureError as exc:
            raise QuadratureError(
                f"beta_o quadrature failed at element {start + exc.index}",
                exc.estimate, exc.error, start + exc.index) from exc
        out[sl] = res.values
    out.setflags(write=False)
    return out


def zeta(area, radius, height, rtol=1e-12):
    """Centre-element integrated UE gain: ``(A/pi) int_0^R r^2/(r^2+H^2)^1.5 dr``."""
    res = quad_nd(lambda r: r * r / (r * r + height * height) ** 1.5,
                  [0.0], [radius], rtol=rtol)
    return area / math.pi * res.value


def epsilon_integral(area, d0, alpha, rtol=1e-12):
    """Amplitude sum of an infinite aperture, ``int int sqrt(feed density / A)``.

    Integrated in polar form up to ``50 d0``; the power-law tail beyond is
    added in closed form.
    """
    if alpha <= 1:
        raise ValueError("epsilon integral diverges for alpha <= 1")
    p = (alpha + 3.0) / 4.0
    cut = EPSILON_TRUNCATION * d0
    inner = quad_nd(lambda r: r * (d0 * d0 + r * r) ** (-p), [0.0], [cut],
                    rtol=rtol).value
    tail = (d0 * d0 + cut * cut) ** (1.0 - p) / (2.0 * (p - 1.0))
    scale = math.sqrt((alpha + 1.0) * d0 ** (alpha + 1.0) / (2.0 * math.pi * area))
    return scale * 2.0 * math.pi * (inner + tail)


@dataclass(frozen=True)
class BoundInputs:
    """Parameters of the closed-form bounds.

    ``power`` may be a scalar (all UEs) or one value per UE.
    """

    feed_gains: np.ndarray
    beta_o: np.ndarray
    density: float
    area: float
    num_ues: int
    power: float | np.ndarray
    eps_u: float = 1.0
    eps_v: float = 1.0
    xi: float = 1.0
    noise: float = 1e-12

    @property
    def coherent(self):
        """``|sqrt(varsigma)^H sqrt(beta_o)|^2``."""
        return float(np.sum(np.sqrt(self.feed_gains * self.beta_o))) ** 2

    @property
    def incoherent(self):
        """``varsigma^H beta_o``."""
        return float(np.dot(self.feed_gains, self.beta_o))

    def powers(self):
        return np.broadcast_to(np.asarray(self.power, dtype=float), (self.num_ues,))


def _log_sum(num, den):
    with np.errstate(divide="ignore"):
        ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    ratio = np.where(num == 0, 0.0, ratio)
    return float(np.sum(np.log2(1.0 + ratio)))


def _bound_terms(b, coh, inc, rho):
    eta, S, K = b.density, b.area, b.num_ues
    x2 = b.xi * b.xi
    num = rho * b.eps_u * b.eps_v * x2 * (eta / K) * coh
    hwi = ((1.0 - b.eps_v) / (eta * S) + (1.0 - b.eps_u) * b.eps_v / K) * x2 * eta * coh
    den = rho * hwi + rho * (1.0 - x2) * inc / S
    return num, den


def sum_rate_bound(b):
    """Ergodic sum-rate upper bound for a finite RHS (bits/s/Hz)."""
    rho = b.powers()
    num, den = _bound_terms(b, b.coherent, b.incoherent, rho)
    return _log_sum(num, den + b.noise)


def bound_high_power(b):
    """Limit of :func:`sum_rate_bound` as every transmit power grows without bound.

    Returns ``inf`` for ideal hardware.
    """
    num, den = _bound_terms(b, b.coherent, b.incoherent, 1.0)
    return b.num_ues * _log_sum(np.array([num]), np.array([den]))


@dataclass(frozen=True)
class SpecialCaseBounds:
    """Single-impairment bounds and their high-power limits."""

    ue_hwi: float
    bs_hwi: float
    pse: float
    ue_hwi_limit: float
    bs_hwi_limit: float
    pse_limit: float


def _limit(K, ratio_num, ratio_den):
    if ratio_den == 0:
        return math.inf
    return K * math.log2(1.0 + ratio_num / ratio_den)


def bound_special_cases(b):
    """Bounds with only one impairment active, taken from ``b``.

    ``ue_hwi`` uses ``eps_u`` alone (``xi = eps_v = 1``), ``bs_hwi`` uses
    ``eps_v`` alone and ``pse`` uses ``xi`` alone.  Limits are for unbounded
    transmit power; ideal hardware gives ``inf``.
    """
    rho = b.powers()
    eta, S, K = b.density, b.area, b.num_ues
    coh, inc, s2 = b.coherent, b.incoherent, b.noise
    eu, ev, x2 = b.eps_u, b.eps_v, b.xi * b.xi

    ue = _log_sum(rho * eu * (eta / K) * coh,
                  rho * (1.0 - eu) * (eta / K) * coh + s2)
    bs = _log_sum(rho * ev * (eta / K) * coh,
                  rho * (1.0 - ev) * coh / S + s2)
    pse = _log_sum(rho * x2 * (eta / K) * coh,
                   rho * (1.0 - x2) * inc / S + s2)
    return SpecialCaseBounds(
        ue_hwi=ue,
        bs_hwi=bs,
        pse=pse,
        ue_hwi_limit=_limit(K, eu, 1.0 - eu),
        bs_hwi_limit=_limit(K, ev * eta * S, K * (1.0 - ev)),
        pse_limit=_limit(K, x2 * eta * S * coh, K * (1.0 - x2) * inc),
    )


def bound_infinite_surface(b, d0, alpha, area, height, radius):
    """Sum-rate bound for an unbounded RHS aperture.

    Replaces the finite-grid sums of :func:`sum_rate_bound` by
    ``zeta * epsilon^2`` (coherent) and ``zeta`` (incoherent).
    """
    z = zeta(area, radius, height)
    e = epsilon_integral(area, d0, alpha)
    rho = b.powers()
    num, den = _bound_terms(b, z * e * e, z, rho)
    return _log_sum(num, den + b.noise)


@dataclass(frozen=True)
class BoundReport:
    finite_surface: float
    high_power: float
    special: SpecialCaseBounds
    infinite_surface: float
    zeta: float
    epsilon: float
