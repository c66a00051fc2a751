"""Phase-shift error statistics and RF-chain hardware quality.

The RHS phase errors are i.i.d. zero-mean draws, either uniform on
``(-iota, iota)`` or von Mises with concentration ``kappa``.  What the
beamformer sees of them is summarised by two numbers: the mean resultant
length ``xi = E[exp(j theta)]`` and the error power ``sigma_p^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import quad_nd

BESSEL_SERIES_LIMIT = 15.0


def _bessel_series(order, x):
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    term = half**order / math.factorial(order)
    total = term.copy()
    k = 0
    while True:
        k += 1
        term = term * half * half / (k * (k + order))
        total = total + term
        if np.all(term <= 1e-17 * total):
            return total


def _bessel_asymptotic_scaled(order, x):
    """``exp(-x) I_order(x)`` from the large-argument expansion."""
    x = np.asarray(x, dtype=float)
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = np.ones_like(x)
    best = np.abs(term)
    for k in range(1, 60):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(term)
        # asymptotic series: stop adding once terms start to grow
        use = mag < best
        if not use.any():
            break
        total = np.where(use, total + term, total)
        best = np.where(use, mag, 0.0)
        if np.all(mag[use] <= 1e-17 * np.abs(total[use])):
            break
    return total / np.sqrt(2.0 * math.pi * x)


def bessel_i(order, x, scaled=False):
    """Modified Bessel function of the first kind, order 0 or 1.

    Power series up to ``x = 15``, large-argument asymptotic expansion
    above.  With ``scaled=True`` returns ``exp(-x) * I(x)``, which stays
    finite for large arguments.
    """
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    out = np.empty_like(x)
    small = x <= BESSEL_SERIES_LIMIT
    if small.any():
        vals = _bessel_series(order, x[small])
        out[small] = vals * np.exp(-x[small]) if scaled else vals
    if (~small).any():
        vals = _bessel_asymptotic_scaled(order, x[~small])
        out[~small] = vals if scaled else vals * np.exp(x[~small])
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PhaseErrorModel:
    """Distribution of the per-element RHS phase error.

    ``kind`` is ``"none"``, ``"uniform"`` (``param`` = half-width iota in
    radians) or ``"von_mises"`` (``param`` = concentration kappa).
    """

    kind: str = "none"
    param: float = 0.0

    def __post_init__(self):
        if self.kind == "none":
            return
        if self.kind == "uniform":
            if not 0.0 < self.param <= math.pi:
                raise ValueError("uniform half-width must lie in (0, pi]")
        elif self.kind == "von_mises":
            if not self.param > 0.0:
                raise ValueError("von Mises concentration must be positive")
        else:
            raise ValueError(f"unknown phase error kind {self.kind!r}")

    @classmethod
    def none(cls):
        return cls("none", 0.0)

    @classmethod
    def uniform(cls, half_width):
        return cls("uniform", float(half_width))

    @classmethod
    def von_mises(cls, concentration):
        return cls("von_mises", float(concentration))

    @classmethod
    def from_power(cls, kind, sigma_p2):
        """Model with error power ``sigma_p2`` (``iota^2/3`` or ``1/kappa``)."""
        if sigma_p2 == 0 or kind == "none":
            return cls.none()
        if sigma_p2 < 0:
            raise ValueError("phase error power must be nonnegative")
        if kind == "uniform":
            return cls.uniform(math.sqrt(3.0 * sigma_p2))
        if kind == "von_mises":
            return cls.von_mises(1.0 / sigma_p2)
        raise ValueError(f"unknown phase error kind {kind!r}")


@dataclass(frozen=True)
class HardwareQuality:
    """RF-chain quality factors of the UEs and BSs; 1 means ideal."""

    eps_u: float = 1.0
    eps_v: float = 1.0

    def __post_init__(self):
        for name in ("eps_u", "eps_v"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


def xi(model):
    """Mean resultant length ``E[exp(j theta)]`` of the phase error."""
    if model.kind == "none":
        return 1.0
    if model.kind == "uniform":
        iota = model.param
        return math.sin(iota) / iota
    kappa = model.param
    return float(bessel_i(1, kappa, scaled=True) / bessel_i(0, kappa, scaled=True))


def phase_error_power(model):
    """Nominal phase error power: ``iota^2/3`` (uniform) or ``1/kappa``.

    For von Mises this is the large-concentration value used by the bound
    formulas; :func:`exact_second_moment` gives the true ``E[theta^2]``.
    """
    if model.kind == "none":
        return 0.0
    if model.kind == "uniform":
        return model.param**2 / 3.0
    return 1.0 / model.param


def exact_second_moment(model):
    """``E[theta^2]`` with theta supported on ``(-pi, pi]``."""
    if model.kind != "von_mises":
        return phase_error_power(model)
    kappa = model.param

    def density(t):
        return np.exp(kappa * (np.cos(t) - 1.0))

    norm = quad_nd(density, [-math.pi], [math.pi], rtol=1e-12).value
    second = quad_nd(lambda t: t * t * density(t), [-math.pi], [math.pi],
                     rtol=1e-12).value
    return second / norm


def _von_mises_best_fisher(kappa, n, rng):
    if kappa < 1e-8:
        return rng.uniform(-math.pi, math.pi, n)
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = n - filled
        # acceptance rate is above 0.65 for every kappa
        batch = int(m * 1.6) + 16
        u1, u2, u3 = rng.random((3, batch))
        z = np.cos(math.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        with np.errstate(divide="ignore"):
            ok = (c * (2.0 - c) - u2 > 0.0) | (np.log(c / u2) + 1.0 - c >= 0.0)
        theta = np.sign(u3[ok] - 0.5) * np.arccos(np.clip(f[ok], -1.0, 1.0))
        take = min(m, len(theta))
        out[filled:filled + take] = theta[:take]
        filled += take
    return out


def sample_errors(model, n, rng):
    """Draw ``n`` i.i.d. phase errors from ``model`` using ``rng``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if model.kind == "none":
        return np.zeros(n)
    if model.kind == "uniform":
        return model.param * (2.0 * rng.random(n) - 1.0)
    return _von_mises_best_fisher(model.param, n, rng)
