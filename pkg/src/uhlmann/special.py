"""Complex trigamma and the constants needed by the thermal kernel."""

import numpy as np
from scipy.special import zeta

# |z| above which the asymptotic series is used directly
_ASYMPTOTIC_RADIUS = 12.0

# B_2k for k = 1..9; terms B_2k / z**(2k+1) of the trigamma expansion
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
)

APERY = float(zeta(3.0))
ZETA5 = float(zeta(5.0))


def _trigamma_asymptotic(z):
    w = 1.0 / z
    w2 = w * w
    series = np.zeros_like(z)
    for b in reversed(_BERNOULLI):
        series = series * w2 + b
    return w + 0.5 * w2 + w2 * w * series


def trigamma(z):
    """psi^(1)(z) for complex z with Re z > 0.

    Small arguments are pushed out with psi1(z) = psi1(z + 1) + 1/z**2 until
    |z| exceeds the asymptotic radius.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= 0):
        raise ValueError("trigamma is only implemented for Re z > 0")
    z = z.copy()
    acc = np.zeros_like(z)
    mask = np.abs(z) <= _ASYMPTOTIC_RADIUS
    while np.any(mask):
        acc[mask] += 1.0 / (z[mask] * z[mask])
        z[mask] += 1.0
        mask = np.abs(z) <= _ASYMPTOTIC_RADIUS
    out = acc + _trigamma_asymptotic(z)
    return out if out.ndim else out[()]


def tetragamma_half():
    """psi^(2)(1/2) = -14 zeta(3)."""
    return -14.0 * APERY
