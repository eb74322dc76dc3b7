"""LoS channel synthesis and its 2x2 upper-triangular reduction.

The channel entries are pure phases determined by the transmit-receive
distances; the two-column channel is summarised by the correlation ``mu``
between its columns and the phase ``theta_mu`` of their inner product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .geometry import ArrayLayout

__all__ = [
    "ReducedChannel",
    "los_channel",
    "reduce_channel",
    "deviation_factor",
    "mu_model",
    "closed_form_2x2",
]


def los_channel(distances: NDArray, wavelength: float) -> NDArray:
    """Unit-modulus channel matrix ``exp(i 2 pi r / wavelength)`` entrywise."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    r = np.asarray(distances, dtype=float)
    if np.any(r <= 0):
        raise ValueError("distances must be positive")
    return np.exp(2j * np.pi * r / wavelength)


@dataclass(frozen=True)
class ReducedChannel:
    """Upper-triangular factor of a two-column channel.

    ``r_matrix`` has a real non-negative diagonal; for unit-modulus channels it
    equals ``sqrt(n_r) [[1, mu e^{i theta_mu}], [0, sqrt(1 - mu^2)]]``.
    """

    r_matrix: NDArray  # (2, 2) complex, upper triangular
    mu: float
    theta_mu: float
    n_r: int


def reduce_channel(h: NDArray) -> ReducedChannel:
    """Closed-form Gram-Schmidt reduction of a two-column channel matrix.

    The phase convention keeps the diagonal real and non-negative, so the
    result is the unique QR factor with that property. The off-diagonal term
    carries ``mu`` and ``theta_mu``.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[1] != 2:
        raise ValueError("channel must have exactly 2 columns")
    n_r = h.shape[0]
    if n_r < 1:
        raise ValueError("channel must have at least one row")
    h1, h2 = h[:, 0], h[:, 1]
    n1 = np.linalg.norm(h1)
    n2 = np.linalg.norm(h2)
    if n1 <= 0 or n2 <= 0:
        raise ValueError("zero channel column")
    inner = np.vdot(h1, h2)
    mu = float(np.abs(inner) / (n1 * n2))
    theta = float(np.angle(inner) % (2.0 * np.pi))
    r12 = inner / n1
    rest = n2 * n2 - np.abs(r12) ** 2
    # rounding can push 1 - mu^2 slightly negative at mu = 1
    r22 = np.sqrt(rest) if rest > 1e-15 * n2 * n2 else 0.0
    r = np.array([[n1, r12], [0.0, r22]], dtype=complex)
    return ReducedChannel(r_matrix=r, mu=min(mu, 1.0), theta_mu=theta, n_r=n_r)


def deviation_factor(R: float, d_t: float, d_r: float, beta: float, wavelength: float) -> float:
    """Deviation factor ``eta = R wavelength / (2 d_t d_r cos(beta))``."""
    if min(R, d_t, d_r, wavelength) <= 0:
        raise ValueError("R, d_t, d_r and wavelength must be positive")
    c = np.cos(beta)
    if c <= 1e-12:
        raise ValueError("cos(beta) must be positive; at |beta| = pi/2 the "
                         "worst-case correlation is 1 and eta is undefined")
    return R * wavelength / (2.0 * d_t * d_r * c)


def mu_model(layout: ArrayLayout, v: NDArray, *, d_t: float | None = None,
             R: float | None = None, wavelength: float | None = None,
             beta: float = 0.0, eta: float | None = None) -> float:
    """Model correlation ``mu = |sum_m exp(i c_m r_m . v)| / n_r``.

    ``v`` is the transverse direction seen in the receive array frame. The
    per-antenna constants are ``c_m = 2 pi d_t d_m cos(beta) / (R wavelength)``,
    given either through the physical parameters or through ``eta`` (in which
    case ``c_m = pi d_m / (eta * layout.spacing)``).
    """
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError("direction v must be a unit vector")
    if layout.n == 0:
        raise ValueError("empty layout")
    if eta is not None:
        if d_t is not None or R is not None or wavelength is not None:
            raise ValueError("pass either eta or the physical parameters, not both")
        if eta <= 0:
            raise ValueError("eta must be positive")
        c = np.pi * layout.radii / (eta * layout.spacing)
    else:
        if d_t is None or R is None or wavelength is None:
            raise ValueError("need d_t, R and wavelength when eta is not given")
        c = 2.0 * np.pi * d_t * layout.radii * np.cos(beta) / (R * wavelength)
    cos_theta = layout.directions @ v
    return float(np.abs(np.exp(1j * c * cos_theta).sum()) / layout.n)


def closed_form_2x2(d_t: float, d_r: float, R: float, wavelength: float,
                    beta: float) -> tuple[float, float]:
    """Closed-form ``(mu, theta_mu)`` for the aligned 2x2 link.

    Both uniform linear arrays lie on the transverse axis, giving
    ``mu = |cos(pi d_t d_r cos(beta) / (R wavelength))|`` with phase
    ``2 pi d_t sin(beta) / wavelength`` (plus pi where the cosine is negative),
    reduced mod 2 pi.
    """
    if min(d_t, d_r, R, wavelength) <= 0:
        raise ValueError("lengths must be positive")
    cosine = np.cos(np.pi * d_t * d_r * np.cos(beta) / (R * wavelength))
    theta = 2.0 * np.pi * d_t * np.sin(beta) / wavelength
    if cosine < 0:
        theta += np.pi
    return float(abs(cosine)), float(theta % (2.0 * np.pi))
