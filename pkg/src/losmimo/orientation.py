"""Worst-case correlation of the tetrahedral receive array.

The correlation of a tetrahedral channel depends on the receive rotation only
through the transverse direction seen in the array frame, so maximising over
all rotations reduces to maximising over the unit sphere. The global maximum
``mu*(eta)`` is located on a dense deterministic icosphere grid and polished
by local search; the resulting curve drives the distance-range design.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from .channel import reduce_channel
from .geometry import TETRAHEDRON_DIRECTIONS

__all__ = [
    "edge_code",
    "mu_of_direction",
    "mu_star",
    "mu_star_bound",
    "mu_pent_star",
    "MuStarCurve",
    "compute_mu_star_curve",
    "default_curve",
    "edge_code_worst_distortion",
    "edge_code_region_minima",
    "best_submatrix",
    "icosphere_vertices",
]

# eta of a non-neighbouring pentagon pair relative to a neighbouring one
PENTAGON_ETA_SCALE = 2.0 / (1.0 + np.sqrt(5.0))

_ROW_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def edge_code() -> NDArray:
    """The 12 unit vectors along the (signed) tetrahedron edges."""
    r = TETRAHEDRON_DIRECTIONS
    g = [np.sqrt(3.0 / 8.0) * (r[m] - r[l]) for m in range(4) for l in range(4) if m != l]
    return np.array(g)


def mu_of_direction(eta: float, v: NDArray) -> NDArray | float:
    """Tetrahedral correlation for transverse direction(s) ``v``:
    ``|sum_m exp(i (pi/eta) sqrt(3/8) r_m . v)| / 4``."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    v = np.asarray(v, dtype=float)
    scalar = v.ndim == 1
    vv = np.atleast_2d(v)
    if np.any(np.abs(np.linalg.norm(vv, axis=-1) - 1.0) > 1e-9):
        raise ValueError("directions must be unit vectors")
    arg = (np.pi / eta) * np.sqrt(3.0 / 8.0) * (vv @ TETRAHEDRON_DIRECTIONS.T)
    mu = np.abs(np.exp(1j * arg).sum(axis=-1)) / 4.0
    return float(mu[0]) if scalar else mu


@lru_cache(maxsize=4)
def icosphere_vertices(subdivisions: int = 6) -> NDArray:
    """Vertices of a subdivided icosahedron (10 * 4^n + 2 points)."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    out = np.array(verts)
    out.setflags(write=False)
    return out


def _refine(eta: float, v0: NDArray) -> tuple[float, NDArray]:
    theta0 = np.arccos(np.clip(v0[2], -1.0, 1.0))
    phi0 = np.arctan2(v0[1], v0[0])

    def neg_mu(x):
        th, ph = x
        v = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        return -mu_of_direction(eta, v)

    res = minimize(neg_mu, [theta0, phi0], method="Nelder-Mead",
                   options=dict(xatol=1e-9, fatol=1e-13, maxiter=400))
    th, ph = res.x
    v = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    return -float(res.fun), v


def mu_star(eta: float, refine_from: int = 10,
            grid: NDArray | None = None) -> tuple[float, NDArray]:
    """Global maximum of the tetrahedral correlation over all orientations.

    Evaluates the objective on a >= 40k-point icosphere grid, then polishes
    the best ``refine_from`` candidates with a local search. The objective's
    angular feature scale (~eta / 2 rad) is far above the grid pitch for all
    eta of interest, so the best grid cells bracket the global basin.
    """
    pts = icosphere_vertices() if grid is None else grid
    mu = mu_of_direction(eta, pts)
    order = np.argsort(mu)[-refine_from:]
    best_val, best_v = float(mu[order[-1]]), pts[order[-1]]
    for i in order:
        val, v = _refine(eta, pts[i])
        if val > best_val:
            best_val, best_v = val, v
    return best_val, best_v


def mu_star_bound(eta: float) -> float:
    """Closed-form upper bound ``(1 + cos(pi / (2 sqrt(2) eta))) / 2`` on
    ``mu*(eta)``, established for ``eta >= 1`` only."""
    if eta < 1.0:
        raise ValueError("the closed-form bound holds for eta >= 1 only")
    return 0.5 * (1.0 + np.cos(np.pi / (2.0 * np.sqrt(2.0) * eta)))


@dataclass(frozen=True)
class MuStarCurve:
    """``mu*`` sampled on a fixed eta grid, with per-point maximisers.

    The grid extends below ``export_from`` so that the pentagon branch
    ``mu*(2 eta / (1 + sqrt 5))`` stays on-grid; exports cover
    ``[export_from, etas[-1]]``. Values between grid points interpolate
    linearly.
    """

    etas: NDArray
    values: NDArray
    directions: NDArray
    export_from: float

    def value_at(self, eta) -> NDArray | float:
        eta = np.asarray(eta, dtype=float)
        if np.any(eta < self.etas[0] - 1e-12) or np.any(eta > self.etas[-1] + 1e-12):
            raise ValueError(f"eta outside cached grid [{self.etas[0]:g}, {self.etas[-1]:g}]")
        out = np.interp(eta, self.etas, self.values)
        return float(out) if out.ndim == 0 else out

    def pent_at(self, eta) -> NDArray | float:
        return np.minimum(self.value_at(eta),
                          self.value_at(np.asarray(eta, dtype=float) * PENTAGON_ETA_SCALE))

    def export_mask(self) -> NDArray:
        return self.etas >= self.export_from - 1e-12

    def write_csv(self, path) -> None:
        """Columns: eta, mu_star, mu_star_pent, closed-form bound (blank for eta < 1)."""
        mask = self.export_mask()
        with open(path, "w", newline="") as f:
            f.write("eta,mu_star,mu_star_pent,upper_bound\n")
            for eta, val in zip(self.etas[mask], self.values[mask]):
                pent = self.pent_at(eta)
                bound = f"{mu_star_bound(eta):.12g}" if eta >= 1.0 else ""
                f.write(f"{eta:.12g},{val:.12g},{pent:.12g},{bound}\n")


def compute_mu_star_curve(eta_start: float = 0.3, eta_stop: float = 3.0,
                          step: float = 0.01) -> MuStarCurve:
    """Evaluate ``mu*`` on a regular eta grid (plus the pentagon extension)."""
    if not 0 < eta_start < eta_stop:
        raise ValueError("need 0 < eta_start < eta_stop")
    lo = eta_start * PENTAGON_ETA_SCALE
    n_below = int(np.ceil((eta_start - lo) / step))
    etas = eta_start + step * np.arange(-n_below, np.floor((eta_stop - eta_start) / step) + 1)
    pts = icosphere_vertices()
    values = np.empty(len(etas))
    dirs = np.empty((len(etas), 3))
    # one pass of grid maxima for the whole grid, then per-eta refinement
    dots = pts @ TETRAHEDRON_DIRECTIONS.T
    for i, eta in enumerate(etas):
        arg = (np.pi / eta) * np.sqrt(3.0 / 8.0) * dots
        mu = np.abs(np.exp(1j * arg).sum(axis=1)) / 4.0
        order = np.argsort(mu)[-10:]
        best_val, best_v = float(mu[order[-1]]), pts[order[-1]]
        for j in order:
            val, v = _refine(eta, pts[j])
            if val > best_val:
                best_val, best_v = val, v
        values[i] = best_val
        dirs[i] = best_v
    return MuStarCurve(etas=etas, values=values, directions=dirs, export_from=eta_start)


@lru_cache(maxsize=1)
def default_curve() -> MuStarCurve:
    """The standard cached curve on eta in [0.3, 3] with step 0.01."""
    return compute_mu_star_curve()


def mu_pent_star(eta: float, curve: MuStarCurve | None = None) -> float:
    """Worst-case correlation with pentagonal transmit selection:
    ``min(mu*(eta), mu*(2 eta / (1 + sqrt 5)))``."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    if curve is not None:
        return float(curve.pent_at(eta))
    return min(mu_star(eta)[0], mu_star(eta * PENTAGON_ETA_SCALE)[0])


def _fibonacci_sphere_chunk(start: int, stop: int, n: int) -> NDArray:
    i = np.arange(start, stop, dtype=float)
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    z = 1.0 - (2.0 * i + 1.0) / n
    theta = 2.0 * np.pi * i / golden
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])


def edge_code_worst_distortion(samples: int = 2_000_000, chunk: int = 500_000) -> float:
    """Worst-case inner product when quantising the sphere with the 12 edge
    directions: ``min_v max_i g_i . v`` over a dense deterministic sample.
    Converges to sqrt(1/2) from above as the sample refines."""
    if samples < 12:
        raise ValueError("need a meaningful sample size")
    g = edge_code()
    worst = np.inf
    for s in range(0, samples, chunk):
        v = _fibonacci_sphere_chunk(s, min(s + chunk, samples), samples)
        worst = min(worst, float((v @ g.T).max(axis=1).min()))
    return worst


def edge_code_region_minima(samples: int = 2_000_000, chunk: int = 500_000) -> NDArray:
    """Per-Voronoi-region minima of ``g_i . v``; the 12 regions are congruent
    so the entries agree up to sampling error."""
    g = edge_code()
    minima = np.full(12, np.inf)
    for s in range(0, samples, chunk):
        v = _fibonacci_sphere_chunk(s, min(s + chunk, samples), samples)
        dots = v @ g.T
        region = np.argmax(dots, axis=1)
        best = dots[np.arange(len(v)), region]
        for i in range(12):
            sel = best[region == i]
            if sel.size:
                minima[i] = min(minima[i], float(sel.min()))
    return minima


def best_submatrix(h: NDArray) -> tuple[tuple[int, int], float]:
    """Row pair of a 4 x 2 channel whose 2 x 2 submatrix has the least column
    correlation; for a tetrahedral channel with eta >= 1 the returned value is
    at most ``cos(pi / (2 sqrt(2) eta))``."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 2):
        raise ValueError("expected a 4 x 2 channel matrix")
    best_pair, best_mu = _ROW_PAIRS[0], np.inf
    for m, l in _ROW_PAIRS:
        mu = reduce_channel(h[[m, l], :]).mu
        if mu < best_mu:
            best_pair, best_mu = (m, l), mu
    return best_pair, float(best_mu)
