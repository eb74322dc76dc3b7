import itertools

import numpy as np
import pytest

from losmimo.channel import mu_model, reduce_channel
from losmimo.geometry import TETRAHEDRON_DIRECTIONS, make_layout, uniform_rotation
from losmimo.orientation import (
    best_submatrix,
    edge_code,
    edge_code_region_minima,
    edge_code_worst_distortion,
    icosphere_vertices,
    mu_of_direction,
    mu_pent_star,
    mu_star,
    mu_star_bound,
)

SQRT_HALF = np.sqrt(0.5)


def model_tetra_channel(eta, v):
    """4 x 2 unit-modulus channel whose column correlation follows the
    deviation-factor model at transverse direction v."""
    phases = (np.pi / eta) * np.sqrt(3 / 8) * (TETRAHEDRON_DIRECTIONS @ v)
    return np.column_stack([np.ones(4, dtype=complex), np.exp(1j * phases)])


class TestEdgeCode:
    def test_twelve_unit_vectors(self):
        g = edge_code()
        assert g.shape == (12, 3)
        np.testing.assert_allclose(np.linalg.norm(g, axis=1), 1.0, atol=1e-12)

    def test_closed_under_negation(self):
        g = edge_code()
        for v in g:
            assert min(np.linalg.norm(g + v, axis=1)) < 1e-12

    def test_invariant_under_tetrahedral_rotations(self):
        g = edge_code()
        r = TETRAHEDRON_DIRECTIONS
        pinv = np.linalg.pinv(r.T)
        count = 0
        for perm in itertools.permutations(range(4)):
            m = r[list(perm)].T @ pinv
            if abs(np.linalg.det(m) - 1.0) > 1e-9:
                continue  # reflections: the rotation group is A4
            count += 1
            mapped = g @ m.T
            for v in mapped:
                assert min(np.linalg.norm(g - v, axis=1)) < 1e-12
        assert count == 12


class TestMuOfDirection:
    def test_large_eta_limit(self):
        rng = np.random.default_rng(0)
        v = uniform_rotation(rng) @ np.array([0, 0, 1.0])
        assert mu_of_direction(1e12, v) == pytest.approx(1.0)

    def test_matches_channel_model(self):
        lay = make_layout("tetrahedron", spacing=0.25)
        rng = np.random.default_rng(1)
        for eta in (0.5, 1.0, 2.0):
            v = uniform_rotation(rng) @ np.array([0, 0, 1.0])
            assert mu_of_direction(eta, v) == pytest.approx(
                mu_model(lay, v, eta=eta), abs=1e-12)

    def test_edge_direction_pair_decorrelates(self):
        # along an edge at eta = 1 the matching submatrix correlation is
        # cos(pi/2) = 0
        g = edge_code()[0]
        h = model_tetra_channel(1.0, g)
        _, musub = best_submatrix(h)
        assert musub == pytest.approx(0.0, abs=1e-12)


class TestMuStar:
    def test_bound_at_one(self, curve):
        assert curve.value_at(1.0) <= 0.722 + 1e-9

    def test_bound_over_unit_range(self, curve):
        mask = curve.etas >= 1.0
        bounds = np.array([mu_star_bound(e) for e in curve.etas[mask]])
        assert np.all(curve.values[mask] <= bounds + 1e-9)

    def test_two_resolution_bracketing(self):
        coarse_pts = icosphere_vertices(4)
        fine_pts = icosphere_vertices(6)
        for eta in (0.8, 1.0, 1.5):
            coarse = float(np.max(mu_of_direction(eta, coarse_pts)))
            fine = float(np.max(mu_of_direction(eta, fine_pts)))
            # gradient bound: |grad mu| <= pi sqrt(3/8) / eta per radian;
            # subdiv-4 icosphere coverage radius is below 0.04 rad
            slack = (np.pi * np.sqrt(3 / 8) / eta) * 0.04
            assert coarse <= fine <= coarse + slack

    def test_monotone_above_one(self, curve):
        mask = curve.etas >= 1.0
        assert np.all(np.diff(curve.values[mask]) >= -1e-9)

    def test_refinement_beats_grid(self):
        val, v = mu_star(1.0)
        grid_best = float(np.max(mu_of_direction(1.0, icosphere_vertices())))
        assert val >= grid_best - 1e-12
        assert abs(np.linalg.norm(v) - 1.0) < 1e-9


class TestMuStarBound:
    def test_reference_value(self):
        assert mu_star_bound(1.0) == pytest.approx(0.7220, abs=5e-5)

    def test_limit(self):
        assert mu_star_bound(1e9) == pytest.approx(1.0)

    def test_monotone(self):
        etas = np.linspace(1.0, 100.0, 500)
        vals = [mu_star_bound(e) for e in etas]
        assert np.all(np.diff(vals) > 0)

    def test_rejects_below_one(self):
        with pytest.raises(ValueError):
            mu_star_bound(0.99)


class TestMuPentStar:
    def test_never_exceeds_triangle_curve(self, curve):
        etas = curve.etas[curve.export_mask()]
        assert np.all(curve.pent_at(etas) <= curve.value_at(etas) + 1e-12)

    def test_grows_towards_one(self, curve):
        # both branches increase past the valley, so the min heads to 1
        assert mu_pent_star(3.0, curve) > mu_pent_star(1.5, curve) > 0.5
        assert mu_pent_star(3.0, curve) > 0.8

    def test_tracks_scaled_branch_when_increasing(self, curve):
        # on the increasing part the smaller-eta branch binds
        eta = 1.5
        scaled = 2 * eta / (1 + np.sqrt(5))
        assert mu_pent_star(eta, curve) == pytest.approx(curve.value_at(scaled), abs=1e-12)


class TestDistortion:
    def test_converges_to_sqrt_half(self):
        val = edge_code_worst_distortion(samples=400_000)
        assert SQRT_HALF - 1e-9 <= val <= SQRT_HALF + 2e-3

    def test_edge_directions_are_fixed_points(self):
        g = edge_code()
        for v in g:
            assert np.max(g @ v) == pytest.approx(1.0)

    def test_region_minima_congruent(self):
        minima = edge_code_region_minima(samples=2_000_000)
        assert np.all(np.isfinite(minima))
        assert minima.max() - minima.min() < 2e-3
        np.testing.assert_allclose(minima, SQRT_HALF, atol=2e-3)


class TestBestSubmatrix:
    def test_bound_over_random_rotations(self):
        rng = np.random.default_rng(2)
        cap = np.cos(np.pi / (2 * np.sqrt(2)))
        for _ in range(2000):
            v = uniform_rotation(rng) @ np.array([0, 0, 1.0])
            _, musub = best_submatrix(model_tetra_channel(1.0, v))
            assert musub <= cap + 1e-9

    def test_formula_matches_reduction(self):
        rng = np.random.default_rng(3)
        g = edge_code()
        pairs = [(m, l) for m in range(4) for l in range(4) if m != l]
        for _ in range(50):
            v = uniform_rotation(rng) @ np.array([0, 0, 1.0])
            eta = rng.uniform(0.5, 2.5)
            h = model_tetra_channel(eta, v)
            for idx, (m, l) in enumerate(pairs):
                direct = reduce_channel(h[[m, l], :]).mu
                formula = abs(np.cos((np.pi / (2 * eta)) * float(g[idx] @ v)))
                assert direct == pytest.approx(formula, abs=1e-9)

    def test_full_mu_bounded_by_submatrix(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            v = uniform_rotation(rng) @ np.array([0, 0, 1.0])
            eta = rng.uniform(0.8, 3.0)
            h = model_tetra_channel(eta, v)
            mu = reduce_channel(h).mu
            _, musub = best_submatrix(h)
            assert mu <= 0.5 * musub + 0.5 + 1e-9

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            best_submatrix(np.ones((3, 2)))


def test_curve_csv_export(tmp_path, curve):
    path = tmp_path / "curve.csv"
    curve.write_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "eta,mu_star,mu_star_pent,upper_bound"
    data = [r.split(",") for r in rows[1:]]
    assert float(data[0][0]) == pytest.approx(0.3)
    # bound column present exactly for eta >= 1, and dominates mu_star
    for r in data:
        eta, v = float(r[0]), float(r[1])
        if eta >= 1.0:
            assert r[3] and float(r[3]) >= v - 1e-9
        else:
            assert r[3] == ""
