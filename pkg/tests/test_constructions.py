import numpy as np
import pytest

from logmink import (
    HPolytope,
    build_facet_complex,
    cone_volume_measure,
    generate_group,
    hausdorff_distance,
    stability_constants,
    non_splitting_margin,
    symmetrize_supports,
    two_point_measure,
    volume,
    wasserstein,
)
from logmink.constructions import (
    chopped_cube,
    diagonal_stretch,
    stretched_direct_sum,
    unit_cube,
)
from logmink.errors import CutsOverlap, ParameterOutOfRange
from logmink.geometry import contains


class TestStabilityConstants:
    def test_irreducible_n3(self):
        consts = stability_constants(3, irreducible=True)
        assert consts.R0 == 3.0
        assert consts.r0 == pytest.approx(1 / np.e)
        assert consts.gamma0 == 1.0

    def test_reducible_R0_arithmetic(self):
        consts = stability_constants(2, delta=0.1, tau=0.25)
        assert consts.R0 == pytest.approx((2**6 / 0.1) ** 4, rel=1e-12)
        assert consts.R0 == pytest.approx(1.6777216e11, rel=1e-7)

    def test_reducible_r0_arithmetic(self):
        consts = stability_constants(2, delta=0.1, tau=0.25)
        assert consts.r0 == pytest.approx((2 / 25) * (0.1 / 64) ** 4, rel=1e-12)
        assert consts.r0 == pytest.approx(4.76837158203125e-13, rel=1e-12)

    def test_reducible_gamma0_formula(self):
        consts = stability_constants(2, delta=0.1, tau=0.25, c=1.5)
        expected = (1.5**2 / 0.25) * 0.1 ** (-24) * 2**96
        assert consts.gamma0 == pytest.approx(expected, rel=1e-12)

    def test_ordering_and_ranges(self):
        consts = stability_constants(3, delta=0.2, tau=0.3)
        assert 0 < consts.r0 < consts.R0
        with pytest.raises(ParameterOutOfRange):
            stability_constants(2, delta=0.6, tau=0.25)
        with pytest.raises(ParameterOutOfRange):
            stability_constants(2)  # reducible branch needs delta and tau


class TestNonSplittingMargin:
    def test_reference_value(self):
        # (0.1*0.25/8) * (2/25) * (0.1/64)^8, evaluated independently.
        expected = (0.1 * 0.25 / 8.0) * (2.0 / 25.0) * (0.1 / 64.0) ** 8
        assert expected == pytest.approx(8.881784197001252e-27, rel=1e-12)
        assert non_splitting_margin(2, 0.1, 0.25) == pytest.approx(expected, rel=1e-12)

    def test_below_tau_over_4n(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(2, 4))
            delta = rng.uniform(0.05, 0.45)
            tau = rng.uniform(0.15, 0.45)
            eta = non_splitting_margin(n, delta, tau)
            assert 0 < eta < tau / (4 * n)
            consts = stability_constants(n, delta=delta, tau=tau)
            assert eta == pytest.approx(
                (delta * tau / (4 * n)) * consts.r0 / consts.R0, rel=1e-9
            )

    def test_monotone_in_delta(self):
        deltas = np.linspace(0.02, 0.45, 12)
        vals = [non_splitting_margin(2, d, 0.25) for d in deltas]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_range_check(self):
        with pytest.raises(ParameterOutOfRange):
            non_splitting_margin(2, 0.0, 0.25)


class TestChoppedCube:
    def test_zero_eps_is_cube(self):
        body = chopped_cube(2, 0.0)
        assert body.n_facets == 4
        assert volume(body) == pytest.approx(1.0, abs=1e-12)

    def test_unit_volume_after_rescale(self):
        for n, eps in ((2, 0.01), (3, 0.002)):
            body = chopped_cube(n, eps)
            assert volume(body) == pytest.approx(1.0, rel=1e-9)
            assert body.n_facets == 2 * n + 2**n

    def test_corner_cut_leg_length(self):
        # Pre-rescale, each corner loses a right triangle of area eps, so the
        # legs have length sqrt(2 eps); check via the volume oracle.
        eps = 0.01
        body = chopped_cube(2, eps)
        raw = body.scale((1 - 4 * eps) ** (1 / 2))
        assert volume(raw) == pytest.approx(1 - 4 * eps, rel=1e-9)
        fc = build_facet_complex(raw)
        corner_vertex = max(
            map(tuple, fc.vertices), key=lambda v: v[0] + v[1]
        )
        leg = np.sqrt(2 * eps)
        assert corner_vertex[0] + corner_vertex[1] == pytest.approx(1 - leg, abs=1e-9)

    def test_invariant_under_coordinate_group(self):
        group = generate_group(np.eye(2))
        body = chopped_cube(2, 0.005)
        sym = symmetrize_supports(body, group)
        assert np.allclose(sym.supports, body.supports, atol=1e-12)

    def test_cuts_overlap(self):
        with pytest.raises(CutsOverlap):
            chopped_cube(2, 0.2)
        with pytest.raises(ParameterOutOfRange):
            chopped_cube(2, -0.1)

    def test_raw_body_inside_cube(self):
        eps = 0.01
        body = chopped_cube(2, eps)
        raw = body.scale((1 - 4 * eps) ** (1 / 2))
        assert contains(unit_cube(2), raw)

    def test_shrunken_cube_not_contained(self):
        # Chopping removes corners at depth ~ eps^(1/n), so a cube shrunk by
        # less than that still pokes out.
        eps = 0.01
        body = chopped_cube(2, eps)
        cube = unit_cube(2)
        sigma_max = min(
            body.supports[i] / _cube_support(body.normals[i])
            for i in range(body.n_facets)
        )
        gamma2 = (1 - sigma_max) / eps ** (1 / 2)
        assert gamma2 > 0
        shrink = 1 - 0.5 * gamma2 * eps ** (1 / 2)
        assert not contains(body, cube.scale(shrink))
        assert contains(body, cube.scale(sigma_max * 0.999))

    def test_wasserstein_scales_as_corner_mass(self):
        # The corner facets carry cone-volume mass ~ eps^((n-1)/n) at fixed
        # chordal distance from the cube normals, so the transport distance
        # follows that power, not eps itself.
        cube = unit_cube(2)
        v_cube = cone_volume_measure(cube)
        eps_grid = np.array([1e-4, 3e-4, 1e-3, 3e-3, 1e-2])
        dists = np.array(
            [
                wasserstein(v_cube, cone_volume_measure(chopped_cube(2, eps)))
                for eps in eps_grid
            ]
        )
        slope = np.polyfit(np.log(eps_grid), np.log(dists), 1)[0]
        assert slope == pytest.approx(0.5, abs=0.05)
        coeffs = dists / np.sqrt(eps_grid)
        assert max(coeffs) / min(coeffs) < 2.0

    def test_wasserstein_lower_bound_from_corner_mass(self):
        # Independent lower bound: supp(V_cube) is the axis set, so any
        # 1-Lipschitz potential vanishing there collects the full corner mass
        # times its chordal distance to the axes.
        eps = 1e-3
        body = chopped_cube(2, eps)
        vk = cone_volume_measure(body)
        on_axis = np.isclose(np.abs(vk.dirs), 0.0, atol=1e-9).any(axis=1)
        corner_mass = vk.weights[~on_axis].sum()
        chord = 2 * np.sin(np.pi / 8)
        lower = corner_mass * chord
        cube_measure = cone_volume_measure(unit_cube(2))
        assert wasserstein(cube_measure, vk) >= lower - 1e-9
        assert corner_mass == pytest.approx(2 * np.sqrt(2 * eps), rel=0.2)


def _cube_support(u):
    return 0.5 * np.abs(u).sum()


class TestDiagonalStretch:
    def test_identity_at_one(self, unit_square):
        out = diagonal_stretch(unit_square, [1, 0], 1.0)
        assert hausdorff_distance(out, unit_square) < 1e-12

    def test_square_becomes_rectangle(self, unit_square):
        out = diagonal_stretch(unit_square, [0, 1], 2.0)
        expected = HPolytope(2, unit_square.normals, [1.0, 1.0, 0.25, 0.25])
        assert hausdorff_distance(out, expected) < 1e-12
        assert volume(out) == pytest.approx(1.0, rel=1e-9)

    def test_volume_preserved(self):
        rng = np.random.default_rng(7)
        ang = np.arange(8) * np.pi / 4 + np.pi / 8
        normals = np.column_stack([np.cos(ang), np.sin(ang)])
        body = HPolytope(2, normals, rng.uniform(0.4, 0.8, 8))
        for s in (0.5, 2.0, 7.0):
            out = diagonal_stretch(body, [1, 0], s)
            assert volume(out) == pytest.approx(volume(body), rel=1e-9)

    def test_measure_concentrates_at_poles(self):
        ang = np.arange(4) * np.pi / 2 + np.pi / 4
        diamond = HPolytope(2, np.column_stack([np.cos(ang), np.sin(ang)]), [0.5] * 4)
        limit = two_point_measure([1.0, 0.0])
        dists = []
        for s in (1.0, 2.0, 4.0, 8.0, 16.0):
            vk = cone_volume_measure(diagonal_stretch(diamond, [1, 0], s))
            dists.append(wasserstein(vk, limit))
        assert all(b < a for a, b in zip(dists, dists[1:]))
        assert dists[-1] < 0.05


class TestTwoPointMeasure:
    def test_atoms(self):
        mu = two_point_measure([0.0, 1.0])
        assert mu.n_atoms == 2
        assert np.allclose(mu.weights, 0.5)
        assert mu.total_mass() == pytest.approx(1.0)

    def test_symmetrization_fixed_point(self, coord_group_2):
        from logmink import symmetrize_measure

        mu = two_point_measure([1.0, 0.0])
        sym = symmetrize_measure(mu, coord_group_2)
        assert sym.n_atoms == 2
        assert np.allclose(sym.weights, 0.5)


def _segments():
    seg = HPolytope(1, [[1.0], [-1.0]], [0.5, 0.5])
    b1 = np.array([[1.0], [0.0]])
    b2 = np.array([[0.0], [1.0]])
    return seg, b1, b2


class TestStretchedDirectSum:
    def test_zero_stretch_recovers_sum(self, unit_square):
        seg, b1, b2 = _segments()
        out = stretched_direct_sum(seg, b1, seg, b2, 0.0)
        assert hausdorff_distance(out, unit_square) < 1e-12

    def test_rectangle_example(self):
        seg, b1, b2 = _segments()
        out = stretched_direct_sum(seg, b1, seg, b2, 1.0)
        expected = HPolytope(
            2, [[1, 0], [-1, 0], [0, 1], [0, -1]], [1.5, 1.5, 1 / 6, 1 / 6]
        )
        assert hausdorff_distance(out, expected) < 1e-12
        assert volume(out) == pytest.approx(1.0, rel=1e-12)
        vk = cone_volume_measure(out)
        assert np.allclose(vk.weights, 0.25)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 10.0])
    def test_volume_and_measure_invariant_in_t(self, t, unit_square):
        seg, b1, b2 = _segments()
        out = stretched_direct_sum(seg, b1, seg, b2, t)
        assert volume(out) == pytest.approx(1.0, rel=1e-10)
        vk = cone_volume_measure(out)
        base = cone_volume_measure(unit_square)
        assert wasserstein(vk, base) == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("t", [1.0, 2.0, 5.0])
    def test_distance_grows_at_least_linearly(self, t, unit_square):
        seg, b1, b2 = _segments()
        out = stretched_direct_sum(seg, b1, seg, b2, t)
        assert hausdorff_distance(out, unit_square) >= t - 1e-9
