import math

import numpy as np
import pytest

from boundlab.core import GridTorus, IndicatorSet, RandomStream, estimate_measure
from boundlab.errors import BudgetError, InvariantError, SchemaError
from boundlab.similarity import (Ladder, OrbitFamily, SimilarityConfig,
                                 build_B1, build_construction,
                                 coverage_probability, cube_set,
                                 hausdorff_linf, inf_sup_experiment,
                                 orbit_entropy, separation, torus_linf)


class TestConstruction:
    def test_j0_one_half_ratio(self):
        fam = build_construction(SimilarityConfig(J0=1, ratio=0.5))
        assert list(fam.ladder.flattened()) == [1.0, 0.5, 0.25]
        assert list(fam.v) == [0.1, 0.2, 0.4]
        assert list(fam.S0) == [1.75]

    def test_s0_distinct_counts(self):
        for J0 in (1, 2, 3, 4):
            fam = build_construction(SimilarityConfig(J0=J0, ratio=0.25))
            assert fam.n_points == J0 ** 3
            assert len(np.unique(fam.S0)) == J0 ** 3

    def test_s0_members_are_triple_sums(self):
        import itertools
        fam = build_construction(SimilarityConfig(J0=2, ratio=1 / 3))
        lad = fam.ladder
        rows = [[lad.value(i, j) for j in (1, 2)] for i in (1, 2, 3)]
        sums = {a + b + c for a, b, c in itertools.product(*rows)}
        assert sums == set(fam.S0)

    def test_v_has_3J0_coordinates(self):
        fam = build_construction(SimilarityConfig(J0=3, ratio=1 / 3))
        assert fam.v.shape == (9,)

    def test_duplicate_sums_rejected(self):
        with pytest.raises(SchemaError):
            Ladder(2, 0.7)  # ratio outside (0, 1/2]


class TestOrbitPoints:
    def test_j0_one_orbit(self):
        fam = build_construction(SimilarityConfig(J0=1, ratio=0.5))
        pts = fam.orbit_points(1.0)
        assert pts.shape == (1, 3)
        assert list(pts[0]) == pytest.approx([0.175, 0.35, 0.7], abs=1e-15)

    def test_range_and_count(self):
        fam = build_construction(SimilarityConfig(J0=2, ratio=1 / 3))
        pts = fam.orbit_points(1.618)
        assert pts.shape == (8, 6)
        assert np.all((0.0 <= pts) & (pts < 1.0))

    def test_base_cancels(self):
        a = OrbitFamily(Ladder(2, 0.25, base=1.0))
        b = OrbitFamily(Ladder(2, 0.25, base=11.3))
        assert np.allclose(a.orbit_points(1.7), b.orbit_points(1.7), atol=1e-12)

    def test_reconstruction_exact(self):
        fam = build_construction(SimilarityConfig(J0=3, ratio=0.25))
        stored = fam.ratios.copy()
        for t in (1.0, 1.37, 1.99):
            assert np.array_equal(fam.orbit_points(t), fam.reconstruct_orbit(t, stored))


class TestSeparation:
    def test_single_point_convention(self):
        fam = build_construction(SimilarityConfig(J0=1, ratio=0.25))
        rep = separation(fam, [1.0, 1.5])
        assert rep.minimum == math.inf

    def test_frozen_floors(self):
        from boundlab.config import SEPARATION_FLOOR
        for J0 in (2, 3):
            fam = build_construction(SimilarityConfig(J0=J0, ratio=0.25))
            rep = separation(fam, np.linspace(1, 2, 101))
            assert rep.minimum >= SEPARATION_FLOOR[(J0, 0.25)]

    def test_torus_metric(self):
        assert torus_linf(np.array([0.95, 0.1]), np.array([0.05, 0.2])) == pytest.approx(0.1)
        P = np.array([[0.0, 0.0]])
        Q = np.array([[0.5, 0.98]])
        assert hausdorff_linf(P, Q) == pytest.approx(0.5)


class TestOrbitEntropy:
    def test_arc_length_bound_j0_one(self):
        fam = build_construction(SimilarityConfig(J0=1, ratio=1 / 3))
        delta = 0.1
        speed = fam.max_coordinate_speed()
        need = int(math.ceil(2 * speed / delta)) + 1
        rep = orbit_entropy(fam, delta, need)
        assert rep.net_size <= 1 + speed / delta

    def test_density_rejection(self):
        fam = build_construction(SimilarityConfig(J0=2, ratio=1 / 3))
        with pytest.raises(SchemaError):
            orbit_entropy(fam, 0.1, 10)

    def test_trivial_large_delta(self):
        fam = build_construction(SimilarityConfig(J0=1, ratio=1 / 3))
        speed = fam.max_coordinate_speed()
        delta = 0.49
        need = int(math.ceil(2 * speed / delta)) + 1
        rep = orbit_entropy(fam, delta, need)
        assert rep.net_size >= 1

    def test_subcubic_growth(self):
        from boundlab.config import ORBIT_ENTROPY_NET
        logs = {}
        for J0 in (1, 2):
            fam = build_construction(SimilarityConfig(J0=J0, ratio=1 / 3))
            need = int(math.ceil(2 * fam.max_coordinate_speed() / 0.1)) + 1
            rep = orbit_entropy(fam, 0.1, need)
            assert rep.net_size <= math.ceil(1.05 * ORBIT_ENTROPY_NET[J0])
            logs[J0] = math.log(rep.net_size)
        # log(net) grows slower than the J0^3 point count
        assert logs[2] / logs[1] < 8


class TestCubeSet:
    def test_trivial_probabilities(self):
        cfg1 = SimilarityConfig(J0=1, eps=1.0, seed=3)
        assert cube_set(cfg1).contains_point([0.3, 0.7, 0.01])
        cfg0 = SimilarityConfig(J0=1, eps=1e-300, seed=3)
        assert not cube_set(cfg0).contains_point([0.3, 0.7, 0.01])

    def test_density_band(self):
        cfg = SimilarityConfig(J0=2, eps=0.05, seed=12)
        s = cube_set(cfg)
        p, se = estimate_measure(s, 100_000, RandomStream(4, 4))
        assert abs(p - 0.05) < 3 * math.sqrt(0.05 * 0.95 / 100_000)

    def test_cube_side_must_divide(self):
        with pytest.raises(SchemaError):
            SimilarityConfig(J0=1, cube_side=0.3).resolved_cube_side()


class TestCoverage:
    def test_eps_one(self):
        cfg = SimilarityConfig(J0=2, ratio=0.25, eps=1.0, seed=5)
        fam = build_construction(cfg)
        rep = coverage_probability(cfg, fam, 200)
        assert rep.empirical == 1.0 and rep.exact == 1.0

    def test_single_point_is_eps(self):
        cfg = SimilarityConfig(J0=1, ratio=0.25, eps=0.3, seed=6)
        fam = build_construction(cfg)
        rep = coverage_probability(cfg, fam, 4000)
        assert rep.exact == pytest.approx(0.3)
        assert abs(rep.empirical - 0.3) <= 3 * rep.stderr

    def test_bernoulli_law(self):
        cfg = SimilarityConfig(J0=3, ratio=0.25, eps=0.05, seed=7)
        fam = build_construction(cfg)
        rep = coverage_probability(cfg, fam, 3000)
        assert rep.exact == pytest.approx(1 - 0.95 ** 27)
        assert abs(rep.empirical - rep.exact) <= 3 * rep.stderr

    def test_separation_precondition(self):
        cfg = SimilarityConfig(J0=2, ratio=0.25, eps=0.5, seed=8, cube_side=0.5)
        fam = build_construction(cfg)
        with pytest.raises(InvariantError):
            coverage_probability(cfg, fam, 10)


class TestInfSup:
    def test_eps_one_exact(self):
        cfg = SimilarityConfig(J0=1, ratio=1 / 3, eps=1.0, seed=9, x_samples=20)
        fam = build_construction(cfg)
        rep = inf_sup_experiment(cfg, fam)
        assert rep.int_f == 1.0 and rep.int_F == 1.0 and rep.ratio == 1.0

    def test_eps_zero_undefined(self):
        cfg = SimilarityConfig(J0=1, ratio=1 / 3, eps=1e-300, seed=9, x_samples=20)
        fam = build_construction(cfg)
        rep = inf_sup_experiment(cfg, fam)
        assert rep.int_f == 0.0 and math.isnan(rep.ratio)

    def test_certified_below_plain(self):
        cfg = SimilarityConfig(J0=1, ratio=1 / 3, eps=0.6, seed=10, x_samples=150)
        fam = build_construction(cfg)
        rep = inf_sup_experiment(cfg, fam)
        assert rep.int_F <= rep.int_F_plain + 1e-12

    def test_mechanism_small_net(self):
        # narrow dilation window -> small certified net -> the coverage gain
        # beats the density and the ratio exceeds 1
        cfg = SimilarityConfig(J0=2, ratio=1 / 3, eps=0.8, seed=99,
                               x_samples=400, t_lo=1.0, t_hi=1.0001)
        fam = build_construction(cfg)
        rep = inf_sup_experiment(cfg, fam)
        assert rep.net_points < 20
        assert rep.ratio > 1.0 + 3 * rep.stderr_F

    def test_ratio_grows_with_eps_on_small_net(self):
        ratios = []
        for eps in (0.2, 0.5, 0.8):
            cfg = SimilarityConfig(J0=2, ratio=1 / 3, eps=eps, seed=99,
                                   x_samples=400, t_lo=1.0, t_hi=1.0001)
            rep = inf_sup_experiment(cfg, build_construction(cfg))
            ratios.append(rep.ratio)
        assert ratios[0] < ratios[1] < ratios[2]

    def test_certification_sound_on_dense_subsamples(self):
        # whenever the ball test passes at a net point, the plain test must
        # pass everywhere in the net cell it represents
        from boundlab.similarity import _cert_success, _plain_success
        cfg = SimilarityConfig(J0=1, ratio=1 / 3, eps=0.7, seed=21,
                               t_lo=1.0, t_hi=1.001)
        fam = build_construction(cfg)
        M = cfg.cube_count()
        side = cfg.resolved_cube_side()
        speed = fam.max_coordinate_speed()
        span = cfg.t_hi - cfg.t_lo
        n_net = int(math.ceil(span / ((side / 4) / speed))) + 1
        ts = np.linspace(cfg.t_lo, cfg.t_hi, n_net)
        spacing = span / (n_net - 1)
        rho = speed * spacing / 2
        r = RandomStream(5, 77)
        exercised = 0
        for k in range(300):
            rs = r.substream(k)
            e_seed = rs.next_u64()
            x = np.array([rs.uniform() for _ in range(cfg.J)])
            for t in ts:
                if _cert_success(fam.orbit_points(float(t)), x, e_seed,
                                 cfg.eps, M, rho):
                    lo = max(cfg.t_lo, float(t) - spacing / 2)
                    hi = min(cfg.t_hi, float(t) + spacing / 2)
                    for td in np.linspace(lo, hi, 25):
                        assert _plain_success(fam.orbit_points(float(td)), x,
                                              e_seed, cfg.eps, M)
                    exercised += 1
                    break
        assert exercised > 20

    def test_orbit_points_in_distinct_cubes_for_every_shift(self):
        # separation above one cube side forces distinct cubes whatever x is
        cfg = SimilarityConfig(J0=2, ratio=0.25, eps=0.5, seed=6)
        fam = build_construction(cfg)
        M = cfg.cube_count()
        pts = fam.orbit_points(1.5)
        r = RandomStream(9, 3)
        for _ in range(50):
            x = np.array([r.uniform() for _ in range(cfg.J)])
            cubes = {tuple(np.floor(((row + x) % 1.0) * M).astype(int) % M)
                     for row in pts}
            assert len(cubes) == fam.n_points

    def test_coarse_net_rejected(self):
        cfg = SimilarityConfig(J0=2, ratio=1 / 3, eps=0.5, seed=11,
                               x_samples=10, t_samples=5)
        fam = build_construction(cfg)
        with pytest.raises(SchemaError):
            inf_sup_experiment(cfg, fam)

    def test_budget_guard(self):
        cfg = SimilarityConfig(J0=3, ratio=0.25, eps=0.5, seed=12, x_samples=10)
        fam = build_construction(cfg)
        with pytest.raises(BudgetError) as exc:
            inf_sup_experiment(cfg, fam)
        assert exc.value.required is not None


class TestBuildB1:
    def test_full_and_empty(self):
        torus = GridTorus(1, 40)
        full = IndicatorSet.full(torus)
        empty = IndicatorSet.empty(torus)
        assert build_B1(full, [0.5, 1.5], [1.0, 1.3], [1.0]).measure == 1.0
        assert build_B1(empty, [0.5], [1.0], [1.0]).measure == 0.0

    def test_circle_toy(self):
        torus = GridTorus(1, 100)
        B = IndicatorSet.explicit(torus, [(i,) for i in range(30)])  # [0, 0.3)
        rep = build_B1(B, [0.5], [1.0], [1.0])
        assert rep.measure == pytest.approx(0.3)
        idx = rep.result.member_indices()
        assert min(idx) == 50 and max(idx) == 79

    def test_contained_in_first_union(self):
        torus = GridTorus(2, 16)
        r = RandomStream(13)
        B = IndicatorSet.explicit(
            torus, [(r.randint(16), r.randint(16)) for _ in range(40)])
        ys = [0.5, 0.25]
        ts = [1.0, 1.5, 2.0]
        v = [1.0, 0.7]
        rep = build_B1(B, ys, ts, v)
        union_first = IndicatorSet.empty(torus)
        for y in ys:
            shift = tuple(-ts[0] * y * vi for vi in v)
            union_first = union_first.union(B.translate(shift))
        inter_mask = np.array([rep.result.contains_index(torus.unflat(i))
                               for i in range(torus.n_cells)])
        union_mask = np.array([union_first.contains_index(torus.unflat(i))
                               for i in range(torus.n_cells)])
        assert np.all(union_mask[inter_mask])

    def test_size_guard(self):
        torus = GridTorus(3, 70)
        with pytest.raises(BudgetError):
            build_B1(IndicatorSet.full(torus), [0.5], [1.0], [1.0, 1.0, 1.0])

    def test_procedural_rejected(self):
        torus = GridTorus(2, 10)
        s = IndicatorSet.procedural(torus, 1, 0.5)
        with pytest.raises(SchemaError):
            build_B1(s, [0.5], [1.0], [1.0, 1.0])
