import numpy as np
import pytest

from spectrafit.errors import InfeasibleSpaceError
from spectrafit.fitting import (FitConfig, SearchSpace, default_space,
                                fit_parameter, golden_section, _local_minima,
                                mc_average_esd, params_for, select_model)
from spectrafit.generators import (BAParams, DRParams, ERParams, GRGParams,
                                   WSParams, generate)
from spectrafit.graphs import derive_seed


class TestGoldenSection:
    def test_quadratic_minimum(self):
        x, fx = golden_section(lambda t: (t - 0.37) ** 2, 0.0, 1.0, 1e-10)
        assert x == pytest.approx(0.37, abs=1e-8)
        assert fx == pytest.approx(0.0, abs=1e-15)

    def test_boundary_minimum(self):
        x, _ = golden_section(lambda t: t, 0.0, 1.0, 1e-8)
        assert x == pytest.approx(0.0, abs=1e-7)

    def test_agrees_with_fine_grid(self):
        f = lambda t: np.cos(3 * t) + 0.5 * t
        xs = np.linspace(0.5, 2.0, 20001)
        grid_best = xs[np.argmin([f(x) for x in xs])]
        golden_best, _ = golden_section(f, 0.5, 2.0, 1e-10)
        assert golden_best == pytest.approx(grid_best, abs=1e-4)


class TestSearchSpace:
    def test_axes_step(self):
        sp = SearchSpace(((0.0, 1.0),), (0.25,), mode="grid")
        assert sp.axes()[0].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_integer_axes(self):
        sp = SearchSpace(((1.0, 5.0),), (1.0,), mode="grid", integer=True)
        assert sp.axes()[0].tolist() == [1.0, 2.0, 3.0, 4.0, 5.0]

    def test_explicit_values(self):
        sp = SearchSpace(((0.0, 1.0),), mode="grid", values=((0.1, 0.9),))
        assert sp.axes()[0].tolist() == [0.1, 0.9]

    def test_empty_interval_rejected(self):
        with pytest.raises(InfeasibleSpaceError):
            SearchSpace(((1.0, 1.0),), (0.1,))

    def test_golden_needs_one_continuous_parameter(self):
        with pytest.raises(ValueError):
            SearchSpace(((0.0, 1.0), (0.0, 1.0)), (0.1, 0.1), mode="golden")
        with pytest.raises(ValueError):
            SearchSpace(((0.0, 5.0),), (1.0,), mode="grid+golden",
                        integer=True)

    def test_oversized_step_rejected(self):
        sp = SearchSpace(((0.2, 0.3),), (5.0,), mode="grid", integer=True)
        with pytest.raises(InfeasibleSpaceError):
            sp.axes()


class TestLocalMinima:
    def test_single_minimum(self):
        vals = np.array([5.0, 3.0, 1.0, 2.0, 4.0])
        assert _local_minima(vals) == [2]

    def test_jitter_in_flat_region_ignored(self):
        # far-field jitter sits well above the best value
        vals = np.array([2.0, 1.99, 2.0, 1.98, 2.0, 1.0, 0.1, 1.0])
        assert _local_minima(vals) == [6]

    def test_two_competitive_minima(self):
        vals = np.array([1.0, 0.1, 1.0, 0.12, 1.0])
        assert _local_minima(vals) == [1, 3]


class TestParamsMapping:
    def test_all_families(self):
        cfg = FitConfig()
        assert params_for("er", (0.2,), cfg, 10) == ERParams(0.2)
        assert params_for("dr", (3.2,), cfg, 10) == DRParams(3)
        assert params_for("grg", (0.4,), cfg, 10) == GRGParams(0.4)
        assert params_for("ws", (0.3,), cfg, 10) == WSParams(0.3, K=4)
        assert params_for("ba", (1.5,), cfg, 10) == BAParams(1.5, m=1)
        bm = params_for("bm", (0.1, 0.6), cfg, 11)
        assert bm.block_sizes == (5, 6)
        assert bm.p_within == (0.6, 0.6)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            params_for("nope", (0.1,), FitConfig(), 10)


class TestMonteCarloCurves:
    def test_pooled_cdf_size(self):
        curve, pooled = mc_average_esd(ERParams(0.2), 30, 4, 99)
        assert pooled(np.inf) == 1.0
        assert curve.mass() == pytest.approx(1.0, abs=5e-3)

    def test_deterministic(self):
        c1, p1 = mc_average_esd(ERParams(0.2), 30, 3, 42)
        c2, p2 = mc_average_esd(ERParams(0.2), 30, 3, 42)
        assert np.array_equal(c1.values, c2.values)
        assert np.array_equal(p1.support, p2.support)

    def test_density_skipped_when_not_needed(self):
        curve, pooled = mc_average_esd(ERParams(0.2), 30, 3, 42,
                                       need_density=False)
        assert curve is None
        assert pooled.support.size > 0


class TestFitParameter:
    def test_er_analytic_recovers_probability(self):
        g = generate(ERParams(0.3), 400, derive_seed(10, 0))
        rep = fit_parameter(g, "er", cfg=FitConfig(seed=1))
        assert rep.provenance == "analytic"
        assert rep.theta[0] == pytest.approx(0.3, abs=0.05)

    def test_dr_analytic_recovers_degree(self):
        g = generate(DRParams(5), 400, derive_seed(10, 1))
        rep = fit_parameter(g, "dr", cfg=FitConfig(seed=1))
        assert rep.theta[0] == 5.0
        assert rep.warnings == []

    def test_dr_on_irregular_graph_warns(self):
        g = generate(ERParams(0.1), 100, derive_seed(10, 2))
        rep = fit_parameter(g, "dr", cfg=FitConfig(seed=1))
        assert any("not regular" in w for w in rep.warnings)

    def test_deterministic_reports(self):
        g = generate(GRGParams(0.2), 60, derive_seed(10, 3))
        cfg = dict(cfg=FitConfig(seed=5, mc_samples=3, grid_points=256),
                   space=SearchSpace(((0.05, 0.45),), (0.1,), mode="grid"))
        a = fit_parameter(g, "grg", **cfg)
        b = fit_parameter(g, "grg", **cfg)
        assert a.theta == b.theta
        assert a.value == b.value

    def test_grid_golden_consistency(self):
        # golden refinement never worsens the grid optimum
        g = generate(ERParams(0.25), 200, derive_seed(10, 4))
        coarse = SearchSpace(((0.0, 1.0),), (0.05,), mode="grid")
        refined = SearchSpace(((0.0, 1.0),), (0.05,), mode="grid+golden")
        a = fit_parameter(g, "er", space=coarse, cfg=FitConfig(seed=1))
        b = fit_parameter(g, "er", space=refined, cfg=FitConfig(seed=1))
        assert b.value <= a.value + 1e-12
        assert abs(b.theta[0] - a.theta[0]) <= 0.05

    def test_profile_kept_on_request(self):
        g = generate(ERParams(0.25), 100, derive_seed(10, 5))
        rep = fit_parameter(g, "er",
                            space=SearchSpace(((0.1, 0.5),), (0.1,),
                                              mode="grid"),
                            cfg=FitConfig(seed=1), keep_profile=True)
        assert len(rep.profile_theta) == len(rep.profile_value) == 5

    def test_unknown_family(self):
        g = generate(ERParams(0.25), 30, 1)
        with pytest.raises(ValueError):
            fit_parameter(g, "nope")

    def test_report_embeds_defaults(self):
        g = generate(ERParams(0.25), 60, derive_seed(10, 6))
        rep = fit_parameter(g, "er", cfg=FitConfig(seed=1))
        assert rep.defaults["mc_samples"] == 30
        assert "bandwidth_rule" in rep.defaults
        assert rep.defaults["scaling"] == "sqrt-n"


class TestDefaultSpaces:
    def test_fit_spaces_exist(self):
        for fam in ("er", "dr", "grg", "ws", "ba", "bm"):
            assert default_space(fam, 100, "fit") is not None

    def test_select_spaces_exist(self):
        for fam in ("er", "dr", "grg", "ws", "ba", "bm"):
            assert default_space(fam, 100, "select") is not None

    def test_dr_select_ladder_prunes_by_mean_degree(self):
        sp = default_space("dr", 500, "select", mean_degree=4.0)
        vals = sp.axes()[0]
        assert vals.min() >= 1.0
        assert vals.max() <= 20.0

    def test_unknown_purpose(self):
        with pytest.raises(ValueError):
            default_space("er", 100, "nope")


class TestSelectModel:
    def test_needs_two_candidates(self):
        g = generate(ERParams(0.2), 40, 1)
        with pytest.raises(ValueError):
            select_model(g, ["er"])

    def test_er_vs_grg(self):
        g = generate(ERParams(0.3), 80, derive_seed(20, 0))
        cfg = FitConfig(use_analytic=False, seed=3, mc_samples=8,
                        grid_points=512)
        sel = select_model(g, ["er", "grg"], cfg=cfg)
        assert sel.winner == "er"
        assert not sel.tie
        assert [f.family for f in sel.ranking()][0] == "er"

    def test_failed_candidate_flagged_not_dropped(self):
        g = generate(ERParams(0.3), 40, derive_seed(20, 1))
        bad_space = SearchSpace(((0.5, 0.6),), (1.0,), mode="grid",
                                integer=True)  # no integer in [0.5, 0.6]
        cfg = FitConfig(use_analytic=False, seed=3, mc_samples=3,
                        grid_points=256)
        sel = select_model(g, [("dr", bad_space), "er", "grg"], cfg=cfg)
        assert sel.winner in ("er", "grg")
        assert sel.failures and sel.failures[0][0] == "dr"

    def test_report_serializable(self):
        g = generate(ERParams(0.3), 60, derive_seed(20, 2))
        cfg = FitConfig(use_analytic=False, seed=3, mc_samples=3,
                        grid_points=256)
        sel = select_model(g, ["er", "ws"], cfg=cfg)
        d = sel.to_dict()
        assert set(d) == {"winner", "tie", "fits", "failures"}
        assert all("theta" in f for f in d["fits"])
