import numpy as np
import pytest
from scipy.integrate import quad

from spectrafit.errors import NoConvergenceError
from spectrafit.generators import BMParams
from spectrafit.laws import (BlockModelLaw, KestenMcKay, KestenMcKayScaled,
                             SemicircleP, SemicircleUnit,
                             block_law_support_radius, block_model_density,
                             block_stieltjes, block_variance_ratios, law_cdf,
                             law_density)
from spectrafit.spectrum import GridSpec

ALL_LAWS = [SemicircleUnit(), SemicircleP(0.5), SemicircleP(0.1),
            KestenMcKay(3), KestenMcKay(7), KestenMcKayScaled(3),
            KestenMcKayScaled(10)]


class TestDensities:
    def test_semicircle_center(self):
        assert SemicircleUnit().density(0.0) == pytest.approx(1.0 / np.pi)

    def test_semicircle_p_center(self):
        # variance p(1-p) = 1/4 doubles the peak height
        assert SemicircleP(0.5).density(0.0) == pytest.approx(2.0 / np.pi)

    def test_kesten_mckay_center(self):
        d = 3
        expected = d * np.sqrt(4 * (d - 1)) / (2 * np.pi * d * d)
        assert KestenMcKay(3).density(0.0) == pytest.approx(expected)
        assert expected == pytest.approx(0.1500527, abs=1e-6)

    def test_degree_minimum(self):
        with pytest.raises(ValueError):
            KestenMcKay(2)
        with pytest.raises(ValueError):
            KestenMcKayScaled(2)

    @pytest.mark.parametrize("law", ALL_LAWS)
    def test_zero_outside_support(self, law):
        lo, hi = law.support
        xs = np.array([lo - 0.5, hi + 0.5, lo - 10.0, hi + 10.0])
        assert np.all(law.density(xs) == 0.0)

    @pytest.mark.parametrize("law", ALL_LAWS)
    def test_unit_mass(self, law):
        lo, hi = law.support
        mass, _ = quad(lambda t: float(law.density(t)), lo, hi, limit=400)
        assert mass == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("law", ALL_LAWS)
    def test_symmetry(self, law):
        xs = np.linspace(0.0, law.support[1], 50)
        assert np.allclose(law.density(xs), law.density(-xs), atol=1e-12)


class TestCdfs:
    @pytest.mark.parametrize("law", ALL_LAWS)
    def test_cdf_matches_quadrature(self, law):
        lo, hi = law.support
        for x in np.linspace(lo, hi, 9):
            assert float(law.cdf(x)) == pytest.approx(law_cdf(law, x),
                                                      abs=1e-6)

    def test_semicircle_closed_form_tight(self):
        law = SemicircleUnit()
        for x in (-1.5, -0.3, 0.0, 0.7, 1.9):
            assert float(law.cdf(x)) == pytest.approx(law_cdf(law, x),
                                                      abs=1e-8)

    @pytest.mark.parametrize("law", ALL_LAWS)
    def test_cdf_limits(self, law):
        lo, hi = law.support
        assert float(law.cdf(lo - 1.0)) == 0.0
        assert float(law.cdf(hi + 1.0)) == pytest.approx(1.0, abs=1e-6)

    def test_law_density_dispatch(self):
        assert law_density(SemicircleUnit(), 0.0) == pytest.approx(1 / np.pi)


class TestStieltjesSolver:
    def test_single_block_known_point(self):
        # one block reduces to the semicircle transform;
        # Im s(i) = (sqrt(5) - 1) / 2
        law = BlockModelLaw(ratios=(1.0, 1.0), M=1)
        sol = block_stieltjes(law, 1j)
        assert sol.s.imag == pytest.approx((np.sqrt(5) - 1) / 2, abs=1e-9)

    def test_branch_condition_holds(self):
        law = BlockModelLaw(ratios=(0.25, 1.0, 0.4), M=2)
        sol = block_stieltjes(law, complex(0.5, 1e-3))
        assert np.all(sol.c.imag > 0)

    def test_rejects_lower_half_plane(self):
        law = BlockModelLaw(ratios=(1.0, 1.0), M=1)
        with pytest.raises(ValueError):
            block_stieltjes(law, complex(0.0, -1.0))

    def test_no_convergence_raises(self):
        law = BlockModelLaw(ratios=(1.0, 1.0), M=1)
        with pytest.raises(NoConvergenceError):
            block_stieltjes(law, 1j, max_iter=2)

    def test_density_mass_near_one(self):
        law = BlockModelLaw(ratios=(1.0, 1.0), M=1)
        curve, raw_mass = block_model_density(law, GridSpec(-2.5, 2.5, 301))
        assert raw_mass == pytest.approx(1.0, abs=5e-3)
        assert curve.mass() == pytest.approx(1.0, abs=1e-12)

    def test_support_radius_bound(self):
        law = BlockModelLaw(ratios=(1.0, 1.0), M=1)
        assert block_law_support_radius(law) >= 2.0


class TestVarianceRatios:
    def test_equal_blocks_scalar_off(self):
        params = BMParams([300, 300, 300], 0.2, [0.8, 0.5, 0.6])
        law = block_variance_ratios(params)
        denom = 0.8 * 0.2
        assert law.p_star == 0.8
        assert law.ratios[0] == pytest.approx(0.2 * 0.8 / denom)
        assert law.ratios[1] == pytest.approx(1.0)
        assert law.ratios[2] == pytest.approx(0.25 / denom)
        assert law.ratios[3] == pytest.approx(0.24 / denom)
        assert law.within_hypotheses

    def test_unequal_blocks_flagged(self):
        law = block_variance_ratios(BMParams([10, 20], 0.1, [0.5, 0.5]))
        assert not law.within_hypotheses
        assert any("unequal" in note for note in law.notes)

    def test_pairwise_off_block_flagged(self):
        p0 = [[0.0, 0.1, 0.2], [0.1, 0.0, 0.05], [0.2, 0.05, 0.0]]
        params = BMParams([10, 10, 10], p0, [0.5, 0.5, 0.5])
        law = block_variance_ratios(params)
        assert not law.within_hypotheses
        # mean off-block probability feeds the first ratio
        p_mean = np.mean([0.1, 0.2, 0.05])
        assert law.ratios[0] == pytest.approx(p_mean * (1 - p_mean) / 0.25)

    def test_ratio_count(self):
        with pytest.raises(ValueError):
            BlockModelLaw(ratios=(1.0,), M=2)
