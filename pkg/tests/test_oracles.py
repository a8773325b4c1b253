"""Tests for the independent reference computations."""
import numpy as np
import pytest

from shell_gsm import config, presets
from shell_gsm.gsm import AntennaGSM
from shell_gsm.media import VACUUM, HomogeneousRegion, free_space_wavenumber
from shell_gsm.oracles import (
    CheckResult,
    StaircaseError,
    mie_bistatic_rcs,
    mie_solid_sphere,
    neumann_compose,
    random_ball_points,
    staircase_convergence,
    staircase_is_monotone,
    staircase_worst_growth,
    validation_suite,
)
from shell_gsm.sso import SSOSet, assemble

F = 3.5e9


class TestMie:

    def test_lossless_unitarity(self):
        """A lossless sphere has |1 - 2a| = |1 - 2b| = 1."""
        mie = mie_solid_sphere(5.0, 1.0, 0.18, VACUUM, free_space_wavenumber(F), 30)
        np.testing.assert_allclose(np.abs(1 - 2 * mie.a), 1.0, atol=1e-10)
        np.testing.assert_allclose(np.abs(1 - 2 * mie.b), 1.0, atol=1e-10)

    def test_lossy_sphere_absorbs(self):
        mie = mie_solid_sphere(5 - 0.5j, 1.0, 0.18, VACUUM, free_space_wavenumber(F), 30)
        assert np.all(np.abs(1 - 2 * mie.a) <= 1.0 + 1e-12)
        assert np.abs(1 - 2 * mie.b).min() < 1.0

    def test_matched_sphere_is_invisible(self):
        """A sphere of the exterior medium has zero coefficients."""
        mie = mie_solid_sphere(2.0, 1.0, 0.1, HomogeneousRegion(2.0), free_space_wavenumber(F), 10)
        np.testing.assert_allclose(mie.a, 0, atol=1e-14)
        np.testing.assert_allclose(mie.b, 0, atol=1e-14)

    def test_transition_sign(self):
        mie = mie_solid_sphere(3.0, 1.0, 0.05, VACUUM, free_space_wavenumber(F), 4)
        np.testing.assert_array_equal(mie.transition[0], -mie.b)
        np.testing.assert_array_equal(mie.transition[1], -mie.a)
        assert mie.lmax == 4

    def test_small_sphere_rcs_is_rayleigh(self):
        """Back-scatter of an electrically small sphere follows the Rayleigh law."""
        k = free_space_wavenumber(1e8)
        a = 0.01
        mie = mie_solid_sphere(4.0, 1.0, a, VACUUM, k, 3)
        sigma = mie_bistatic_rcs(mie, np.array([np.pi]), np.array([0.0]))[0]
        rayleigh = 4 * np.pi * k ** 4 * a ** 6 * ((4.0 - 1) / (4.0 + 2)) ** 2
        assert sigma == pytest.approx(rayleigh, rel=1e-3)

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            mie_solid_sphere(2.0, 1.0, 0.0, VACUUM, 1.0, 3)


class TestNeumann:

    def test_no_reflection_needs_one_term(self):
        antenna = AntennaGSM.random(2, F, seed=3)
        result = neumann_compose(antenna, SSOSet.vacuum(2, F))
        assert result.converged
        assert result.terms <= 2
        np.testing.assert_allclose(result.effective.S, antenna.S, atol=1e-15)

    def test_divergent_series_flagged(self):
        lmax = 1
        table = np.zeros((4, 2, lmax), dtype=complex)
        table[1] = table[3] = 1.0
        table[2] = 1.9
        n = 6
        antenna = AntennaGSM(F, lmax, np.zeros((1, 1)), np.zeros((1, n)), np.zeros((n, 1)), 1.99 * np.eye(n))
        result = neumann_compose(antenna, SSOSet.from_table(F, table))
        assert result.spectral_radius >= 0.9
        assert not result.converged


class TestStaircase:

    @pytest.mark.slow
    def test_converges_to_continuous_profile(self):
        rows = staircase_convergence(presets.graded_shell(), (5, 10, 20, 40), [3.2e9, 3.5e9, 3.8e9])
        errors = [r.s_error for r in rows]
        for coarse, fine in zip(errors, errors[1:]):
            assert fine < coarse * 1.1
        assert errors[-1] < 1e-3

    @pytest.mark.slow
    def test_twenty_layers_match_baseline(self):
        rows = staircase_convergence(presets.graded_shell(), (5, 10, 20, 40), [config.STAIRCASE_BASELINE_HZ])
        assert staircase_is_monotone(rows)
        n20 = rows[2].s_error
        assert n20 == pytest.approx(config.STAIRCASE_N20_BASELINE, rel=config.STAIRCASE_BASELINE_RTOL)

    @pytest.mark.parametrize(
        "errors,monotone",
        [
            ((2.5e-2, 6e-3, 1.5e-3, 3.7e-4), True),
            ((1e-3, 1.05e-3, 9e-4), True),
            ((1e-3, 1.2e-3, 1e-4), False),
            ((0.0, 0.0), True),
            ((0.0, 1e-9), False),
        ],
    )
    def test_monotone_within_jitter(self, errors, monotone):
        rows = [StaircaseError(5 * 2 ** i, 0.0, e, 0.0) for i, e in enumerate(errors)]
        assert staircase_is_monotone(rows) is monotone

    def test_worst_growth(self):
        rows = [StaircaseError(n, 0.0, e, 0.0) for n, e in ((5, 4e-3), (10, 2e-3), (20, 3e-3))]
        assert staircase_worst_growth(rows) == pytest.approx(1.5)
        assert staircase_worst_growth(rows[:1]) == 0.0

    def test_constant_shell_is_exact(self):
        rows = staircase_convergence(presets.two_layer_uniaxial_shell(), (3,), [F])
        assert rows[0].s_error == 0
        assert rows[0].gamma_error == 0


class TestHelpers:

    def test_ball_points(self, rng):
        points = random_ball_points(rng, 200, 0.5)
        radii = np.linalg.norm(points, axis=1)
        assert points.shape == (200, 3)
        assert radii.max() <= 0.5
        assert radii.min() > 0

    def test_check_result(self):
        assert CheckResult("a", 1e-12, 1e-10).passed
        assert not CheckResult("b", 1e-8, 1e-10).passed
        assert not CheckResult("c", float("nan"), 1.0).passed


@pytest.mark.slow
def test_validation_suite_passes():
    results = validation_suite()
    failed = [(r.name, r.value) for r in results if not r.passed]
    assert not failed
    assert len(results) == 10
    details = {r.name: r.detail for r in results}
    assert details["lossless unitarity"] == "3 random lossless stacks"
    assert details["interface split"] == "2 random split radii"


@pytest.mark.slow
def test_full_validation_suite_passes():
    results = validation_suite(quick=False)
    failed = [(r.name, r.value) for r in results if not r.passed]
    assert not failed
    details = {r.name: r.detail for r in results}
    assert details["lossless unitarity"] == f"{config.FULL_RANDOM_STACKS} random lossless stacks"
    assert details["lossy passivity"] == f"{config.FULL_RANDOM_STACKS} random lossy stacks"
    assert details["interface split"] == f"{config.FULL_SPLIT_RADII} random split radii"
    assert {"staircase convergence", "staircase monotone", "staircase n=20 baseline"} <= set(details)
