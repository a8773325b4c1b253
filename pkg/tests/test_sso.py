"""Tests for spherical scattering operator assembly."""
import numpy as np
import pytest

from shell_gsm import presets
from shell_gsm.errors import DomainError, GeometryError
from shell_gsm.media import VACUUM, HomogeneousRegion, ShellGeometry, free_space_wavenumber, isotropic, split_segment
from shell_gsm.oracles import mie_solid_sphere
from shell_gsm.radial import SolverOptions
from shell_gsm.sso import (
    SSOSet,
    assemble,
    assemble_sweep,
    default_lmax,
    frequency_grid,
    inout_scattering_map,
    max_singular_values,
    mode_scattering_matrix,
    transition_entries,
)
from shell_gsm.specfun import TE, TM, mode_count

F = 3.5e9


class TestSSOSet:

    def test_vacuum_constructor(self):
        sso = SSOSet.vacuum(3, F)
        assert sso.num_modes == mode_count(3)
        np.testing.assert_array_equal(sso.phi, 1)
        np.testing.assert_array_equal(sso.rho, 0)

    def test_spread_follows_ordering(self):
        """Entries depend on (tau, l) only and are spread over the canonical modes."""
        table = np.arange(4 * 2 * 2, dtype=complex).reshape(4, 2, 2)
        sso = SSOSet.from_table(F, table)
        # l=1 block: TE, TM, TE, TM, ...; then l=2
        assert sso.t[:6].tolist() == [0, 2, 0, 2, 0, 2]
        assert sso.t[6] == 1 and sso.t[7] == 3
        assert sso.entry(TM, 2, "psi") == table[3, 1, 1]

    def test_immutable(self):
        sso = SSOSet.vacuum(2, F)
        with pytest.raises(ValueError):
            sso.t[0] = 1.0

    def test_bad_table(self):
        with pytest.raises(DomainError):
            SSOSet.from_table(F, np.zeros((3, 2, 4)))

    def test_unknown_entry(self):
        with pytest.raises(DomainError):
            SSOSet.vacuum(2, F).entry(TE, 3, "t")
        with pytest.raises(DomainError):
            SSOSet.vacuum(2, F).entry(TE, 1, "sigma")

    def test_per_degree_rows(self):
        rows = SSOSet.vacuum(2, F).per_degree()
        assert len(rows) == 4
        assert rows[0]["tau"] == TE and rows[-1]["tau"] == TM and rows[-1]["l"] == 2


class TestAssembly:

    def test_vacuum_shell_is_identity(self):
        """A shell of the surrounding medium scatters nothing."""
        sso = assemble(ShellGeometry.vacuum(0.15, 0.18), F)
        np.testing.assert_allclose(sso.t, 0, atol=1e-12)
        np.testing.assert_allclose(sso.rho, 0, atol=1e-12)
        np.testing.assert_allclose(sso.phi, 1, atol=1e-12)
        np.testing.assert_allclose(sso.psi, 1, atol=1e-12)

    def test_default_lmax(self, lossy_shell_sso):
        """kf ra = 13.2 at 3.5 GHz gives lmax = 33."""
        assert lossy_shell_sso.lmax == default_lmax(presets.lossy_dielectric_shell(), F) == 33

    @pytest.mark.parametrize("eps", [5.0, 5 - 0.5j])
    def test_mie_equivalence(self, eps):
        """A shell with bubble = shell medium is the solid sphere."""
        g = presets.solid_sphere(eps)
        sso = assemble(g, F)
        mie = mie_solid_sphere(eps, 1.0, presets.RA, VACUUM, free_space_wavenumber(F), sso.lmax)
        rel = np.abs(sso.table[0] - mie.transition) / np.abs(mie.transition)
        assert rel.max() < 1e-10

    def test_mie_equivalence_magnetic(self):
        g = presets.solid_sphere(3 - 0.2j, 2.0)
        sso = assemble(g, F, 12)
        mie = mie_solid_sphere(3 - 0.2j, 2.0, presets.RA, VACUUM, free_space_wavenumber(F), 12)
        np.testing.assert_allclose(sso.table[0], mie.transition, rtol=1e-10)

    @pytest.mark.slow
    def test_mie_equivalence_band(self):
        for f in frequency_grid(3.2e9, 3.8e9, 7):
            g = presets.solid_sphere(5 - 0.5j)
            sso = assemble(g, f)
            mie = mie_solid_sphere(5 - 0.5j, 1.0, presets.RA, VACUUM, free_space_wavenumber(f), sso.lmax)
            np.testing.assert_allclose(sso.table[0], mie.transition, rtol=1e-10)

    @pytest.mark.slow
    @pytest.mark.parametrize("shell", [presets.lossy_dielectric_shell, presets.uniaxial_shell])
    def test_closed_form_matches_integration_band(self, shell):
        """All four entry sets agree between the closed-form and integrated layer solves."""
        numeric = SolverOptions(force_numeric=True)
        g = shell()
        for f in frequency_grid(3.2e9, 3.8e9, 7):
            closed = assemble(g, f)
            integrated = assemble(g, f, closed.lmax, numeric)
            for kind in range(4):
                scale = np.abs(closed.table[kind]).max()
                assert np.abs(integrated.table[kind] - closed.table[kind]).max() / scale < 1e-8

    def test_reciprocity(self, uniaxial_sso):
        """Phi = Psi for vacuum bubble and exterior."""
        np.testing.assert_allclose(uniaxial_sso.phi, uniaxial_sso.psi, atol=1e-10)

    def test_reciprocity_with_matched_regions(self):
        """Phi = Psi still holds when bubble and exterior share a medium."""
        region = HomogeneousRegion(2.0, 1.0)
        g = presets.two_layer_uniaxial_shell(bubble=region, exterior=region)
        sso = assemble(g, F, 10)
        np.testing.assert_allclose(sso.phi, sso.psi, atol=1e-10)

    def test_lossless_unitarity(self, rng):
        sso = assemble(presets.random_uniaxial_stack(rng, 3), F)
        for tau in (TE, TM):
            for l in range(1, sso.lmax + 1):
                s = np.linalg.svd(inout_scattering_map(sso, tau, l), compute_uv=False)
                np.testing.assert_allclose(s, 1.0, atol=1e-9)

    def test_lossy_passivity(self, rng):
        sso = assemble(presets.random_uniaxial_stack(rng, 3, lossy=True), F)
        assert max_singular_values(sso).max() <= 1.0 + 1e-9

    @pytest.mark.slow
    def test_unitarity_many_stacks(self, rng):
        for _ in range(50):
            sso = assemble(presets.random_uniaxial_stack(rng, 4), F)
            for tau in (TE, TM):
                for l in range(1, sso.lmax + 1):
                    s = np.linalg.svd(inout_scattering_map(sso, tau, l), compute_uv=False)
                    np.testing.assert_allclose(s, 1.0, atol=1e-9)

    @pytest.mark.slow
    def test_passivity_many_stacks(self, rng):
        for _ in range(50):
            sso = assemble(presets.random_uniaxial_stack(rng, 4, lossy=True), F)
            assert max_singular_values(sso).max() <= 1.0 + 1e-9

    def test_interface_split_invariance(self, lossy_shell_sso, rng):
        g = presets.lossy_dielectric_shell()
        scale = np.abs(lossy_shell_sso.table).max()
        for radius in rng.uniform(presets.RB, presets.RA, 5):
            split = assemble(split_segment(g, 0, float(radius)), F, lossy_shell_sso.lmax)
            assert np.abs(split.table - lossy_shell_sso.table).max() / scale < 1e-10

    def test_lossy_shell_reflects(self, lossy_shell_sso):
        assert np.abs(lossy_shell_sso.t).max() > 1e-3
        assert np.abs(lossy_shell_sso.rho).max() > 1e-3

    def test_transition_alone(self, lossy_shell_sso):
        g = presets.lossy_dielectric_shell()
        t = transition_entries(g, F, lossy_shell_sso.lmax)
        np.testing.assert_allclose(t, lossy_shell_sso.table[0], rtol=1e-14)

    def test_mode_matrix(self, lossy_shell_sso):
        m = mode_scattering_matrix(lossy_shell_sso, TM, 3)
        assert m[0, 0] == lossy_shell_sso.entry(TM, 3, "t")
        assert m[1, 0] == lossy_shell_sso.entry(TM, 3, "phi")

    def test_threads_match_serial(self):
        g = presets.two_layer_isotropic_shell()
        serial = assemble(g, F, 8)
        threaded = assemble(g, F, 8, threads=4)
        np.testing.assert_array_equal(serial.table, threaded.table)

    def test_graded_shell(self):
        sso = assemble(presets.graded_shell(), F, 6)
        assert np.all(np.isfinite(sso.table))
        assert max_singular_values(sso).max() <= 1.0 + 1e-8

    def test_invalid_geometry(self):
        with pytest.raises(GeometryError):
            assemble(ShellGeometry(0.15, 0.18), F)

    def test_nonpositive_frequency(self):
        with pytest.raises(DomainError):
            assemble(presets.lossy_dielectric_shell(), 0.0)


class TestSweep:

    def test_frequency_grid(self):
        assert frequency_grid(3.2e9, 3.8e9, 7)[3] == pytest.approx(3.5e9)
        assert frequency_grid(1e9, 2e9, 1) == [1e9]
        with pytest.raises(DomainError):
            frequency_grid(1e9, 2e9, 0)

    def test_sweep_points(self):
        ssos = assemble_sweep(presets.lossy_dielectric_shell(), [3.4e9, 3.6e9], lmax=5, threads=2)
        assert [s.frequency for s in ssos] == [3.4e9, 3.6e9]
        assert all(s.lmax == 5 for s in ssos)

    def test_exterior_medium(self):
        """Operators referred to a dielectric exterior stay passive."""
        g = ShellGeometry.homogeneous(0.15, 0.18, isotropic(4.0), exterior=HomogeneousRegion(2.0))
        sso = assemble(g, F, 10)
        assert sso.exterior.eps == 2.0
        assert max_singular_values(sso).max() <= 1.0 + 1e-9
