"""Tests for antenna GSM composition and the interchange file."""
import json

import numpy as np
import pytest

from shell_gsm import presets
from shell_gsm.errors import CompositionError, DomainError, GSMFormatError
from shell_gsm.gsm import (
    AntennaGSM,
    compose,
    compose_sweep,
    load_gsm,
    mode_index,
    mode_unindex,
    multiple_scattering_radius,
    respond,
    save_gsm,
)
from shell_gsm.media import HomogeneousRegion, ShellGeometry
from shell_gsm.oracles import neumann_compose
from shell_gsm.specfun import mode_count
from shell_gsm.sso import SSOSet, assemble

F = 3.5e9


class TestModeIndex:

    def test_examples(self):
        assert mode_index(1, "e", 0, 1) == 0
        assert mode_index(2, "e", 0, 1) == 1
        assert mode_index(2, "o", 1, 1) == 5
        assert mode_index(1, "e", 0, 2) == 6

    def test_unindex(self):
        assert mode_unindex(5) == (2, "o", 1, 1)
        for i in range(mode_count(4)):
            assert mode_index(*mode_unindex(i)) == i


class TestAntennaGSM:

    def test_shapes_checked(self):
        with pytest.raises(DomainError):
            AntennaGSM(F, 1, np.zeros((1, 1)), np.zeros((1, 5)), np.zeros((6, 1)), np.eye(6))

    def test_builtins(self):
        null = AntennaGSM.null(2, F)
        assert null.gamma[0, 0] == 1
        np.testing.assert_array_equal(null.S, np.eye(16))
        assert AntennaGSM.transparent(2, F, num_ports=3).num_ports == 3

    def test_random_contrast(self):
        antenna = AntennaGSM.random(3, F, contrast=0.5, seed=7)
        assert np.linalg.norm(antenna.S - np.eye(antenna.num_modes), 2) == pytest.approx(0.5)
        again = AntennaGSM.random(3, F, contrast=0.5, seed=7)
        np.testing.assert_array_equal(antenna.S, again.S)

    def test_random_low_degree(self):
        antenna = AntennaGSM.random(6, F, num_ports=3, contrast=0.6, active_lmax=2)
        active = mode_count(2)
        s_minus = antenna.S - np.eye(antenna.num_modes)
        assert np.linalg.norm(s_minus, 2) == pytest.approx(0.6)
        assert not np.any(s_minus[active:]) and not np.any(s_minus[:, active:])
        assert not np.any(antenna.R[:, active:]) and not np.any(antenna.T[active:])
        assert np.all(antenna.T[:active] != 0)

    def test_random_active_degree_bounds(self):
        dense = AntennaGSM.random(2, F, seed=4)
        capped = AntennaGSM.random(2, F, seed=4, active_lmax=9)
        np.testing.assert_array_equal(dense.S, capped.S)
        with pytest.raises(DomainError):
            AntennaGSM.random(2, F, active_lmax=0)

    def test_low_degree_antenna_composes_at_high_lmax(self):
        """Thick lossy shells give huge rho at high degree; a small antenna never couples to them."""
        lmax = 25
        sso = assemble(presets.lossy_dielectric_shell(), F, lmax)
        antenna = AntennaGSM.random(lmax, F, num_ports=5, active_lmax=2)
        eff = compose(antenna, sso)
        assert np.all(np.isfinite(eff.S))
        np.testing.assert_allclose(np.diag(eff.S)[mode_count(2):], 1 + 2 * sso.t[mode_count(2):], rtol=1e-12)


class TestCompose:

    def test_vacuum_shell_identity(self, random_antenna):
        """Composing with a vacuum shell returns the antenna GSM unchanged."""
        lmax = 8
        antenna = random_antenna(lmax, ports=5)
        eff = compose(antenna, assemble(ShellGeometry.vacuum(0.15, 0.18), F, lmax))
        for got, want in ((eff.gamma, antenna.gamma), (eff.R, antenna.R), (eff.T, antenna.T), (eff.S, antenna.S)):
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_exact_vacuum_sso(self, random_antenna):
        antenna = random_antenna(3)
        eff = compose(antenna, SSOSet.vacuum(3, F))
        np.testing.assert_allclose(eff.S, antenna.S, atol=1e-15)

    def test_transparent_antenna_sees_shell(self, lossy_shell_sso):
        """With S = 1 the effective S is 1 + 2t."""
        antenna = AntennaGSM.transparent(lossy_shell_sso.lmax, F)
        eff = compose(antenna, lossy_shell_sso)
        np.testing.assert_allclose(eff.S, np.eye(antenna.num_modes) + np.diag(2 * lossy_shell_sso.t), atol=1e-15)
        np.testing.assert_array_equal(eff.T, 0)

    def test_matches_neumann_series(self, random_antenna):
        lmax = 6
        sso = assemble(presets.lossy_dielectric_shell(), F, lmax)
        antenna = random_antenna(lmax, ports=2, contrast=0.8)
        direct = compose(antenna, sso)
        series = neumann_compose(antenna, sso)
        assert series.converged
        assert series.spectral_radius < 0.9
        for got, want in ((series.effective.gamma, direct.gamma), (series.effective.S, direct.S)):
            assert np.linalg.norm(got - want) / np.linalg.norm(want) < 1e-10

    @pytest.mark.slow
    def test_neumann_many_pairs(self):
        rng = np.random.default_rng(99)
        for seed in range(20):
            lmax = 5
            sso = assemble(presets.random_uniaxial_stack(rng, 3, lossy=True), F, lmax)
            antenna = AntennaGSM.random(lmax, F, num_ports=2, seed=seed, contrast=0.4)
            if multiple_scattering_radius(antenna, sso) >= 0.5:
                continue
            direct = compose(antenna, sso)
            series = neumann_compose(antenna, sso)
            assert np.linalg.norm(series.effective.S - direct.S) / np.linalg.norm(direct.S) < 1e-10

    def test_singular_m(self):
        """rho = 2 with S - 1 = 1 makes M = 0."""
        lmax = 1
        n = mode_count(lmax)
        table = np.zeros((4, 2, lmax), dtype=complex)
        table[2] = 2.0
        sso = SSOSet.from_table(F, table)
        antenna = AntennaGSM(F, lmax, np.zeros((1, 1)), np.zeros((1, n)), np.zeros((n, 1)), 2 * np.eye(n))
        with pytest.raises(CompositionError) as exc:
            compose(antenna, sso)
        assert exc.value.frequency == F

    def test_lmax_mismatch(self, lossy_shell_sso):
        with pytest.raises(DomainError):
            compose(AntennaGSM.transparent(4, F), lossy_shell_sso)

    def test_frequency_mismatch(self):
        with pytest.raises(DomainError):
            compose(AntennaGSM.transparent(2, F + 10.0), SSOSet.vacuum(2, F))

    def test_bubble_mismatch(self):
        antenna = AntennaGSM.transparent(2, F, bubble=HomogeneousRegion(2.0))
        with pytest.raises(DomainError, match="bubble medium"):
            compose(antenna, SSOSet.vacuum(2, F))

    def test_sweep_pairs_by_frequency(self):
        ssos = [SSOSet.vacuum(2, f) for f in (3.4e9, 3.6e9)]
        antennas = [AntennaGSM.random(2, f, seed=i) for i, f in enumerate((3.6e9, 3.4e9))]
        effs = compose_sweep(antennas, ssos, threads=2)
        np.testing.assert_allclose(effs[0].S, antennas[1].S, atol=1e-15)

    def test_sweep_missing_frequency(self):
        with pytest.raises(DomainError):
            compose_sweep([AntennaGSM.transparent(2, 1e9)], [SSOSet.vacuum(2, F)])


class TestRespond:

    def test_response(self, random_antenna):
        antenna = random_antenna(2, ports=2)
        v = np.array([1.0, 0.5j])
        a = np.zeros(antenna.num_modes, dtype=complex)
        a[3] = 2.0
        out = respond(antenna, v, a)
        np.testing.assert_allclose(out.w, antenna.gamma @ v + antenna.R @ a / 2)
        np.testing.assert_allclose(out.f_f, antenna.T @ v + (antenna.S @ a - a) / 2)

    def test_wrong_length(self, random_antenna):
        antenna = random_antenna(2, ports=2)
        with pytest.raises(DomainError):
            respond(antenna, np.ones(3), np.zeros(antenna.num_modes))
        with pytest.raises(DomainError):
            respond(antenna, np.ones(2), np.zeros(5))


class TestInterchangeFile:

    def test_save_load_exact(self, tmp_path):
        """Floats survive the file bit for bit."""
        gsms = [AntennaGSM.random(2, f, num_ports=2, seed=i) for i, f in enumerate((3.2e9, 3.5e9))]
        path = tmp_path / "antenna.json"
        save_gsm(gsms, path)
        loaded = load_gsm(path)
        assert [g.frequency for g in loaded] == [3.2e9, 3.5e9]
        for a, b in zip(gsms, loaded):
            np.testing.assert_array_equal(a.S, b.S)
            np.testing.assert_array_equal(a.gamma, b.gamma)

    def test_bubble_recorded(self, tmp_path):
        path = tmp_path / "antenna.json"
        save_gsm([AntennaGSM.transparent(1, F, bubble=HomogeneousRegion(2 - 0.1j))], path)
        assert load_gsm(path)[0].bubble == HomogeneousRegion(2 - 0.1j)

    def test_mixed_lmax_rejected(self, tmp_path):
        with pytest.raises(DomainError):
            save_gsm([AntennaGSM.transparent(1, F), AntennaGSM.transparent(2, F)], tmp_path / "x.json")

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "antenna.json"
        save_gsm([AntennaGSM.random(2, F, seed=1), AntennaGSM.random(2, 3.6e9, seed=2)], path)
        text = path.read_text()
        cut = text.rindex('"s"') + 40
        path.write_text(text[:cut])
        with pytest.raises(GSMFormatError) as exc:
            load_gsm(path)
        assert exc.value.block == "blocks[1].s"

    def test_unknown_version(self, tmp_path):
        path = tmp_path / "antenna.json"
        save_gsm([AntennaGSM.transparent(1, F)], path)
        data = json.loads(path.read_text())
        data["format_version"] = 9
        path.write_text(json.dumps(data))
        with pytest.raises(GSMFormatError, match="format_version"):
            load_gsm(path)

    def test_dimension_mismatch(self, tmp_path):
        path = tmp_path / "antenna.json"
        save_gsm([AntennaGSM.transparent(1, F)], path)
        data = json.loads(path.read_text())
        data["blocks"][0]["s"] = data["blocks"][0]["s"][:-1]
        path.write_text(json.dumps(data))
        with pytest.raises(GSMFormatError) as exc:
            load_gsm(path)
        assert exc.value.block == "blocks[0].s"

    def test_missing_block(self, tmp_path):
        path = tmp_path / "antenna.json"
        save_gsm([AntennaGSM.transparent(1, F)], path)
        data = json.loads(path.read_text())
        data["frequencies_hz"].append(4e9)
        path.write_text(json.dumps(data))
        with pytest.raises(GSMFormatError) as exc:
            load_gsm(path)
        assert exc.value.block == "blocks[1]"

    def test_missing_field(self, tmp_path):
        path = tmp_path / "antenna.json"
        save_gsm([AntennaGSM.transparent(1, F)], path)
        data = json.loads(path.read_text())
        del data["blocks"][0]["r"]
        path.write_text(json.dumps(data))
        with pytest.raises(GSMFormatError, match="missing") as exc:
            load_gsm(path)
        assert exc.value.block == "blocks[0].r"
