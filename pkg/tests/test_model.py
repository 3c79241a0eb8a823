import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttd_precoder.model import (
    ArrayGeometry,
    OfdmGrid,
    PathSet,
    array_gain,
    channel_matrix,
    dirichlet_gain,
    gains_over_band,
    squint_profile,
    steering,
    subcarrier_frequencies,
)

THZ = OfdmGrid(300e9, 30e9, 129)


def brute_gain(n_t, psi_k, psi_c):
    # 1/N |sum_n exp(j n pi (psi_k - psi_c))|, the plain sum form
    n = np.arange(n_t)
    return abs(np.sum(np.exp(1j * n * np.pi * (psi_k - psi_c)))) / n_t


class TestGrid:
    def test_center_is_carrier(self):
        f = subcarrier_frequencies(THZ)
        assert len(f) == 129
        assert f[64] == 300e9
        assert THZ.center == 65
        assert THZ.zeta()[64] == 1.0

    def test_first_subcarrier(self):
        f = subcarrier_frequencies(THZ)
        assert f[0] == pytest.approx(300e9 + (30e9 / 129) * -64, rel=1e-15)
        assert f[0] / 1e9 == pytest.approx(285.116, abs=5e-4)

    def test_zero_bandwidth(self):
        f = subcarrier_frequencies(OfdmGrid(300e9, 0.0, 17))
        assert np.all(f == 300e9)

    def test_symmetric_and_increasing(self):
        f = subcarrier_frequencies(THZ)
        assert np.all(np.diff(f) > 0)
        np.testing.assert_allclose(f + f[::-1], 2 * 300e9, rtol=1e-15)
        assert THZ.zeta().mean() == pytest.approx(1.0, abs=1e-15)

    def test_single_carrier(self):
        g = OfdmGrid(1e9, 1e8, 1)
        assert g.frequencies().tolist() == [1e9]

    @pytest.mark.parametrize("kwargs", [
        dict(fc=300e9, bandwidth=30e9, n_subcarriers=128),
        dict(fc=300e9, bandwidth=30e9, n_subcarriers=0),
        dict(fc=0.0, bandwidth=0.0, n_subcarriers=1),
        dict(fc=1e9, bandwidth=2e9, n_subcarriers=3),
        dict(fc=1e9, bandwidth=-1.0, n_subcarriers=3),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            OfdmGrid(**kwargs)

    def test_index_bounds(self):
        with pytest.raises(IndexError):
            THZ.check_index(0)
        with pytest.raises(IndexError):
            THZ.check_index(130)


class TestGeometry:
    def test_subarray_size(self):
        g = ArrayGeometry(256, 16, 1)
        assert g.n_ps == 16

    def test_half_wavelength(self):
        g = ArrayGeometry.half_wavelength(16, 4, 1, 300e9)
        assert g.spacing == pytest.approx(3e8 / 600e9)

    def test_invalid(self):
        with pytest.raises(ValueError):
            ArrayGeometry(30, 16, 1)
        with pytest.raises(ValueError):
            ArrayGeometry(4, 4, 8)


class TestSteering:
    def test_single_element(self):
        np.testing.assert_allclose(steering(1, 0.37), [1.0])

    def test_broadside(self):
        np.testing.assert_allclose(steering(4, 0.0), [0.5] * 4)

    def test_endfire(self):
        np.testing.assert_allclose(steering(2, 1.0), np.array([1, -1]) / np.sqrt(2), atol=1e-15)

    def test_zero_antennas(self):
        with pytest.raises(ValueError):
            steering(0, 0.1)

    @given(st.integers(1, 2048), st.floats(-1, 1))
    def test_unit_norm(self, n, psi):
        v = steering(n, psi)
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        assert v[0] == pytest.approx(1 / np.sqrt(n))
        np.testing.assert_allclose(np.abs(v), 1 / np.sqrt(n), rtol=1e-12)


class TestChannel:
    def test_scalar(self):
        geom = ArrayGeometry(1, 1, 1)
        H = channel_matrix(THZ, geom, PathSet.from_directions([0.3], n_r=1), 10)
        np.testing.assert_allclose(H, [[1.0]])

    def test_rank_one_norm(self):
        geom = ArrayGeometry(16, 4, 1)
        paths = PathSet.from_directions([0.8], n_r=4, phi_c=[-0.2])
        H = channel_matrix(THZ, geom, paths, 3)
        s = np.linalg.svd(H, compute_uv=False)
        assert s[1] < 1e-10 * s[0]
        assert np.linalg.norm(H, "fro") == pytest.approx(np.sqrt(16 * 4), rel=1e-12)

    def test_zero_gain_path(self):
        geom = ArrayGeometry(8, 2, 2)
        one = PathSet(np.array([1.0]), np.array([1e-9]), np.array([0.4]), np.array([0.1]), 2)
        two = PathSet(np.array([1.0, 0.0]), np.array([1e-9, 5e-9]), np.array([0.4, -1.0]),
                      np.array([0.1, 0.3]), 2)
        np.testing.assert_allclose(channel_matrix(THZ, geom, two, 7),
                                   channel_matrix(THZ, geom, one, 7) / np.sqrt(2), atol=1e-14)

    def test_matches_explicit_sum(self):
        rng = np.random.default_rng(3)
        geom = ArrayGeometry(8, 2, 2)
        paths = PathSet.random(rng, 2, n_r=3)
        k = 40
        f_k = THZ.frequencies()[k - 1]
        zeta = f_k / THZ.fc
        H = np.zeros((8, 3), complex)
        for a, tau, aod, aoa in zip(paths.alpha, paths.tau, paths.aod, paths.aoa):
            at = np.exp(-1j * np.pi * np.arange(8) * zeta * np.sin(aod)) / np.sqrt(8)
            ar = np.exp(-1j * np.pi * np.arange(3) * zeta * np.sin(aoa)) / np.sqrt(3)
            H += a * np.exp(-2j * np.pi * tau * f_k) * np.outer(at, ar.conj())
        H *= np.sqrt(8 * 3 / 2)
        np.testing.assert_allclose(channel_matrix(THZ, geom, paths, k), H, atol=1e-12)

    def test_bad_index(self):
        with pytest.raises(IndexError):
            channel_matrix(THZ, ArrayGeometry(4, 2, 1), PathSet.from_directions([0.1]), 200)


class TestArrayGain:
    def test_center_is_one(self):
        assert array_gain(steering(1024, 0.8), THZ, 65, 0.8) == pytest.approx(1.0, abs=1e-12)

    def test_edge_loss_large_array(self):
        g = array_gain(steering(1024, 0.8), THZ, 1, 0.8)
        assert g == pytest.approx(brute_gain(1024, THZ.zeta()[0] * 0.8, 0.8), abs=1e-12)
        assert g < 0.05

    def test_lemma1_trend(self):
        k = 20
        gains = [array_gain(steering(n, 0.8), THZ, k, 0.8) for n in (16, 128, 1024)]
        assert gains[0] > gains[1] > gains[2]

    def test_rejects_unnormalised(self):
        with pytest.raises(ValueError):
            array_gain(np.ones(4), THZ, 1, 0.0)

    @settings(max_examples=200)
    @given(st.sampled_from([2, 16, 128, 1024]), st.floats(-1, 1), st.integers(1, 129))
    def test_closed_form_agrees(self, n_t, psi, k):
        delta = 0.5 * np.pi * (THZ.zeta()[k - 1] - 1) * psi
        inner = array_gain(steering(n_t, psi), THZ, k, psi)
        assert inner == pytest.approx(float(dirichlet_gain(n_t, delta)), abs=1e-9)
        assert inner == pytest.approx(brute_gain(n_t, THZ.zeta()[k - 1] * psi, psi), abs=1e-9)

    def test_dirichlet_singular(self):
        assert dirichlet_gain(64, 0.0) == 1.0
        assert dirichlet_gain(64, np.pi) == pytest.approx(1.0)

    def test_vectorised_matches_scalar(self):
        beams = np.stack([steering(32, 0.5)] * 129)
        vec = gains_over_band(beams, THZ, 0.5)
        scalar = [array_gain(beams[k - 1], THZ, k, 0.5) for k in (1, 30, 65, 129)]
        np.testing.assert_allclose(vec[[0, 29, 64, 128]], scalar, atol=1e-12)


class TestSquintProfile:
    def test_no_bandwidth(self):
        np.testing.assert_array_equal(squint_profile(OfdmGrid(300e9, 0.0, 33), 1024, 0.8), 1.0)

    def test_peak_at_center(self):
        p = squint_profile(THZ, ArrayGeometry(16, 16), 0.8)
        assert int(np.argmax(p)) + 1 == 65
        assert p[64] == 1.0

    def test_mean_large_array(self):
        assert squint_profile(THZ, 1024, 0.8).mean() < 0.1

    @given(st.sampled_from([1, 16, 128, 1024]), st.floats(-1, 1))
    def test_symmetric(self, n_t, psi):
        p = squint_profile(THZ, n_t, psi)
        np.testing.assert_allclose(p, p[::-1], atol=1e-9)

    def test_lemma1_convergence(self):
        k = 1
        gains = [squint_profile(THZ, 2 ** p, 0.8)[k - 1] for p in range(4, 17, 2)]
        assert gains[-1] < 1e-3
