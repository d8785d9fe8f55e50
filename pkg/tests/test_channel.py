import numpy as np
import pytest
from scipy.special import j0

from bemrank import (
    ChannelModel,
    RankDeficientError,
    SystemGeometry,
    assemble_P,
    bem,
    design_pattern,
    design_patterns,
    evaluate_nmse,
    generate_channel,
    harmonic_pattern,
    ls_estimate,
    ofdm_demodulate,
    preset,
    simulate,
    transmit_vector,
)
from bemrank.channel import apply_channel, channel_matrix, power_profile, stack_coefficients


def dft(N):
    n = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(n, n) / N)


class TestGenerate:
    def test_zero_doppler_constant(self):
        geo = preset("s1", f_D=0.0)
        ch = generate_channel(geo, "sos", seed=1)
        np.testing.assert_allclose(ch.taps, ch.taps[:, :1] * np.ones((1, geo.N)), atol=1e-14)

    @pytest.mark.parametrize("model", list(ChannelModel))
    def test_deterministic(self, s1, s1_ce, model):
        a = generate_channel(s1, model, seed=7, bem=s1_ce)
        b = generate_channel(s1, model, seed=7, bem=s1_ce)
        np.testing.assert_array_equal(a.taps, b.taps)
        assert a.seed == 7
        c = generate_channel(s1, model, seed=8, bem=s1_ce)
        assert not np.allclose(a.taps, c.taps)

    def test_bem_exact(self, s1):
        B = bem("p", s1.N, s1.Q)
        ch = generate_channel(s1, ChannelModel.BEM_EXACT, seed=2, bem=B)
        np.testing.assert_allclose(ch.taps, ch.coefficients @ B.B.T, atol=0)
        assert ch.coefficients.shape == (s1.L, s1.Q)

    def test_bem_exact_needs_bem(self, s1):
        with pytest.raises(ValueError):
            generate_channel(s1, "bem-exact", seed=0)

    def test_profiles(self):
        np.testing.assert_allclose(power_profile(4), 0.25)
        p = power_profile(4, "exponential")
        assert p.sum() == pytest.approx(1.0)
        assert np.all(np.diff(p) < 0)
        with pytest.raises(ValueError):
            power_profile(4, "flat")

    def test_sos_autocorrelation(self):
        geo = SystemGeometry(N=64, N_P=8, P_sep=8, P_b=1, L_P=3, B_c=1, L=2, Q=3, f_D=8.0)
        lags = np.array([0, 4, 8, 16, 32])
        acc = np.zeros(lags.size, dtype=complex)
        seeds = range(300)
        for s in seeds:
            taps = generate_channel(geo, "sos", seed=s).taps / np.sqrt(power_profile(geo.L))[:, None]
            for k, tau in enumerate(lags):
                acc[k] += np.mean(taps[:, tau:] * taps[:, :geo.N - tau].conj())
        empirical = (acc / len(seeds)).real
        expected = j0(2 * np.pi * geo.f_D * lags / geo.N)
        assert np.max(np.abs(empirical - expected)) < 0.1
        # the lags span a real decorrelation, so the check has teeth
        assert expected.min() < 0


class TestDemodulate:
    def test_time_invariant_is_diagonal(self, s1):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(s1.L) + 1j * rng.standard_normal(s1.L)
        taps = h[:, None] * np.ones((1, s1.N))
        F = dft(s1.N)
        H = F @ channel_matrix(taps) @ F.conj().T / s1.N
        np.testing.assert_allclose(H, np.diag(np.diag(H)), atol=1e-12)
        np.testing.assert_allclose(np.diag(H), np.fft.fft(h, s1.N), atol=1e-12)
        x = rng.standard_normal(s1.N) + 0j
        y = ofdm_demodulate(x, taps, s1).y
        np.testing.assert_allclose(y, np.fft.fft(h, s1.N) * x, atol=1e-12)

    def test_matches_matrix_model(self, s1):
        ch = generate_channel(s1, "sos", seed=4)
        x = np.random.default_rng(1).standard_normal(s1.N) + 0j
        F = dft(s1.N)
        expected = F @ channel_matrix(ch.taps) @ F.conj().T @ x / s1.N
        np.testing.assert_allclose(apply_channel(ch.taps, x), expected, atol=1e-12)

    def test_tap_support(self):
        taps = np.arange(1, 9, dtype=complex).reshape(2, 4)
        H = channel_matrix(taps)
        assert H[0, 0] == 1 and H[0, 3] == 5 and H[0, 1] == 0 and H[0, 2] == 0

    def test_zero_channel(self, s1):
        x = np.ones(s1.N, dtype=complex)
        zero = np.zeros((s1.L, s1.N))
        assert not ofdm_demodulate(x, zero, s1).y.any()
        noisy = ofdm_demodulate(x, zero, s1, snr_db=0.0, seed=3).y
        assert np.all(noisy != 0)

    def test_identity_channel(self):
        geo = SystemGeometry(N=16, N_P=4, P_sep=4, P_b=1, L_P=3, B_c=1, L=1, Q=1)
        x = np.random.default_rng(2).standard_normal(16) + 1j
        np.testing.assert_allclose(ofdm_demodulate(x, np.ones((1, 16)), geo).y, x, atol=1e-14)

    def test_noise_variance(self, s1):
        zero = np.zeros((s1.L, s1.N))
        samples = np.concatenate([ofdm_demodulate(np.zeros(s1.N), zero, s1, 10.0, seed=s).y
                                  for s in range(200)])
        assert np.mean(np.abs(samples) ** 2) == pytest.approx(0.1, rel=0.05)

    def test_length_check(self, s1):
        with pytest.raises(ValueError):
            ofdm_demodulate(np.ones(10), np.zeros((s1.L, s1.N)), s1)

    def test_y_bar_is_restriction(self, s1):
        from bemrank import build_observation_indices

        fr = ofdm_demodulate(np.ones(s1.N), generate_channel(s1, "sos", seed=0), s1)
        np.testing.assert_array_equal(fr.y_bar, fr.y[build_observation_indices(s1)[1]])

    def test_qpsk_data(self, s1):
        pat = design_pattern(s1, "siso")
        x = transmit_vector(pat, s1, data=True, seed=0)
        from bemrank import embed_pattern

        pv = embed_pattern(pat, s1)
        np.testing.assert_allclose(np.abs(x[pv.data_slots]), 1.0)
        np.testing.assert_array_equal(x[pv.pilot_slots], pv.p[pv.pilot_slots])


@pytest.mark.parametrize("name, mode, n_tx, kind", [
    ("s1", "siso", 1, "ce"), ("s2", "fdkd", 1, "s"), ("s3", "mimo", 2, "p"),
    ("s4", "fdkd-mimo", 4, "gce")])
def test_observations_follow_model(name, mode, n_tx, kind):
    geo = preset(name, N_T=n_tx)
    B = bem(kind, geo.N, geo.Q, geo.f_D)
    est = assemble_P(geo, design_patterns(geo, mode), B)
    chans = [generate_channel(geo, "bem-exact", seed=10 + t, bem=B) for t in range(n_tx)]
    x = np.stack([transmit_vector(p, geo) for p in est.patterns])
    y_bar = ofdm_demodulate(x, chans, geo).y_bar
    h = stack_coefficients(chans, B)
    assert np.linalg.norm(y_bar - est.P @ h) <= 1e-9 * np.linalg.norm(y_bar)


class TestEstimate:
    def test_left_inverse(self, s1, s1_ce):
        est = assemble_P(s1, design_pattern(s1, "siso"), s1_ce)
        h = np.random.default_rng(0).standard_normal(12) + 0j
        res = ls_estimate(est, est.P @ h)
        assert np.linalg.norm(res.h_hat - h) <= 1e-9 * np.linalg.norm(h)
        assert res.taps_hat.shape == (1, s1.L, s1.N)

    def test_rank_deficient_refused(self):
        geo = SystemGeometry(N=64, N_P=8, P_sep=8, P_b=2, L_P=5, B_c=1, L=4, Q=3)
        est = assemble_P(geo, harmonic_pattern(geo, [0, 4, 8, 12, 16]), bem("ce", 64, 3))
        with pytest.raises(RankDeficientError, match="rank 8 < 12"):
            ls_estimate(est, np.zeros(geo.V))

    def test_sos_truth_uses_projection(self, s1):
        B = bem("s", s1.N, s1.Q, s1.f_D)
        est = assemble_P(s1, design_pattern(s1, "siso"), B)
        ch = generate_channel(s1, "sos", seed=3)
        res = ls_estimate(est, ofdm_demodulate(transmit_vector(est.patterns[0], s1), ch, s1).y_bar, ch)
        assert res.nmse_taps < 1e-2
        assert res.nmse_taps_per_path.shape == (1, s1.L)

    def test_snr_monotone(self):
        geo = preset("s1")
        est = assemble_P(geo, design_pattern(geo, "siso"), bem("gce", geo.N, geo.Q))
        res = simulate(est, [10.0, 30.0], trials=100, seed=11)
        assert np.median(res.nmse_coeff[30.0]) < np.median(res.nmse_coeff[10.0])
        assert np.mean(res.nmse_coeff[30.0]) < np.mean(res.nmse_coeff[10.0])

    def test_simulate_reproducible(self, s1, s1_ce):
        est = assemble_P(s1, design_pattern(s1, "siso"), s1_ce)
        a = simulate(est, [20.0], 5, seed=3, data=True, model="sos")
        b = simulate(est, [20.0], 5, seed=3, data=True, model="sos")
        assert a.nmse_coeff == b.nmse_coeff

    def test_simulate_zero_trials(self, s1, s1_ce):
        est = assemble_P(s1, design_pattern(s1, "siso"), s1_ce)
        res = simulate(est, [10.0], 0)
        assert res.nmse_coeff == {10.0: []}
        assert res.summary()[0]["trials"] == 0

    def test_guard_shrinks_data_leakage(self):
        medians = []
        for L_P in (3, 5, 7):
            geo = SystemGeometry(N=256, N_P=16, P_sep=16, P_b=3, L_P=L_P, B_c=1, L=4, Q=3, f_D=1.0)
            B = bem("gce", geo.N, geo.Q)
            pat = design_pattern(geo, "fdkd")
            est = assemble_P(geo, pat, B)
            resid = []
            for t in range(50):
                rng = np.random.default_rng(t)
                ch = generate_channel(geo, "bem-exact", rng, bem=B)
                y_bar = ofdm_demodulate(transmit_vector(pat, geo, data=True, seed=rng), ch, geo).y_bar
                clean = est.P @ stack_coefficients([ch], B)
                resid.append(np.linalg.norm(y_bar - clean) / np.linalg.norm(clean))
            medians.append(np.median(resid))
        assert medians[0] > medians[1] > medians[2]


class TestNmse:
    def test_identities(self):
        t = np.array([1 + 1j, 2, -3j])
        assert evaluate_nmse(t, t) == 0
        assert evaluate_nmse(t, 2 * t) == pytest.approx(1.0)

    def test_zero_truth(self):
        assert np.isnan(evaluate_nmse(np.zeros(3), np.ones(3)))

    def test_axis(self):
        t = np.array([[1.0, 1.0], [0.0, 0.0]])
        out = evaluate_nmse(t, 2 * t, axis=1)
        assert out[0] == pytest.approx(1.0) and np.isnan(out[1])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_nmse(np.ones(3), np.ones(4))
