import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfpilots.channel import (ChannelError, DDChannelConfig, TruthOutsideGrid, apply_channel,
                              nlos_variances, noise_variance, pdp, sample_channel, snap)
from tfpilots.grid import ComplexGrid, delta, energy, zeros
from tfpilots.sigops import twisted_conv
from tfpilots.zc import separable_zc


def cfg(**kw):
    base = dict(delay_bins=6, doppler_range=(-2, 2), T=1e-6, delta_f=50.0,
                tau_los=2e-6, nu_los=50.0, kappa=0.5, beta=1e5)
    base.update(kw)
    return DDChannelConfig(**base)


def test_pdp_before_los():
    assert pdp(10e-6, 20e-6, 3e4) == 0.0
    assert pdp(10e-6, 20e-6, 0.0) == 0.0


def test_pdp_beta_zero():
    assert pdp(30e-6, 20e-6, 0.0) == 1.0


def test_pdp_value():
    assert abs(pdp(50e-6, 10e-6, 1e4) - math.exp(-0.5)) < 1e-15


def test_pdp_rejects_negative_beta():
    with pytest.raises(ChannelError):
        pdp(1.0, 0.0, -1.0)


@pytest.mark.parametrize("x,n", [(0.5, 0), (-0.5, 0), (1.5, 1), (-1.5, -1), (2.49, 2), (-2.51, -3)])
def test_snap_ties_toward_zero(x, n):
    assert snap(x) == n


def test_alpha_default():
    assert cfg().alpha == pytest.approx(50.0 * 1e-6)
    assert cfg(alpha=0.0).alpha == 0.0


def test_config_validation():
    with pytest.raises(ChannelError):
        cfg(kappa=1.5).validate()
    with pytest.raises(ChannelError):
        cfg(beta=-1.0).validate()
    with pytest.raises(TruthOutsideGrid):
        cfg(tau_los=6e-6).validate()
    with pytest.raises(TruthOutsideGrid):
        cfg(nu_los=-101.0).validate()


def test_kappa_one_single_tap_literal():
    c = cfg(kappa=1.0, normalize_nlos=False)
    H = sample_channel(c, np.random.default_rng(0))
    nz = np.argwhere(H.grid.data != 0)
    assert len(nz) == 1
    assert H.los_index == (1, 2)
    assert H.grid[1, 2] == pytest.approx(pdp(2e-6, 2e-6, 1e5))


def test_kappa_one_normalized_tap_is_one():
    H = sample_channel(cfg(kappa=1.0), np.random.default_rng(0))
    assert H.grid[H.los_index] == 1.0
    assert energy(H.grid) == pytest.approx(1.0)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 1))
def test_no_taps_before_los(seed, kappa):
    c = cfg(kappa=kappa, tau_los=3.4e-6)
    H = sample_channel(c, np.random.default_rng(seed))
    assert np.all(H.grid.data[:, :3] == 0)
    assert H.grid.row_range == (-2, 2) and H.grid.col_range == (0, 5)


def _empirical_var(c, draws=10_000, seed=11):
    g = np.random.default_rng(seed)
    acc = np.zeros((c.doppler_range[1] - c.doppler_range[0] + 1, c.delay_bins))
    for _ in range(draws):
        acc += np.abs(sample_channel(c, g).grid.data) ** 2
    return acc / draws


def test_nlos_literal_unit_variance():
    c = cfg(kappa=0.0, beta=0.0, normalize_nlos=False, delay_bins=5, doppler_range=(-1, 1))
    var = _empirical_var(c)
    l0, k0 = c.los_index
    for i in range(3):
        for k in range(5):
            if k < k0 or (i - 1, k) == (l0, k0):
                assert var[i, k] == 0.0
            else:
                assert abs(var[i, k] - 1.0) < 0.05


def test_nlos_variance_follows_pdp():
    c = cfg(kappa=0.0, beta=2e5, normalize_nlos=False, delay_bins=5, doppler_range=(-1, 1),
            tau_los=1e-6, nu_los=0.0)
    var = _empirical_var(c)
    for k in range(2, 5):
        expected = pdp(k * c.T, c.tau_los, c.beta)
        assert np.all(np.abs(var[:, k] / expected - 1) < 0.05)


def test_normalized_variances_sum_to_one():
    v = nlos_variances(cfg())
    assert v.sum() == pytest.approx(1.0)
    assert v[3, 2] == 0.0
    # referenced to the LoS delay: first post-LoS bin ratio is e^{-beta T}
    assert v[0, 3] / v[0, 2] == pytest.approx(math.exp(-0.1))


def test_apply_identity():
    X = separable_zc(5, 3)
    assert apply_channel(delta(0, 0), X).equals(X)


def test_apply_single_tap():
    X = separable_zc(5, 7)
    a, l0, k0, alpha = 0.3 - 0.4j, 2, 3, 0.013
    Y = apply_channel(delta(l0, k0, a), X, alpha=alpha)
    for m in range(Y.row_min, Y.row_max + 1):
        for n in range(Y.col_min, Y.col_max + 1):
            assert abs(Y[m, n] - a * X[m - l0, n - k0] * np.exp(2j * np.pi * alpha * (m - l0) * k0)) < 1e-14


def test_apply_uses_channel_alpha():
    c = cfg(kappa=0.6, alpha=0.02)
    H = sample_channel(c, np.random.default_rng(1))
    X = separable_zc(3, 5)
    assert apply_channel(H, X).equals(twisted_conv(H.grid, X, 0.02))


def test_noise_only_variance():
    X = ComplexGrid(np.ones((1, 1)))
    H = zeros((0, 99), (0, 99))
    Y = apply_channel(H, X, 0.0, np.random.default_rng(5))
    assert Y.data.size == 10_000
    assert abs(np.mean(np.abs(Y.data) ** 2) - 1.0) < 0.05


def test_noise_variance_references():
    X = separable_zc(5, 7)
    assert noise_variance(X, 10.0) == pytest.approx(0.1)
    assert noise_variance(X, 10.0, "per_sample") == pytest.approx(0.1 / 35)
    assert noise_variance(X, math.inf) == 0.0
    with pytest.raises(ChannelError):
        noise_variance(X, 0.0, "bogus")


def test_finite_snr_needs_rng():
    with pytest.raises(ValueError):
        apply_channel(delta(0, 0), separable_zc(3, 3), 5.0)


def test_seeded_draws_reproducible():
    a = sample_channel(cfg(), np.random.default_rng(9)).grid
    b = sample_channel(cfg(), np.random.default_rng(9)).grid
    assert a.equals(b)
