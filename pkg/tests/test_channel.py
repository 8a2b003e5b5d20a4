import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from thzvr import channel as chn
from thzvr.channel import ChannelParams

mp.mp.dps = 30
C = mp.mpf(299792458)
KB = mp.mpf("1.380649e-23")


def test_aperture_matches_high_precision():
    f = mp.mpf(10) ** 12
    ref = C**2 / (16 * mp.pi**2 * f**2)
    assert chn.aperture(1e12) == pytest.approx(float(ref), rel=1e-14)


def test_received_power_at_one_metre():
    ch = ChannelParams()
    ref = C**2 / (16 * mp.pi**2 * mp.mpf(10) ** 24) * mp.e ** (-mp.mpf("0.0016"))
    assert chn.received_power(ch, 1.0, 1.0) == pytest.approx(float(ref), rel=1e-13)


def test_path_loss_is_inverse_gain():
    ch = ChannelParams()
    d = np.array([0.5, 2.0, 7.0])
    assert np.allclose(chn.received_power(ch, 1.0, d) * chn.path_loss(ch.f, ch.K, d), ch.A0 * 16 * np.pi**2 * ch.f**2 / chn.SPEED_OF_LIGHT**2)


def test_noise_floor_components():
    ch = ChannelParams(d0=3.0)
    thermal = KB * 300 * mp.mpf(10) ** 10
    absorb = C**2 / (16 * mp.pi**2 * mp.mpf(10) ** 24) / 9 * (1 - mp.e ** (-mp.mpf("0.0048")))
    assert chn.thermal_noise(ch) == pytest.approx(float(thermal), rel=1e-12)
    assert chn.noise_floor(ch) == pytest.approx(float(thermal + absorb), rel=1e-12)


def test_capacity_matches_shannon():
    ch = ChannelParams(d0=2.0, W=5e9)
    I = 1e-10
    prx = C**2 / (16 * mp.pi**2 * mp.mpf(10) ** 24) / 4 * mp.e ** (-mp.mpf("0.0032"))
    n0 = KB * 300 * mp.mpf(5) * 10**9 + C**2 / (16 * mp.pi**2 * mp.mpf(10) ** 24) / 4 * (1 - mp.e ** (-mp.mpf("0.0032")))
    ref = 5e9 * mp.log(1 + prx / (n0 + I), 2)
    assert chn.capacity(ch, I) == pytest.approx(float(ref), rel=1e-12)
    assert chn.transmission_time(ch, I) == pytest.approx(float(10e6 / ref), rel=1e-12)


def test_zero_absorption_gives_unit_transmittance():
    assert chn.transmittance(0.0, 5.0) == 1.0
    assert chn.absorption_noise(ChannelParams(K=0.0), 1.0, 2.0) == 0.0


@pytest.mark.parametrize("field,value", [("f", 0.0), ("W", -1.0), ("d0", 0.0), ("L", 0.0), ("K", -0.1)])
def test_params_reject_nonphysical(field, value):
    with pytest.raises(ValueError, match=field):
        ChannelParams(**{field: value})


def test_sinr_rejects_negative_denominator():
    ch = ChannelParams()
    with pytest.raises(ValueError):
        chn.sinr(ch, -2 * chn.noise_floor(ch))


def test_vectorised_calls_keep_shape():
    ch = ChannelParams()
    I = np.linspace(0, 1e-9, 7)
    assert chn.capacity(ch, I).shape == (7,)
    assert isinstance(chn.capacity(ch, 0.0), float)


@settings(max_examples=60, deadline=None)
@given(hs.floats(0, 1e-8), hs.floats(1e-12, 1e-8))
def test_capacity_decreases_with_interference(I, dI):
    ch = ChannelParams()
    assert chn.capacity(ch, I + dI) < chn.capacity(ch, I)


@settings(max_examples=60, deadline=None)
@given(hs.floats(0.1, 30), hs.floats(0.1, 30))
def test_received_power_decreases_with_distance(d1, d2):
    ch = ChannelParams()
    lo, hi = sorted((d1, d2))
    if hi - lo > 1e-9:
        assert chn.received_power(ch, 1.0, hi) < chn.received_power(ch, 1.0, lo)


def test_transmission_time_scales_with_packet():
    ch = ChannelParams()
    assert chn.transmission_time(ch.with_(L=2e7), 0.0) == pytest.approx(2 * chn.transmission_time(ch, 0.0))
    assert math.isfinite(chn.transmission_time(ch, 0.0))
