import math

import numpy as np
import pytest

from noma_match.channel import build_channel, gains_from_positions, hata_path_loss, place_users
from noma_match.config import ConfigError, ScenarioConfig

# Okumura-Hata urban, f=900 MHz, h_b=30 m, h_m=1.5 m, d=0.35 km, evaluated
# term by term at 30 significant digits with mpmath.
HATA_900_30_15_350M = 110.343149096879


def test_hata_spot_value():
    assert hata_path_loss(350.0, ScenarioConfig()) == pytest.approx(HATA_900_30_15_350M, abs=1e-9)


def test_hata_one_km_intercept():
    # at 1 km the distance term vanishes
    assert hata_path_loss(1000.0, ScenarioConfig()) == pytest.approx(126.403286480857, abs=1e-9)


def test_hata_doubling_adds_fixed_step():
    cfg = ScenarioConfig(bs_height=42.0)
    step = (44.9 - 6.55 * math.log10(42.0)) * math.log10(2.0)
    for d in (10.0, 73.0, 250.0):
        assert hata_path_loss(2 * d, cfg) - hata_path_loss(d, cfg) == pytest.approx(step, abs=1e-10)


def test_hata_monotone_and_clamped():
    cfg = ScenarioConfig()
    d = np.linspace(1.0, 500.0, 400)
    loss = hata_path_loss(d, cfg)
    assert np.all(np.diff(loss) > 0)
    assert hata_path_loss(0.0, cfg) == hata_path_loss(1.0, cfg)
    assert hata_path_loss(0.2, cfg) == hata_path_loss(1.0, cfg)


def test_hata_rejects_frequency_outside_range():
    cfg = ScenarioConfig()
    object.__setattr__(cfg, "carrier_freq", 2000.0)
    with pytest.raises(ConfigError):
        hata_path_loss(100.0, cfg)


def test_place_users_in_square():
    cfg = ScenarioConfig(area_side=350.0, n_users=100)
    pts = place_users(cfg, np.random.default_rng(0))
    assert pts.shape == (100, 2)
    assert pts.min() >= 0.0 and pts.max() <= 350.0


def test_place_single_user():
    pts = place_users(ScenarioConfig(n_users=1, d_f=1), np.random.default_rng(0))
    assert pts.shape == (1, 2)


def test_place_users_deterministic():
    cfg = ScenarioConfig()
    a = place_users(cfg, np.random.default_rng(11))
    b = place_users(cfg, np.random.default_rng(11))
    assert np.array_equal(a, b)


def test_build_channel_shape_positive_and_deterministic():
    cfg = ScenarioConfig(n_users=100, n_subchannels=10)
    a = build_channel(cfg, np.random.default_rng(5))
    b = build_channel(cfg, np.random.default_rng(5))
    assert a.gains.shape == (10, 100)
    assert np.all(a.gains > 0) and np.all(np.isfinite(a.gains))
    assert np.array_equal(a.gains, b.gains) and np.array_equal(a.positions, b.positions)


def test_no_fading_equal_distance_gives_identical_gains():
    cfg = ScenarioConfig(n_users=4, n_subchannels=3, d_f=2, fading=False)
    c = cfg.area_side / 2
    r = 80.0
    positions = np.array([[c + r, c], [c - r, c], [c, c + r], [c, c - r]])
    gains = gains_from_positions(positions, cfg)
    assert np.allclose(gains, gains[0, 0], rtol=1e-12)


def test_no_fading_gain_follows_path_loss():
    cfg = ScenarioConfig(n_users=30, fading=False)
    ch = build_channel(cfg, np.random.default_rng(2))
    dist = np.linalg.norm(ch.positions - cfg.area_side / 2, axis=1)
    expected = 10 ** (-hata_path_loss(dist, cfg) / 10)
    assert np.allclose(ch.gains, expected[None, :], rtol=1e-12)
    # farther users get weaker gains
    order = np.argsort(dist)
    assert np.all(np.diff(ch.gains[0, order]) <= 0)


def test_fading_is_unit_mean():
    # 10 x 10_000 = 1e5 independent draws; compare against the no-fading channel
    cfg = ScenarioConfig(n_users=10_000, n_subchannels=10, d_f=5)
    faded = build_channel(cfg, np.random.default_rng(123))
    plain = gains_from_positions(faded.positions, cfg)
    ratio = faded.gains / plain
    assert abs(ratio.mean() - 1.0) < 0.02
