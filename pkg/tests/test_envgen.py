from __future__ import annotations

import math

import numpy as np
import pytest

from src.core.errors import InputError
from src.core.seeding import child_rng
from src.envgen.field import (
    FieldParams,
    PayoutField,
    empirical_lipschitz,
    observe,
    oracle_best,
    rescale_and_sharpen,
    sample_field,
    sample_gaussian_field,
)
from src.envgen.field_io import export_field, import_field

SMALL = FieldParams(K=60, T=80, tau_s=1e-2, seed=3)


def test_alpha_one_spans_unit_interval():
    mu = sample_field(SMALL).mu
    assert mu.shape == (60, 80)
    assert mu.min() == 0.0
    assert mu.max() == 1.0


def test_sharpening_keeps_column_argmax():
    base = sample_field(SMALL).mu
    sharp = sample_field(FieldParams(K=60, T=80, tau_s=1e-2, seed=3, alpha=3.0)).mu
    assert np.array_equal(base.argmax(axis=0), sharp.argmax(axis=0))
    assert np.allclose(sharp, base ** 3)


def test_mean_payout_falls_with_alpha():
    means = [sample_field(FieldParams(K=40, T=40, tau_s=1e-2, seed=1, alpha=a)).mu.mean()
             for a in (1.0, 2.0, 4.0, 8.0)]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_constant_raw_field_maps_to_zero():
    assert np.all(rescale_and_sharpen(np.full((3, 4), 2.5), 2.0) == 0.0)


def test_same_seed_same_field():
    a = sample_field(SMALL).mu
    b = sample_field(SMALL).mu
    c = sample_field(FieldParams(K=60, T=80, tau_s=1e-2, seed=4)).mu
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_field_is_read_only():
    with pytest.raises(ValueError):
        sample_field(SMALL).mu[0, 0] = 0.5


def test_stationary_field_is_constant_in_time():
    mu = sample_field(FieldParams(K=30, T=25, rho_t=math.inf)).mu
    assert np.all(mu == mu[:, :1])


def test_observe_without_noise_is_the_mean():
    field = sample_field(SMALL)
    rng = child_rng(0, "noise", "x")
    for arm, r in [(0, 0), (17, 40), (59, 79)]:
        assert observe(field, arm, r, rng) == field.mu[arm, r]


def test_observe_noise_level():
    field = sample_field(FieldParams(K=5, T=5, sigma_noise=0.1, seed=2))
    rng = np.random.default_rng(9)
    ys = np.array([observe(field, 2, 3, rng) for _ in range(20_000)])
    assert ys.mean() == pytest.approx(field.mu[2, 3], abs=3e-3)
    assert ys.std() == pytest.approx(0.1, rel=0.03)


def test_observe_consumes_one_draw_even_without_noise():
    quiet = sample_field(FieldParams(K=5, T=5, seed=2))
    a, b = np.random.default_rng(4), np.random.default_rng(4)
    observe(quiet, 0, 0, a)
    b.standard_normal()
    assert a.random() == b.random()


def test_oracle_best_breaks_ties_low():
    mu = np.array([[0.2, 0.9], [0.7, 0.9], [0.7, 0.1]])
    field = PayoutField(mu=mu, params=FieldParams(K=3, T=2))
    assert oracle_best(field, 0) == (1, 0.7)
    assert oracle_best(field, 1) == (0, 0.9)


def test_empirical_lipschitz_on_a_ramp():
    K = 10
    params = FieldParams(K=K, T=1, rho_t=math.inf)
    mu = np.linspace(0.0, 1.0, K)[:, None]
    # adjacent arms are 1/K apart in normalized distance
    slope = (1.0 / (K - 1)) / (1.0 / K)
    assert empirical_lipschitz(PayoutField(mu=mu, params=params)) == pytest.approx(slope)


@pytest.mark.parametrize("kwargs", [
    {"rho_x": 0.0}, {"rho_t": -1.0}, {"alpha": 0.5}, {"sigma_noise": -0.1},
    {"K": 0}, {"T": 0}, {"tau_s": 0.0},
])
def test_field_params_validation(kwargs):
    with pytest.raises(InputError):
        FieldParams(**kwargs)


def test_spatial_correlogram():
    params = FieldParams(K=20, T=1, rho_x=0.1, rho_t=math.inf)
    rng = np.random.default_rng(0)
    draws = np.stack([sample_gaussian_field(params, rng)[:, 0] for _ in range(3000)])
    # arm spacing is 0.1
    assert np.mean(draws ** 2) == pytest.approx(1.0, abs=0.05)
    for lag, expected in [(1, math.exp(-0.5)), (2, math.exp(-2.0))]:
        r = np.corrcoef(draws[:, 8], draws[:, 8 + lag])[0, 1]
        assert r == pytest.approx(expected, abs=0.06)


def test_temporal_correlogram():
    params = FieldParams(K=1, T=12, rho_t=0.1, tau_s=0.05)
    rng = np.random.default_rng(1)
    draws = np.stack([sample_gaussian_field(params, rng)[0] for _ in range(3000)])
    r = np.corrcoef(draws[:, 3], draws[:, 5])[0, 1]
    assert r == pytest.approx(math.exp(-0.5), abs=0.06)


@pytest.mark.parametrize("suffix", [".csv", ".npy"])
def test_field_export_round_trip(tmp_path, suffix):
    field = sample_field(FieldParams(K=12, T=9, rho_t=math.inf, seed=5))
    path = tmp_path / f"field{suffix}"
    export_field(field, path)
    back = import_field(path)
    assert back.params == field.params
    assert np.array_equal(back.mu, field.mu)


def test_field_export_rejects_unknown_suffix(tmp_path):
    with pytest.raises(InputError):
        export_field(sample_field(FieldParams(K=3, T=3)), tmp_path / "field.txt")


def test_field_import_checks_shape(tmp_path):
    field = sample_field(FieldParams(K=4, T=3))
    path = tmp_path / "f.npy"
    export_field(field, path)
    np.save(path, np.zeros((2, 2)))
    with pytest.raises(InputError):
        import_field(path)
