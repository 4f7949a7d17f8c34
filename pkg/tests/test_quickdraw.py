from __future__ import annotations

import math

import numpy as np
import pytest

from src.core.errors import InputError
from src.core.seeding import child_rng
from src.core.types import ArmSpace, Observation
from src.envgen.field import FieldParams, observe, sample_field
from src.harness.properties import coverage_rate
from src.quickdraw.policy import QuickDrawPolicy, current_gamma, select_and_update
from src.quickdraw.posterior import (
    QuickDrawParams,
    QuickDrawState,
    gamma_schedule,
    posterior,
    sigma_hat_sq,
    ucb_index,
    PosteriorSummary,
)


def _brute_force(params: QuickDrawParams, space: ArmSpace, history, t_query: float):
    mu = np.zeros(space.K)
    sig = np.zeros(space.K)
    for k in range(space.K):
        s_nu = 0.0
        s_nuy = 0.0
        for o in history:
            d = abs(space.coordinates[k] - o.x) / space.diameter
            s2 = params.rho2 + (d / params.ell_x) ** 2
            if not math.isinf(params.ell_t):
                s2 += ((t_query - o.t) / params.ell_t) ** 2
            s_nu += 1.0 / s2
            s_nuy += o.y / s2
        mu[k] = s_nuy / s_nu
        sig[k] = math.sqrt(1.0 / s_nu)
    return mu, sig


def _random_history(space: ArmSpace, n: int, rng: np.random.Generator, lo: float = 0.0, hi: float = 1.0):
    out = []
    for s in range(n):
        arm = int(rng.integers(space.K))
        out.append(Observation(arm=arm, x=float(space.coordinates[arm]), t=s * 1e-3,
                               y=float(rng.uniform(lo, hi))))
    return out


def _state(params: QuickDrawParams, space: ArmSpace, history) -> QuickDrawState:
    st = QuickDrawState(params, space)
    for o in history:
        st.add(o)
    return st


def test_sigma_hat_sq_examples():
    stationary = QuickDrawParams(ell_t=math.inf)
    moving = QuickDrawParams(ell_x=1.0, ell_t=1.0)
    assert sigma_hat_sq(moving, 0.0, 0.0) == pytest.approx(1e-7, rel=1e-12)
    assert sigma_hat_sq(stationary, 0.5) == pytest.approx(1e-7 + 0.25, rel=1e-12)
    assert sigma_hat_sq(moving, 0.5, 0.3) == pytest.approx(1e-7 + 0.25 + 0.09, rel=1e-12)
    # the time term is skipped, whatever the lag
    assert sigma_hat_sq(stationary, 0.5, 100.0) == sigma_hat_sq(stationary, 0.5)


def test_params_validation():
    with pytest.raises(InputError):
        QuickDrawParams(ell_x=0.0)
    with pytest.raises(InputError):
        QuickDrawParams(rho2=-1.0)
    with pytest.raises(InputError):
        QuickDrawParams(gamma_mode="theoretical", delta=1.5)
    with pytest.raises(InputError):
        QuickDrawParams(gamma_mode="bayes")


def test_posterior_single_observation_at_its_own_point():
    space = ArmSpace.grid(5)
    params = QuickDrawParams()
    st = _state(params, space, [Observation(arm=2, x=float(space.coordinates[2]), t=0.4, y=0.37)])
    s = posterior(st, 0.4)
    assert s.mu_hat[2] == 0.37
    assert s.sigma_hat[2] ** 2 == pytest.approx(1e-7, rel=1e-9)


def test_posterior_symmetric_pair_gives_midpoint():
    space = ArmSpace.grid(3)
    params = QuickDrawParams(ell_t=1.0)
    hist = [
        Observation(arm=0, x=float(space.coordinates[0]), t=0.0, y=0.0),
        Observation(arm=2, x=float(space.coordinates[2]), t=0.0, y=1.0),
    ]
    s = posterior(_state(params, space, hist), 0.2)
    assert s.mu_hat[1] == pytest.approx(0.5, abs=1e-15)


def test_empty_history_sentinel_and_first_arm():
    space = ArmSpace.grid(7)
    st = QuickDrawState(QuickDrawParams(), space)
    s = posterior(st, 0.0)
    assert s.empty
    assert np.all(s.mu_hat == 0.5)
    assert np.all(np.isinf(s.sigma_hat))
    d = select_and_update(st, 0.0)
    assert d.arm == 0
    assert np.all(d.index_values == 1.0)


@pytest.mark.parametrize("ell_t", [math.inf, 1.0, 0.05])
def test_posterior_matches_brute_force(ell_t):
    space = ArmSpace.grid(13)
    params = QuickDrawParams(ell_x=0.3, ell_t=ell_t)
    rng = np.random.default_rng(11)
    hist = _random_history(space, 40, rng)
    t_query = 0.05
    s = posterior(_state(params, space, hist), t_query)
    mu, sig = _brute_force(params, space, hist, t_query)
    assert np.allclose(s.mu_hat, mu, rtol=1e-12, atol=0)
    assert np.allclose(s.sigma_hat, sig, rtol=1e-12, atol=0)


@pytest.mark.parametrize("mode", ["stationary", "nonstationary"])
def test_cached_sums_match_brute_force_on_random_histories(mode):
    rng = np.random.default_rng(2024 if mode == "stationary" else 2025)
    for _ in range(1000):
        K = int(rng.integers(1, 21))
        space = ArmSpace.grid(K)
        ell_t = math.inf if mode == "stationary" else float(rng.choice([0.05, 0.3, 1.0, 2.0]))
        params = QuickDrawParams(ell_x=float(rng.choice([0.1, 1.0, 10.0])), ell_t=ell_t)
        n = int(rng.integers(1, 51))
        times = np.sort(rng.random(n))
        hist = []
        for t in times:
            arm = int(rng.integers(K))
            hist.append(Observation(arm=arm, x=float(space.coordinates[arm]), t=float(t), y=float(rng.random())))
        t_query = float(times[-1] + rng.uniform(0.0, 0.5))
        s = posterior(_state(params, space, hist), t_query)
        mu, sig = _brute_force(params, space, hist, t_query)
        assert np.allclose(s.mu_hat, mu, rtol=1e-12, atol=0)
        assert np.allclose(s.sigma_hat, sig, rtol=1e-12, atol=0)


@pytest.mark.parametrize("ell_t", [math.inf, 0.01])
def test_mean_is_a_convex_combination(ell_t):
    space = ArmSpace.grid(30)
    params = QuickDrawParams(ell_x=0.2, ell_t=ell_t)
    rng = np.random.default_rng(5)
    for _ in range(50):
        hist = _random_history(space, int(rng.integers(1, 60)), rng, lo=-3.0, hi=2.0)
        ys = [o.y for o in hist]
        s = posterior(_state(params, space, hist), hist[-1].t)
        assert np.all(s.mu_hat >= min(ys))
        assert np.all(s.mu_hat <= max(ys))


def test_stationary_uncertainty_strictly_decreases():
    space = ArmSpace.grid(25)
    params = QuickDrawParams(ell_t=math.inf)
    st = QuickDrawState(params, space)
    rng = np.random.default_rng(8)
    prev = np.full(space.K, np.inf)
    for o in _random_history(space, 200, rng):
        st.add(o)
        cur = posterior(st, o.t).sigma_hat
        assert np.all(cur < prev)
        prev = cur


def test_precision_sum_bounds():
    space = ArmSpace.grid(40)
    params = QuickDrawParams(ell_x=1.0, ell_t=math.inf)
    rng = np.random.default_rng(9)
    T = 150
    st = _state(params, space, _random_history(space, T, rng))
    s_nu = np.asarray(st.s_nu, dtype=np.float64)
    assert np.all(s_nu <= T / params.rho2 * (1 + 1e-12))
    assert np.all(s_nu >= T / (params.rho2 + 1.0 / params.ell_x ** 2) * (1 - 1e-12))


def test_reward_shift_moves_mean_and_keeps_argmax():
    space = ArmSpace.grid(50)
    params = QuickDrawParams(ell_x=0.5, ell_t=math.inf, ceiling=None)
    rng = np.random.default_rng(21)
    hist = _random_history(space, 30, rng)
    c = 3.25
    shifted = [Observation(o.arm, o.x, o.t, o.y + c) for o in hist]
    a = posterior(_state(params, space, hist), 0.1)
    b = posterior(_state(params, space, shifted), 0.1)
    assert np.allclose(b.mu_hat, a.mu_hat + c, rtol=0, atol=1e-12)
    assert np.array_equal(a.sigma_hat, b.sigma_hat)
    assert select_and_update(_state(params, space, hist), 0.1).arm == \
        select_and_update(_state(params, space, shifted), 0.1).arm


def test_ucb_index_examples():
    s = PosteriorSummary(mu_hat=np.array([0.9, 0.3, 0.4]), sigma_hat=np.array([0.2, 0.1, 0.0]), t_query=0.0)
    idx = ucb_index(s, 2.0)
    assert idx[0] == 1.0
    assert idx[1] == pytest.approx(0.5)
    assert idx[2] == 0.4
    assert ucb_index(s, 2.0, ceiling=None)[0] == pytest.approx(1.3)


def test_gamma_schedule_values():
    params = QuickDrawParams(ell_x=1.0, rho2=1.0)
    expected = 2.0 + 4.0 * math.sqrt(2.0) * math.log(4000.0) ** 2
    assert gamma_schedule(1.0, 0.05, 10, params) == pytest.approx(expected, rel=1e-12)
    assert gamma_schedule(1.0, 0.5, 1, params) >= 2.0
    # without the Lipschitz term only the log-squared term is left
    assert gamma_schedule(0.0, 0.05, 10, params) == pytest.approx(expected - 2.0, rel=1e-12)


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 2.0])
def test_gamma_schedule_rejects_bad_delta(delta):
    with pytest.raises(InputError):
        gamma_schedule(1.0, delta, 10, QuickDrawParams())


def test_theoretical_gamma_uses_next_round():
    space = ArmSpace.grid(5)
    params = QuickDrawParams(gamma_mode="theoretical", L=0.5, delta=0.1)
    st = _state(params, space, _random_history(space, 9, np.random.default_rng(0)))
    assert current_gamma(st) == gamma_schedule(0.5, 0.1, 10, params)


def test_high_reward_arm_selected_with_small_gamma():
    space = ArmSpace.grid(10)
    params = QuickDrawParams(ell_x=0.01, ell_t=math.inf, gamma=1e-3)
    hist = [
        Observation(arm=7, x=float(space.coordinates[7]), t=0.0, y=0.8),
        Observation(arm=2, x=float(space.coordinates[2]), t=0.0, y=0.1),
    ]
    assert select_and_update(_state(params, space, hist), 0.0).arm == 7


def test_truncation_drops_stale_observations():
    space = ArmSpace.grid(8)
    rng = np.random.default_rng(4)
    old = _random_history(space, 10, rng)
    recent = [Observation(o.arm, o.x, 5.0 + o.t, o.y) for o in _random_history(space, 10, rng)]
    params = QuickDrawParams(ell_t=1.0, truncation=2.0)
    full = posterior(_state(params, space, old + recent), 5.1)
    only_recent = posterior(_state(params, space, recent), 5.1)
    assert np.array_equal(full.mu_hat, only_recent.mu_hat)
    assert np.array_equal(full.sigma_hat, only_recent.sigma_hat)


def test_policy_matches_brute_force_reference_on_a_field():
    fp = FieldParams(K=50, T=200, seed=3)
    field = sample_field(fp)
    space = field.space
    params = QuickDrawParams()
    times = fp.times()
    warm_rng = np.random.default_rng(0)
    noise_a = child_rng(0, "noise", "a")

    policy = QuickDrawPolicy(space, params)
    history = []
    for r in range(100):
        arm = int(warm_rng.integers(space.K))
        o = Observation(arm, float(space.coordinates[arm]), float(times[r]), float(field.mu[arm, r]))
        policy.observe(o)
        history.append(o)

    feedback = None
    for r in range(100, 200):
        t = float(times[r])
        arm = policy.step(r, t, feedback).arm
        mu, sig = _brute_force(params, space, history, t)
        ref = int(np.argmax(np.minimum(mu + params.gamma * sig, 1.0)))
        assert arm == ref
        y = observe(field, arm, r, noise_a)
        feedback = Observation(arm, float(space.coordinates[arm]), t, y)
        history.append(feedback)


def test_decisions_are_reproducible():
    fp = FieldParams(K=30, T=80, seed=1, sigma_noise=0.1)
    field = sample_field(fp)

    def _arms():
        pol = QuickDrawPolicy(field.space, QuickDrawParams())
        rng = child_rng(1, "noise", "quickdraw")
        out, fb = [], None
        for r in range(fp.T):
            t = float(fp.times()[r])
            a = pol.step(r, t, fb).arm
            fb = Observation(a, float(field.space.coordinates[a]), t, observe(field, a, r, rng))
            out.append(a)
        return out

    assert _arms() == _arms()


@pytest.mark.slow
def test_concentration_coverage_with_theoretical_gamma():
    fp = FieldParams(K=100, T=200, rho_x=0.1, rho_t=math.inf, sigma_noise=0.1)
    params = QuickDrawParams(ell_t=math.inf, gamma_mode="theoretical", L=1.0, delta=0.1)
    assert coverage_rate(fp, params, n_reps=200) >= 0.9
