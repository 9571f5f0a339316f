"""Lake MDP tests: transition model, stepping, value iteration oracle,
Monte Carlo agreement, reward threshold."""

import numpy as np
import pytest

from qrl_lake import lake


def row_dict(model, s, a):
    row = model.transition[s, a]
    return {i: p for i, p in enumerate(row) if p > 0}


# =============================================================================
# Transition model
# =============================================================================

def test_deterministic_right_from_start():
    m = lake.build_model(slip_prob=0.0)
    assert row_dict(m, 0, lake.RIGHT) == {1: 1.0}


def test_slip_row_with_wall_merge():
    """From s=14 going Right: intended 15, slip up 10, slip down off-grid."""
    m = lake.build_model()
    row = row_dict(m, 14, lake.RIGHT)
    assert row == {15: pytest.approx(0.8), 10: pytest.approx(0.1),
                   14: pytest.approx(0.1)}


def test_slip_row_state9_up():
    m = lake.build_model()
    row = row_dict(m, 9, lake.UP)
    assert row == {5: pytest.approx(0.8), 8: pytest.approx(0.1),
                   10: pytest.approx(0.1)}


def test_rows_sum_to_one():
    m = lake.build_model()
    assert np.allclose(m.transition.sum(axis=-1), 1.0, atol=1e-12)


def test_probability_value_set_slip_02():
    """With walls merging slip mass, only {0, .1, .2, .8, .9, 1} can appear."""
    m = lake.build_model()
    values = set(np.round(m.transition.ravel(), 12))
    assert values <= {0.0, 0.1, 0.2, 0.8, 0.9, 1.0}


def test_terminal_states_absorbing():
    m = lake.build_model()
    for s in np.flatnonzero(m.terminal):
        for a in range(4):
            assert row_dict(m, int(s), a) == {int(s): 1.0}


def test_malformed_maps_rejected():
    with pytest.raises(lake.LakeMapError):
        lake.build_model(("SFFF", "FFFF"))  # no goal
    with pytest.raises(lake.LakeMapError):
        lake.build_model(("SFG", "FFGG"))  # ragged + two goals
    with pytest.raises(lake.LakeMapError):
        lake.build_model(("SFXG",))  # unknown tile
    with pytest.raises(ValueError):
        lake.build_model(slip_prob=1.0)


# =============================================================================
# Stepping
# =============================================================================

def test_step_into_hole_terminates_with_zero():
    m = lake.build_model(slip_prob=0.0)
    result = lake.step(m, 1, lake.DOWN, np.random.default_rng(0))  # 1 -> 5 (H)
    assert result.state == 5 and result.reward == 0.0 and result.done


def test_step_into_goal_pays_one():
    m = lake.build_model(slip_prob=0.0)
    result = lake.step(m, 14, lake.RIGHT, np.random.default_rng(0))
    assert result.state == 15 and result.reward == 1.0 and result.done


def test_step_from_terminal_rejected():
    m = lake.build_model()
    with pytest.raises(ValueError):
        lake.step(m, 5, lake.UP, np.random.default_rng(0))


def test_truncation_at_step_cap():
    m = lake.build_model(slip_prob=0.0, max_episode_steps=3)
    env = lake.LakeEnv(m, np.random.default_rng(0))
    env.reset()
    results = [env.step(lake.LEFT) for _ in range(3)]  # bangs the left wall
    assert not any(r.done for r in results)
    assert [r.truncated for r in results] == [False, False, True]
    with pytest.raises(ValueError):
        env.step(lake.LEFT)


# =============================================================================
# Value iteration oracle
# =============================================================================

def test_deterministic_lake_is_fully_solvable():
    m = lake.build_model(slip_prob=0.0)
    v, _ = lake.value_iteration(m, gamma=1.0)
    assert v[m.start_state] == pytest.approx(1.0, abs=1e-9)


def test_slippery_success_probability_band():
    m = lake.build_model()
    v, _ = lake.value_iteration(m, gamma=1.0)
    assert 0.83 <= v[m.start_state] <= 0.87


def test_hole_values_zero():
    m = lake.build_model()
    v, _ = lake.value_iteration(m, gamma=1.0)
    assert np.array_equal(v[[5, 7, 11, 12]], np.zeros(4))


def test_monotone_in_slip():
    values = []
    for slip in (0.0, 0.1, 0.2, 2 / 3):
        m = lake.build_model(slip_prob=slip)
        v, _ = lake.value_iteration(m, gamma=1.0)
        values.append(v[m.start_state])
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))


def test_monte_carlo_matches_oracle_value():
    """Greedy-policy success rate over 1e5 capped episodes vs V[start]."""
    m = lake.build_model()
    v, policy = lake.value_iteration(m, gamma=1.0)
    rewards = lake.run_greedy_episodes(m, policy, 100_000,
                                       np.random.default_rng(123))
    se = rewards.std(ddof=1) / np.sqrt(len(rewards))
    assert abs(rewards.mean() - v[m.start_state]) <= 3 * se


def test_value_iteration_gamma_validation():
    m = lake.build_model()
    with pytest.raises(ValueError):
        lake.value_iteration(m, gamma=0.0)
    with pytest.raises(ValueError):
        lake.value_iteration(m, gamma=1.5)


# =============================================================================
# Reward threshold
# =============================================================================

def test_threshold_reproduces_published_bar():
    res = lake.reward_threshold(lake.build_model())
    assert res.threshold == pytest.approx(0.81, abs=0.01)
    assert res.threshold == pytest.approx(0.95 * res.mean_reward, abs=1e-12)


def test_threshold_deterministic_model():
    res = lake.reward_threshold(lake.build_model(slip_prob=0.0))
    assert res.mean_reward == 1.0
    assert res.threshold == pytest.approx(0.95)


def test_threshold_degenerate_hole_map():
    m = lake.build_model(("SHHH", "HHHH", "HHHH", "HHHG"))
    res = lake.reward_threshold(m, episodes=200)
    assert res.mean_reward == 0.0 and res.threshold == 0.0
