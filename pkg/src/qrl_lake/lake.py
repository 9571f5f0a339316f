"""Slippery 4x4 FrozenLake MDP with an exact value-iteration oracle.

The agent intends one of {Left, Down, Right, Up}; with probability
slip_prob it slides to one of the two orthogonal directions instead
(half the slip mass each). Moves off the grid keep the position. Holes
and the goal are absorbing; entering the goal pays reward 1, everything
else pays 0.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

DEFAULT_MAP = ("SFFF", "FHFH", "FFFH", "HFFG")
DEFAULT_SLIP = 0.2
DEFAULT_MAX_EPISODE_STEPS = 100

LEFT, DOWN, RIGHT, UP = 0, 1, 2, 3
ACTION_NAMES = ("Left", "Down", "Right", "Up")
_DELTAS = {LEFT: (0, -1), DOWN: (1, 0), RIGHT: (0, 1), UP: (-1, 0)}


class LakeMapError(ValueError):
    """Raised for malformed tile maps."""


@dataclass(frozen=True)
class LakeModel:
    grid: Tuple[str, ...]
    slip_prob: float
    transition: np.ndarray  # (S, A, S) probabilities
    cum_transition: np.ndarray  # cumulative rows, for fast sampling
    start_state: int
    goal_state: int
    terminal: np.ndarray  # bool per state
    max_episode_steps: int = DEFAULT_MAX_EPISODE_STEPS

    @property
    def num_states(self) -> int:
        return len(self.transition)

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    def tile(self, state: int) -> str:
        n_cols = len(self.grid[0])
        return self.grid[state // n_cols][state % n_cols]


@dataclass(frozen=True)
class EpisodeStep:
    state: int  # state after the transition
    action: int
    reward: float
    done: bool
    truncated: bool


def _parse_map(tile_map) -> Tuple[str, ...]:
    if isinstance(tile_map, str):
        rows = tuple(tile_map.split("/"))
    else:
        rows = tuple(tile_map)
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise LakeMapError("map rows must be non-empty and equally long")
    flat = "".join(rows)
    if set(flat) - set("SFHG"):
        raise LakeMapError(f"unknown tiles in map: {sorted(set(flat) - set('SFHG'))}")
    if flat.count("S") != 1 or flat.count("G") != 1:
        raise LakeMapError("map needs exactly one S and one G")
    return rows


def build_model(
    tile_map=DEFAULT_MAP,
    slip_prob: float = DEFAULT_SLIP,
    max_episode_steps: int = DEFAULT_MAX_EPISODE_STEPS,
) -> LakeModel:
    """Build the transition table for a tile map and slip probability."""
    if not 0.0 <= slip_prob < 1.0:
        raise ValueError(f"slip_prob must be in [0, 1), got {slip_prob}")
    grid = _parse_map(tile_map)
    n_rows, n_cols = len(grid), len(grid[0])
    n_states = n_rows * n_cols
    flat = "".join(grid)
    terminal = np.array([t in "HG" for t in flat])
    transition = np.zeros((n_states, 4, n_states))

    def dest(state, direction):
        r, c = divmod(state, n_cols)
        dr, dc = _DELTAS[direction]
        nr, nc = r + dr, c + dc
        if 0 <= nr < n_rows and 0 <= nc < n_cols:
            return nr * n_cols + nc
        return state  # off-grid: stay put

    for s in range(n_states):
        if terminal[s]:
            transition[s, :, s] = 1.0  # absorbing
            continue
        for a in range(4):
            outcomes = (
                (a, 1.0 - slip_prob),
                ((a - 1) % 4, slip_prob / 2.0),
                ((a + 1) % 4, slip_prob / 2.0),
            )
            for direction, prob in outcomes:
                transition[s, a, dest(s, direction)] += prob

    return LakeModel(
        grid=grid,
        slip_prob=slip_prob,
        transition=transition,
        cum_transition=np.cumsum(transition, axis=-1),
        start_state=flat.index("S"),
        goal_state=flat.index("G"),
        terminal=terminal,
        max_episode_steps=max_episode_steps,
    )


def step(model: LakeModel, state: int, action: int, rng: np.random.Generator,
         steps_taken: int = 0) -> EpisodeStep:
    """Sample one transition. `steps_taken` counts prior steps this episode."""
    if model.terminal[state]:
        raise ValueError(f"cannot step from terminal state {state}")
    if steps_taken >= model.max_episode_steps:
        raise ValueError("episode step budget already exhausted")
    cum = model.cum_transition[state, action]
    next_state = int(np.searchsorted(cum, rng.random(), side="right"))
    next_state = min(next_state, model.num_states - 1)  # guard fp round-up
    reward = 1.0 if next_state == model.goal_state else 0.0
    done = bool(model.terminal[next_state])
    truncated = (not done) and (steps_taken + 1 >= model.max_episode_steps)
    return EpisodeStep(next_state, action, reward, done, truncated)


class LakeEnv:
    """Stateful episode wrapper around the functional `step`."""

    def __init__(self, model: LakeModel, rng: np.random.Generator):
        self.model = model
        self.rng = rng
        self.state = model.start_state
        self.steps_taken = 0

    def reset(self) -> int:
        self.state = self.model.start_state
        self.steps_taken = 0
        return self.state

    def step(self, action: int) -> EpisodeStep:
        result = step(self.model, self.state, action, self.rng, self.steps_taken)
        self.state = result.state
        self.steps_taken += 1
        return result


def _bellman_sweeps(model, gamma, tol, max_iter, policy=None):
    """Fixed point of the (greedy or fixed-policy) Bellman operator.

    Returns (V, greedy policy). Entering a terminal state pays its entry
    reward once; terminal values are pinned at 0.
    """
    reward_on_entry = np.zeros(model.num_states)
    reward_on_entry[model.goal_state] = 1.0
    cont = np.where(model.terminal, 0.0, 1.0)
    states = np.arange(model.num_states)
    v = np.zeros(model.num_states)
    for _ in range(max_iter):
        target = reward_on_entry + gamma * cont * v
        q = np.einsum("san,n->sa", model.transition, target)
        if policy is None:
            v_new = np.where(model.terminal, 0.0, q.max(axis=1))
        else:
            v_new = np.where(model.terminal, 0.0, q[states, policy])
        delta = np.max(np.abs(v_new - v))
        v = v_new
        if delta <= tol:
            return v, q.argmax(axis=1)
    raise RuntimeError(f"value iteration did not converge within {max_iter} sweeps")


def value_iteration(
    model: LakeModel, gamma: float = 1.0, tol: float = 1e-10, max_iter: int = 100_000
) -> Tuple[np.ndarray, np.ndarray]:
    """Optimal-policy values for the episodic (step-capped) lake.

    The raw infinite-horizon optimum at gamma=1 exploits arbitrarily slow
    wall-hugging strategies (e.g. pressing Left against a wall forever to
    dodge slip risk), which the episode step cap truncates in practice, so
    its value says nothing about achievable episode reward. The greedy
    policy is therefore extracted with the cap modeled as a per-step
    survival hazard (continuation factor 1 - 1/max_episode_steps), and V is
    that policy's exact evaluation at the caller's gamma: with gamma=1,
    V[start] is the policy's success probability.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    hazard = gamma * (1.0 - 1.0 / model.max_episode_steps)
    _, policy = _bellman_sweeps(model, hazard, tol, max_iter)
    v, _ = _bellman_sweeps(model, gamma, tol, max_iter, policy=policy)
    return v, policy


def run_greedy_episodes(
    model: LakeModel, policy: Sequence[int], episodes: int, rng: np.random.Generator
) -> np.ndarray:
    """Total episode rewards for a deterministic policy (0 or 1 each)."""
    rewards = np.zeros(episodes)
    for e in range(episodes):
        env = LakeEnv(model, rng)
        s = env.reset()
        while True:
            result = env.step(int(policy[s]))
            s = result.state
            if result.done or result.truncated:
                rewards[e] = result.reward
                break
    return rewards


@dataclass(frozen=True)
class ThresholdResult:
    mean_reward: float  # Monte Carlo mean of the optimal policy
    threshold: float  # 0.95 * mean, the pass bar for trained agents
    episodes: int
    seed: int


def reward_threshold(
    model: LakeModel, episodes: int = 1000, seed: int = 1
) -> ThresholdResult:
    """Derive the learning threshold from the optimal policy's empirical mean."""
    _, policy = value_iteration(model, gamma=1.0)
    rng = np.random.default_rng(seed)
    rewards = run_greedy_episodes(model, policy, episodes, rng)
    mean = float(rewards.mean())
    return ThresholdResult(
        mean_reward=mean, threshold=0.95 * mean, episodes=episodes, seed=seed
    )
