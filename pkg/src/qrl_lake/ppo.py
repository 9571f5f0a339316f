"""Clipped-surrogate PPO with generalized advantage estimation.

Single-threaded, fully deterministic trainer: (run spec, config) pins the
model init, every environment transition, action draw, and minibatch
shuffle, so reward series reproduce bit-for-bit. Episode truncation at the
step cap bootstraps with V(s_next) (folded into the reward, SB3-style) so
the cap does not masquerade as failure.
"""

import os
from collections import deque
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional, Tuple

import numpy as np

from . import lake, models


@dataclass
class PpoConfig:
    total_timesteps: int = 50_000
    rollout_length: int = 1024
    minibatch_size: int = 64
    epochs_per_update: int = 10
    discount: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    learning_rate: float = 2e-3
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    max_grad_norm: float = 0.5
    eval_interval: int = 1_000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    normalize_advantages: bool = True
    episode_window: int = 100  # trailing completed episodes per reward checkpoint
    slip_prob: float = lake.DEFAULT_SLIP
    max_episode_steps: int = lake.DEFAULT_MAX_EPISODE_STEPS

    def __post_init__(self):
        if self.rollout_length % self.minibatch_size != 0:
            raise ValueError("rollout_length must be divisible by minibatch_size")

    @classmethod
    def from_mapping(cls, mapping) -> "PpoConfig":
        """Build from a flat key=value mapping, ignoring unknown keys."""
        defaults = cls()
        kwargs = {}
        for f in fields(cls):
            if f.name in mapping:
                kwargs[f.name] = _coerce(str(mapping[f.name]),
                                         type(getattr(defaults, f.name)))
        return cls(**kwargs)

    def snapshot_lines(self, extra=()) -> List[str]:
        lines = [f"{k} = {v}" for k, v in asdict(self).items()]
        lines.extend(f"{k} = {v}" for k, v in extra)
        return lines


def _coerce(raw: str, target_type):
    if target_type is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return target_type(raw)


@dataclass(frozen=True)
class RunSpec:
    """One training run: model family, architecture, seed."""

    kind: str  # "pqc" or "nn"
    arch: int  # circuit id 1..19 or hidden width
    seed: int

    @property
    def solution_id(self) -> str:
        return f"{'PQC' if self.kind == 'pqc' else 'NN'}-{self.arch}"

    @classmethod
    def parse(cls, token: str, seed: int) -> "RunSpec":
        t = token.strip().lower().replace("-", "").replace("_", "")
        if t.startswith("pqc"):
            return cls("pqc", int(t[3:]), seed)
        if t.startswith("nn"):
            return cls("nn", int(t[2:]), seed)
        raise ValueError(f"cannot parse solution id {token!r} (want pqcK or nnH)")


@dataclass
class RolloutBuffer:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray  # episode boundary (terminated, or truncated w/ folded bootstrap)
    truncated: np.ndarray
    values: np.ndarray
    log_probs: np.ndarray
    last_value: float
    last_done: bool
    advantages: Optional[np.ndarray] = None
    returns: Optional[np.ndarray] = None
    episode_ends: List[Tuple[int, float]] = field(default_factory=list)

    def __len__(self):
        return len(self.states)


def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    return int(np.searchsorted(np.cumsum(probs), rng.random(), side="right").clip(
        0, len(probs) - 1))


class RewardMonitor:
    """Tracks global steps and trailing episode returns; records a checkpoint
    (step, mean of up to the last `window` completed episodes) every
    `interval` steps up to `total` steps."""

    def __init__(self, interval: int, window: int, total: int):
        self.interval = interval
        self.total = total
        self.global_step = 0
        self.recent = deque(maxlen=window)
        self.series: List[Tuple[int, float]] = []

    def on_step(self, completed_return: Optional[float]):
        self.global_step += 1
        if completed_return is not None:
            self.recent.append(completed_return)
        if self.global_step % self.interval == 0 and self.global_step <= self.total:
            mean = float(np.mean(self.recent)) if self.recent else 0.0
            self.series.append((self.global_step, mean))


def collect_rollout(env: lake.LakeEnv, model, config: PpoConfig,
                    rng: np.random.Generator, monitor: Optional[RewardMonitor] = None
                    ) -> RolloutBuffer:
    """Gather rollout_length steps, auto-resetting episodes.

    Truncated (not terminated) episodes fold the bootstrap value V(s_next)
    into the final reward and then count as episode ends for GAE.
    """
    n = config.rollout_length
    states = np.zeros(n, dtype=np.int64)
    actions = np.zeros(n, dtype=np.int64)
    rewards = np.zeros(n)
    dones = np.zeros(n, dtype=bool)
    truncs = np.zeros(n, dtype=bool)
    values = np.zeros(n)
    log_probs = np.zeros(n)
    episode_ends: List[Tuple[int, float]] = []

    episode_return = 0.0
    for t in range(n):
        s = env.state
        out = models.forward(model, s)
        a = sample_action(out.action_probs, rng)
        result = env.step(a)

        states[t] = s
        actions[t] = a
        values[t] = out.value
        log_probs[t] = np.log(out.action_probs[a])
        reward = result.reward
        episode_return += reward
        done = result.done
        if result.truncated and not done:
            reward += config.discount * models.forward(model, result.state).value
            done = True
        rewards[t] = reward
        dones[t] = done
        truncs[t] = result.truncated and not result.done

        completed = None
        if result.done or result.truncated:
            completed = episode_return
            episode_ends.append((t, episode_return))
            episode_return = 0.0
            env.reset()
        if monitor is not None:
            monitor.on_step(completed)

    last_value = models.forward(model, env.state).value
    return RolloutBuffer(
        states=states, actions=actions, rewards=rewards, dones=dones,
        truncated=truncs, values=values, log_probs=log_probs,
        last_value=last_value, last_done=bool(dones[-1]),
        episode_ends=episode_ends,
    )


def compute_gae(buffer: RolloutBuffer, gamma: float, lam: float) -> RolloutBuffer:
    """Fill advantages/returns: delta_t = r_t + g*V_{t+1}*(1-done_t) - V_t,
    A_t = delta_t + g*l*(1-done_t)*A_{t+1}, return_t = A_t + V_t."""
    n = len(buffer)
    adv = np.zeros(n)
    gae = 0.0
    for t in range(n - 1, -1, -1):
        if t == n - 1:
            next_value = buffer.last_value
            next_nonterminal = 0.0 if buffer.last_done else 1.0
        else:
            next_value = buffer.values[t + 1]
            next_nonterminal = 0.0 if buffer.dones[t] else 1.0
        delta = (buffer.rewards[t]
                 + gamma * next_value * next_nonterminal
                 - buffer.values[t])
        gae = delta + gamma * lam * next_nonterminal * gae
        adv[t] = gae
    buffer.advantages = adv
    buffer.returns = adv + buffer.values
    return buffer


class AdamOptimizer:
    """Standard Adam over a flat parameter vector."""

    def __init__(self, dim: int, lr: float, beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def clip_gradient_norm(grad: np.ndarray, max_norm: float) -> np.ndarray:
    norm = float(np.linalg.norm(grad))
    if norm > max_norm and norm > 0.0:
        return grad * (max_norm / norm)
    return grad


def _forward_by_state(model, batch_states):
    """One forward per distinct state in the batch (parameters are fixed
    within a minibatch, and there are at most 16 distinct states)."""
    unique = np.unique(batch_states)
    outs = {int(s): models.forward(model, int(s)) for s in unique}
    return unique, outs


def minibatch_loss_and_grad(model, buffer: RolloutBuffer, idx: np.ndarray,
                            config: PpoConfig):
    """Total loss, flat gradient, and diagnostics on one minibatch.

    policy loss = -mean(min(ratio*A, clip(ratio)*A)); value loss =
    mean((V - return)^2); total = policy + value_coef*value -
    entropy_coef*entropy. Upstream gradients are summed per distinct state
    (backward is linear in them), so circuit sweeps run once per state.
    """
    b = len(idx)
    s_batch = buffer.states[idx]
    a_batch = buffer.actions[idx]
    adv = buffer.advantages[idx]
    ret = buffer.returns[idx]
    old_logp = buffer.log_probs[idx]

    unique, outs = _forward_by_state(model, s_batch)
    eps = config.clip_epsilon

    dlogits_by_state = {int(s): np.zeros(models.NUM_ACTIONS) for s in unique}
    dvalue_by_state = {int(s): 0.0 for s in unique}
    policy_loss = value_loss = entropy_sum = clip_count = 0.0

    for i in range(b):
        s = int(s_batch[i])
        a = int(a_batch[i])
        out = outs[s]
        probs = out.action_probs
        logp = np.log(probs[a])
        ratio = np.exp(logp - old_logp[i])
        unclipped = ratio * adv[i]
        clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv[i]
        policy_loss -= min(unclipped, clipped)
        use_unclipped = unclipped <= clipped
        if not use_unclipped:
            clip_count += 1
        if use_unclipped:
            onehot = np.zeros(models.NUM_ACTIONS)
            onehot[a] = 1.0
            dlogits_by_state[s] += -adv[i] * ratio * (onehot - probs) / b

        logp_all = np.log(probs)
        entropy = -float(probs @ logp_all)
        entropy_sum += entropy
        if config.entropy_coef != 0.0:
            # d(-entropy)/dlogits = probs * (log probs + entropy)
            dlogits_by_state[s] += (
                config.entropy_coef * probs * (logp_all + entropy) / b)

        v_err = out.value - ret[i]
        value_loss += v_err * v_err
        dvalue_by_state[s] += config.value_coef * 2.0 * v_err / b

    grad = np.zeros(models.parameter_count(model))
    for s in unique:
        s = int(s)
        grad += models.backward(model, s, dlogits_by_state[s], dvalue_by_state[s])

    policy_loss /= b
    value_loss /= b
    entropy_mean = entropy_sum / b
    total = (policy_loss + config.value_coef * value_loss
             - config.entropy_coef * entropy_mean)
    diags = {
        "policy_loss": float(policy_loss),
        "value_loss": float(value_loss),
        "entropy": float(entropy_mean),
        "clip_fraction": clip_count / b,
    }
    return float(total), grad, diags


def batch_loss(model, buffer: RolloutBuffer, idx: np.ndarray,
               config: PpoConfig) -> float:
    """Loss only (no gradient), for descent checks."""
    total, _, _ = minibatch_loss_and_grad(model, buffer, idx, config)
    return total


def normalize_advantages(buffer: RolloutBuffer) -> None:
    adv = buffer.advantages
    std = adv.std()
    if std > 0:
        buffer.advantages = (adv - adv.mean()) / std
    else:
        buffer.advantages = adv - adv.mean()


def ppo_update(model, buffer: RolloutBuffer, config: PpoConfig,
               optimizer: AdamOptimizer, rng: np.random.Generator) -> dict:
    """epochs_per_update shuffled passes of clipped-surrogate minibatch steps."""
    if buffer.advantages is None:
        raise ValueError("compute_gae must run before ppo_update")
    if config.normalize_advantages:
        normalize_advantages(buffer)
    n = len(buffer)
    diags = {}
    for _ in range(config.epochs_per_update):
        perm = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            idx = perm[start:start + config.minibatch_size]
            total, grad, diags = minibatch_loss_and_grad(model, buffer, idx, config)
            if not np.isfinite(total) or not np.all(np.isfinite(grad)):
                raise FloatingPointError(
                    f"non-finite PPO loss/gradient (loss={total})")
            grad = clip_gradient_norm(grad, config.max_grad_norm)
            flat = models.flat_parameters(model)
            models.set_flat_parameters(model, optimizer.step(flat, grad))
    return diags


@dataclass
class RunRecord:
    solution_id: str
    seed: int
    reward_series: List[Tuple[int, float]]
    weight_count: int
    model: object = None


def train(run_spec: RunSpec, config: PpoConfig = None,
          out_dir: Optional[str] = None) -> RunRecord:
    """Full training run; optionally persists config.snapshot, rewards.csv,
    and checkpoint.json into out_dir."""
    config = config or PpoConfig()
    seeds = np.random.SeedSequence(run_spec.seed).spawn(4)
    init_seed, env_seed, action_seed, shuffle_seed = seeds

    model = models.init_model(run_spec.kind, run_spec.arch, init_seed)
    env_model = lake.build_model(slip_prob=config.slip_prob,
                                 max_episode_steps=config.max_episode_steps)
    env = lake.LakeEnv(env_model, np.random.default_rng(env_seed))
    action_rng = np.random.default_rng(action_seed)
    shuffle_rng = np.random.default_rng(shuffle_seed)

    optimizer = AdamOptimizer(models.parameter_count(model), config.learning_rate,
                              config.adam_beta1, config.adam_beta2,
                              config.adam_epsilon)
    monitor = RewardMonitor(config.eval_interval, config.episode_window,
                            config.total_timesteps)

    while monitor.global_step < config.total_timesteps:
        buffer = collect_rollout(env, model, config, action_rng, monitor)
        compute_gae(buffer, config.discount, config.gae_lambda)
        ppo_update(model, buffer, config, optimizer, shuffle_rng)

    record = RunRecord(
        solution_id=run_spec.solution_id,
        seed=run_spec.seed,
        reward_series=list(monitor.series),
        weight_count=models.parameter_count(model),
        model=model,
    )
    if out_dir is not None:
        write_run_outputs(record, run_spec, config, out_dir)
    return record


def write_run_outputs(record: RunRecord, run_spec: RunSpec, config: PpoConfig,
                      out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.snapshot"), "w") as fh:
        extra = (("solution", record.solution_id), ("seed", run_spec.seed))
        fh.write("\n".join(config.snapshot_lines(extra)) + "\n")
    with open(os.path.join(out_dir, "rewards.csv"), "w") as fh:
        fh.write("step,reward\n")
        for step, reward in record.reward_series:
            fh.write(f"{step},{reward!r}\n")
    models.save_checkpoint(record.model, os.path.join(out_dir, "checkpoint.json"))


def read_rewards_csv(path) -> List[Tuple[int, float]]:
    series = []
    with open(path) as fh:
        next(fh)  # header
        for line in fh:
            step, reward = line.strip().split(",")
            series.append((int(step), float(reward)))
    return series
