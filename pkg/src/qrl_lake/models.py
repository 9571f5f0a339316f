"""Policy/value function approximators behind one differentiable contract.

Two families:
  * HybridModel: basis-embed the state, run a trainable circuit per head,
    measure <Z> on every qubit, and map through a small linear head
    (4x4+4 for the policy logits, 4x1+1 for the value).
  * MlpModel: one-hot state into two tanh hidden layers per head.

`forward` returns logits/probs/value; `backward` maps upstream gradients
(dLoss/dlogits, dLoss/dvalue) to a flat gradient over every trainable
scalar, using the adjoint circuit gradient for the quantum parameters and
plain affine backprop for the heads. Both are pure functions of the
parameters, so training is exactly reproducible from the seed.
"""

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np

from . import circuits, statevec

NUM_STATES = 16
NUM_ACTIONS = 4
NUM_QUBITS = circuits.NUM_QUBITS


@lru_cache(maxsize=NUM_STATES)
def _embedded_state(state_index: int) -> np.ndarray:
    psi = statevec.run_circuit(circuits.embedding_circuit(state_index))
    psi.setflags(write=False)
    return psi


@dataclass
class HybridModel:
    circuit_id: int
    policy_circuit_params: np.ndarray  # (P,)
    value_circuit_params: np.ndarray  # (P,)
    policy_w: np.ndarray  # (4, 4)
    policy_b: np.ndarray  # (4,)
    value_w: np.ndarray  # (4,)
    value_b: np.ndarray  # (1,)

    @property
    def template(self):
        return circuits.benchmark_circuit(self.circuit_id)


@dataclass
class MlpModel:
    hidden_width: int
    policy_layers: List[Tuple[np.ndarray, np.ndarray]]  # [(W, b)] x 3, (in, out)
    value_layers: List[Tuple[np.ndarray, np.ndarray]]


Model = Union[HybridModel, MlpModel]


@dataclass
class ModelOutput:
    logits: np.ndarray
    action_probs: np.ndarray
    value: float


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def init_hybrid(circuit_id: int, seed) -> HybridModel:
    """Circuit angles ~ U[0, 2pi); head weights ~ U[-1/sqrt(fan_in), +]; biases 0."""
    rng = np.random.default_rng(seed)
    p = circuits.benchmark_circuit(circuit_id).param_count
    bound = 1.0 / np.sqrt(NUM_QUBITS)
    return HybridModel(
        circuit_id=circuit_id,
        policy_circuit_params=rng.uniform(0.0, 2.0 * np.pi, p),
        value_circuit_params=rng.uniform(0.0, 2.0 * np.pi, p),
        policy_w=rng.uniform(-bound, bound, (NUM_ACTIONS, NUM_QUBITS)),
        policy_b=np.zeros(NUM_ACTIONS),
        value_w=rng.uniform(-bound, bound, NUM_QUBITS),
        value_b=np.zeros(1),
    )


def init_mlp(hidden_width: int, seed) -> MlpModel:
    rng = np.random.default_rng(seed)

    def stack(out_dim):
        sizes = [(NUM_STATES, hidden_width), (hidden_width, hidden_width),
                 (hidden_width, out_dim)]
        layers = []
        for fan_in, fan_out in sizes:
            bound = 1.0 / np.sqrt(fan_in)
            layers.append(
                (rng.uniform(-bound, bound, (fan_in, fan_out)), np.zeros(fan_out))
            )
        return layers

    return MlpModel(hidden_width=hidden_width,
                    policy_layers=stack(NUM_ACTIONS), value_layers=stack(1))


def init_model(model_kind: str, arch: int, seed) -> Model:
    """model_kind 'pqc' takes a circuit id; 'nn' takes a hidden width."""
    if model_kind == "pqc":
        return init_hybrid(arch, seed)
    if model_kind == "nn":
        return init_mlp(arch, seed)
    raise ValueError(f"model_kind must be 'pqc' or 'nn', got {model_kind!r}")


def _mlp_forward(layers, x):
    """Returns (output, activations) where activations[i] is layer i's input."""
    acts = [x]
    h = x
    for i, (w, b) in enumerate(layers):
        h = h @ w + b
        if i < len(layers) - 1:
            h = np.tanh(h)
        acts.append(h)
    return h, acts


def forward(model: Model, state_index: int) -> ModelOutput:
    if isinstance(model, HybridModel):
        psi = _embedded_state(state_index)
        tpl = model.template
        z_p = statevec.z_expectations(
            statevec.run_circuit(tpl, model.policy_circuit_params, psi))
        z_v = statevec.z_expectations(
            statevec.run_circuit(tpl, model.value_circuit_params, psi))
        logits = model.policy_w @ z_p + model.policy_b
        value = float(model.value_w @ z_v + model.value_b[0])
    else:
        x = np.zeros(NUM_STATES)
        x[state_index] = 1.0
        logits, _ = _mlp_forward(model.policy_layers, x)
        value = float(_mlp_forward(model.value_layers, x)[0][0])
    return ModelOutput(logits=logits, action_probs=softmax(logits), value=value)


def _mlp_backward(layers, acts, dout):
    """Gradients [(dW, db)] and nothing else; tanh between hidden layers."""
    grads = [None] * len(layers)
    delta = dout
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        grads[i] = (np.outer(acts[i], delta), delta.copy())
        if i > 0:
            delta = (delta @ w.T) * (1.0 - acts[i] ** 2)  # acts[i] is tanh output
    return grads


def backward(model: Model, state_index: int, dlogits: np.ndarray,
             dvalue: float) -> np.ndarray:
    """Flat gradient of an upstream loss over every trainable scalar.

    Layout matches `flat_parameters`. The circuit parts come from the
    adjoint gradient of the weighted-Z observable induced by the heads.
    """
    dlogits = np.asarray(dlogits, dtype=np.float64)
    if isinstance(model, HybridModel):
        psi = _embedded_state(state_index)
        tpl = model.template
        # policy side
        w_obs_p = model.policy_w.T @ dlogits
        psi_p, g_policy = statevec.forward_and_gradient(
            tpl, model.policy_circuit_params, psi, w_obs_p)
        z_p = statevec.z_expectations(psi_p)
        # value side
        w_obs_v = model.value_w * dvalue
        psi_v, g_value = statevec.forward_and_gradient(
            tpl, model.value_circuit_params, psi, w_obs_v)
        z_v = statevec.z_expectations(psi_v)
        return np.concatenate([
            g_policy,
            np.outer(dlogits, z_p).ravel(),
            dlogits,
            g_value,
            dvalue * z_v,
            np.array([dvalue]),
        ])
    x = np.zeros(NUM_STATES)
    x[state_index] = 1.0
    _, acts_p = _mlp_forward(model.policy_layers, x)
    _, acts_v = _mlp_forward(model.value_layers, x)
    gp = _mlp_backward(model.policy_layers, acts_p, dlogits)
    gv = _mlp_backward(model.value_layers, acts_v, np.array([dvalue]))
    parts = []
    for dw, db in gp + gv:
        parts.append(dw.ravel())
        parts.append(db)
    return np.concatenate(parts)


def _hybrid_arrays(model: HybridModel):
    return [
        ("policy_circuit", model.policy_circuit_params),
        ("policy_head_w", model.policy_w),
        ("policy_head_b", model.policy_b),
        ("value_circuit", model.value_circuit_params),
        ("value_head_w", model.value_w),
        ("value_head_b", model.value_b),
    ]


def _mlp_arrays(model: MlpModel):
    out = []
    for net, layers in (("policy", model.policy_layers), ("value", model.value_layers)):
        for i, (w, b) in enumerate(layers):
            out.append((f"{net}_w{i}", w))
            out.append((f"{net}_b{i}", b))
    return out


def named_arrays(model: Model):
    if isinstance(model, HybridModel):
        return _hybrid_arrays(model)
    return _mlp_arrays(model)


def flat_parameters(model: Model) -> np.ndarray:
    return np.concatenate([a.ravel() for _, a in named_arrays(model)])


def set_flat_parameters(model: Model, flat: np.ndarray) -> None:
    offset = 0
    for _, a in named_arrays(model):
        a.flat[:] = flat[offset:offset + a.size]
        offset += a.size
    if offset != len(flat):
        raise ValueError(f"expected {offset} scalars, got {len(flat)}")


def parameter_count(model: Model) -> int:
    return sum(a.size for _, a in named_arrays(model))


def policy_parameter_slice(model: Model) -> slice:
    """Slice of the flat vector covering the parameters that shape the policy.

    Policy arrays come first in the flat layout, so this is a prefix.
    """
    end = sum(a.size for name, a in named_arrays(model) if name.startswith("policy"))
    return slice(0, end)


def backward_policy(model: Model, state_index: int, dlogits: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. policy parameters only (skips the value-side sweep);
    equals backward(...)[policy_parameter_slice]."""
    dlogits = np.asarray(dlogits, dtype=np.float64)
    if isinstance(model, HybridModel):
        psi = _embedded_state(state_index)
        w_obs = model.policy_w.T @ dlogits
        psi_p, g_policy = statevec.forward_and_gradient(
            model.template, model.policy_circuit_params, psi, w_obs)
        z_p = statevec.z_expectations(psi_p)
        return np.concatenate([g_policy, np.outer(dlogits, z_p).ravel(), dlogits])
    x = np.zeros(NUM_STATES)
    x[state_index] = 1.0
    _, acts_p = _mlp_forward(model.policy_layers, x)
    parts = []
    for dw, db in _mlp_backward(model.policy_layers, acts_p, dlogits):
        parts.append(dw.ravel())
        parts.append(db)
    return np.concatenate(parts)


def save_checkpoint(model: Model, path) -> None:
    """Named-array JSON dump, enough for an exact reload."""
    if isinstance(model, HybridModel):
        meta = {"kind": "pqc", "circuit_id": model.circuit_id}
    else:
        meta = {"kind": "nn", "hidden_width": model.hidden_width}
    doc = dict(meta)
    doc["arrays"] = [
        {"name": name, "shape": list(a.shape), "values": a.ravel().tolist()}
        for name, a in named_arrays(model)
    ]
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_checkpoint(path) -> Model:
    with open(path) as fh:
        doc = json.load(fh)
    if doc["kind"] == "pqc":
        model = init_hybrid(doc["circuit_id"], seed=0)
    else:
        model = init_mlp(doc["hidden_width"], seed=0)
    by_name = dict(named_arrays(model))
    for entry in doc["arrays"]:
        target = by_name[entry["name"]]
        values = np.array(entry["values"]).reshape(entry["shape"])
        target[...] = values
    return model
