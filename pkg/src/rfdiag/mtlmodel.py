"""Shared-trunk multi-task classifier: build, train, predict, persist.

One 4000→64 ReLU trunk feeds four per-component branches (64→64→32→16→8
ReLU, then 8→1 sigmoid). The training loss is the unweighted sum over the
four tasks of each task's mean binary cross-entropy.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .dataset import COMPONENTS, LabelVector
from .neuralnet import (
    BCE_CLAMP,
    RELU,
    SIGMOID,
    AdamState,
    DenseLayer,
    adam_step,
    bce_loss,
    dense_forward,
    glorot_layer,
    glorot_stack,
    network_forward,
    param_count,
    stack_backward,
)


@dataclass(frozen=True)
class MtlArchitecture:
    input_width: int = 4000
    trunk_width: int = 64
    branch_widths: tuple[int, ...] = (64, 32, 16, 8)
    branch_count: int = 4
    output_per_branch: int = 1

    def __post_init__(self):
        for name in ("input_width", "trunk_width", "branch_count", "output_per_branch"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.branch_widths or any(w < 1 for w in self.branch_widths):
            raise ValueError(f"branch_widths must be positive, got {self.branch_widths}")
        object.__setattr__(self, "branch_widths", tuple(int(w) for w in self.branch_widths))

    def branch_chain(self) -> tuple[int, ...]:
        return (self.trunk_width, *self.branch_widths, self.output_per_branch)

    def to_dict(self) -> dict:
        return {
            "input_width": self.input_width,
            "trunk_width": self.trunk_width,
            "branch_widths": list(self.branch_widths),
            "branch_count": self.branch_count,
            "output_per_branch": self.output_per_branch,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MtlArchitecture":
        return cls(
            input_width=int(data["input_width"]),
            trunk_width=int(data["trunk_width"]),
            branch_widths=tuple(int(w) for w in data["branch_widths"]),
            branch_count=int(data["branch_count"]),
            output_per_branch=int(data["output_per_branch"]),
        )


class MtlModel:
    """Trunk layer + branch stacks, with optimizer state and provenance."""

    def __init__(self, architecture: MtlArchitecture, trunk: DenseLayer,
                 branches: list, provenance: dict | None = None):
        if trunk.in_width != architecture.input_width or trunk.out_width != architecture.trunk_width:
            raise ValueError("trunk layer does not match the architecture")
        if len(branches) != architecture.branch_count:
            raise ValueError(f"expected {architecture.branch_count} branches, got {len(branches)}")
        self.architecture = architecture
        self.trunk = trunk
        self.branches = branches
        self.provenance = dict(provenance or {})
        self.optimizer: AdamState | None = None

    def parameters(self) -> list:
        """All parameter arrays: trunk first, then each branch layer by layer."""
        params = [self.trunk.weights, self.trunk.biases]
        for branch in self.branches:
            for layer in branch:
                params.extend((layer.weights, layer.biases))
        return params

    def layers(self) -> list:
        out = [self.trunk]
        for branch in self.branches:
            out.extend(branch)
        return out


def build(arch: MtlArchitecture | None = None, seed: int = 0) -> MtlModel:
    """Deterministic seeded build; same (arch, seed) gives identical weights."""
    arch = arch or MtlArchitecture()
    rng = np.random.default_rng(seed)
    trunk = glorot_layer(arch.trunk_width, arch.input_width, RELU, rng)
    chain = arch.branch_chain()
    activations = (RELU,) * len(arch.branch_widths) + (SIGMOID,)
    branches = [glorot_stack(chain, activations, rng) for _ in range(arch.branch_count)]
    return MtlModel(arch, trunk, branches, provenance={"build_seed": seed})


def model_param_count(model: MtlModel) -> int:
    return param_count(model.layers())


def forward(model: MtlModel, features) -> np.ndarray:
    """Per-component probabilities in COMPONENTS order.

    Accepts one feature vector (width,) or a batch (n, width); the trunk
    activation is computed once and shared by all branches.
    """
    x = np.asarray(features, dtype=np.float64)
    width = model.architecture.input_width
    if x.shape[-1] != width:
        raise ValueError(f"feature width {x.shape[-1]} does not match model input width {width}")
    trunk_out, _ = dense_forward(model.trunk, x)
    outs = [network_forward(branch, trunk_out)[0] for branch in model.branches]
    return np.concatenate(outs, axis=-1)


def threshold_bits(probabilities, threshold: float = 0.5) -> np.ndarray:
    return (np.asarray(probabilities) > threshold).astype(np.uint8)


def predict(model: MtlModel, features, threshold: float = 0.5) -> LabelVector:
    """Binarized component verdicts for one frame's features."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"predict takes one feature vector, got shape {x.shape}")
    return LabelVector.from_array(threshold_bits(forward(model, x), threshold))


def training_cost_estimate(epochs: int, samples: int,
                           arch: MtlArchitecture | None = None) -> int:
    """Multiply-accumulate estimate: epochs × samples × per-sample cost.

    Per-sample cost is the trunk product plus branch_count times the sum of
    consecutive-width products down one branch chain.
    """
    if epochs < 0 or samples < 0:
        raise ValueError("epochs and samples must be non-negative")
    arch = arch or MtlArchitecture()
    chain = arch.branch_chain()
    branch_cost = sum(chain[i] * chain[i + 1] for i in range(len(chain) - 1))
    per_sample = arch.input_width * arch.trunk_width + arch.branch_count * branch_cost
    return epochs * samples * per_sample


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 16
    learning_rate: float = 1e-6
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be non-negative, got {self.learning_rate}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    def to_dict(self) -> dict:
        return {"epochs": self.epochs, "batch_size": self.batch_size,
                "learning_rate": self.learning_rate, "seed": self.seed,
                "shuffle": self.shuffle}


# Training regimes: `desk` finishes in minutes on one CPU core; `paper` is
# the full-scale reference recipe and runs for hours.
PRESETS = {
    "desk": {"epochs": 300, "batch_size": 64, "learning_rate": 1e-3},
    "paper": {"epochs": 10000, "batch_size": 16, "learning_rate": 1e-6},
}


def preset_config(name: str, seed: int = 0, **overrides) -> TrainConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    fields = dict(PRESETS[name])
    fields.update(overrides)
    return TrainConfig(seed=seed, **fields)


@dataclass
class TrainingHistory:
    """Per-epoch per-task accuracies and the epoch's mean training loss."""

    train_accuracy: np.ndarray
    val_accuracy: np.ndarray
    loss: np.ndarray

    @property
    def epochs(self) -> int:
        return int(self.loss.shape[0])


def _forward_cached(model: MtlModel, x: np.ndarray):
    trunk_out, trunk_z = dense_forward(model.trunk, x)
    branch_caches = []
    outs = []
    for branch in model.branches:
        out, caches = network_forward(branch, trunk_out)
        outs.append(out)
        branch_caches.append(caches)
    return np.concatenate(outs, axis=-1), trunk_z, branch_caches


def _batch_gradients(model: MtlModel, x: np.ndarray, y: np.ndarray):
    """Loss and parameter gradients (in parameters() order) for one batch.

    The input gradient of the trunk is never formed: x is data, so the
    widest backward product is skipped entirely.
    """
    n = x.shape[0]
    probs, trunk_z, branch_caches = _forward_cached(model, x)
    loss = float(sum(bce_loss(probs[:, k], y[:, k]) for k in range(len(model.branches))))

    # d(sum of per-task mean BCE)/d(prob): each task's mean divides by the
    # batch size only; the clamp flattens the loss outside (ε, 1−ε).
    inside = (probs > BCE_CLAMP) & (probs < 1.0 - BCE_CLAMP)
    pc = np.clip(probs, BCE_CLAMP, 1.0 - BCE_CLAMP)
    delta_out = np.where(inside, (pc - y) / (pc * (1.0 - pc)), 0.0) / n

    branch_grads = []
    trunk_out_delta = np.zeros((n, model.architecture.trunk_width))
    for k, branch in enumerate(model.branches):
        grads, d_trunk = stack_backward(branch, branch_caches[k], delta_out[:, k:k + 1])
        branch_grads.append(grads)
        trunk_out_delta += d_trunk

    dz = trunk_out_delta * (trunk_z > 0.0)
    flat = [dz.T @ x, dz.sum(axis=0)]
    for grads in branch_grads:
        for dw, db in grads:
            flat.extend((dw, db))
    return loss, flat, probs


def evaluate_accuracy(model: MtlModel, features, labels, chunk: int = 1024) -> np.ndarray:
    """Per-task fraction of threshold-0.5 predictions matching the labels."""
    n = features.shape[0]
    if n == 0:
        return np.full(len(COMPONENTS), np.nan)
    correct = np.zeros(len(COMPONENTS))
    for lo in range(0, n, chunk):
        x = np.asarray(features[lo:lo + chunk], dtype=np.float64)
        probs = forward(model, x)
        correct += (threshold_bits(probs) == labels[lo:lo + chunk]).sum(axis=0)
    return correct / n


def train(model: MtlModel, train_split, val_split, config: TrainConfig) -> TrainingHistory:
    """Mini-batch Adam training; updates the model in place.

    Fresh optimizer state is created per call and left on model.optimizer.
    Shuffling, batching (final partial batch included) and all arithmetic are
    deterministic for fixed (data, config), so identical runs give identical
    histories and parameters. Training accuracy is accumulated from batch
    predictions as the epoch progresses; validation accuracy is a full pass
    at the end of each epoch.
    """
    n = len(train_split.features)
    if n == 0:
        raise ValueError("train split is empty")
    if config.batch_size > n:
        raise ValueError(f"batch_size {config.batch_size} exceeds train set size {n}")
    width = model.architecture.input_width
    if train_split.features.shape[1] != width:
        raise ValueError(
            f"train feature width {train_split.features.shape[1]} does not match model ({width})"
        )

    params = model.parameters()
    state = AdamState.init(params, learning_rate=config.learning_rate)
    model.optimizer = state
    rng = np.random.default_rng(config.seed)
    tasks = len(COMPONENTS)
    train_acc = np.empty((config.epochs, tasks))
    val_acc = np.empty((config.epochs, tasks))
    losses = np.empty(config.epochs)

    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        loss_sum = 0.0
        correct = np.zeros(tasks)
        for lo in range(0, n, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            x = np.asarray(train_split.features[idx], dtype=np.float64)
            y = np.asarray(train_split.labels[idx], dtype=np.float64)
            loss, grads, probs = _batch_gradients(model, x, y)
            adam_step(params, grads, state)
            loss_sum += loss * len(idx)
            correct += (threshold_bits(probs) == train_split.labels[idx]).sum(axis=0)
        train_acc[epoch] = correct / n
        val_acc[epoch] = evaluate_accuracy(model, val_split.features, val_split.labels)
        losses[epoch] = loss_sum / n

    model.provenance["train"] = {"config": config.to_dict(), "train_samples": n,
                                 "validation_samples": int(len(val_split.features))}
    return TrainingHistory(train_acc, val_acc, losses)


def write_history_csv(history: TrainingHistory, path) -> None:
    """CSV of (epoch, task, split, accuracy, loss): 8 rows per epoch.

    The loss column repeats the epoch's training loss on all of the epoch's
    rows; accuracies that were never computed (empty split) appear as NA.
    """
    def fmt(value: float) -> str:
        return "NA" if np.isnan(value) else f"{value:.6f}"

    with open(path, "w") as f:
        f.write("epoch,task,split,accuracy,loss\n")
        for e in range(history.epochs):
            loss = f"{history.loss[e]:.6f}"
            for t, task in enumerate(COMPONENTS):
                f.write(f"{e + 1},{task},train,{fmt(history.train_accuracy[e, t])},{loss}\n")
                f.write(f"{e + 1},{task},validation,{fmt(history.val_accuracy[e, t])},{loss}\n")


class CheckpointFormatError(Exception):
    """Raised when a checkpoint file fails magic, version, or shape checks."""


CHECKPOINT_MAGIC = b"RFM1"
CHECKPOINT_VERSION = 1
_CKPT_PREFIX = struct.Struct("<4sII")  # magic, version, JSON header length


def save_checkpoint(model: MtlModel, path) -> None:
    """Write magic + JSON header + little-endian float64 parameter block.

    The optimizer moments, when present, follow the parameters in the same
    flat order (all first moments, then all second moments).
    """
    params = model.parameters()
    header = {
        "architecture": model.architecture.to_dict(),
        "provenance": model.provenance,
        "param_count": int(sum(p.size for p in params)),
        "optimizer": None,
    }
    opt = model.optimizer
    if opt is not None:
        header["optimizer"] = {
            "step_count": opt.step_count,
            "learning_rate": opt.learning_rate,
            "beta1": opt.beta1,
            "beta2": opt.beta2,
            "epsilon": opt.epsilon,
        }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(_CKPT_PREFIX.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(header_bytes)))
        f.write(header_bytes)
        for p in params:
            f.write(p.astype("<f8").tobytes())
        if opt is not None:
            for moments in (opt.first_moment, opt.second_moment):
                for m in moments:
                    f.write(np.asarray(m).astype("<f8").tobytes())


def _take_block(data: bytes, offset: int, shapes) -> tuple[list, int]:
    arrays = []
    for shape in shapes:
        size = int(np.prod(shape)) * 8
        if offset + size > len(data):
            raise CheckpointFormatError(f"file truncated at byte {len(data)}; "
                                        f"needed {offset + size} bytes")
        arrays.append(np.frombuffer(data[offset:offset + size], dtype="<f8")
                      .astype(np.float64).reshape(shape))
        offset += size
    return arrays, offset


def load_checkpoint(path, expected_input_width: int | None = None) -> MtlModel:
    """Rebuild a model (and optimizer state, if saved) from a checkpoint."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _CKPT_PREFIX.size:
        raise CheckpointFormatError(f"file ends at byte {len(data)}; expected a "
                                    f"{_CKPT_PREFIX.size}-byte prefix")
    magic, version, header_len = _CKPT_PREFIX.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(f"bad magic {magic!r} at byte 0; expected {CHECKPOINT_MAGIC!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointFormatError(f"unsupported version {version}; expected {CHECKPOINT_VERSION}")
    try:
        header = json.loads(data[_CKPT_PREFIX.size:_CKPT_PREFIX.size + header_len])
    except ValueError as exc:
        raise CheckpointFormatError(f"unreadable JSON header: {exc}") from exc
    arch = MtlArchitecture.from_dict(header["architecture"])
    if expected_input_width is not None and arch.input_width != expected_input_width:
        raise CheckpointFormatError(
            f"checkpoint input width {arch.input_width}, expected {expected_input_width}"
        )

    shapes = [(arch.trunk_width, arch.input_width), (arch.trunk_width,)]
    chain = arch.branch_chain()
    for _ in range(arch.branch_count):
        for i in range(len(chain) - 1):
            shapes.extend([(chain[i + 1], chain[i]), (chain[i + 1],)])
    declared = int(header["param_count"])
    actual = int(sum(np.prod(s) for s in shapes))
    if declared != actual:
        raise CheckpointFormatError(
            f"header declares {declared} parameters; architecture implies {actual}"
        )

    offset = _CKPT_PREFIX.size + header_len
    arrays, offset = _take_block(data, offset, shapes)
    trunk = DenseLayer(arrays[0], arrays[1], RELU)
    activations = (RELU,) * len(arch.branch_widths) + (SIGMOID,)
    branches = []
    i = 2
    for _ in range(arch.branch_count):
        branch = []
        for act in activations:
            branch.append(DenseLayer(arrays[i], arrays[i + 1], act))
            i += 2
        branches.append(branch)
    model = MtlModel(arch, trunk, branches, provenance=header.get("provenance", {}))

    opt_header = header.get("optimizer")
    if opt_header is not None:
        first, offset = _take_block(data, offset, shapes)
        second, offset = _take_block(data, offset, shapes)
        model.optimizer = AdamState(
            first_moment=first,
            second_moment=second,
            step_count=int(opt_header["step_count"]),
            learning_rate=float(opt_header["learning_rate"]),
            beta1=float(opt_header["beta1"]),
            beta2=float(opt_header["beta2"]),
            epsilon=float(opt_header["epsilon"]),
        )
    if offset != len(data):
        raise CheckpointFormatError(f"trailing data at byte {offset}")
    return model
