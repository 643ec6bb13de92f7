"""Build the shared-trunk multi-task network and train it briefly.

The full desk-scale recipe (20000 train samples, 300 epochs) takes minutes;
this demo shrinks the dataset and epoch count to stay interactive while
exercising the identical code path.

Run:  python3 demos/04_train_identifier.py
"""

import numpy as np

from rfdiag.dataset import COMPONENTS, DatasetConfig, QualityTier, generate_dataset
from rfdiag.mtlmodel import (
    MtlArchitecture,
    TrainConfig,
    build,
    model_param_count,
    train,
    training_cost_estimate,
)

arch = MtlArchitecture()
print(f"architecture: trunk {arch.input_width}->{arch.trunk_width} shared by "
      f"{arch.branch_count} branches {arch.branch_widths}->{arch.output_per_branch}")
model = build(arch, seed=0)
print(f"parameters: {model_param_count(model)}")
print(f"per-sample multiply cost: {training_cost_estimate(1, 1, arch)}")

config = DatasetConfig(
    tier=QualityTier.HIGH,
    total_samples=3000,
    split=(2000, 500, 500),
    master_seed=42,
)
print(f"\ngenerating {config.total_samples} high-tier samples ...")
ds = generate_dataset(config)

train_cfg = TrainConfig(epochs=15, batch_size=64, learning_rate=1e-3, seed=1)
print(f"training: {train_cfg.epochs} epochs, batch {train_cfg.batch_size}, "
      f"lr {train_cfg.learning_rate}")
history = train(model, ds.split("train"), ds.split("validation"), train_cfg)

print("\nepoch  loss   " + "  ".join(f"{c:>7}" for c in COMPONENTS) + "   (validation accuracy)")
for e in range(0, history.epochs, 3):
    accs = "  ".join(f"{a:7.3f}" for a in history.val_accuracy[e])
    print(f"{e + 1:>5}  {history.loss[e]:5.3f}  {accs}")

final = history.val_accuracy[-1]
print("\nthe oscillator and mixer faults separate first; the filter and "
      "phase-shifter boundaries need the full desk-scale budget")
print("final validation accuracy: " +
      ", ".join(f"{c}={a:.3f}" for c, a in zip(COMPONENTS, final)))
