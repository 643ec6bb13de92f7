"""Score a trained model per component and read the confusion-based metrics.

Run:  python3 demos/05_evaluate_and_report.py
"""

import os
import tempfile

import numpy as np

from rfdiag.dataset import DatasetConfig, QualityTier, generate_dataset
from rfdiag.metrics import REPORT_ORDER, component_report, confusion, write_metrics_csv
from rfdiag.mtlmodel import TrainConfig, build, forward, threshold_bits, train

config = DatasetConfig(
    tier=QualityTier.HIGH,
    total_samples=3000,
    split=(2000, 500, 500),
    master_seed=42,
)
ds = generate_dataset(config)
model = build(seed=0)
print("training briefly so the report has something to say ...")
train(model, ds.split("train"), ds.split("validation"),
      TrainConfig(epochs=10, batch_size=64, learning_rate=1e-3, seed=1))

test = ds.split("test")
probs = forward(model, np.asarray(test.features, dtype=np.float64))
bits = threshold_bits(probs)

counts = confusion(bits, test.labels)
print("\nconfusion counts on the test split:")
for name in REPORT_ORDER:
    c = counts[name]
    print(f"  {name:<7} tp={c.tp:<4} tn={c.tn:<4} fp={c.fp:<4} fn={c.fn:<4}")

report = component_report(bits, test.labels)
print("\nper-component metrics (None = undefined 0/0 case):")
for name in REPORT_ORDER:
    m = report[name]
    cells = ["None" if v is None else f"{v:.3f}"
             for v in (m.accuracy, m.precision, m.recall, m.f1)]
    print(f"  {name:<7} accuracy={cells[0]} precision={cells[1]} "
          f"recall={cells[2]} f1={cells[3]}")

with tempfile.TemporaryDirectory() as tmp:
    out = os.path.join(tmp, "metrics.csv")
    write_metrics_csv(report, out, tier=config.tier.value)
    print(f"\nCSV layout (what `rfdiag eval` writes):")
    print(open(out).read().rstrip())
