"""Train a binary logistic model and read its ROC report.

Predicts whether an animal is a mammal from three body attributes, on a
held-out split, and prints the pieces the ROC legend exposes: AUC, the
fitted equation in raw units, the model p-value, and the Youden-optimal
cutoff.
"""

import pathlib
import warnings

import numpy as np

from ucreg.dataset import decompose_target, load_table
from ucreg.errors import ConvergenceWarning
from ucreg.evaluation import roc_curve, split
from ucreg.logit import FitConfig, probability_matrix
from ucreg.panorama import ChartSpec, _build_chart

HERE = pathlib.Path(__file__).resolve().parent
zoo = load_table((HERE.parent / "data" / "zoo.csv").read_bytes())

train_rows, test_rows = split(zoo, ratio=0.2, seed=7)
print(f"split: {len(train_rows)} train / {len(test_rows)} test rows")

spec = ChartSpec("is mammal", "type", ("1",), ("milk", "legs", "catsize"))
with warnings.catch_warnings():
    warnings.simplefilter("ignore", ConvergenceWarning)
    chart = _build_chart(zoo, spec, FitConfig(), rows=train_rows)
sub = chart.model.submodels[0]

print("equation:", sub.equation("mammal"))
d = sub.diagnostics
print(f"fit: {d.iterations} iterations, converged={d.converged}, "
      f"LR chi2={d.lr_chi2:.2f}, p-value={d.p_value:.3g}")

# evaluate on the held-out rows
dec = decompose_target(zoo, "type").label_vs_rest("1")
keep = np.isin(dec.row_indices, test_rows)
dec = dec.select_rows(np.where(keep)[0])
pm = probability_matrix(chart.model, zoo, rows=dec.row_indices)
truth = dec.presence[:, 0]

curve = roc_curve(pm.matrix[:, 0], truth)
print(f"\ntest AUC: {curve.auc:.3f}")
print(f"optimal cutoff (max Youden J): t={curve.optimal_threshold:.3f}, "
      f"J={curve.optimal_j:.3f}")
print("sweep (threshold, sensitivity, specificity):")
for p in curve.points:
    print(f"  {p.threshold:8.3f}  {p.sensitivity:5.3f}  {p.specificity:5.3f}")
