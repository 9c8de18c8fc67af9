"""Item-level radial view of a multinomial model (the LoRRViz idea).

Fits three classes as two label-vs-reference logits, assembles the n x k
probability matrix, and projects every item toward the label anchors.
Well-classified items pile up on their anchors; uncertain ones drift
toward the middle.
"""

import warnings

import numpy as np

from ucreg.dataset import TargetDecomposition
from ucreg.errors import ConvergenceWarning
from ucreg.evaluation import confusion
from ucreg.logit import fit_multinomial, probability_matrix
from ucreg.radviz import layout_items, place_anchors

rng = np.random.default_rng(5)
centers = {"north": (0.0, 6.0), "west": (-5.0, -3.0), "east": (5.0, -3.0)}
X = np.vstack([rng.normal(c, 1.6, size=(50, 2)) for c in centers.values()])
y = np.repeat(np.arange(3), 50)

labels = tuple(centers)
presence = np.zeros((150, 3), dtype=np.int8)
presence[np.arange(150), y] = 1
dec = TargetDecomposition("region", labels, presence, np.arange(150))

with warnings.catch_warnings():
    warnings.simplefilter("ignore", ConvergenceWarning)
    mm = fit_multinomial(X, dec, attr_names=("u", "v"))

# n x k probabilities drive both the confusion matrix and the layout
from ucreg.dataset import Dataset

cols = {"u": X[:, 0].copy(), "v": X[:, 1].copy()}
for a in cols.values():
    a.flags.writeable = False
ds = Dataset(column_order=("u", "v"), columns=cols)
pm = probability_matrix(mm, ds)

ring = place_anchors(labels)
points = layout_items(pm.matrix, ring, true_labels=[labels[j] for j in y])

print("anchors:")
for a in ring.anchors:
    print(f"  {a.label:6s} at angle {a.angle:.2f}")

for name in labels:
    j = labels.index(name)
    members = [p for p, yy in zip(points, y) if yy == j]
    anchor = ring.anchors[j].position
    dists = [np.hypot(p.x - anchor[0], p.y - anchor[1]) for p in members]
    print(f"{name:6s}: mean distance to own anchor {np.mean(dists):.3f}")

cm = confusion(mm, ds, dec)
print("\nconfusion matrix (rows = truth):")
for lab, row in zip(cm.labels, cm.counts):
    print(f"  {lab:6s} {row.tolist()}")
