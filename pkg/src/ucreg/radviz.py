"""Radial anchor placement and weighted barycentric projection.

Shared by the attribute panorama (weights = |correlation|) and the item
view (weights = predicted probabilities).  Anchors sit on the unit circle;
every projected point is a convex combination of the visible anchors, so
it always lands inside their hull.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import GLOBAL, CorrelationPanorama, attr_vs_attr
from .errors import (
    EmptyRingError,
    InvalidWeightError,
    LabelMismatchError,
    NormalizationError,
    UnknownAttributeError,
)

SIZE_MIN = 4.0
SIZE_MAX = 18.0
ITEM_SIZE = 6.0

# first visible anchor points straight up
PHASE = np.pi / 2


@dataclass(frozen=True)
class Anchor:
    label: str
    angle: float | None
    visible: bool

    @property
    def position(self) -> np.ndarray:
        if self.angle is None:
            return np.array([np.nan, np.nan])
        return np.array([np.cos(self.angle), np.sin(self.angle)])


@dataclass(frozen=True)
class AnchorRing:
    anchors: tuple[Anchor, ...]
    radius: float = 1.0

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a.label for a in self.anchors)

    @property
    def visible_mask(self) -> np.ndarray:
        return np.array([a.visible for a in self.anchors], dtype=bool)

    def visible_positions(self) -> np.ndarray:
        return np.array([a.position for a in self.anchors if a.visible])

    def to_json_dict(self) -> dict:
        return {
            "anchors": [
                {"label": a.label, "angle": a.angle, "visible": a.visible}
                for a in self.anchors
            ]
        }


@dataclass(frozen=True)
class ProjectedPoint:
    ref_id: object
    x: float
    y: float
    size: float
    color_label: int

    def to_json_dict(self) -> dict:
        return {
            "id": self.ref_id,
            "x": self.x,
            "y": self.y,
            "size": self.size,
            "color_label": self.color_label,
        }


def place_anchors(labels, visible=None) -> AnchorRing:
    """Evenly space the visible anchors around the unit circle.

    Hidden anchors keep their label but get no angle and exert no force.
    """
    labels = list(labels)
    if visible is None:
        visible = [True] * len(labels)
    visible = list(visible)
    if len(visible) != len(labels):
        raise LabelMismatchError("visible mask length differs from labels")
    v = sum(visible)
    if v == 0:
        raise EmptyRingError("all anchors hidden")
    anchors = []
    slot = 0
    for label, vis in zip(labels, visible):
        if vis:
            angle = float((2 * np.pi * slot / v + PHASE) % (2 * np.pi))
            anchors.append(Anchor(label, angle, True))
            slot += 1
        else:
            anchors.append(Anchor(label, None, False))
    return AnchorRing(anchors=tuple(anchors))


def radviz_map(weights, ring: AnchorRing, distortion: float = 1.0):
    """Project one weight vector to the weighted barycenter of the anchors.

    position = sum_j w_j^p A_j / sum_j w_j^p over visible anchors; an
    all-zero weight vector maps to the origin.  Weights are normalized
    before the dot product so a one-hot vector reproduces its anchor
    bit-for-bit.
    """
    if distortion < 1.0:
        raise ValueError("distortion exponent must be >= 1")
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(ring.anchors),):
        raise LabelMismatchError(
            f"expected {len(ring.anchors)} weights, got {w.shape}"
        )
    if not np.all(np.isfinite(w)):
        raise InvalidWeightError("weights must be finite")
    mask = ring.visible_mask
    wv = w[mask]
    if np.any(wv < 0):
        raise InvalidWeightError("weights must be nonnegative")
    wp = wv if distortion == 1.0 else wv**distortion
    total = wp.sum()
    if total == 0.0:
        return (0.0, 0.0)
    u = wp / total
    pos = u @ ring.visible_positions()
    return (float(pos[0]), float(pos[1]))


def _attr_scores(
    p: CorrelationPanorama, focus, ds
) -> np.ndarray:
    """Per-attribute size score under the requested perspective."""
    if focus == GLOBAL:
        return np.abs(p.R).max(axis=1)
    if isinstance(focus, int):
        if not 0 <= focus < len(p.labels):
            raise UnknownAttributeError(f"label index {focus}")
        return np.abs(p.R[:, focus])
    if focus in p.labels:
        return np.abs(p.R[:, p.labels.index(focus)])
    if focus in p.attr_names:
        if ds is None:
            raise LabelMismatchError(
                "attribute focus requires the dataset for attr-vs-attr scores"
            )
        by_name = dict(attr_vs_attr(ds, focus))
        # the focus attribute itself keeps full size (self correlation)
        return np.array(
            [abs(by_name.get(a, 1.0)) if a != focus else 1.0 for a in p.attr_names]
        )
    raise UnknownAttributeError(str(focus))


def layout_attributes(
    p: CorrelationPanorama,
    ring: AnchorRing,
    focus=GLOBAL,
    distortion: float = 1.0,
    ds=None,
) -> list[ProjectedPoint]:
    """Place every attribute by its |r| weights toward the label anchors.

    Size encodes the ranking score under ``focus`` (GLOBAL, a label, or an
    attribute name for attr-vs-attr sizes); color is the dominant label.
    """
    if ring.labels != p.labels:
        raise LabelMismatchError(
            f"ring labels {ring.labels} != panorama labels {p.labels}"
        )
    scores = np.clip(_attr_scores(p, focus, ds), 0.0, 1.0)
    points = []
    for i, name in enumerate(p.attr_names):
        x, y = radviz_map(np.abs(p.R[i]), ring, distortion)
        size = SIZE_MIN + (SIZE_MAX - SIZE_MIN) * float(scores[i])
        points.append(
            ProjectedPoint(
                ref_id=name,
                x=x,
                y=y,
                size=size,
                color_label=int(p.dominant_label[i]),
            )
        )
    return points


def layout_items(
    P,
    ring: AnchorRing,
    true_labels=None,
    distortion: float = 1.0,
    ids=None,
) -> list[ProjectedPoint]:
    """Place items by their per-label probability rows.

    Rows must sum to 1 within 1e-9.  Color comes from ``true_labels``
    (label indices or names) when given, otherwise from the predicted
    argmax; size is constant.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[1] != len(ring.anchors):
        raise LabelMismatchError(
            f"probability matrix must be n x {len(ring.anchors)}"
        )
    sums = P.sum(axis=1)
    bad = np.where(np.abs(sums - 1.0) > 1e-9)[0]
    if len(bad):
        raise NormalizationError(
            f"row {bad[0]} sums to {sums[bad[0]]!r}, expected 1"
        )
    if ids is None:
        ids = list(range(len(P)))
    label_to_idx = {lab: i for i, lab in enumerate(ring.labels)}
    points = []
    for i in range(len(P)):
        x, y = radviz_map(P[i], ring, distortion)
        if true_labels is not None and true_labels[i] is not None:
            lab = true_labels[i]
            color = label_to_idx[lab] if isinstance(lab, str) else int(lab)
        else:
            color = int(np.argmax(P[i]))
        points.append(
            ProjectedPoint(ref_id=ids[i], x=x, y=y, size=ITEM_SIZE, color_label=color)
        )
    return points


def layout_to_json_dict(ring: AnchorRing, points) -> dict:
    """Combined export consumed by the UI and the CLI plot emitter."""
    out = ring.to_json_dict()
    out["points"] = [pt.to_json_dict() for pt in points]
    return out
