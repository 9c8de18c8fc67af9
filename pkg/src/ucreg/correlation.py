"""Attribute-versus-label Pearson correlations and attribute ranking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, TargetDecomposition
from .errors import EmptyPanoramaError, InsufficientDataError, UnknownAttributeError

GLOBAL = "global"


def pearson(x, y) -> float:
    """Pearson product-moment r after pairwise removal of missing cells.

    Returns 0.0 when either vector has zero variance; raises
    InsufficientDataError with fewer than two usable pairs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("vectors must have equal length")
    ok = ~(np.isnan(x) | np.isnan(y))
    x, y = x[ok], y[ok]
    if len(x) < 2:
        raise InsufficientDataError(
            f"need at least 2 usable pairs, found {len(x)}"
        )
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(xc @ yc) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


@dataclass(frozen=True)
class CorrelationPanorama:
    """m x k matrix of attribute-label correlations.

    dominant_label[a] is argmax_j |R[a, j]| with the smallest index winning
    ties; it drives point colors in the radial layout.
    """

    attr_names: tuple[str, ...]
    labels: tuple[str, ...]
    R: np.ndarray
    dominant_label: np.ndarray

    @property
    def m(self) -> int:
        return len(self.attr_names)

    def row(self, attr: str) -> np.ndarray:
        try:
            return self.R[self.attr_names.index(attr)]
        except ValueError:
            raise UnknownAttributeError(attr) from None

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "attributes": list(self.attr_names),
            "matrix": [[float(v) for v in row] for row in self.R],
            "dominant_label": [int(j) for j in self.dominant_label],
        }


def build_panorama(
    ds: Dataset, dec: TargetDecomposition, excluded=frozenset()
) -> CorrelationPanorama:
    """Correlate every eligible numeric attribute with every presence vector.

    The target attribute itself and any name in ``excluded`` are skipped.
    """
    excluded = set(excluded) | {dec.target_name}
    names = [a for a in ds.attr_names if a not in excluded]
    if not names:
        raise EmptyPanoramaError("no eligible attributes for the panorama")

    R = np.zeros((len(names), dec.k))
    for i, name in enumerate(names):
        x = ds.values(name)[dec.row_indices]
        for j in range(dec.k):
            R[i, j] = pearson(x, dec.presence[:, j])
    dominant = np.argmax(np.abs(R), axis=1)
    return CorrelationPanorama(
        attr_names=tuple(names),
        labels=dec.labels,
        R=R,
        dominant_label=dominant.astype(np.intp),
    )


def attr_vs_attr(ds: Dataset, focus: str) -> list[tuple[str, float]]:
    """Pearson r between the focus attribute and every other attribute."""
    x = ds.values(focus)
    out = []
    for name in ds.attr_names:
        if name == focus:
            continue
        out.append((name, pearson(x, ds.values(name))))
    return out


def rank_attributes(p: CorrelationPanorama, focus=GLOBAL) -> list[tuple[str, float]]:
    """Attributes ordered by correlation strength under a perspective.

    focus=GLOBAL scores by max_j |R[a, j]|; a label (index or name) scores
    by |R[a, focus]|.  Descending score, attribute name breaks ties.
    """
    if focus == GLOBAL:
        scores = np.abs(p.R).max(axis=1)
    else:
        if isinstance(focus, str):
            try:
                focus = p.labels.index(focus)
            except ValueError:
                raise UnknownAttributeError(f"label {focus!r}") from None
        if not 0 <= focus < len(p.labels):
            raise UnknownAttributeError(f"label index {focus}")
        scores = np.abs(p.R[:, focus])
    order = sorted(zip(p.attr_names, scores), key=lambda t: (-t[1], t[0]))
    return [(name, float(s)) for name, s in order]
