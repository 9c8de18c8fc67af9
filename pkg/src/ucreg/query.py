"""Profile queries against a panorama: probabilities, state history,
similar cases, streamgraph series, and batch dataset scoring."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, _format_label
from .errors import (
    DatasetNotAttachedError,
    IncompleteProfileError,
    UnknownAttributeError,
)
from .logit import ProbabilityMatrix, predict_multinomial, probability_matrix
from .panorama import Chart, PanoramaFile
from .radviz import AnchorRing, place_anchors, layout_items


@dataclass(frozen=True)
class ProfileState:
    values: dict
    submitted_at: int


@dataclass
class QuerySession:
    """Append-only history of submitted profiles for one panorama."""

    panorama: PanoramaFile
    dataset: Dataset | None = None
    history: list = field(default_factory=list)
    trajectories: dict = field(default_factory=dict)

    def attach_dataset(self, ds: Dataset):
        self.dataset = ds


def query(pf: PanoramaFile, profile) -> dict:
    """Per-chart probability vectors for one profile.

    Binary charts return (p, 1-p); multinomial charts the softmax vector.
    Missing attributes are reported across all charts at once.
    """
    missing = sorted(
        {
            a
            for c in pf.charts
            for a in c.spec.attributes
            if a not in profile
            or profile[a] is None
            or (isinstance(profile[a], float) and np.isnan(profile[a]))
        }
    )
    if missing:
        raise IncompleteProfileError(missing)
    return {
        c.spec.title: predict_multinomial(c.model, profile) for c in pf.charts
    }


def submit_state(session: QuerySession, profile) -> QuerySession:
    """Append one profile state and extend every chart's trajectory."""
    results = query(session.panorama, profile)
    session.history.append(
        ProfileState(values=dict(profile), submitted_at=len(session.history))
    )
    for title, probs in results.items():
        session.trajectories.setdefault(title, []).append(probs)
    return session


def streamgraph(session: QuerySession, title: str) -> dict:
    """Stacked per-label series over submitted state index for one chart."""
    chart = session.panorama.chart(title)
    rows = session.trajectories.get(title, [])
    labels = chart.model.labels
    return {
        "title": title,
        "labels": list(labels),
        "states": list(range(len(rows))),
        "series": [
            [float(row[j]) for row in rows] for j in range(len(labels))
        ],
    }


def similar_cases(ds: Dataset | None, profile, chart: Chart, top_n: int = 10):
    """Rows most correlated with the profile over the chart's attributes.

    Vectors are standardized per attribute using the attached dataset's
    own statistics, then compared by Pearson correlation across the
    attribute axis.  With a single attribute Pearson is undefined, so the
    similarity falls back to the negative z-score distance.  Returns
    (row_id, similarity) pairs, best first, row id breaking ties.
    """
    if ds is None:
        raise DatasetNotAttachedError(
            "similar cases need the original dataset attached"
        )
    attrs = chart.spec.attributes
    unknown = [a for a in attrs if a not in ds.attr_names]
    if unknown:
        raise UnknownAttributeError(unknown)

    from .logit import profile_vector

    x = profile_vector(profile, attrs)
    cols = np.column_stack([ds.values(a) for a in attrs])
    means = np.nanmean(cols, axis=0)
    stds = np.nanstd(cols, axis=0)
    stds[stds == 0.0] = 1.0  # constant columns: center only
    zp = (x - means) / stds
    Z = (cols - means) / stds

    eligible = ~np.isnan(Z).any(axis=1)
    sims = []
    for i in np.where(eligible)[0]:
        zr = Z[i]
        if len(attrs) == 1:
            sim = -abs(zp[0] - zr[0])
        else:
            from .correlation import pearson

            sim = pearson(zp, zr)
        sims.append((int(i), float(sim)))
    sims.sort(key=lambda t: (-t[1], t[0]))
    return sims[: max(0, int(top_n))]


@dataclass(frozen=True)
class BatchChartResult:
    title: str
    labels: tuple[str, ...]
    probabilities: ProbabilityMatrix
    ring: AnchorRing
    points: tuple

    def layout_json_dict(self) -> dict:
        out = self.ring.to_json_dict()
        out["points"] = [p.to_json_dict() for p in self.points]
        return out


@dataclass(frozen=True)
class BatchResult:
    charts: tuple[BatchChartResult, ...]


def batch_query(
    pf: PanoramaFile, table: Dataset, color_attr: str | None = None
) -> BatchResult:
    """Score a whole table against every chart, with item layouts.

    Rows with missing model attributes are excluded (count reported in
    each probability matrix).  When ``color_attr`` names a column, rows
    whose value matches a chart label are colored by it; other rows keep
    the predicted color.
    """
    results = []
    for chart in pf.charts:
        missing = [a for a in chart.spec.attributes if a not in table.attr_names]
        if missing:
            raise UnknownAttributeError(missing)
        pm = probability_matrix(chart.model, table)
        ring = place_anchors(chart.model.labels)
        true_labels = None
        if color_attr is not None:
            col = table.column(color_attr)
            if isinstance(col, np.ndarray):
                raw = [None if np.isnan(v) else _format_label(v) for v in col]
            else:
                raw = list(col)
            true_labels = [
                raw[i] if raw[i] in chart.model.labels else None
                for i in pm.row_indices
            ]
        points = layout_items(
            pm.matrix,
            ring,
            true_labels=true_labels,
            ids=[int(i) for i in pm.row_indices],
        )
        results.append(
            BatchChartResult(
                title=chart.spec.title,
                labels=chart.model.labels,
                probabilities=pm,
                ring=ring,
                points=tuple(points),
            )
        )
    return BatchResult(charts=tuple(results))
