"""Build the multi-chart query panorama and (de)serialize the learning file.

The file is a single JSON document (suffix ``.ucreg.json``); floats are
written with shortest-round-trip precision so coefficients survive a
save/load cycle bit-exactly.  See docs/file-format.md for the field-by-
field schema.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .dataset import Dataset, decompose_target
from .errors import (
    ChartBuildError,
    DroppedRowsWarning,
    SchemaError,
    UcregError,
    UnknownAttributeError,
    UnsupportedVersionError,
)
from .logit import FitConfig, MultinomialModel, fit_multinomial

FORMAT_VERSION = 1
FILE_SUFFIX = ".ucreg.json"


@dataclass(frozen=True)
class ChartSpec:
    """One requested chart: a single label means binary label-vs-rest."""

    title: str
    target_attr: str
    labels: tuple[str, ...]
    attributes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.attributes:
            raise ValueError(f"chart {self.title!r}: no attributes selected")
        if not self.labels:
            raise ValueError(f"chart {self.title!r}: no labels selected")
        if self.target_attr in self.attributes:
            raise ValueError(
                f"chart {self.title!r}: target {self.target_attr!r} cannot "
                "also be an explanatory attribute"
            )

    def to_json_dict(self) -> dict:
        return {
            "title": self.title,
            "target": self.target_attr,
            "labels": list(self.labels),
            "attributes": list(self.attributes),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ChartSpec":
        return cls(
            title=doc["title"],
            target_attr=doc["target"],
            labels=tuple(doc["labels"]),
            attributes=tuple(doc["attributes"]),
        )


@dataclass(frozen=True)
class Chart:
    spec: ChartSpec
    model: MultinomialModel
    attr_means: dict = field(repr=False)

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "model": self.model.to_json_dict(),
            "attr_means": {k: float(v) for k, v in self.attr_means.items()},
        }


@dataclass(frozen=True)
class PanoramaFile:
    """Ordered trained charts plus the fingerprint of the training table."""

    charts: tuple[Chart, ...]
    created: str
    fingerprint: dict | None = None
    format_version: int = FORMAT_VERSION

    def chart(self, title: str) -> Chart:
        for c in self.charts:
            if c.spec.title == title:
                return c
        raise UnknownAttributeError(f"chart {title!r}")

    @property
    def all_attributes(self) -> list[str]:
        seen: list[str] = []
        for c in self.charts:
            for a in c.spec.attributes:
                if a not in seen:
                    seen.append(a)
        return seen

    @property
    def default_profile(self) -> dict:
        out: dict = {}
        for c in self.charts:
            for a, v in c.attr_means.items():
                out.setdefault(a, v)
        return out

    def to_json_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "created": self.created,
            "fingerprint": self.fingerprint,
            "charts": [c.to_json_dict() for c in self.charts],
        }


def dataset_fingerprint(ds: Dataset) -> dict:
    """Counts plus a sha256 over names and raw cell content."""
    h = hashlib.sha256()
    for name in ds.column_order:
        h.update(name.encode("utf-8"))
        col = ds.columns[name]
        if isinstance(col, np.ndarray):
            h.update(col.tobytes())
        else:
            h.update("\x00".join(repr(v) for v in col).encode("utf-8"))
    return {
        "n_rows": ds.n_rows,
        "n_attrs": ds.n_attrs,
        "sha256": h.hexdigest(),
    }


def _build_chart(
    ds: Dataset, spec: ChartSpec, cfg: FitConfig, rows=None
) -> Chart:
    unknown = [a for a in spec.attributes if a not in ds.attr_names]
    if unknown:
        raise UnknownAttributeError(unknown)
    dec_full = decompose_target(ds, spec.target_attr)
    bad_labels = [l for l in spec.labels if l not in dec_full.labels]
    if bad_labels:
        raise UnknownAttributeError([f"label {l!r}" for l in bad_labels])

    if len(spec.labels) == 1:
        dec = dec_full.label_vs_rest(spec.labels[0])
    else:
        dec = dec_full.restricted(spec.labels)
    if rows is not None:
        keep = np.isin(dec.row_indices, np.asarray(rows))
        dec = dec.select_rows(np.where(keep)[0])

    X = np.column_stack([ds.values(a)[dec.row_indices] for a in spec.attributes])
    complete = ~np.isnan(X).any(axis=1)
    n_dropped = int((~complete).sum())
    if n_dropped:
        warnings.warn(
            f"chart {spec.title!r}: excluded {n_dropped} row(s) with missing "
            "attribute values",
            DroppedRowsWarning,
            stacklevel=3,
        )
    dec_used = dec.select_rows(np.where(complete)[0])
    model = fit_multinomial(
        X[complete], dec_used, cfg=cfg, attr_names=spec.attributes
    )
    means = {
        a: float(np.nanmean(ds.values(a))) for a in spec.attributes
    }
    return Chart(spec=spec, model=model, attr_means=means)


def build_panorama(
    ds: Dataset,
    specs,
    cfg: FitConfig = FitConfig(),
    created: str | None = None,
) -> PanoramaFile:
    """Train every requested chart; a failing chart aborts the build by name."""
    charts = []
    for spec in specs:
        try:
            charts.append(_build_chart(ds, spec, cfg))
        except UcregError as e:
            raise ChartBuildError(spec.title, e) from e
    if created is None:
        created = datetime.now(timezone.utc).isoformat()
    return PanoramaFile(
        charts=tuple(charts),
        created=created,
        fingerprint=dataset_fingerprint(ds),
    )


def save(pf: PanoramaFile) -> bytes:
    """Serialize to the .ucreg.json document."""
    return json.dumps(pf.to_json_dict(), indent=2).encode("utf-8")


def load(raw: bytes) -> PanoramaFile:
    """Parse and validate a serialized panorama."""
    try:
        doc = json.loads(raw.decode("utf-8") if isinstance(raw, bytes) else raw)
    except (ValueError, UnicodeDecodeError) as e:
        raise SchemaError(f"not a valid panorama document: {e}") from e
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise SchemaError("missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"format_version {doc['format_version']!r} not supported "
            f"(expected {FORMAT_VERSION})"
        )
    try:
        charts = []
        for cdoc in doc["charts"]:
            spec = ChartSpec.from_json_dict(cdoc["spec"])
            model = MultinomialModel.from_json_dict(cdoc["model"])
            if tuple(model.attr_names) != spec.attributes:
                raise SchemaError(
                    f"chart {spec.title!r}: model attributes do not match spec"
                )
            charts.append(
                Chart(
                    spec=spec,
                    model=model,
                    attr_means={k: float(v) for k, v in cdoc["attr_means"].items()},
                )
            )
        return PanoramaFile(
            charts=tuple(charts),
            created=doc["created"],
            fingerprint=doc.get("fingerprint"),
        )
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed panorama document: {e}") from e
