"""HTTP JSON facade over the workbench modules.

The service performs no statistics of its own: every numeric payload is
the verbatim export of the owning module.  State lives in in-memory
registries with TTL eviction; durable state is the downloadable panorama
file.  Environment knobs: UCREG_ADDR (serve bind), UCREG_MAX_UPLOAD
(bytes), UCREG_UI_ORIGIN (CORS origin, default ``*``).
"""

from __future__ import annotations

import os
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .correlation import GLOBAL, build_panorama as build_correlation_panorama
from .dataset import Dataset, column_stats, decompose_target, load_table
from .errors import DatasetNotAttachedError, UcregError
from .evaluation import confusion, roc_curve, split
from .logit import FitConfig, probability_matrix
from .panorama import (
    ChartSpec,
    PanoramaFile,
    build_panorama,
    dataset_fingerprint,
    load as load_panorama,
)
from .query import QuerySession, batch_query, query, similar_cases, streamgraph, submit_state
from .radviz import layout_attributes, layout_items, layout_to_json_dict, place_anchors

DEFAULT_MAX_UPLOAD = 64 * 1024 * 1024
DEFAULT_TTL = 3600.0


class _Registry:
    """id -> entry store with sliding TTL eviction."""

    def __init__(self, ttl: float, clock=time.monotonic):
        self.ttl = ttl
        self.clock = clock
        self._items: dict = {}
        self._lock = threading.Lock()

    def _evict(self):
        now = self.clock()
        dead = [k for k, (_, exp) in self._items.items() if exp <= now]
        for k in dead:
            del self._items[k]

    def put(self, obj) -> str:
        with self._lock:
            self._evict()
            key = uuid.uuid4().hex[:12]
            self._items[key] = (obj, self.clock() + self.ttl)
            return key

    def get(self, key: str, kind: str):
        with self._lock:
            self._evict()
            if key not in self._items:
                raise HTTPException(status_code=404, detail=f"unknown {kind} id {key!r}")
            obj, _ = self._items[key]
            self._items[key] = (obj, self.clock() + self.ttl)
            return obj


class _DatasetEntry:
    def __init__(self, ds: Dataset):
        self.ds = ds
        self.dec = None


class _ModelEntry:
    def __init__(self, chart, dec_eval, dataset_id, eval_rows):
        self.chart = chart
        self.dec_eval = dec_eval
        self.dataset_id = dataset_id
        self.eval_rows = eval_rows


class _SessionEntry:
    def __init__(self, session: QuerySession):
        self.session = session
        self.lock = threading.Lock()
        self.fingerprint_warning = False


class TargetBody(BaseModel):
    target: str


class SplitBody(BaseModel):
    ratio: float = 0.2
    seed: int = 0


class FitBody(BaseModel):
    max_iter: int = 100
    tol: float = 1e-8
    l2: float = 1e-6

    def config(self) -> FitConfig:
        return FitConfig(max_iter=self.max_iter, tol=self.tol, l2=self.l2)


class ModelBody(BaseModel):
    dataset_id: str
    target: str
    labels: list[str]
    attributes: list[str]
    title: str | None = None
    split: SplitBody | None = None
    fit: FitBody = FitBody()


class ChartSpecBody(BaseModel):
    title: str
    target: str
    labels: list[str]
    attributes: list[str]


class PanoramaBody(BaseModel):
    dataset_id: str
    specs: list[ChartSpecBody]
    fit: FitBody = FitBody()


class QueryBody(BaseModel):
    profile: dict[str, float]
    session_id: str | None = None
    panorama_id: str | None = None
    panorama: dict | None = None
    dataset_id: str | None = None
    force: bool = False


class BatchBody(BaseModel):
    dataset_id: str
    session_id: str | None = None
    panorama_id: str | None = None
    panorama: dict | None = None
    color_attr: str | None = None


def _probs_json(vec) -> list[float]:
    return [float(v) for v in vec]


def create_app(
    max_upload: int | None = None,
    ttl: float = DEFAULT_TTL,
    cors_origin: str | None = None,
    clock=time.monotonic,
) -> FastAPI:
    if max_upload is None:
        max_upload = int(os.environ.get("UCREG_MAX_UPLOAD", DEFAULT_MAX_UPLOAD))
    if cors_origin is None:
        cors_origin = os.environ.get("UCREG_UI_ORIGIN", "*")

    app = FastAPI(title="ucreg service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    datasets = _Registry(ttl, clock)
    models = _Registry(ttl, clock)
    panoramas = _Registry(ttl, clock)
    sessions = _Registry(ttl, clock)

    @app.exception_handler(UcregError)
    async def _ucreg_error(request: Request, exc: UcregError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=400, content={"detail": str(exc)})

    # ------------------------------------------------------------- datasets

    @app.post("/datasets")
    async def upload_dataset(
        request: Request,
        delimiter: str = ",",
        header: bool = True,
        missing: str = ",NA,null",
    ):
        body = await request.body()
        if len(body) > max_upload:
            raise HTTPException(
                status_code=413,
                detail=f"upload exceeds {max_upload} bytes",
            )
        ds = load_table(
            body, delimiter=delimiter, header=header,
            missing_tokens=tuple(missing.split(",")),
        )
        dataset_id = datasets.put(_DatasetEntry(ds))
        stats = {}
        for name in ds.attr_names:
            try:
                stats[name] = column_stats(ds, name)
            except UcregError:
                stats[name] = None
        return {
            "dataset_id": dataset_id,
            "n_rows": ds.n_rows,
            "n_attrs": ds.n_attrs,
            "attributes": ds.attr_names,
            "categorical": ds.categorical_names,
            "stats": stats,
        }

    @app.post("/datasets/{dataset_id}/target")
    def set_target(dataset_id: str, body: TargetBody):
        entry = datasets.get(dataset_id, "dataset")
        dec = decompose_target(entry.ds, body.target)
        entry.ds = entry.ds.with_target(body.target)
        entry.dec = dec
        return {
            "target": body.target,
            "labels": list(dec.labels),
            "counts": [int(c) for c in dec.counts],
            "dropped_rows": dec.n_dropped,
        }

    @app.get("/datasets/{dataset_id}/panorama")
    def attribute_panorama(
        dataset_id: str,
        focus: str = GLOBAL,
        distortion: float = 1.0,
        exclude: str = "",
    ):
        entry = datasets.get(dataset_id, "dataset")
        if entry.dec is None:
            raise HTTPException(status_code=400, detail="set a target first")
        excluded = {e for e in exclude.split(",") if e}
        p = build_correlation_panorama(entry.ds, entry.dec, excluded=excluded)
        ring = place_anchors(p.labels)
        points = layout_attributes(
            p, ring, focus=focus, distortion=distortion, ds=entry.ds
        )
        return {
            "panorama": p.to_json_dict(),
            "layout": layout_to_json_dict(ring, points),
        }

    # --------------------------------------------------------------- models

    def _fit_chart(entry: _DatasetEntry, body: ModelBody):
        from .panorama import _build_chart

        title = body.title or f"{body.target}: {', '.join(body.labels)}"
        spec = ChartSpec(
            title=title,
            target_attr=body.target,
            labels=tuple(body.labels),
            attributes=tuple(body.attributes),
        )
        ds = entry.ds
        if body.split is not None:
            train_rows, eval_rows = split(ds, body.split.ratio, body.split.seed)
        else:
            train_rows = eval_rows = np.arange(ds.n_rows)
        chart = _build_chart(ds, spec, body.fit.config(), rows=train_rows)

        dec_full = decompose_target(ds, body.target)
        if len(body.labels) == 1:
            dec_eval = dec_full.label_vs_rest(body.labels[0])
        else:
            dec_eval = dec_full.restricted(body.labels)
        keep = np.isin(dec_eval.row_indices, eval_rows)
        dec_eval = dec_eval.select_rows(np.where(keep)[0])
        return chart, dec_eval, eval_rows

    @app.post("/models")
    def fit_model(body: ModelBody):
        entry = datasets.get(body.dataset_id, "dataset")
        chart, dec_eval, eval_rows = _fit_chart(entry, body)
        mm = chart.model
        pm = probability_matrix(mm, entry.ds, rows=dec_eval.row_indices)
        pos_by_row = {int(r): i for i, r in enumerate(dec_eval.row_indices)}
        rocs = []
        for j, sub in enumerate(mm.submodels):
            scores = pm.matrix[:, j]
            truth = np.array(
                [dec_eval.presence[pos_by_row[int(r)], j] for r in pm.row_indices]
            )
            curve = roc_curve(scores, truth)
            rocs.append(
                {
                    "label": mm.labels[j],
                    **curve.to_json_dict(
                        model_meta={
                            "equation": sub.equation(mm.labels[j]),
                            "p_value": sub.diagnostics.p_value,
                        }
                    ),
                }
            )
        cm = confusion(mm, entry.ds, dec_eval)
        model_id = models.put(
            _ModelEntry(chart, dec_eval, body.dataset_id, eval_rows)
        )
        return {
            "model_id": model_id,
            "model": mm.to_json_dict(),
            "rocs": rocs,
            "confusion": cm.to_json_dict(),
            "evaluated_on": "test" if body.split is not None else "train",
        }

    @app.get("/models/{model_id}/lorrviz")
    def lorrviz(model_id: str, color: str = "truth", distortion: float = 1.0):
        entry = models.get(model_id, "model")
        ds_entry = datasets.get(entry.dataset_id, "dataset")
        mm = entry.chart.model
        pm = probability_matrix(mm, ds_entry.ds, rows=entry.dec_eval.row_indices)
        ring = place_anchors(mm.labels)
        true_labels = None
        if color == "truth":
            pos_by_row = {int(r): i for i, r in enumerate(entry.dec_eval.row_indices)}
            truth_idx = np.argmax(entry.dec_eval.presence, axis=1)
            true_labels = [
                entry.dec_eval.labels[truth_idx[pos_by_row[int(r)]]]
                for r in pm.row_indices
            ]
            true_labels = [
                lab if lab in mm.labels else None for lab in true_labels
            ]
        points = layout_items(
            pm.matrix,
            ring,
            true_labels=true_labels,
            distortion=distortion,
            ids=[int(i) for i in pm.row_indices],
        )
        return layout_to_json_dict(ring, points)

    # ------------------------------------------------------------ panoramas

    @app.post("/panoramas")
    def build_panorama_file(body: PanoramaBody):
        entry = datasets.get(body.dataset_id, "dataset")
        specs = [
            ChartSpec(
                title=s.title,
                target_attr=s.target,
                labels=tuple(s.labels),
                attributes=tuple(s.attributes),
            )
            for s in body.specs
        ]
        pf = build_panorama(entry.ds, specs, cfg=body.fit.config())
        panorama_id = panoramas.put(pf)
        return {"panorama_id": panorama_id, "file": pf.to_json_dict()}

    # ---------------------------------------------------------------- query

    def _resolve_session(body) -> tuple[str, _SessionEntry]:
        if body.session_id is not None:
            return body.session_id, sessions.get(body.session_id, "session")
        if body.panorama_id is not None:
            pf = panoramas.get(body.panorama_id, "panorama")
        elif body.panorama is not None:
            import json as _json

            pf = load_panorama(_json.dumps(body.panorama).encode())
        else:
            raise HTTPException(
                status_code=400,
                detail="provide session_id, panorama_id, or an inline panorama",
            )
        entry = _SessionEntry(QuerySession(panorama=pf))
        return sessions.put(entry), entry

    def _attach_dataset(entry: _SessionEntry, body):
        if body.dataset_id is None:
            return
        ds = datasets.get(body.dataset_id, "dataset").ds
        pf = entry.session.panorama
        if pf.fingerprint is not None:
            match = dataset_fingerprint(ds) == pf.fingerprint
            if not match and not body.force:
                raise HTTPException(
                    status_code=409,
                    detail={
                        "warning": "stale_dataset_fingerprint",
                        "message": "attached dataset differs from the training "
                        "dataset; repeat with force=true to attach anyway",
                    },
                )
            entry.fingerprint_warning = not match
        entry.session.attach_dataset(ds)

    def _results_json(pf: PanoramaFile, results: dict) -> list[dict]:
        return [
            {
                "title": c.spec.title,
                "labels": list(c.model.labels),
                "probabilities": _probs_json(results[c.spec.title]),
            }
            for c in pf.charts
        ]

    @app.post("/query")
    def query_profile(body: QueryBody):
        session_id, entry = _resolve_session(body)
        _attach_dataset(entry, body)
        results = query(entry.session.panorama, body.profile)
        return {
            "session_id": session_id,
            "results": _results_json(entry.session.panorama, results),
            "fingerprint_warning": entry.fingerprint_warning,
        }

    @app.post("/query/state")
    def query_state(body: QueryBody):
        session_id, entry = _resolve_session(body)
        _attach_dataset(entry, body)
        with entry.lock:
            submit_state(entry.session, body.profile)
            pf = entry.session.panorama
            last = {
                c.spec.title: entry.session.trajectories[c.spec.title][-1]
                for c in pf.charts
            }
            return {
                "session_id": session_id,
                "state_index": len(entry.session.history) - 1,
                "results": _results_json(pf, last),
                "streamgraphs": [
                    streamgraph(entry.session, c.spec.title) for c in pf.charts
                ],
            }

    @app.get("/query/similar")
    def query_similar(session_id: str, chart: str = "", top_n: int = 10):
        entry = sessions.get(session_id, "session")
        session = entry.session
        pf = session.panorama
        title = chart or pf.charts[0].spec.title
        if not session.history:
            raise HTTPException(status_code=400, detail="no submitted profile yet")
        try:
            cases = similar_cases(
                session.dataset, session.history[-1].values, pf.chart(title), top_n
            )
        except DatasetNotAttachedError:
            return {"available": False, "chart": title, "cases": []}
        return {
            "available": True,
            "chart": title,
            "cases": [{"row_id": r, "similarity": s} for r, s in cases],
        }

    @app.post("/query/batch")
    def query_batch(body: BatchBody):
        qb = QueryBody(profile={}, session_id=body.session_id,
                       panorama_id=body.panorama_id, panorama=body.panorama)
        _, entry = _resolve_session(qb)
        table = datasets.get(body.dataset_id, "dataset").ds
        result = batch_query(entry.session.panorama, table, color_attr=body.color_attr)
        return {
            "charts": [
                {
                    "title": c.title,
                    "labels": list(c.labels),
                    "probabilities": c.probabilities.to_json_dict(),
                    "layout": c.layout_json_dict(),
                }
                for c in result.charts
            ]
        }

    return app


def serve(addr: str | None = None, max_upload: int | None = None):
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    if addr is None:
        addr = os.environ.get("UCREG_ADDR", "127.0.0.1:8930")
    host, _, port = addr.rpartition(":")
    uvicorn.run(create_app(max_upload=max_upload), host=host or "127.0.0.1",
                port=int(port))
