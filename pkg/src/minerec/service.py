"""HTTP service exposing the full loop: upload, recommend, mine, explain.

The trained model bundle is loaded read-only at startup; training happens
through the CLI, never here.  All core calls are pure, so requests may be
served concurrently; the store serializes writes.  Error bodies carry the
stable machine-readable codes of the core error types.
"""
from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import discovery, explainer, features, petri, recommender
from .errors import (
    AllZeroWeights,
    DiscoveryFailure,
    EmptyLog,
    InvalidMeasure,
    InvalidWeights,
    MalformedXml,
    MinerecError,
    MissingActivity,
    MissingTimestamp,
    SchemaMismatch,
    UnfittedModel,
    UnknownLog,
    UnknownRecommendation,
    UnsupportedAlgorithm,
)
from .learner import ModelBundle, featurer_insights
from .quality import MEASURES
from .recommender import WeightVector
from .store import Store

DEFAULT_UPLOAD_CAP = 256 * 1024 * 1024

_STATUS_BY_ERROR = {
    MalformedXml: 400,
    MissingActivity: 400,
    MissingTimestamp: 400,
    EmptyLog: 400,
    UnknownLog: 404,
    UnknownRecommendation: 404,
    AllZeroWeights: 422,
    InvalidWeights: 422,
    InvalidMeasure: 422,
    UnsupportedAlgorithm: 422,
    DiscoveryFailure: 422,
    SchemaMismatch: 422,
    UnfittedModel: 422,
}


class WeightsModel(BaseModel):
    fitness: float = Field(ge=0)
    precision: float = Field(ge=0)
    generalization: float = Field(ge=0)
    simplicity: float = Field(ge=0)


class RecommendRequest(BaseModel):
    log_id: str
    weights: WeightsModel


class DiscoverRequest(BaseModel):
    log_id: str
    algorithm: str
    params: dict[str, float] | None = None


def create_app(
    data_dir: str | Path,
    bundle_path: str | Path,
    upload_cap: int = DEFAULT_UPLOAD_CAP,
    static_dir: str | Path | None = None,
) -> FastAPI:
    store = Store(data_dir)
    bundle = ModelBundle.load(bundle_path)
    catalog = features.feature_catalog()
    insights = featurer_insights(bundle.models, catalog)

    app = FastAPI(title="minerec", version="0.1.0")

    @app.exception_handler(MinerecError)
    def on_core_error(_: Request, exc: MinerecError):
        status = _STATUS_BY_ERROR.get(type(exc), 500)
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "bundle_version": bundle.version}

    # ------------------------------------------------------------- logs

    @app.post("/logs", status_code=201)
    async def upload_log(request: Request):
        body = await request.body()
        if len(body) > upload_cap:
            return JSONResponse(
                status_code=413,
                content={"error": {"code": "PayloadTooLarge",
                                   "message": f"upload exceeds {upload_cap} bytes"}},
            )
        filename = request.headers.get("x-filename", "upload.xes")
        stored, _ = store.put_log(body, filename=filename)
        return stored.to_dict()

    @app.get("/logs")
    def list_logs():
        return {"logs": [s.to_dict() for s in store.list_logs()]}

    @app.get("/features/{log_id}")
    def log_features(log_id: str):
        vector = store.get_features(log_id)
        return {
            "log_id": log_id,
            "catalog_version": features.CATALOG_VERSION,
            "features": [
                {"index": d.index, "name": d.name, "value": vector.values[d.index]}
                for d in catalog
            ],
        }

    # -------------------------------------------------- recommendations

    @app.post("/recommendations", status_code=201)
    def create_recommendation(req: RecommendRequest):
        if not store.has_log(req.log_id):
            raise UnknownLog(f"no stored log {req.log_id}")
        weights = WeightVector.from_mapping(req.weights.model_dump())
        vector = store.get_features(req.log_id)
        log = store.get_log(req.log_id)
        rec = recommender.recommend(
            log, weights, bundle, log_id=req.log_id, feature_vector=vector
        )
        rec_id = store.put_recommendation(rec)
        return {"rec_id": rec_id, "recommendation": rec.to_dict()}

    @app.get("/recommendations/{rec_id}")
    def get_recommendation(rec_id: str):
        return store.get_recommendation(rec_id)

    @app.get("/recommendations/{rec_id}/explanations/{algorithm}/{measure}")
    def explain(rec_id: str, algorithm: str, measure: str):
        doc = store.get_recommendation(rec_id)
        if algorithm not in discovery.PORTFOLIO:
            raise UnsupportedAlgorithm(f"unknown algorithm {algorithm!r}")
        if measure not in MEASURES:
            raise InvalidMeasure(f"unknown measure {measure!r}")
        log_id = doc["recommendation"]["log_id"]
        vector = store.get_features(log_id)
        attribution = explainer.shap_values(bundle.get(algorithm, measure), vector)
        payload = explainer.explanation_payload(attribution, catalog)
        payload["algorithm"] = algorithm
        payload["measure"] = measure
        payload["log_id"] = log_id
        return payload

    # --------------------------------------------------------- discovery

    @app.post("/discover")
    def discover_model(req: DiscoverRequest):
        if not store.has_log(req.log_id):
            raise UnknownLog(f"no stored log {req.log_id}")
        log = store.get_log(req.log_id)
        net = discovery.discover(req.algorithm, log, req.params)
        return {
            "log_id": req.log_id,
            "algorithm": req.algorithm,
            "net": petri.to_json_dict(net),
            "dot": petri.to_dot(net),
        }

    @app.post("/discover/{log_id}/{algorithm}.dot", response_class=PlainTextResponse)
    def discover_dot(log_id: str, algorithm: str):
        log = store.get_log(log_id)
        net = discovery.discover(algorithm, log)
        return petri.to_dot(net)

    # ----------------------------------------------------------- catalog

    @app.get("/catalog/features")
    def catalog_features():
        return {
            "catalog_version": features.CATALOG_VERSION,
            "bundle_version": bundle.version,
            "features": insights,
        }

    @app.get("/catalog/algorithms")
    def catalog_algorithms():
        return {
            "algorithms": [
                {"id": a, "default_params": discovery.DEFAULT_PARAMS[a]}
                for a in discovery.PORTFOLIO
            ],
            "measures": list(MEASURES),
        }

    if static_dir and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def app_from_env() -> FastAPI:
    """Factory for `uvicorn minerec.service:app_from_env --factory`."""
    return create_app(
        data_dir=os.environ.get("MINEREC_DATA_DIR", "./data"),
        bundle_path=os.environ.get("MINEREC_BUNDLE", "./bundle.json"),
        upload_cap=int(os.environ.get("MINEREC_UPLOAD_CAP", DEFAULT_UPLOAD_CAP)),
        static_dir=os.environ.get("MINEREC_STATIC_DIR"),
    )
