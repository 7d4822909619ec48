"""On-disk persistence for uploaded logs and stored recommendations.

Logs are content-addressed: the id is a hash of the uploaded bytes, so
re-uploading the same file is a no-op.  Features are cached next to the
log.  Recommendation ids hash (log_id, weights, bundle version), making
stored results re-derivable and idempotent.  Writes go through a lock so
concurrent requests serialize on mutation; reads are lock-free.
"""
from __future__ import annotations

import gzip
import hashlib
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import features, xes
from .errors import UnknownLog, UnknownRecommendation
from .recommender import Recommendation, WeightVector
from .xes import EventLog


def content_log_id(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def rec_id_for(log_id: str, weights: WeightVector, bundle_version: str) -> str:
    key = json.dumps(
        {"log_id": log_id, "weights": weights.as_dict(), "bundle": bundle_version},
        sort_keys=True,
    )
    return hashlib.sha256(key.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class StoredLog:
    log_id: str
    filename: str
    uploaded_at: float
    n_traces: int
    n_events: int

    def to_dict(self) -> dict:
        return {
            "log_id": self.log_id,
            "filename": self.filename,
            "uploaded_at": self.uploaded_at,
            "n_traces": self.n_traces,
            "n_events": self.n_events,
        }


class Store:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        (self.root / "logs").mkdir(parents=True, exist_ok=True)
        (self.root / "recommendations").mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    # ------------------------------------------------------------- logs

    def _log_path(self, log_id: str) -> Path:
        return self.root / "logs" / f"{log_id}.xes.gz"

    def _meta_path(self, log_id: str) -> Path:
        return self.root / "logs" / f"{log_id}.json"

    def put_log(self, data: bytes, filename: str = "upload.xes") -> tuple[StoredLog, features.FeatureVector]:
        """Parse, persist and cache features; idempotent per content hash."""
        log_id = content_log_id(data)
        meta_path = self._meta_path(log_id)
        if meta_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            stored = StoredLog(**{k: meta[k] for k in (
                "log_id", "filename", "uploaded_at", "n_traces", "n_events")})
            return stored, self._vector_from_meta(meta)

        log = xes.parse_xes(data)  # validates before anything is written
        vector = features.extract(log, log_id)
        stored = StoredLog(
            log_id=log_id,
            filename=filename,
            uploaded_at=time.time(),
            n_traces=len(log.traces),
            n_events=sum(len(t.events) for t in log.traces),
        )
        payload = data if data[:2] == b"\x1f\x8b" else gzip.compress(data)
        meta = stored.to_dict()
        meta["catalog_version"] = features.CATALOG_VERSION
        meta["features"] = list(vector.values)
        with self._write_lock:
            self._log_path(log_id).write_bytes(payload)
            meta_path.write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")
        return stored, vector

    def _vector_from_meta(self, meta: dict) -> features.FeatureVector:
        if meta.get("catalog_version") != features.CATALOG_VERSION:
            # catalog changed since upload: recompute and refresh the cache
            log = self.get_log(meta["log_id"])
            vector = features.extract(log, meta["log_id"])
            meta["catalog_version"] = features.CATALOG_VERSION
            meta["features"] = list(vector.values)
            with self._write_lock:
                self._meta_path(meta["log_id"]).write_text(
                    json.dumps(meta, sort_keys=True), encoding="utf-8"
                )
            return vector
        return features.FeatureVector(values=tuple(meta["features"]), log_id=meta["log_id"])

    def has_log(self, log_id: str) -> bool:
        return self._meta_path(log_id).exists()

    def get_log(self, log_id: str) -> EventLog:
        path = self._log_path(log_id)
        if not path.exists():
            raise UnknownLog(f"no stored log {log_id}")
        return xes.parse_xes(path.read_bytes())

    def get_features(self, log_id: str) -> features.FeatureVector:
        meta_path = self._meta_path(log_id)
        if not meta_path.exists():
            raise UnknownLog(f"no stored log {log_id}")
        return self._vector_from_meta(json.loads(meta_path.read_text(encoding="utf-8")))

    def get_log_meta(self, log_id: str) -> StoredLog:
        meta_path = self._meta_path(log_id)
        if not meta_path.exists():
            raise UnknownLog(f"no stored log {log_id}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        return StoredLog(**{k: meta[k] for k in (
            "log_id", "filename", "uploaded_at", "n_traces", "n_events")})

    def list_logs(self) -> list[StoredLog]:
        out = []
        for path in sorted((self.root / "logs").glob("*.json")):
            meta = json.loads(path.read_text(encoding="utf-8"))
            out.append(StoredLog(**{k: meta[k] for k in (
                "log_id", "filename", "uploaded_at", "n_traces", "n_events")}))
        return out

    # -------------------------------------------------- recommendations

    def rec_id_for(self, log_id: str, weights: WeightVector, bundle_version: str) -> str:
        return rec_id_for(log_id, weights, bundle_version)

    def _rec_path(self, rec_id: str) -> Path:
        return self.root / "recommendations" / f"{rec_id}.json"

    def put_recommendation(self, rec: Recommendation) -> str:
        rec_id = self.rec_id_for(
            rec.log_id, WeightVector.from_mapping(rec.weights), rec.bundle_version
        )
        doc = {
            "rec_id": rec_id,
            "created_at": time.time(),
            "recommendation": rec.to_dict(),
        }
        with self._write_lock:
            if not self._rec_path(rec_id).exists():
                self._rec_path(rec_id).write_text(
                    json.dumps(doc, sort_keys=True), encoding="utf-8"
                )
        return rec_id

    def get_recommendation(self, rec_id: str) -> dict:
        path = self._rec_path(rec_id)
        if not path.exists():
            raise UnknownRecommendation(f"no stored recommendation {rec_id}")
        return json.loads(path.read_text(encoding="utf-8"))
