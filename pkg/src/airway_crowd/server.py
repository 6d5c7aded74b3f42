"""HTTP service for the browser annotator: HIT assignment, image delivery,
instruction text, submission ingestion and live stats.

The server is a thin shell around TaskStore; submissions are durably
appended (fsync) before the 200 response. Static frontend assets, when
present next to the data directory, are served from the site root.
"""

from __future__ import annotations

import datetime as dt
import uuid
from collections import Counter
from pathlib import Path

from fastapi import FastAPI, Response
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .qc import QcCategory, QcConfig, classify
from .store import (DuplicateSubmissionError, Ellipse, AnnotationRecord,
                    HitConfig, SubmissionMismatchError, TaskStore,
                    UnknownHitError, read_hit_manifest)

DEFAULT_INSTRUCTIONS = """\
How to annotate an airway:
1. Look for a dark circle (the airway lumen) surrounded by a light ring
   (the airway wall).
2. Draw one ellipse tightly around the dark circle.
3. Draw a second ellipse around the outside of the light ring.
4. If you cannot see any airway, press "No airway visible" instead.
Outline the dark hole, then the bright ring.
"""


class EllipseIn(BaseModel):
    cx: float
    cy: float
    rx: float = Field(ge=0)
    ry: float = Field(ge=0)
    theta: float = 0.0
    adjusted: bool = False
    kind_hint: str = "unspecified"


class ImageAnnotationIn(BaseModel):
    image_id: str
    ellipses: list[EllipseIn]


class SubmissionIn(BaseModel):
    worker_id: str = Field(min_length=1)
    annotations: list[ImageAnnotationIn]
    idempotency_key: str | None = None
    client_info: str = ""


def create_app(data_dir, instructions_path=None,
               hit_config: HitConfig = HitConfig(),
               qc_config: QcConfig = QcConfig(),
               static_dir=None) -> FastAPI:
    data_dir = Path(data_dir)
    images_dir = data_dir / "images"
    hits = read_hit_manifest(data_dir / "hits.json")
    store = TaskStore(hits, data_dir / "annotations.jsonl", hit_config)

    if instructions_path is not None:
        instructions = Path(instructions_path).read_text(encoding="utf-8")
    else:
        instructions = DEFAULT_INSTRUCTIONS
    instructions_version = f"v1-{len(instructions)}"

    app = FastAPI(title="airway-crowd annotation server")
    app.state.store = store

    @app.get("/api/hit")
    def get_hit(worker: str = ""):
        if not worker:
            return JSONResponse({"error": "missing worker id"}, status_code=400)
        hit = store.assign_hit(worker)
        if hit is None:
            return Response(status_code=204)
        return {
            "hit_id": hit.hit_id,
            "image_ids": list(hit.image_ids),
            "instructions_version": instructions_version,
        }

    @app.get("/api/instructions")
    def get_instructions():
        return PlainTextResponse(
            instructions, headers={"X-Instructions-Version": instructions_version})

    @app.get("/api/image/{image_id}.png")
    def get_image(image_id: str):
        path = images_dir / f"{image_id}.png"
        if not path.is_file():
            return JSONResponse({"error": "unknown image"}, status_code=404)
        return FileResponse(path, media_type="image/png")

    @app.post("/api/hit/{hit_id}/submit")
    def submit(hit_id: str, body: SubmissionIn):
        now = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
        client_info = body.client_info or f"instructions={instructions_version}"
        try:
            records = [
                AnnotationRecord(
                    annotation_id=str(uuid.uuid4()),
                    image_id=ann.image_id,
                    worker_id=body.worker_id,
                    hit_id=hit_id,
                    submitted_at=now,
                    ellipses=tuple(Ellipse(**e.model_dump()) for e in ann.ellipses),
                    client_info=client_info,
                )
                for ann in body.annotations
            ]
        except ValueError as e:
            return JSONResponse({"error": str(e)}, status_code=422)
        try:
            store.record_submission(hit_id, body.worker_id, records,
                                    idempotency_key=body.idempotency_key)
        except UnknownHitError as e:
            return JSONResponse({"error": str(e)}, status_code=404)
        except DuplicateSubmissionError as e:
            return JSONResponse({"error": str(e)}, status_code=409)
        except SubmissionMismatchError as e:
            return JSONResponse({"error": str(e)}, status_code=422)
        return {"status": "ok", "hit_id": hit_id, "records": len(records)}

    @app.get("/api/stats")
    def stats():
        base = store.stats()
        tally: Counter = Counter({c.value: 0 for c in QcCategory})
        for image_id in store.image_ids:
            for rec in store.list_annotations(image_id):
                tally[classify(rec, qc_config).value] += 1
        base["qc_tally"] = dict(tally)
        return base

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
