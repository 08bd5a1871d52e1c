"""HTTP/JSON service backing the proofreading UI.

Workspace layout: one directory per image id under the workspace root,
holding ``field.f32`` (or ``field.pgm``), optional ``gt.pgm``, optional
``distribution.json``, and the persisted ``session.json`` (rewritten after
every decision, so a reload reconstructs the identical view).

Branch pixel lists travel run-length encoded over flat row-major indices:
``[[start, length], ...]``. Uncertainty maps travel as the raw-float format,
base64-encoded. Writes to one session are serialized behind a lock; reads
are lock-free snapshots. Optional bearer auth via the AUTH_TOKEN env var.
"""

from __future__ import annotations

import base64
import json
import math
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel

from . import proofread, raster_io
from .errors import NoOpDecision, StructsegError, UnknownBranch
from .family import SkeletonFamily
from .morse import extract_morse_complex
from .prob import (
    ThresholdDistribution,
    branch_probability,
    branch_uncertainty,
    fit_threshold_distribution,
)
from .segment import analytic_branch_uncertainty, binarize, grow_segmentation


def rle_encode(bits: np.ndarray) -> list[list[int]]:
    """Run-length encode a {0,1} array over flat row-major indices."""
    flat = np.asarray(bits, dtype=np.uint8).ravel()
    if flat.size == 0:
        return []
    edges = np.flatnonzero(np.diff(flat))
    starts = np.concatenate([[0], edges + 1])
    lengths = np.diff(np.concatenate([starts, [flat.size]]))
    return [
        [int(s), int(l)]
        for s, l, v in zip(starts, lengths, flat[starts])
        if v == 1
    ]


def rle_decode(runs: list[list[int]], size: int) -> np.ndarray:
    flat = np.zeros(size, dtype=np.uint8)
    for start, length in runs:
        flat[start : start + length] = 1
    return flat


def _pixels_rle(pixels: np.ndarray, width: int, height: int) -> list[list[int]]:
    bits = np.zeros((height, width), dtype=np.uint8)
    if len(pixels):
        bits[pixels[:, 0], pixels[:, 1]] = 1
    return rle_encode(bits)


@dataclass
class ImageState:
    image_id: str
    directory: Path
    field: raster_io.ScalarField2D
    family: SkeletonFamily
    dist: ThresholdDistribution
    session: proofread.ProofreadSession
    lock: threading.Lock


class DecisionBody(BaseModel):
    branch_id: int
    action: str


def _load_field(directory: Path) -> raster_io.ScalarField2D | None:
    for name in ("field.f32", "field.pgm"):
        if (directory / name).exists():
            return raster_io.load_field(directory / name)
    return None


def _default_dist(family: SkeletonFamily) -> ThresholdDistribution:
    finite = family.finite_persistences()
    lo, hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    return ThresholdDistribution((lo + hi) / 2.0, max((hi - lo) / 4.0, 1e-3))


class Workspace:
    def __init__(self, root: Path):
        self.root = root
        self._states: dict[str, ImageState] = {}
        self._discover_lock = threading.Lock()

    def image_ids(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(
            d.name
            for d in self.root.iterdir()
            if d.is_dir() and _load_field_path(d) is not None
        )

    def get(self, image_id: str) -> ImageState:
        with self._discover_lock:
            if image_id in self._states:
                return self._states[image_id]
            directory = self.root / image_id
            field = _load_field(directory)
            if field is None:
                raise HTTPException(404, detail=f"unknown image {image_id!r}")
            family = extract_morse_complex(field)
            gt = None
            if (directory / "gt.pgm").exists():
                gt = raster_io.load_mask(directory / "gt.pgm")
            dist_path = directory / "distribution.json"
            if dist_path.exists():
                dist = ThresholdDistribution.from_json(json.loads(dist_path.read_text()))
            elif gt is not None:
                binary = binarize(field)
                dist = fit_threshold_distribution(
                    field, gt, family, lambda sk: grow_segmentation(binary, sk).mask
                )
            else:
                dist = _default_dist(family)
            session = proofread.new_session(family, field, dist, gt=gt)
            session_path = directory / "session.json"
            if session_path.exists():
                session.restore_json(session_path.read_text())
            state = ImageState(
                image_id, directory, field, family, dist, session, threading.Lock()
            )
            self._states[image_id] = state
            return state

    def persist(self, state: ImageState) -> None:
        (state.directory / "session.json").write_text(state.session.to_json() + "\n")


def _load_field_path(directory: Path) -> Path | None:
    for name in ("field.f32", "field.pgm"):
        if (directory / name).exists():
            return directory / name
    return None


def _persistence_json(value: float):
    return "inf" if math.isinf(value) else value


def _branch_rows(state: ImageState) -> list[dict]:
    dist = state.dist
    rows = []
    for b in state.family.branches:
        rows.append(
            {
                "id": b.id,
                "persistence": _persistence_json(b.persistence),
                "probability": branch_probability(dist, b),
                "uncertainty": branch_uncertainty(dist, b),
                "decision": state.session.decisions.get(b.id, proofread.UNDECIDED),
                "included": b.id in state.session.effective_ids(),
                "pixels": _pixels_rle(b.pixels, state.field.width, state.field.height),
            }
        )
    rows.sort(
        key=lambda r: (
            -r["uncertainty"],
            -(math.inf if r["persistence"] == "inf" else r["persistence"]),
            r["id"],
        )
    )
    return rows


def _segmentation_payload(state: ImageState) -> dict:
    seg = state.session.segmentation()
    return {
        "width": state.field.width,
        "height": state.field.height,
        "rle": rle_encode(seg.mask.bits),
        "voi": state.session.current_voi(),
        "clicks": len(state.session.click_log),
    }


def create_app(workspace_dir: str | Path | None = None) -> FastAPI:
    root = Path(workspace_dir or os.environ.get("WORKSPACE_DIR", "."))
    workspace = Workspace(root)
    token = os.environ.get("AUTH_TOKEN")
    app = FastAPI(title="structseg service")

    @app.exception_handler(StructsegError)
    async def library_error(request: Request, exc: StructsegError):
        from fastapi.responses import JSONResponse

        return JSONResponse(
            {"detail": str(exc), "type": type(exc).__name__}, status_code=422
        )

    @app.middleware("http")
    async def check_auth(request: Request, call_next):
        if token and request.headers.get("authorization") != f"Bearer {token}":
            from fastapi.responses import JSONResponse

            return JSONResponse({"error": "unauthorized"}, status_code=401)
        return await call_next(request)

    @app.get("/images")
    def list_images():
        out = []
        for image_id in workspace.image_ids():
            state = workspace.get(image_id)
            out.append(
                {
                    "id": image_id,
                    "width": state.field.width,
                    "height": state.field.height,
                    "branches": len(state.family),
                    "has_gt": state.session.gt is not None,
                }
            )
        return out

    @app.get("/images/{image_id}/branches")
    def branches(image_id: str):
        return _branch_rows(workspace.get(image_id))

    @app.get("/images/{image_id}/field")
    def field_image(image_id: str):
        state = workspace.get(image_id)
        header = json.dumps({"w": state.field.width, "h": state.field.height}) + "\n"
        payload = header.encode() + state.field.values.astype("<f4").tobytes()
        return {
            "format": "raw-float",
            "base64": base64.b64encode(payload).decode("ascii"),
        }

    @app.get("/images/{image_id}/segmentation")
    def segmentation(image_id: str):
        return _segmentation_payload(workspace.get(image_id))

    @app.get("/images/{image_id}/uncertainty")
    def uncertainty(image_id: str):
        state = workspace.get(image_id)
        _, umap = analytic_branch_uncertainty(state.family, state.dist)
        header = json.dumps({"w": umap.width, "h": umap.height}) + "\n"
        payload = header.encode() + umap.values.astype("<f4").tobytes()
        return {
            "format": "raw-float",
            "base64": base64.b64encode(payload).decode("ascii"),
        }

    @app.post("/images/{image_id}/decisions")
    def decide(image_id: str, body: DecisionBody):
        state = workspace.get(image_id)
        with state.lock:
            try:
                proofread.apply_decision(state.session, body.branch_id, body.action)
            except UnknownBranch as exc:
                raise HTTPException(404, detail=str(exc)) from None
            except NoOpDecision as exc:
                raise HTTPException(409, detail=str(exc)) from None
            except ValueError as exc:
                raise HTTPException(422, detail=str(exc)) from None
            workspace.persist(state)
            return _segmentation_payload(state)

    @app.get("/images/{image_id}/history")
    def history(image_id: str):
        state = workspace.get(image_id)
        return {
            "click_log": [[bid, act] for bid, act in state.session.click_log],
            "voi_history": state.session.voi_history,
        }

    return app
