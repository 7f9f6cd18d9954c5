"""HTTP API for the interactive equivalency explorer.

Upload an image, request matched smoothing at chosen levels per filter, and
retrieve outputs and attribute reports. Sessions are memory-only, LRU-bounded,
and expire after an idle period; match computations run on a bounded pool and
are cached per (filter, level).
"""
from __future__ import annotations

import asyncio
import io
import logging
import os
import secrets
import threading
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image as PILImage
from pydantic import BaseModel

from .equivalency import SmoothingEvaluator, find_parameter
from .errors import EpfError, ImageError
from .filters import FilterRegistry
from .image import ImageF, resize_max_side, save_image
from .metrics import full_report, smooth_mask

log = logging.getLogger("epf.service")

LEVEL_KEY_DECIMALS = 3


@dataclass
class ServiceConfig:
    max_sessions: int = 32
    evict_lru: bool = True
    session_ttl: float = 30 * 60.0
    max_cache_entries: int = 256
    max_upload_bytes: int = 16 * 1024 * 1024
    downscale_max_side: int = 1024
    workers: int = field(default_factory=lambda: os.cpu_count() or 2)
    queue_cap: int | None = None  # defaults to 2 * workers
    static_dir: str | None = None

    def effective_queue_cap(self) -> int:
        return self.queue_cap if self.queue_cap is not None else 2 * self.workers


def _png_bytes(img: ImageF) -> bytes:
    arr = np.round(img.data * 255.0).astype(np.uint8)
    pil = (
        PILImage.fromarray(arr[:, :, 0], mode="L")
        if img.channels == 1
        else PILImage.fromarray(arr, mode="RGB")
    )
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


class Session:
    def __init__(self, session_id: str, image: ImageF, scale: float, max_cache: int):
        self.id = session_id
        self.image = image
        self.scale = scale
        self.created = time.monotonic()
        self.last_access = self.created
        self.lock = threading.Lock()
        self.max_cache = max_cache
        self.cache: OrderedDict[tuple, dict] = OrderedDict()
        self.images: OrderedDict[str, bytes] = OrderedDict()
        self.evaluators: dict[str, SmoothingEvaluator] = {}
        self._mask = None

    def touch(self):
        self.last_access = time.monotonic()

    def mask(self):
        if self._mask is None:
            self._mask = smooth_mask(self.image)
        return self._mask

    def cache_get(self, key):
        with self.lock:
            entry = self.cache.get(key)
            if entry is not None:
                self.cache.move_to_end(key)
            return entry

    def cache_put(self, key, entry, image_key, png):
        with self.lock:
            if key not in self.cache:
                self.cache[key] = entry
                self.images[image_key] = png
                while len(self.cache) > self.max_cache:
                    old_key, _ = self.cache.popitem(last=False)
                    self.images.pop(f"{old_key[0]}@{old_key[1]:.{LEVEL_KEY_DECIMALS}f}", None)
                    log.info("session %s: evicted cache entry %s", self.id, old_key)
            return self.cache[key]


class SessionStore:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, Session] = OrderedDict()

    def _expire_locked(self):
        now = time.monotonic()
        stale = [
            sid
            for sid, s in self._sessions.items()
            if now - s.last_access > self.config.session_ttl
        ]
        for sid in stale:
            del self._sessions[sid]
            log.info("session %s expired", sid)

    def create(self, image: ImageF, scale: float) -> Session:
        with self._lock:
            self._expire_locked()
            if len(self._sessions) >= self.config.max_sessions:
                if not self.config.evict_lru:
                    raise SessionTableFull()
                sid, _ = self._sessions.popitem(last=False)
                log.info("session %s evicted (LRU)", sid)
            session = Session(
                secrets.token_urlsafe(12), image, scale, self.config.max_cache_entries
            )
            self._sessions[session.id] = session
            return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            self._expire_locked()
            session = self._sessions.get(session_id)
            if session is not None:
                self._sessions.move_to_end(session_id)
                session.touch()
            return session

    def count(self) -> int:
        with self._lock:
            return len(self._sessions)


class SessionTableFull(Exception):
    pass


class MatchRequest(BaseModel):
    session_id: str
    filter_id: str
    level: float


def create_app(registry: FilterRegistry, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="epf explorer")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(config)
    pool = ThreadPoolExecutor(max_workers=config.workers, thread_name_prefix="epf-match")
    admission = threading.BoundedSemaphore(config.workers + config.effective_queue_cap())

    app.state.store = store
    app.state.config = config

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    @app.get("/api/filters")
    def list_filters():
        return [d.to_dict() for d in registry.descriptors()]

    @app.post("/api/session")
    async def create_session(image: UploadFile):
        blob = await image.read()
        if len(blob) > config.max_upload_bytes:
            return error(413, f"upload exceeds {config.max_upload_bytes} bytes")
        try:
            with PILImage.open(io.BytesIO(blob)) as pil:
                if pil.format not in ("PNG", "JPEG"):
                    return error(400, f"unsupported format {pil.format!r}; PNG or JPEG required")
                pil.load()
                mode = pil.mode
                if mode in ("I", "I;16", "I;16B"):
                    arr = np.asarray(pil).astype(np.float64) / 65535.0
                    arr = arr[:, :, None]
                elif mode in ("1", "L", "LA"):
                    arr = np.asarray(pil.convert("L")).astype(np.float64) / 255.0
                    arr = arr[:, :, None]
                else:
                    arr = np.asarray(pil.convert("RGB")).astype(np.float64) / 255.0
            img = ImageF(arr)
        except (OSError, ImageError) as exc:
            return error(400, f"cannot decode upload: {exc}")
        img, scale = resize_max_side(img, config.downscale_max_side)
        try:
            session = store.create(img, scale)
        except SessionTableFull:
            return error(503, "session table full")
        with session.lock:
            session.images["input"] = _png_bytes(img)
        return {
            "session_id": session.id,
            "width": img.width,
            "height": img.height,
            "scale": scale,
        }

    def compute_match(session: Session, filter_id: str, level: float) -> dict:
        filt = registry.get(filter_id)
        with session.lock:
            evaluator = session.evaluators.setdefault(
                filter_id, SmoothingEvaluator(filt, session.image)
            )
        result = find_parameter(filt, session.image, level, evaluator=evaluator)
        output = filt.apply(session.image, result.param)
        report = full_report(session.image, output, mask=session.mask())
        image_key = f"{filter_id}@{level:.{LEVEL_KEY_DECIMALS}f}"
        entry = {
            "match": result.to_dict(),
            "report": report.to_dict(),
            "image_url": f"/api/image/{session.id}/{image_key}",
        }
        return session.cache_put((filter_id, level), entry, image_key, _png_bytes(output))

    @app.post("/api/match")
    async def match(req: MatchRequest):
        session = store.get(req.session_id)
        if session is None:
            return error(404, f"unknown session {req.session_id!r}")
        if req.filter_id not in registry:
            return error(404, f"unknown filter {req.filter_id!r}")
        if not (0.0 <= req.level <= 1.0):
            return error(422, f"level {req.level} outside [0, 1]")
        level = round(req.level, LEVEL_KEY_DECIMALS)
        cached = session.cache_get((req.filter_id, level))
        if cached is not None:
            return {**cached, "cached": True}
        if not admission.acquire(blocking=False):
            return error(429, "compute queue full; retry later")
        try:
            loop = asyncio.get_running_loop()
            entry = await loop.run_in_executor(
                pool, compute_match, session, req.filter_id, level
            )
        except EpfError as exc:
            return error(500, f"filter failed: {exc}")
        finally:
            admission.release()
        return {**entry, "cached": False}

    @app.get("/api/image/{session_id}/{key}")
    def get_image(session_id: str, key: str):
        session = store.get(session_id)
        if session is None:
            return error(404, f"unknown session {session_id!r}")
        with session.lock:
            blob = session.images.get(key)
        if blob is None:
            return error(404, f"unknown image key {key!r}")
        return Response(content=blob, media_type="image/png")

    @app.get("/api/report/{session_id}/{filter_id}/{level}")
    def get_report(session_id: str, filter_id: str, level: float):
        session = store.get(session_id)
        if session is None:
            return error(404, f"unknown session {session_id!r}")
        entry = session.cache_get((filter_id, round(level, LEVEL_KEY_DECIMALS)))
        if entry is None:
            return error(404, "no computed match for that filter/level")
        return entry["report"]

    static_dir = config.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
