"""HTTP triage service: classify raw description text with a loaded model.

The model is loaded once at startup and shared read-only. Handlers are
async and run inference inline on the event loop, so concurrent identical
requests serialize onto one immutable model and yield identical bodies.
"""
from __future__ import annotations

import json
import socket
import time
from pathlib import Path

import uvicorn
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .dataset import tokenize
from .errors import BindError, EmptyTextError
from .model import DualHeadModel, decode, forward, load_model
from .taxonomy import SEVERITY_NAMES

MAX_DESCRIPTION_CHARS = 10_000

MODEL_DIR_ENV = "MODEL_DIR"
BIND_ADDR_ENV = "BIND_ADDR"
TYPE_THRESHOLD_ENV = "TYPE_THRESHOLD"
ALLOWED_ORIGINS_ENV = "ALLOWED_ORIGINS"

DEFAULT_BIND = "127.0.0.1:8000"


def classify_text(model: DualHeadModel, text: str, threshold: float | None = None) -> dict:
    """Tokenize, forward, decode one description into the response schema."""
    if threshold is None:
        threshold = model.config.type_threshold
    started = time.perf_counter()
    tokens = tokenize(text, model.config.max_len, model.tokenizer_source)
    logits = forward(model, [tokens])[0]
    prediction = decode(logits, threshold)
    latency_ms = (time.perf_counter() - started) * 1000.0
    return {
        "severity_label": SEVERITY_NAMES[prediction.severity],
        "severity_index": prediction.severity,
        "severity_probs": list(prediction.severity_probs),
        "types": [
            {
                "name": name,
                "probability": prob,
                "predicted": bool(bit),
            }
            for name, prob, bit in zip(
                model.taxonomy.names, prediction.type_probs, prediction.types.bits
            )
        ],
        "model_version": model.version,
        "latency_ms": latency_ms,
    }


def _bad_request(reason: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": reason})


def _unavailable() -> JSONResponse:
    return JSONResponse(status_code=503, content={"error": "model not ready"})


def create_app(
    model_dir: str | Path | None = None,
    model: DualHeadModel | None = None,
    threshold: float | None = None,
    allowed_origins: list[str] | None = None,
) -> FastAPI:
    """Build the service app around one model instance (loaded or given)."""
    if model is None and model_dir is not None:
        model = load_model(model_dir)
    if model is not None:
        model.eval()

    app = FastAPI(title="vulntriage", docs_url=None, redoc_url=None)
    app.state.model = model
    app.state.threshold = threshold
    app.add_middleware(
        CORSMiddleware,
        allow_origins=allowed_origins if allowed_origins else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/v1/health")
    async def health() -> JSONResponse:
        if app.state.model is None:
            return _unavailable()
        return JSONResponse({"status": "ok", "model_version": app.state.model.version})

    @app.get("/api/v1/labels")
    async def labels() -> JSONResponse:
        if app.state.model is None:
            return _unavailable()
        return JSONResponse(
            {
                "severities": list(SEVERITY_NAMES),
                "types": list(app.state.model.taxonomy.names),
            }
        )

    @app.post("/api/v1/classify")
    async def classify(request: Request) -> JSONResponse:
        if app.state.model is None:
            return _unavailable()
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return _bad_request(f"malformed JSON body: {exc}")
        if not isinstance(body, dict):
            return _bad_request("body must be a JSON object")

        description = body.get("description")
        if not isinstance(description, str) or not description.strip():
            return _bad_request("description must be a non-empty string")
        if len(description) > MAX_DESCRIPTION_CHARS:
            return _bad_request(
                f"description exceeds {MAX_DESCRIPTION_CHARS} characters"
            )

        threshold_override = body.get("threshold")
        if threshold_override is not None:
            if (
                isinstance(threshold_override, bool)
                or not isinstance(threshold_override, (int, float))
                or not 0.0 < float(threshold_override) < 1.0
            ):
                return _bad_request("threshold must be a number in (0,1)")
            effective = float(threshold_override)
        else:
            effective = app.state.threshold

        try:
            payload = classify_text(app.state.model, description, effective)
        except EmptyTextError:
            return _bad_request("description must be a non-empty string")
        return JSONResponse(payload)

    return app


def parse_bind(bind: str) -> tuple[str, int]:
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"bind address must be host:port, got {bind!r}")
    return host, int(port)


def start(
    model_dir: str | Path,
    bind: str = DEFAULT_BIND,
    threshold: float | None = None,
    allowed_origins: list[str] | None = None,
) -> None:
    """Load the model, claim the port, and serve until interrupted."""
    app = create_app(model_dir=model_dir, threshold=threshold, allowed_origins=allowed_origins)
    host, port = parse_bind(bind)

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as exc:
        sock.close()
        raise BindError(f"cannot bind {bind}: {exc}") from exc

    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    try:
        server.run(sockets=[sock])
    finally:
        sock.close()
