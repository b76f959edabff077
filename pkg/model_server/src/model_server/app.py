"""HTTP service implementing the oracle wire protocol.

Endpoints:

* ``POST /v1/predict`` — body ``{"height": H, "width": W, "channels": 3,
  "data_b64": "<base64 of row-major R,G,B bytes>"}``; responds
  ``{"probabilities": [...], "labels": [...]}`` with probabilities summing
  to 1. Malformed bodies get 400, shape mismatches 422 (with the expected
  shape in the body), inference failures 500.
* ``GET /v1/health`` — 200 with the model identifier and input shape;
  side-effect free.

Request parsing is done by hand rather than through a schema model so the
protocol's status-code contract stays exact.
"""

import base64
import binascii
from dataclasses import dataclass
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .classifier import DigitsClassifier, MODEL_ID


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    model_id: str = MODEL_ID
    input_shape: tuple = (32, 32, 3)
    bearer_token: Optional[str] = None


class RequestError(Exception):
    def __init__(self, status, detail, **extra):
        super().__init__(detail)
        self.status = status
        self.body = {"detail": detail, **extra}


def _decode_image(body, expected_shape):
    if not isinstance(body, dict):
        raise RequestError(400, "request body must be a JSON object")
    for key in ("height", "width", "channels", "data_b64"):
        if key not in body:
            raise RequestError(400, f"missing field '{key}'")
    try:
        height = int(body["height"])
        width = int(body["width"])
        channels = int(body["channels"])
    except (TypeError, ValueError):
        raise RequestError(400, "height/width/channels must be integers")
    if not isinstance(body["data_b64"], str):
        raise RequestError(400, "data_b64 must be a base64 string")
    try:
        raw = base64.b64decode(body["data_b64"], validate=True)
    except (binascii.Error, ValueError):
        raise RequestError(400, "data_b64 is not valid base64")
    if (height, width, channels) != expected_shape:
        raise RequestError(
            422,
            f"input shape ({height}, {width}, {channels}) not supported",
            expected_shape=list(expected_shape),
        )
    if len(raw) != height * width * channels:
        raise RequestError(
            400,
            f"payload holds {len(raw)} bytes, expected {height * width * channels}",
        )
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, channels)


def create_app(config: ServerConfig = None) -> FastAPI:
    config = config or ServerConfig()
    app = FastAPI(title="greedyfool model server", docs_url=None, redoc_url=None)
    classifier = DigitsClassifier()
    if tuple(classifier.input_shape) != tuple(config.input_shape):
        raise ValueError(
            f"configured input shape {config.input_shape} does not match the "
            f"model's preprocessing {classifier.input_shape}"
        )

    def _authorized(request: Request):
        if config.bearer_token is None:
            return True
        return request.headers.get("Authorization") == f"Bearer {config.bearer_token}"

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "model": config.model_id,
            "input_shape": list(config.input_shape),
        }

    @app.post("/v1/predict")
    async def predict(request: Request):
        if not _authorized(request):
            return JSONResponse({"detail": "missing or invalid bearer token"}, status_code=401)
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"detail": "request body is not valid JSON"}, status_code=400)
        try:
            image = _decode_image(body, tuple(config.input_shape))
        except RequestError as exc:
            return JSONResponse(exc.body, status_code=exc.status)
        try:
            probabilities = classifier.predict_probabilities(image)
        except Exception as exc:  # inference failure
            return JSONResponse({"detail": f"inference failed: {exc}"}, status_code=500)
        return {
            "probabilities": [float(p) for p in probabilities],
            "labels": classifier.labels,
        }

    return app
