"""Black-box classifier oracles: the only signal the attack consumes.

An oracle is any object with ``predict(image) -> ProbabilityVector``.
Two implementations ship here: a deterministic in-process toy classifier
for desk-scale work, and an HTTP client for external model servers
speaking the wire protocol below.

Wire protocol (``RemoteOracle``):

    POST {endpoint}/v1/predict
    {"height": H, "width": W, "channels": 3,
     "data_b64": "<base64 of row-major R,G,B bytes>"}

    200 -> {"probabilities": [p_0, ..., p_{K-1}], "labels": [...]?}

Responses must pass :class:`ProbabilityVector` validation or the call fails
as a protocol error; no invalid vector ever reaches the attack engine.
"""

import base64
import threading
import time
from dataclasses import dataclass

import numpy as np
import requests

from . import kernels
from .images import validate_image


class OracleError(Exception):
    """Base class for classifier-oracle failures."""


class OracleShapeError(OracleError):
    """Input image does not match the oracle's declared input shape."""


class OracleProtocolError(OracleError):
    """Response is malformed or violates the probability-vector contract."""


class OracleTransportError(OracleError):
    """Network-level failure after the retry policy was exhausted."""


class OracleTimeoutError(OracleTransportError):
    """Request deadline exceeded after the retry policy was exhausted."""


class OracleHTTPError(OracleError):
    """Non-2xx HTTP status."""

    def __init__(self, message, status_code):
        super().__init__(message)
        self.status_code = status_code


class ProbabilityVector:
    """Validated classifier confidence distribution.

    Entries must lie in [0, 1] and sum to 1 within 1e-6, with at least two
    classes; construction rejects anything else.
    """

    __slots__ = ("probabilities", "labels")

    def __init__(self, probabilities, labels=None):
        p = np.asarray(probabilities, dtype=np.float64)
        if p.ndim != 1 or p.shape[0] < 2:
            raise OracleProtocolError(
                f"probability vector must be 1-D with >= 2 classes, got shape {p.shape}"
            )
        if not np.all(np.isfinite(p)):
            raise OracleProtocolError("probability vector contains non-finite entries")
        if p.min() < 0.0 or p.max() > 1.0:
            raise OracleProtocolError(
                f"probabilities outside [0, 1]: min={p.min()!r} max={p.max()!r}"
            )
        total = float(p.sum())
        if abs(total - 1.0) > 1e-6:
            raise OracleProtocolError(f"probabilities sum to {total!r}, not 1")
        if labels is not None:
            labels = [str(s) for s in labels]
            if len(labels) != p.shape[0]:
                raise OracleProtocolError(
                    f"{len(labels)} labels for {p.shape[0]} classes"
                )
        self.probabilities = p
        self.probabilities.setflags(write=False)
        self.labels = labels

    def __len__(self):
        return self.probabilities.shape[0]

    def __getitem__(self, index) -> float:
        return float(self.probabilities[index])

    def top(self) -> tuple:
        """(argmax class index, its confidence); ties break to the lowest index."""
        idx = int(np.argmax(self.probabilities))
        return idx, float(self.probabilities[idx])

    def __repr__(self):
        idx, conf = self.top()
        return f"ProbabilityVector(classes={len(self)}, top={idx}@{conf:.4f})"


@dataclass
class OracleStats:
    """Instrumentation counters. ``total_calls`` counts transport attempts
    for the remote client (several per predict() when retrying) and exactly
    one per predict() for in-process oracles; ``failures <= total_calls``."""

    total_calls: int = 0
    failures: int = 0
    total_latency_s: float = 0.0


class ToyClassifier:
    """Deterministic seeded linear-softmax classifier over an 8x8 luminance grid.

    The image is block-averaged to 64 grayscale features (classic R/G/B
    luminance coefficients), scaled to [0, 1], and passed through a frozen
    Gaussian weight matrix drawn once from the seed; softmax gives the
    confidences. There is no bias term, so the all-zero image maps to the
    uniform distribution. Changing one pixel touches exactly one feature
    cell, which keeps single-pixel probes informative.

    Pure and thread-safe: identical images always produce identical vectors.
    """

    WEIGHT_SCALE = 0.125

    def __init__(self, num_classes: int, seed: int, input_shape=(32, 32)):
        if num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {num_classes}")
        h, w = int(input_shape[0]), int(input_shape[1])
        if h % 8 or w % 8 or h < 8 or w < 8:
            raise ValueError(
                f"input shape {input_shape} must be multiples of 8 (>= 8) for the "
                "8x8 feature grid"
            )
        self.num_classes = int(num_classes)
        self.seed = int(seed)
        self.input_shape = (h, w)
        rng = np.random.default_rng(self.seed)
        self.weights = rng.normal(0.0, self.WEIGHT_SCALE, (self.num_classes, 64))
        self.weights.setflags(write=False)
        self.stats = OracleStats()
        self._lock = threading.Lock()

    def predict(self, image) -> ProbabilityVector:
        validate_image(image)
        if image.shape[:2] != self.input_shape:
            raise OracleShapeError(
                f"image shape {image.shape[:2]} does not match declared input "
                f"shape {self.input_shape}"
            )
        start = time.perf_counter()
        probs = kernels.toy_forward(np.ascontiguousarray(image), self.weights)
        vector = ProbabilityVector(probs)
        with self._lock:
            self.stats.total_calls += 1
            self.stats.total_latency_s += time.perf_counter() - start
        return vector


def encode_image_payload(image) -> dict:
    """Serialize an image to the wire-protocol request body."""
    validate_image(image)
    data = np.ascontiguousarray(image).tobytes()
    return {
        "height": int(image.shape[0]),
        "width": int(image.shape[1]),
        "channels": 3,
        "data_b64": base64.b64encode(data).decode("ascii"),
    }


class RemoteOracle:
    """HTTP client for an external model server.

    Transient failures (timeouts, connection errors, 5xx) are retried with
    exponential backoff up to ``retries`` extra attempts; 4xx statuses and
    malformed bodies fail immediately as protocol/HTTP errors. The client
    may be shared across threads; ``max_in_flight`` caps concurrent
    requests.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 10.0,
        retries: int = 3,
        bearer_token: str = None,
        backoff_s: float = 0.25,
        session: requests.Session = None,
        max_in_flight: int = 8,
    ):
        if not endpoint:
            raise ValueError("endpoint URL is required")
        if max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {max_in_flight}")
        self.endpoint = endpoint.rstrip("/")
        self.timeout = float(timeout)
        self.retries = int(retries)
        self.backoff_s = float(backoff_s)
        self._in_flight = threading.BoundedSemaphore(int(max_in_flight))
        self._headers = {"Content-Type": "application/json"}
        if bearer_token:
            self._headers["Authorization"] = f"Bearer {bearer_token}"
        self._session = session or requests.Session()
        self.stats = OracleStats()
        self._lock = threading.Lock()

    def _record(self, latency, failed):
        with self._lock:
            self.stats.total_calls += 1
            self.stats.total_latency_s += latency
            if failed:
                self.stats.failures += 1

    def predict(self, image) -> ProbabilityVector:
        with self._in_flight:
            return self._predict(image)

    def _predict(self, image) -> ProbabilityVector:
        payload = encode_image_payload(image)
        url = f"{self.endpoint}/v1/predict"
        last_exc = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff_s * 2 ** (attempt - 1))
            start = time.perf_counter()
            try:
                response = self._session.post(
                    url, json=payload, headers=self._headers, timeout=self.timeout
                )
            except requests.Timeout as exc:
                self._record(time.perf_counter() - start, failed=True)
                last_exc = OracleTimeoutError(f"{url}: timed out after {self.timeout}s")
                last_exc.__cause__ = exc
                continue
            except requests.RequestException as exc:
                self._record(time.perf_counter() - start, failed=True)
                last_exc = OracleTransportError(f"{url}: {exc}")
                last_exc.__cause__ = exc
                continue
            if 500 <= response.status_code < 600:
                self._record(time.perf_counter() - start, failed=True)
                last_exc = OracleHTTPError(
                    f"{url}: server error {response.status_code}", response.status_code
                )
                continue
            if response.status_code != 200:
                self._record(time.perf_counter() - start, failed=True)
                raise OracleHTTPError(
                    f"{url}: unexpected status {response.status_code}",
                    response.status_code,
                )
            self._record(time.perf_counter() - start, failed=False)
            return self._parse(response)
        raise last_exc

    def _parse(self, response) -> ProbabilityVector:
        try:
            body = response.json()
        except ValueError as exc:
            raise OracleProtocolError(f"response is not JSON: {exc}") from exc
        if not isinstance(body, dict) or "probabilities" not in body:
            raise OracleProtocolError("response missing 'probabilities'")
        return ProbabilityVector(body["probabilities"], body.get("labels"))
