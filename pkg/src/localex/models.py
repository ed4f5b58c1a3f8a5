"""Black-box models: builtin synthetic families plus a remote HTTP adapter.

Builtin variants are pure and deterministic so analytic oracles stay exact.
Outputs are not clamped to [0,1]; the concentration theory behind the
explanation methods assumes bounded outputs, but the engine accepts any real
response and leaves the assumption to the caller.
"""
from __future__ import annotations

import json
import urllib.error
import urllib.request
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatch,
    RemoteMalformed,
    RemoteUnavailable,
    UnsupportedModel,
)

MLP_GRADIENT_STEP = 1e-5


@dataclass(frozen=True)
class Linear:
    """f(x) = c . x + bias."""

    coefficients: np.ndarray
    bias: float = 0.0

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=np.float64)
        if c.ndim != 1:
            raise ValueError("coefficients must be a flat vector")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "bias", float(self.bias))


@dataclass(frozen=True)
class Quadratic:
    """f(x) = x^T A x + c . x + bias; A is symmetrized at construction."""

    matrix: np.ndarray
    coefficients: np.ndarray
    bias: float = 0.0

    def __post_init__(self) -> None:
        a = np.asarray(self.matrix, dtype=np.float64)
        c = np.asarray(self.coefficients, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if c.shape != (a.shape[0],):
            raise ValueError("coefficients must match the matrix dimension")
        object.__setattr__(self, "matrix", (a + a.T) / 2.0)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "bias", float(self.bias))


@dataclass(frozen=True)
class Mlp:
    """Fixed-weight dense network, tanh hidden activations, scalar linear output.

    weights[i] has shape (fan_in, fan_out); weights are loaded from a file and
    never trained.
    """

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ws = tuple(np.asarray(w, dtype=np.float64) for w in self.weights)
        bs = tuple(np.asarray(b, dtype=np.float64) for b in self.biases)
        if len(ws) != len(bs) or not ws:
            raise ValueError("need one bias vector per weight matrix")
        for w, b in zip(ws, bs):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError("layer shapes are inconsistent")
        if ws[-1].shape[1] != 1:
            raise ValueError("output layer must produce a scalar")
        for w_prev, w_next in zip(ws, ws[1:]):
            if w_prev.shape[1] != w_next.shape[0]:
                raise ValueError("consecutive layer widths do not chain")
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)


@dataclass(frozen=True)
class Remote:
    """HTTP adapter: POST {"points": [[...]]} -> {"values": [...]}."""

    endpoint: str
    timeout_ms: int = 10000
    batch_size: int = 64
    retries: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be positive")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


ModelSpec = Linear | Quadratic | Mlp | Remote


def input_dim(model: ModelSpec) -> int | None:
    """Declared input width; None for Remote (the server defines it)."""
    if isinstance(model, Linear):
        return model.coefficients.shape[0]
    if isinstance(model, Quadratic):
        return model.coefficients.shape[0]
    if isinstance(model, Mlp):
        return model.weights[0].shape[0]
    return None


def _as_batch(model: ModelSpec, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionMismatch(f"points must be an n x D matrix, got shape {pts.shape}")
    dim = input_dim(model)
    if dim is not None and pts.shape[1] != dim:
        raise DimensionMismatch(
            f"points have width {pts.shape[1]}, model expects {dim}"
        )
    return pts


def _remote_batch(model: Remote, batch: np.ndarray) -> np.ndarray:
    body = json.dumps({"points": batch.tolist()}).encode("utf-8")
    request = urllib.request.Request(
        model.endpoint, data=body, headers={"Content-Type": "application/json"}
    )
    last_error: Exception | None = None
    for _ in range(model.retries + 1):
        try:
            with urllib.request.urlopen(request, timeout=model.timeout_ms / 1000.0) as resp:
                raw = resp.read()
            break
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            # HTTPError is a URLError subclass, so status >= 400 lands here too
            last_error = exc
    else:
        raise RemoteUnavailable(f"remote model at {model.endpoint} failed: {last_error}")
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RemoteMalformed(f"remote returned invalid JSON: {exc}") from exc
    values = payload.get("values") if isinstance(payload, dict) else None
    if not isinstance(values, list) or len(values) != len(batch):
        raise RemoteMalformed(
            f"remote returned {0 if not isinstance(values, list) else len(values)} "
            f"values for {len(batch)} points"
        )
    try:
        return np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise RemoteMalformed(f"remote values are not numeric: {exc}") from exc


def evaluate(model: ModelSpec, points: np.ndarray) -> np.ndarray:
    """Apply the model row-wise to an n x D matrix; returns a length-n vector."""
    pts = _as_batch(model, points)
    if isinstance(model, Linear):
        return pts @ model.coefficients + model.bias
    if isinstance(model, Quadratic):
        quad = np.einsum("ni,ij,nj->n", pts, model.matrix, pts)
        return quad + pts @ model.coefficients + model.bias
    if isinstance(model, Mlp):
        h = pts
        for w, b in zip(model.weights[:-1], model.biases[:-1]):
            h = np.tanh(h @ w + b)
        return (h @ model.weights[-1] + model.biases[-1])[:, 0]
    if isinstance(model, Remote):
        out = np.empty(len(pts))
        for start in range(0, len(pts), model.batch_size):
            chunk = pts[start : start + model.batch_size]
            out[start : start + len(chunk)] = _remote_batch(model, chunk)
        return out
    raise TypeError(f"unknown model spec: {model!r}")


def gradient(model: ModelSpec, point: np.ndarray) -> np.ndarray:
    """Gradient at one point; analytic for Linear/Quadratic, central differences for Mlp."""
    if isinstance(model, Remote):
        raise UnsupportedModel("gradient is not available for remote models")
    x = np.asarray(point, dtype=np.float64)
    dim = input_dim(model)
    if x.shape != (dim,):
        raise DimensionMismatch(f"point has shape {x.shape}, model expects ({dim},)")
    if isinstance(model, Linear):
        return model.coefficients.copy()
    if isinstance(model, Quadratic):
        return 2.0 * (model.matrix @ x) + model.coefficients
    # Mlp: central differences, one batched evaluation of 2D shifted points
    h = MLP_GRADIENT_STEP
    shifts = np.vstack([x + h * np.eye(dim), x - h * np.eye(dim)])
    vals = evaluate(model, shifts)
    return (vals[:dim] - vals[dim:]) / (2.0 * h)


# ---------------------------------------------------------------------------
# model files: JSON with a "kind" tag selecting the variant


def model_from_json(obj: dict) -> ModelSpec:
    try:
        kind = obj["kind"]
    except (TypeError, KeyError) as exc:
        raise ConfigError("model file must be an object with a 'kind' tag") from exc
    try:
        if kind == "linear":
            return Linear(np.asarray(obj["coefficients"]), float(obj.get("bias", 0.0)))
        if kind == "quadratic":
            return Quadratic(
                np.asarray(obj["matrix"]),
                np.asarray(obj["coefficients"]),
                float(obj.get("bias", 0.0)),
            )
        if kind == "mlp":
            layers = obj["layers"]
            return Mlp(
                tuple(np.asarray(layer["weights"]) for layer in layers),
                tuple(np.asarray(layer["bias"]) for layer in layers),
            )
        if kind == "remote":
            return Remote(
                str(obj["endpoint"]),
                int(obj.get("timeout_ms", 10000)),
                int(obj.get("batch_size", 64)),
                int(obj.get("retries", 0)),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed '{kind}' model: {exc}") from exc
    raise ConfigError(f"unknown model kind: {kind!r}")


def model_to_json(model: ModelSpec) -> dict:
    if isinstance(model, Linear):
        return {
            "kind": "linear",
            "coefficients": model.coefficients.tolist(),
            "bias": model.bias,
        }
    if isinstance(model, Quadratic):
        return {
            "kind": "quadratic",
            "matrix": model.matrix.tolist(),
            "coefficients": model.coefficients.tolist(),
            "bias": model.bias,
        }
    if isinstance(model, Mlp):
        return {
            "kind": "mlp",
            "layers": [
                {"weights": w.tolist(), "bias": b.tolist()}
                for w, b in zip(model.weights, model.biases)
            ],
        }
    if isinstance(model, Remote):
        return {
            "kind": "remote",
            "endpoint": model.endpoint,
            "timeout_ms": model.timeout_ms,
            "batch_size": model.batch_size,
            "retries": model.retries,
        }
    raise TypeError(f"unknown model spec: {model!r}")


def load_model(path: str) -> ModelSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model file {path} is not valid JSON: {exc}") from exc
    return model_from_json(obj)
