"""Built-in lightweight classifiers: a logistic classifier trained with
mini-batch SGD-with-momentum, and a nearest-centroid classifier.

Both consume flattened downsampled grayscale pixel features and emit a
binary decision (-1/+1) plus the posterior probability of the decided
class, so their outputs slot directly into decision/score matrices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import image as img_mod
from .errors import DegenerateTrainingError, DimensionError, DomainError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

MODEL_FORMAT_VERSION = 1


def extract_features(img: img_mod.RasterImage, side: int = 32) -> np.ndarray:
    """Grayscale, resize to side x side, flatten row-major, scale to [0, 1]."""
    if side < 1:
        raise DomainError("feature side must be >= 1")
    if img.channels == 3:
        luma = img.pixels.astype(np.float64) @ np.asarray(LUMA_WEIGHTS)
        gray = img_mod.RasterImage(np.clip(np.rint(luma), 0, 255).astype(np.uint8)[:, :, None])
    else:
        gray = img
    small = img_mod.resize(gray, side, side)
    return small.pixels[:, :, 0].astype(np.float64).ravel() / 255.0


@dataclass(frozen=True)
class TrainConfig:
    mini_batch: int = 5
    max_epochs: int = 6
    learning_rate: float = 3e-4
    momentum: float = 0.9
    l2_decay: float = 1e-4
    grad_clip_l2: float = math.inf
    shuffle_each_epoch: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.mini_batch < 1:
            raise DomainError("mini_batch must be >= 1")
        if not 0.0 <= self.momentum < 1.0:
            raise DomainError("momentum must lie in [0, 1)")
        if self.learning_rate < 0.0:
            raise DomainError("learning_rate must be nonnegative")
        if self.l2_decay < 0.0:
            raise DomainError("l2_decay must be nonnegative")


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    velocity: np.ndarray = field(repr=False)


def loss_and_gradient(weights, bias, features, targets01, l2_decay):
    """Mean logistic loss over a batch plus l2_decay * ||w||^2 / 2.

    Returns (loss, grad_w, grad_b).  The decay term excludes the bias.
    """
    z = features @ weights + bias
    # log(1 + exp(-|z|)) form avoids overflow
    losses = np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0) - targets01 * z
    loss = losses.mean() + 0.5 * l2_decay * float(weights @ weights)
    p = 1.0 / (1.0 + np.exp(-z))
    resid = p - targets01
    grad_w = features.T @ resid / len(targets01) + l2_decay * weights
    grad_b = resid.mean()
    return float(loss), grad_w, float(grad_b)


def sgdm_train(features: np.ndarray, labels: np.ndarray, cfg: TrainConfig = TrainConfig()) -> LinearModel:
    """Train the logistic classifier with mini-batch SGDM.

    Velocity update v <- momentum*v - lr*g, parameters theta <- theta + v,
    with the per-batch gradient clipped to grad_clip_l2 in L2 norm.
    Deterministic given cfg.seed.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError("features must be (samples, F) matching labels")
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTrainingError(f"training needs both classes, got only {classes.tolist()}")
    if not set(classes.tolist()) <= {-1, 1}:
        raise DomainError("linear baseline expects binary labels -1/+1")
    y01 = (y == 1).astype(np.float64)

    rng = np.random.default_rng(cfg.seed)
    n, n_features = X.shape
    weights = rng.uniform(-0.01, 0.01, size=n_features)
    bias = 0.0
    velocity = np.zeros(n_features + 1)

    for _ in range(cfg.max_epochs):
        order = rng.permutation(n) if cfg.shuffle_each_epoch else np.arange(n)
        for start in range(0, n, cfg.mini_batch):
            batch = order[start:start + cfg.mini_batch]
            _, gw, gb = loss_and_gradient(weights, bias, X[batch], y01[batch], cfg.l2_decay)
            grad = np.append(gw, gb)
            norm = float(np.linalg.norm(grad))
            if norm > cfg.grad_clip_l2:
                grad *= cfg.grad_clip_l2 / norm
            velocity = cfg.momentum * velocity - cfg.learning_rate * grad
            weights = weights + velocity[:-1]
            bias = bias + velocity[-1]
    return LinearModel(weights=weights, bias=bias, velocity=velocity)


def predict(model: LinearModel, features: np.ndarray):
    """Binary decision and the probability of the decided class (>= 0.5)."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise DimensionError(f"feature dimension {x.shape} does not match model {model.weights.shape}")
    p_pos = 1.0 / (1.0 + math.exp(-(float(model.weights @ x) + model.bias)))
    if p_pos >= 0.5:
        return 1, p_pos
    return -1, 1.0 - p_pos


@dataclass
class NearestCentroidModel:
    centroids: dict[int, np.ndarray]


def nearest_centroid_train(features: np.ndarray, labels: np.ndarray) -> NearestCentroidModel:
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError("features must be (samples, F) matching labels")
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTrainingError("nearest-centroid training needs at least two classes")
    return NearestCentroidModel(
        centroids={int(c): X[y == c].mean(axis=0) for c in classes}
    )


def nearest_centroid_predict(model: NearestCentroidModel, features: np.ndarray):
    """Label of the nearer centroid with score d_far / (d_near + d_far).

    Equidistant points score 0.5 and take the lower label code.
    """
    x = np.asarray(features, dtype=np.float64)
    labels = sorted(model.centroids)
    dists = np.array([float(np.linalg.norm(x - model.centroids[c])) for c in labels])
    best = int(np.argmin(dists))  # argmin keeps the lower code on ties
    others = np.delete(dists, best)
    d_near = dists[best]
    d_far = float(others.min())
    total = d_near + d_far
    score = 0.5 if total == 0.0 else d_far / total
    return labels[best], score


def save_model(model, path) -> None:
    """Serialize a trained model to a versioned JSON file."""
    if isinstance(model, LinearModel):
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": "linear",
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "velocity": model.velocity.tolist(),
        }
    elif isinstance(model, NearestCentroidModel):
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": "nearest_centroid",
            "centroids": {str(c): v.tolist() for c, v in model.centroids.items()},
        }
    else:
        raise DomainError(f"unknown model type {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise DomainError(f"unsupported model format version {version}")
    if payload["kind"] == "linear":
        return LinearModel(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
            velocity=np.asarray(payload["velocity"], dtype=np.float64),
        )
    if payload["kind"] == "nearest_centroid":
        return NearestCentroidModel(
            centroids={int(c): np.asarray(v, dtype=np.float64) for c, v in payload["centroids"].items()}
        )
    raise DomainError(f"unknown model kind {payload['kind']!r}")
