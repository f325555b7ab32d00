"""A closed-vocabulary template recognizer and the with/without-normalization
comparison built on it.

This is a smoke test for the direction of the normalization effect, not a
real recognizer: boxes are brought to a common 32-row height (either by
profile normalization or by a plain resize), aligned on their first ink
column, laid on a fixed-width canvas, standardized, and labelled by their
nearest training exemplar.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import AugmentationPolicy, apply_policy
from .datasetio import Entry, Manifest
from .evalharness import ScoreReport, score
from .imagecore import as_gray, estimate_background
from .profilenorm import NormalizationParams, fallback_resize, normalize_profile
from .synthgen import GeneratorConfig, generate_item, load_assets

CANVAS_WIDTH = 160

MODERATE_POLICY = {
    "seed": 11,
    "specs": [
        {"kind": "crop_jitter", "probability": 0.8, "params": {"max_fraction": 0.12}},
        {"kind": "rotate", "probability": 0.5, "params": {"degrees": [-2, 2]}},
        {"kind": "gaussian_blur", "probability": 0.5, "params": {"sigma": [0.3, 1.0]}},
        {"kind": "shadow_gradient", "probability": 0.3, "params": {"min_gain": [0.6, 0.9]}},
        {"kind": "brightness_contrast", "probability": 0.5, "params": {"gain": [0.85, 1.15], "bias": [-15, 15]}},
        {"kind": "gaussian_noise", "probability": 0.6, "params": {"stddev": [2, 8]}},
    ],
}


def to_canvas(img, width: int = CANVAS_WIDTH, ink_threshold: float = 40.0) -> np.ndarray:
    """Fixed-width, zero-mean, unit-norm vector for one box.

    The box is trimmed to start two columns before its first ink column
    (any pixel more than ``ink_threshold`` from the background), so loose
    left margins do not shift the template; the rest is left-aligned on a
    background canvas and cut at ``width``.
    """
    img = as_gray(img)
    bg = estimate_background(img)
    ink = np.flatnonzero((np.abs(img.astype(np.float64) - bg) > ink_threshold).any(axis=0))
    if ink.size:
        img = img[:, max(int(ink[0]) - 2, 0):]
    h, w = img.shape
    canvas = np.full((h, width), bg, dtype=np.float64)
    canvas[:, :min(w, width)] = img[:, :width]
    v = canvas.ravel()
    v = v - v.mean()
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


class TemplateRecognizer:
    """1-nearest-neighbour over standardized fixed-size boxes (cosine similarity)."""

    def __init__(self, width: int = CANVAS_WIDTH):
        self.width = width
        self._x = None
        self._y: list[str] = []

    def fit(self, images, labels):
        self._x = np.stack([to_canvas(im, self.width) for im in images])
        self._y = list(labels)
        return self

    def predict(self, images) -> list[str]:
        q = np.stack([to_canvas(im, self.width) for im in images])
        best = np.argmax(q @ self._x.T, axis=1)
        return [self._y[i] for i in best]


def prepare(img, normalize: bool, params: NormalizationParams) -> np.ndarray:
    if normalize:
        return normalize_profile(img, params, fallback=True)[0]
    return fallback_resize(img, params)[0]


@dataclass
class ProxyResult:
    with_norm: ScoreReport
    without_norm: ScoreReport
    vocabulary: list[str]


def run_proxy(config: GeneratorConfig, vocab_size: int = 10, n_train_per_word: int = 10,
              n_test: int = 500, policy: AugmentationPolicy | None = None,
              params: NormalizationParams = NormalizationParams()) -> ProxyResult:
    """Train and test the template recognizer with and without profile normalization.

    Training boxes are clean generator output; test boxes come from disjoint
    generator indices and pass through ``policy`` (moderate camera-style
    degradation by default). Both variants see exactly the same pixels
    before their height treatment.
    """
    policy = policy or AugmentationPolicy.from_dict(MODERATE_POLICY)
    assets = load_assets(config)
    rng = np.random.default_rng(config.seed)
    vocab = sorted(rng.choice(sorted(set(assets.words)), size=vocab_size, replace=False).tolist())
    assets.words = vocab

    n_train = vocab_size * n_train_per_word
    train = [generate_item(config, assets, i) for i in range(n_train)]
    test = [generate_item(config, assets, n_train + i) for i in range(n_test)]
    test_imgs = [apply_policy(t.image, policy, i) for i, t in enumerate(test)]
    truth = Manifest([Entry(f"test/{i:06d}", t.word, "test") for i, t in enumerate(test)])

    reports = {}
    for normalize in (True, False):
        rec = TemplateRecognizer().fit([prepare(t.image, normalize, params) for t in train],
                                       [t.word for t in train])
        preds = rec.predict([prepare(im, normalize, params) for im in test_imgs])
        reports[normalize] = score({e.path: p for e, p in zip(truth.entries, preds)}, truth, "test")
    return ProxyResult(reports[True], reports[False], vocab)
