"""Ordered, probabilistic augmentation policies and their JSON file format.

A policy file looks like::

    {
      "seed": 7,
      "specs": [
        {"kind": "gaussian_blur", "probability": 0.5, "params": {"sigma": [0.3, 1.2]}},
        {"kind": "rotate", "probability": 0.3, "params": {"degrees": [-4, 4]}},
        {"kind": "erode", "probability": 0.1}
      ]
    }

Each parameter is a ``[min, max]`` range sampled uniformly, or a single
number meaning a fixed value. Parameters left out take the defaults in
:data:`KINDS`.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..datasetio import MANIFEST_NAME, Entry, Manifest, output_path, write_manifest
from ..imagecore import as_gray, load_gray, save_gray
from . import kernels


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    lo: float  # allowed bounds for any drawn value
    hi: float
    default: tuple[float, float]
    lo_open: bool = False  # value must be strictly above lo


KINDS: dict[str, dict[str, Param]] = {
    "gaussian_blur": {"sigma": Param(0, 10, (0.5, 1.5), lo_open=True)},
    "motion_blur": {"length": Param(1, 50, (3, 9)), "angle": Param(-180, 180, (-180, 180))},
    "gaussian_noise": {"stddev": Param(0, 100, (2, 12))},
    "salt_pepper": {"fraction": Param(0, 0.1, (0.001, 0.01))},
    "shadow_gradient": {"direction": Param(-360, 360, (0, 360)),
                        "min_gain": Param(0, 1, (0.4, 0.9), lo_open=True)},
    "rotate": {"degrees": Param(-15, 15, (-3, 3))},
    "perspective": {"max_shift": Param(0, 0.25, (0.0, 0.06))},
    "sheet_bend": {"amplitude": Param(0, 10, (0.5, 2.5)), "wavelength": Param(4, 1e4, (80, 300)),
                   "phase": Param(0, 2 * math.pi, (0, 2 * math.pi))},
    "erode": {},
    "dilate": {},
    "resolution_drop": {"factor": Param(0, 1, (0.4, 0.9), lo_open=True)},
    "crop_jitter": {"max_fraction": Param(0, 0.25, (0.05, 0.05))},
    "brightness_contrast": {"gain": Param(0.2, 3, (0.8, 1.2)), "bias": Param(-128, 128, (-25, 25))},
}


@dataclass(frozen=True)
class AugmentationSpec:
    kind: str
    probability: float
    params: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PolicyError(f"unknown augmentation kind {self.kind!r}; known: {', '.join(KINDS)}")
        if not 0 <= self.probability <= 1:
            raise PolicyError(f"{self.kind}: probability {self.probability} outside [0, 1]")
        schema = KINDS[self.kind]
        extra = set(self.params) - set(schema)
        if extra:
            raise PolicyError(f"{self.kind}: unknown parameter(s) {sorted(extra)}")
        full = {}
        for name, p in schema.items():
            lo, hi = _as_range(self.params.get(name, p.default), f"{self.kind}.{name}")
            if lo > hi:
                raise PolicyError(f"{self.kind}.{name}: empty range [{lo}, {hi}]")
            if lo < p.lo or hi > p.hi or (p.lo_open and lo <= p.lo):
                bracket = "(" if p.lo_open else "["
                raise PolicyError(f"{self.kind}.{name}: range [{lo}, {hi}] outside {bracket}{p.lo}, {p.hi}]")
            full[name] = (lo, hi)
        object.__setattr__(self, "params", full)

    def draw(self, rng: np.random.Generator) -> dict[str, float]:
        return {name: float(rng.uniform(lo, hi)) if hi > lo else float(lo)
                for name, (lo, hi) in self.params.items()}


def _as_range(value, where):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value), float(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return float(value[0]), float(value[1])
    raise PolicyError(f"{where}: expected a number or [min, max], got {value!r}")


@dataclass(frozen=True)
class AugmentationPolicy:
    specs: tuple[AugmentationSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))

    @classmethod
    def from_dict(cls, obj: dict) -> "AugmentationPolicy":
        if not isinstance(obj, dict):
            raise PolicyError("policy must be a JSON object")
        extra = set(obj) - {"seed", "specs"}
        if extra:
            raise PolicyError(f"unknown top-level key(s) {sorted(extra)}")
        specs = []
        for i, raw in enumerate(obj.get("specs", [])):
            try:
                if not isinstance(raw, dict):
                    raise PolicyError("entry must be an object")
                unknown = set(raw) - {"kind", "probability", "params"}
                if unknown:
                    raise PolicyError(f"unknown key(s) {sorted(unknown)}")
                if "kind" not in raw:
                    raise PolicyError("missing 'kind'")
                specs.append(AugmentationSpec(raw["kind"], float(raw.get("probability", 1.0)),
                                              dict(raw.get("params", {}))))
            except (PolicyError, TypeError, ValueError) as exc:
                raise PolicyError(f"specs[{i}] ({raw.get('kind', '?') if isinstance(raw, dict) else '?'}): {exc}") from None
        return cls(tuple(specs), int(obj.get("seed", 0)))

    def to_dict(self) -> dict:
        return {"seed": self.seed, "specs": [
            {"kind": s.kind, "probability": s.probability,
             "params": {k: list(v) for k, v in s.params.items()}} for s in self.specs]}


def load_policy(path) -> AugmentationPolicy:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PolicyError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    try:
        return AugmentationPolicy.from_dict(obj)
    except PolicyError as exc:
        raise PolicyError(f"{path}: {exc}") from None


def spec_rng(seed: int, item_index: int, position: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2**64 - 1), int(item_index), int(position)])


def apply_spec(img: np.ndarray, kind: str, p: dict[str, float], rng: np.random.Generator) -> np.ndarray:
    if kind == "gaussian_blur":
        return kernels.gaussian_blur(img, p["sigma"])
    if kind == "motion_blur":
        return kernels.motion_blur(img, p["length"], p["angle"])
    if kind == "gaussian_noise":
        return kernels.gaussian_noise(img, p["stddev"], rng)
    if kind == "salt_pepper":
        return kernels.salt_pepper(img, p["fraction"], rng)
    if kind == "shadow_gradient":
        return kernels.shadow_gradient(img, p["direction"], p["min_gain"])
    if kind == "rotate":
        return kernels.rotate(img, p["degrees"])
    if kind == "perspective":
        h, w = img.shape
        d = rng.uniform(-1, 1, size=(4, 2)) * p["max_shift"] * np.array([w, h])
        return kernels.perspective(img, d)
    if kind == "sheet_bend":
        return kernels.sheet_bend(img, p["amplitude"], p["wavelength"], p["phase"])
    if kind == "erode":
        return kernels.erode(img)
    if kind == "dilate":
        return kernels.dilate(img)
    if kind == "resolution_drop":
        return kernels.resolution_drop(img, p["factor"])
    if kind == "crop_jitter":
        return kernels.crop_jitter(img, p["max_fraction"], rng)
    if kind == "brightness_contrast":
        return kernels.brightness_contrast(img, p["gain"], p["bias"])
    raise PolicyError(f"unknown augmentation kind {kind!r}")


def apply_policy(img, policy: AugmentationPolicy, item_index: int) -> np.ndarray:
    """Run ``policy`` over ``img`` in list order.

    Spec ``k`` draws its inclusion coin, then its parameters, then any noise
    it needs, all from a generator seeded with ``(policy.seed, item_index, k)``.
    """
    out = as_gray(img)
    for k, spec in enumerate(policy.specs):
        rng = spec_rng(policy.seed, item_index, k)
        if not rng.random() < spec.probability:
            continue
        out = apply_spec(out, spec.kind, spec.draw(rng), rng)
    return out if out is not img else out.copy()


def _augment_one(task):
    src, dst, policy, index = task
    try:
        img = load_gray(src)
    except Exception as exc:  # per-item decode failure
        return f"{type(exc).__name__}: {exc}"
    save_gray(apply_policy(img, policy, index), dst)
    return None


def augment_dataset(manifest: Manifest, policy: AugmentationPolicy, out_dir, jobs: int = 1):
    """Augment every manifest image into ``out_dir``; item index = manifest position.

    Returns ``(manifest, failures)`` where ``failures`` lists ``(path, error)``
    for images that could not be decoded (they are left out of the manifest).
    """
    out = Path(out_dir)
    tasks = []
    for i, e in enumerate(manifest.entries):
        src = manifest.resolve(e)
        if not src.is_file():
            raise FileNotFoundError(f"image for {e.path!r} not found at {src}")
        tasks.append((src, out / output_path(e.path), policy, i))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            errors = list(pool.map(_augment_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        errors = [_augment_one(t) for t in tasks]
    entries, failures = [], []
    for e, t, err in zip(manifest.entries, tasks, errors):
        if err is None:
            entries.append(Entry(t[1].relative_to(out).as_posix(), e.text, e.split))
        else:
            failures.append((e.path, err))
    result = Manifest(entries, root=out)
    write_manifest(result, out / MANIFEST_NAME)
    return result, failures
