"""Synthetic word boxes: a rendered word alpha-composited over a background patch.

Every item draws its word, font, size, intensities and background patch
from its own generator seeded with ``(seed, index)``, so item ``i`` looks
the same whether it is generated alone, in a batch, or in parallel.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from fontTools.ttLib import TTFont
from PIL import Image, ImageDraw, ImageFont

from .datasetio import MANIFEST_NAME, Entry, Manifest, write_manifest
from .imagecore import as_gray, load_gray, resize_bilinear, save_gray, to_uint8

log = logging.getLogger(__name__)

FONT_SUFFIXES = (".ttf", ".otf", ".ttc")
MAX_REDRAWS = 20


class AssetError(RuntimeError):
    """Fonts, backgrounds or lexicon missing or unusable."""


class UnrenderableWord(ValueError):
    """The font has no glyph for some character of the word."""


@dataclass
class GeneratorConfig:
    fonts_dir: Path
    backgrounds_dir: Path
    lexicon_path: Path
    font_size_range: tuple[int, int] = (18, 48)
    text_intensity_range: tuple[int, int] = (0, 100)
    background_brightness_shift_range: tuple[int, int] = (-30, 30)
    margin: int = 4
    seed: int = 0

    def __post_init__(self):
        self.fonts_dir = Path(self.fonts_dir)
        self.backgrounds_dir = Path(self.backgrounds_dir)
        self.lexicon_path = Path(self.lexicon_path)
        for name in ("font_size_range", "text_intensity_range", "background_brightness_shift_range"):
            lo, hi = (int(v) for v in getattr(self, name))
            if lo > hi:
                raise ValueError(f"{name}: empty range [{lo}, {hi}]")
            setattr(self, name, (lo, hi))
        lo, hi = self.text_intensity_range
        self.text_intensity_range = (min(max(lo, 0), 255), min(max(hi, 0), 255))
        if self.font_size_range[0] < 1:
            raise ValueError("font sizes must be positive")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")

    @classmethod
    def from_json(cls, path) -> "GeneratorConfig":
        """Load a JSON config; relative asset paths resolve against its directory."""
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        for key in ("fonts_dir", "backgrounds_dir", "lexicon_path"):
            if key not in raw:
                raise ValueError(f"{path}: missing {key}")
            raw[key] = path.parent / raw[key]
        return cls(**raw)


@dataclass
class GlyphMask:
    alpha: np.ndarray  # float64 coverage in [0, 1], shape (height, width)
    glyph_top: int
    glyph_bottom: int

    @property
    def height(self) -> int:
        return self.alpha.shape[0]

    @property
    def width(self) -> int:
        return self.alpha.shape[1]


@lru_cache(maxsize=64)
def _font(path: str, size: int) -> ImageFont.FreeTypeFont:
    return ImageFont.truetype(path, size)


@lru_cache(maxsize=64)
def _codepoints(path: str) -> frozenset:
    with TTFont(path, fontNumber=0, lazy=True) as tt:
        cmap = tt.getBestCmap() or {}
    return frozenset(cmap)


def render_word(word: str, font_path, size: int, margin: int = 4) -> GlyphMask:
    """Rasterize ``word`` into an anti-aliased coverage mask.

    The mask spans the font's ascent-to-descent line box plus ``margin`` on
    every side, so the baseline sits where the font puts it rather than
    hugging the ink. ``glyph_top``/``glyph_bottom`` are the first and last
    rows holding nonzero coverage; FreeType's own bounding box can overshoot
    those by a row of zero-coverage antialiasing.
    """
    if not word or not word.isprintable():
        raise UnrenderableWord(f"word {word!r} is empty or not printable")
    font_path = str(font_path)
    cps = _codepoints(font_path)
    lacking = [c for c in word if not c.isspace() and ord(c) not in cps]
    if lacking:
        raise UnrenderableWord(f"{Path(font_path).name} has no glyph for {''.join(lacking)!r}")

    font = _font(font_path, int(size))
    ascent, descent = font.getmetrics()
    advance = font.getlength(word)
    left, _, right, _ = font.getbbox(word, anchor="ls")
    x0 = margin - min(0, left)
    width = int(np.ceil(max(advance, right) - min(0, left))) + 2 * margin
    height = ascent + descent + 2 * margin
    baseline = margin + ascent

    canvas = Image.new("L", (width, height), 0)
    ImageDraw.Draw(canvas).text((x0, baseline), word, fill=255, font=font, anchor="ls")
    alpha = np.asarray(canvas, dtype=np.float64) / 255.0

    ink = np.flatnonzero(alpha.max(axis=1) > 0)
    if ink.size == 0:
        raise UnrenderableWord(f"{word!r} produced no ink in {Path(font_path).name}")
    return GlyphMask(alpha, int(ink[0]), int(ink[-1]))


def compose(mask: GlyphMask, background, text_intensity: int) -> np.ndarray:
    """``round(alpha * text + (1 - alpha) * background)`` per pixel."""
    bg = as_gray(background)
    alpha = mask.alpha if isinstance(mask, GlyphMask) else np.asarray(mask, dtype=np.float64)
    if alpha.shape != bg.shape:
        raise ValueError(f"mask {alpha.shape} and background {bg.shape} differ in shape")
    return to_uint8(alpha * float(text_intensity) + (1.0 - alpha) * bg.astype(np.float64))


# -- assets ------------------------------------------------------------------

@dataclass
class Assets:
    fonts: list[str]
    backgrounds: list[Path]
    words: list[str]
    _bg_cache: dict = field(default_factory=dict, repr=False)

    def background(self, i: int) -> np.ndarray:
        if i not in self._bg_cache:
            self._bg_cache[i] = load_gray(self.backgrounds[i])
        return self._bg_cache[i]


def load_assets(config: GeneratorConfig) -> Assets:
    def listing(d: Path, suffixes, what):
        if not d.is_dir():
            raise AssetError(f"{what} directory not found: {d}")
        found = sorted(p for p in d.iterdir() if p.suffix.lower() in suffixes)
        if not found:
            raise AssetError(f"no {what} in {d}")
        return found

    fonts = [str(p) for p in listing(config.fonts_dir, FONT_SUFFIXES, "fonts")]
    backgrounds = listing(config.backgrounds_dir, (".png",), "backgrounds")
    if not config.lexicon_path.is_file():
        raise AssetError(f"lexicon not found: {config.lexicon_path}")
    words = [w.strip() for w in config.lexicon_path.read_text(encoding="utf-8").splitlines()]
    words = [w for w in words if w]
    if not words:
        raise AssetError(f"lexicon is empty: {config.lexicon_path}")
    return Assets(fonts, backgrounds, words)


def item_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2**64 - 1), int(index)])


def _background_patch(rng, assets: Assets, height: int, width: int, shift: int) -> np.ndarray:
    bg = assets.background(int(rng.integers(len(assets.backgrounds))))
    bh, bw = bg.shape
    if bh < height or bw < width:
        grow = max(height / bh, width / bw)
        bg = resize_bilinear(bg, max(width, int(np.ceil(bw * grow))), max(height, int(np.ceil(bh * grow))))
        bh, bw = bg.shape
    y = int(rng.integers(bh - height + 1))
    x = int(rng.integers(bw - width + 1))
    patch = bg[y:y + height, x:x + width].astype(np.int16) + shift
    return np.clip(patch, 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class GeneratedItem:
    image: np.ndarray
    word: str
    font: str
    size: int
    text_intensity: int
    glyph_top: int
    glyph_bottom: int


def generate_item(config: GeneratorConfig, assets: Assets, index: int) -> GeneratedItem:
    rng = item_rng(config.seed, index)
    for _ in range(MAX_REDRAWS):
        word = assets.words[int(rng.integers(len(assets.words)))]
        font = assets.fonts[int(rng.integers(len(assets.fonts)))]
        size = int(rng.integers(config.font_size_range[0], config.font_size_range[1] + 1))
        try:
            mask = render_word(word, font, size, config.margin)
        except UnrenderableWord as exc:
            log.warning("item %d: %s; redrawing", index, exc)
            continue
        break
    else:
        raise AssetError(f"item {index}: no renderable word/font pair after {MAX_REDRAWS} draws")
    ti = int(rng.integers(config.text_intensity_range[0], config.text_intensity_range[1] + 1))
    lo, hi = config.background_brightness_shift_range
    shift = int(rng.integers(lo, hi + 1))
    patch = _background_patch(rng, assets, mask.height, mask.width, shift)
    img = compose(mask, patch, ti)
    return GeneratedItem(img, word, font, size, ti, mask.glyph_top, mask.glyph_bottom)


def image_name(index: int, count: int) -> str:
    return f"{index:0{max(6, len(str(max(count - 1, 0))))}d}.png"


_worker_state: dict = {}


def _worker_init(config: GeneratorConfig):
    _worker_state["config"] = config
    _worker_state["assets"] = load_assets(config)


def _worker_item(index: int) -> GeneratedItem:
    return generate_item(_worker_state["config"], _worker_state["assets"], index)


def iter_items(config: GeneratorConfig, count: int, jobs: int = 1):
    """Yield generated items in index order, optionally using worker processes."""
    if jobs <= 1 or count < 2:
        assets = load_assets(config)
        for i in range(count):
            yield generate_item(config, assets, i)
        return
    load_assets(config)  # fail fast in the parent
    with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init, initargs=(config,)) as pool:
        yield from pool.map(_worker_item, range(count), chunksize=max(1, count // (4 * jobs)))


def generate_dataset(config: GeneratorConfig, count: int, out_dir=None, jobs: int = 1) -> Manifest:
    """Generate ``count`` boxes; with ``out_dir`` also write PNGs and the manifest.

    Images go to ``out_dir/images/<zero-padded index>.png`` and the manifest to
    ``out_dir/manifest.jsonl``, every entry in the train split.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    out = Path(out_dir) if out_dir is not None else None
    if count == 0:
        load_assets(config)
    entries = []
    for i, item in enumerate(iter_items(config, count, jobs)):
        rel = f"images/{image_name(i, count)}"
        if out is not None:
            save_gray(item.image, out / rel)
        entries.append(Entry(rel, item.word, "train"))
    manifest = Manifest(entries, root=out)
    if out is not None:
        write_manifest(manifest, out / MANIFEST_NAME)
    return manifest
