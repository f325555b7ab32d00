"""Word-by-word profile normalization.

The profile of a word box is the vertical band between the first and last
rows whose mean intensity clusters with the text rather than the paper.
Normalization scales the box so that band has a fixed height, then pads or
crops so every box ends up with the same height, with the band centred.
"""
from __future__ import annotations

import json
import logging

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .cluster import DegenerateInput, two_means_1d
from .datasetio import MANIFEST_NAME, Entry, Manifest, output_path, write_manifest
from .imagecore import (as_gray, estimate_background, load_gray, resample_bilinear,
                        round_half_away, row_profile, save_gray)

log = logging.getLogger(__name__)

REPORT_NAME = "normalize_report.jsonl"


class NoTextFound(ValueError):
    """The box has no row contrast to separate text from background."""


@dataclass(frozen=True)
class WordBand:
    top_row: int
    bottom_row: int  # inclusive

    @property
    def profile_height(self) -> int:
        return self.bottom_row - self.top_row + 1

    @property
    def center(self) -> float:
        return (self.top_row + self.bottom_row) / 2.0


@dataclass(frozen=True)
class NormalizationParams:
    target_profile_height: int = 20
    target_box_height: int = 32
    min_contrast: float = 8.0
    refine_passes: int = 2

    def __post_init__(self):
        if not 1 <= self.target_profile_height <= self.target_box_height:
            raise ValueError(
                "need 1 <= target_profile_height <= target_box_height, got "
                f"{self.target_profile_height} and {self.target_box_height}")
        if self.refine_passes < 0:
            raise ValueError("refine_passes must be non-negative")
        if self.min_contrast < 0:
            raise ValueError("min_contrast must be non-negative")


@dataclass(frozen=True)
class NormalizationReport:
    detected_band: WordBand | None  # None when the fallback resize was used
    scale_factor: float
    pad_top: int
    pad_bottom: int
    crop_top: int
    crop_bottom: int
    fill_intensity: int
    fallback: bool = False

    def to_json(self, path: str | None = None) -> dict:
        d = asdict(self)
        band = self.detected_band
        d["detected_band"] = None if band is None else {
            "top_row": band.top_row, "bottom_row": band.bottom_row,
            "profile_height": band.profile_height}
        if path is not None:
            d = {"path": path, **d}
        return d


@dataclass(frozen=True)
class BandDetection:
    """Everything ``detect_word_band`` looked at, for inspection and plotting."""
    profile: np.ndarray
    labels: np.ndarray | None
    text_label: int | None
    background: int
    band: WordBand | None
    reason: str = ""


def analyze_rows(img, min_contrast: float = 8.0) -> BandDetection:
    img = as_gray(img)
    profile = row_profile(img)
    bg = estimate_background(img)
    try:
        res = two_means_1d(profile)
    except DegenerateInput:
        return BandDetection(profile, None, None, bg, None, "row profile is constant")
    if res.centroid_hi - res.centroid_lo < min_contrast:
        return BandDetection(profile, res.labels, None, bg, None,
                             f"row contrast {res.centroid_hi - res.centroid_lo:.2f} below {min_contrast}")
    # text is whichever cluster sits farther from the paper; ties favour dark text
    text_label = 1 if abs(res.centroid_hi - bg) > abs(res.centroid_lo - bg) else 0
    rows = np.flatnonzero(res.labels == text_label)
    if rows.size == 0:
        return BandDetection(profile, res.labels, text_label, bg, None, "no row labelled text")
    return BandDetection(profile, res.labels, text_label, bg, WordBand(int(rows[0]), int(rows[-1])))


def detect_word_band(img, min_contrast: float = 8.0) -> WordBand:
    found = analyze_rows(img, min_contrast)
    if found.band is None:
        raise NoTextFound(found.reason)
    return found.band


def _rint(x) -> int:
    return int(round_half_away(x))


def fallback_resize(img, params: NormalizationParams):
    img = as_gray(img)
    h, w = img.shape
    s = params.target_box_height / h
    new_w = max(1, _rint(w * s))
    out = resample_bilinear(img, new_w, params.target_box_height)
    rep = NormalizationReport(None, s, 0, 0, 0, 0, estimate_background(img), fallback=True)
    return out, rep


def _place(img, band_top: float, band_height: float, params: NormalizationParams, fill: int):
    """Resample so input edges ``[band_top, band_top + band_height)`` land on the target rows."""
    h, w = img.shape
    P, B = params.target_profile_height, params.target_box_height
    s = P / band_height
    new_w = max(1, _rint(w * s))
    # the band's top edge lands on a whole output row, so the band covers
    # exactly P rows, centred in the box
    shift = (B - P) // 2 - band_top * s
    # padding and cropping are never mixed: a short box stays inside the
    # output, a tall one covers it
    span = h * s
    shift = min(max(shift, 0.0), B - span) if span <= B else min(max(shift, B - span), 0.0)
    # the scaled image spans output edges [first, last); whole rows outside
    # it are background padding, scaled rows outside the box are cropped
    first, last = shift, shift + h * s
    pad_top = max(0, int(np.floor(first + 0.5)))
    pad_bottom = max(0, B - int(np.floor(last + 0.5)))
    crop_top = max(0, _rint(-first))
    crop_bottom = max(0, _rint(last - B))
    out = resample_bilinear(img, new_w, B, scale_x=s, scale_y=s, shift_y=shift)
    if pad_top:
        out[:pad_top] = fill
    if pad_bottom:
        out[B - pad_bottom:] = fill
    return out, s, shift, (pad_top, pad_bottom, crop_top, crop_bottom)


def normalize_profile(img, params: NormalizationParams = NormalizationParams(),
                      fallback: bool = False):
    """Scale ``img`` so its word band is ``target_profile_height`` rows tall.

    Returns ``(image, report)``. The whole box is scaled uniformly, then
    shifted so the band occupies the middle ``target_profile_height`` rows
    of a ``target_box_height`` box; rows the scaled box does not reach are
    filled with the background estimate and rows beyond the box are cut.

    Band detection on a reframed box can disagree with the original by a
    row or two (an isolated ascender row may cluster differently once the
    surrounding paper is cropped). With ``params.refine_passes > 0`` the
    band found in the output is mapped back onto the input and the resample
    redone, keeping the placement whose output re-detects closest to the
    target rows. Raises :class:`NoTextFound` unless ``fallback`` is set, in
    which case the box is resized to the box height and the report flagged.
    """
    img = as_gray(img)
    try:
        band = detect_word_band(img, params.min_contrast)
    except NoTextFound:
        if not fallback:
            raise
        return fallback_resize(img, params)

    fill = estimate_background(img)
    P, B = params.target_profile_height, params.target_box_height
    target = WordBand((B - P) // 2, (B - P) // 2 + P - 1)
    top, height = float(band.top_row), float(band.profile_height)
    best = None
    for _ in range(params.refine_passes + 1):
        out, s, shift, geom = _place(img, top, height, params, fill)
        try:
            got = detect_word_band(out, params.min_contrast)
            miss = abs(got.top_row - target.top_row) + abs(got.bottom_row - target.bottom_row)
        except NoTextFound:
            got, miss = None, np.inf
        if best is None or miss < best[0]:
            best = (miss, out, s, geom)
        if got is None or miss == 0:
            break
        # output edges of the re-detected band, back in input coordinates
        new_top = (got.top_row - shift) / s
        new_height = got.profile_height / s
        if new_height <= 0 or (abs(new_top - top) < 1e-9 and abs(new_height - height) < 1e-9):
            break
        top, height = new_top, new_height
    _, out, s, (pt, pb, ct, cb) = best
    return out, NormalizationReport(band, s, pt, pb, ct, cb, fill)


# -- datasets ----------------------------------------------------------------

def _normalize_one(args):
    src, dst, params = args
    try:
        img = load_gray(src)
    except Exception as exc:  # decoding failures are per-item, never fatal
        return None, f"{type(exc).__name__}: {exc}"
    out, rep = normalize_profile(img, params, fallback=True)
    save_gray(out, dst)
    return rep, None


def normalize_dataset(manifest: Manifest, params: NormalizationParams, out_dir,
                      jobs: int = 1) -> Manifest:
    """Normalize every entry of ``manifest`` into ``out_dir``.

    Writes the images (at the entries' relative paths, as PNG), ``manifest.jsonl`` and a ``normalize_report.jsonl``
    sidecar (one report per input line, then a summary line). Entries that
    fail to decode are reported and left out of the returned manifest;
    a missing file raises ``FileNotFoundError`` before anything is written.
    """
    out = Path(out_dir)
    sources = [manifest.resolve(e) for e in manifest.entries]
    for e, src in zip(manifest.entries, sources):
        if not src.is_file():
            raise FileNotFoundError(f"image for {e.path!r} not found at {src}")
    rels = [output_path(e.path) for e in manifest.entries]
    if len(set(rels)) != len(rels):
        raise ValueError("manifest paths collide after mapping to .png outputs")
    tasks = [(src, out / rel, params) for src, rel in zip(sources, rels)]

    out.mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_normalize_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_normalize_one(t) for t in tasks]

    entries = []
    n_fallback = n_failed = 0
    with open(out / REPORT_NAME, "w", encoding="utf-8", newline="\n") as fh:
        for e, rel, (rep, err) in zip(manifest.entries, rels, results):
            if err is not None:
                n_failed += 1
                log.warning("%s: %s", e.path, err)
                fh.write(json.dumps({"path": e.path, "error": err}, ensure_ascii=False) + "\n")
                continue
            n_fallback += rep.fallback
            fh.write(json.dumps(rep.to_json(rel), ensure_ascii=False) + "\n")
            entries.append(Entry(rel, e.text, e.split))
        summary = {"n_images": len(tasks), "n_normalized": len(entries) - n_fallback,
                   "n_fallback": n_fallback, "n_failed": n_failed, "params": asdict(params)}
        fh.write(json.dumps({"summary": summary}) + "\n")
    result = Manifest(entries, root=out)
    write_manifest(result, out / MANIFEST_NAME)
    return result


def read_report(path):
    """Per-image report dicts and the summary dict from a sidecar file."""
    rows, summary = [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            if "summary" in obj:
                summary = obj["summary"]
            else:
                rows.append(obj)
    return rows, summary


__all__ = [
    "NoTextFound", "WordBand", "NormalizationParams", "NormalizationReport", "BandDetection",
    "analyze_rows", "detect_word_band", "normalize_profile", "normalize_dataset", "read_report",
    "REPORT_NAME",
]
