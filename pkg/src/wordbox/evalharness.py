"""Scoring of recognizer output against a manifest.

Predictions are a plain ``dict`` mapping manifest path to predicted text.
On disk they are JSON lines: ``{"path": "...", "text": "..."}``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from .datasetio import Manifest

ASCII_WS = " \t\n\r\x0b\x0c"
CURVE_HEADER = ("train_size", "variant", "word_accuracy", "char_error_rate", "n_scored", "n_missing")
NO_DATA = "NA"


@dataclass(frozen=True)
class ScoreReport:
    word_accuracy: float
    char_error_rate: float | None  # None when the labels have zero total length
    n_scored: int
    n_missing: int


def read_predictions(path) -> dict[str, str]:
    preds = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
                p, t = obj["path"], obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ValueError(f"{path}:{lineno}: expected {{\"path\": ..., \"text\": ...}}") from None
            if p in preds:
                raise ValueError(f"{path}:{lineno}: duplicate prediction for {p!r}")
            preds[p] = t
    return preds


def write_predictions(preds: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p, t in preds.items():
            fh.write(json.dumps({"path": p, "text": t}, ensure_ascii=False) + "\n")


def simple_lower(s: str) -> str:
    # per-character mapping: no final-sigma context, U+0130 maps to plain 'i'
    return "".join("i" if c == "İ" else c.lower() for c in s)


def canonical(s: str, case_fold: bool) -> str:
    s = s.strip(ASCII_WS)
    return simple_lower(s) if case_fold else s


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over code points."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _pairs(preds, truth: Manifest, split, case_fold):
    for e in truth.split(split):
        pred = preds.get(e.path)
        yield canonical(e.text, case_fold), None if pred is None else canonical(pred, case_fold)


def score(preds: dict[str, str], truth: Manifest, split: str | None = None,
          case_fold: bool = True) -> ScoreReport:
    """Word accuracy and CER over the entries of ``split`` (all when None).

    A missing prediction counts as wrong for accuracy and as deleting the
    whole label for CER.
    """
    hits = missing = scored = 0
    edits = label_chars = 0
    for label, pred in _pairs(preds, truth, split, case_fold):
        label_chars += len(label)
        if pred is None:
            missing += 1
            edits += len(label)
            continue
        scored += 1
        hits += pred == label
        edits += levenshtein(pred, label)
    total = scored + missing
    acc = hits / total if total else 0.0
    cer = edits / label_chars if label_chars else None
    return ScoreReport(acc, cer, scored, missing)


word_accuracy = score


def char_error_rate(preds: dict[str, str], truth: Manifest, split: str | None = None,
                    case_fold: bool = True) -> float | None:
    return score(preds, truth, split, case_fold).char_error_rate


def _fmt(x) -> str:
    return NO_DATA if x is None else f"{x:.6f}"


def emit_curve(rows) -> str:
    """CSV text for ``(train_size, ScoreReport, variant)`` rows, sorted by variant then size."""
    rows = list(rows)
    if not rows:
        raise ValueError("emit_curve needs at least one row")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for size, rep, variant in sorted(rows, key=lambda r: (r[2], r[0])):
        w.writerow([int(size), variant, _fmt(rep.word_accuracy), _fmt(rep.char_error_rate),
                    rep.n_scored, rep.n_missing])
    return buf.getvalue()


def parse_curve(text: str) -> list[tuple[int, ScoreReport, str]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CURVE_HEADER:
        raise ValueError(f"unexpected curve header {header}")
    rows = []
    for size, variant, acc, cer, n_scored, n_missing in reader:
        rep = ScoreReport(float(acc), None if cer == NO_DATA else float(cer),
                          int(n_scored), int(n_missing))
        rows.append((int(size), rep, variant))
    return rows


def read_curve(path) -> list[tuple[int, ScoreReport, str]]:
    return parse_curve(Path(path).read_text(encoding="utf-8"))
