"""Line-oriented dataset manifests and seeded, nested subset sampling.

A manifest file is UTF-8 with one JSON object per line::

    {"path": "images/000000.png", "text": "harbour", "split": "train"}

``path`` is relative to the directory holding the manifest file.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Iterable, Iterator

import numpy as np

SPLITS = ("train", "val", "test")
MANIFEST_NAME = "manifest.jsonl"


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class Entry:
    path: str
    text: str
    split: str = "train"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ManifestError(f"split {self.split!r} not one of {SPLITS}")
        if not isinstance(self.path, str) or not self.path:
            raise ManifestError("entry path must be a non-empty string")
        if not isinstance(self.text, str):
            raise ManifestError(f"label for {self.path!r} must be a string")


@dataclass
class Manifest:
    """Ordered entries plus the directory their paths are relative to.

    Equality looks at entries only, so a manifest read back from disk equals
    the one that was written regardless of where it lives.
    """

    entries: list[Entry] = field(default_factory=list)
    root: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        self.entries = list(self.entries)
        seen = set()
        for e in self.entries:
            if e.path in seen:
                raise ManifestError(f"duplicate path {e.path!r}")
            seen.add(e.path)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Entry]:
        return iter(self.entries)

    def split(self, tag: str | None) -> list[Entry]:
        if tag is None:
            return list(self.entries)
        return [e for e in self.entries if e.split == tag]

    def resolve(self, entry: Entry) -> Path:
        base = self.root if self.root is not None else Path(".")
        return base / entry.path


def _parse_line(line: str, lineno: int, source) -> Entry:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{source}:{lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ManifestError(f"{source}:{lineno}: expected a JSON object")
    missing = [k for k in ("path", "text") if k not in obj]
    if missing:
        raise ManifestError(f"{source}:{lineno}: missing field(s) {', '.join(missing)}")
    try:
        return Entry(obj["path"], obj["text"], obj.get("split", "train"))
    except ManifestError as exc:
        raise ManifestError(f"{source}:{lineno}: {exc}") from None


def parse_manifest(lines: Iterable[str], source="<manifest>", root=None) -> Manifest:
    entries = []
    seen = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        entry = _parse_line(line, lineno, source)
        if entry.path in seen:
            raise ManifestError(
                f"{source}:{lineno}: duplicate path {entry.path!r} (first at line {seen[entry.path]})")
        seen[entry.path] = lineno
        entries.append(entry)
    return Manifest(entries, root=Path(root) if root is not None else None)


def read_manifest(path) -> Manifest:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh, source=path, root=path.parent)


def format_entry(entry: Entry) -> str:
    return json.dumps({"path": entry.path, "text": entry.text, "split": entry.split},
                      ensure_ascii=False)


def _rebase(entry_path: str, old_root: Path, new_root: Path) -> str:
    target = (old_root / entry_path).resolve()
    return PurePosixPath(Path(os.path.relpath(target, new_root.resolve()))).as_posix()


def write_manifest(manifest: Manifest, path) -> None:
    """Write ``manifest`` to ``path``.

    If the manifest knows its root and that differs from the destination
    directory, paths are rewritten so they still point at the same files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new_root = path.parent
    rebase = manifest.root is not None and Path(manifest.root).resolve() != new_root.resolve()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in manifest.entries:
            if rebase:
                e = Entry(_rebase(e.path, Path(manifest.root), new_root), e.text, e.split)
            fh.write(format_entry(e) + "\n")


def sample_subset(manifest: Manifest, size: int, seed: int) -> Manifest:
    """Keep ``size`` train entries chosen uniformly without replacement.

    The chosen set is the first ``size`` positions of one seeded permutation
    of the train entries, so for a fixed seed every smaller subset is
    contained in every larger one. Selected entries keep their original
    relative order; val and test entries pass through untouched.
    """
    train_idx = [i for i, e in enumerate(manifest.entries) if e.split == "train"]
    if size < 0:
        raise ValueError(f"subset size must be non-negative, got {size}")
    if size > len(train_idx):
        raise ValueError(
            f"requested {size} train entries but the manifest has only {len(train_idx)}")
    order = np.random.default_rng(seed).permutation(len(train_idx))
    keep = {train_idx[j] for j in order[:size]}
    entries = [e for i, e in enumerate(manifest.entries) if e.split != "train" or i in keep]
    return Manifest(entries, root=manifest.root)


def output_path(entry_path: str, suffix: str = ".png") -> str:
    """Relative output path mirroring ``entry_path``, confined below the output root."""
    raw = PurePosixPath(entry_path.replace("\\", "/")).parts
    parts = ["_up" if part == ".." else part for part in raw if part not in ("/", ".")]
    return PurePosixPath(*parts).with_suffix(suffix).as_posix()


def manifest_from_directory(images_dir, labels_file, split: str = "train") -> Manifest:
    """Adapter for datasets shipped as a folder of images plus a labels file.

    Each labels line is ``<file name><TAB><label>``; the label may itself
    contain further tabs. The returned manifest is rooted at ``images_dir``.
    """
    images_dir = Path(images_dir)
    entries = []
    with open(labels_file, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            name, sep, text = line.partition("\t")
            if not sep:
                raise ManifestError(f"{labels_file}:{lineno}: expected '<file>\\t<label>'")
            entries.append(Entry(name, text, split))
    return Manifest(entries, root=images_dir)
