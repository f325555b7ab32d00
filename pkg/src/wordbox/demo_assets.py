"""Build a small self-contained asset set for trying the generator.

Fonts are copied from matplotlib's bundled TrueType collection, the
backgrounds are procedurally drawn paper-like textures, and the lexicon is
the word list shipped with the package. Run ``python -m wordbox.demo_assets
DIR`` to materialize one, then point a generator config at it.
"""
from __future__ import annotations

import json
import shutil
import sys
from importlib import resources
from pathlib import Path

import matplotlib
import numpy as np
from scipy import ndimage

from .imagecore import save_gray, to_uint8

DEMO_FONTS = (
    "DejaVuSans.ttf", "DejaVuSans-Bold.ttf", "DejaVuSans-Oblique.ttf",
    "DejaVuSerif.ttf", "DejaVuSerif-Bold.ttf", "DejaVuSerif-Italic.ttf",
    "DejaVuSansMono.ttf", "STIXGeneral.ttf", "STIXGeneralBol.ttf", "STIXGeneralItalic.ttf",
)


def font_source_dir() -> Path:
    return Path(matplotlib.get_data_path()) / "fonts" / "ttf"


def paper_texture(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    """Light, smoothly shaded paper with fine grain and a few soft blotches."""
    base = rng.uniform(175, 235)
    yy, xx = np.mgrid[0:height, 0:width] / max(height, width)
    gx, gy = rng.uniform(-25, 25, size=2)
    img = base + gx * (xx - 0.5) + gy * (yy - 0.5)
    blotch = ndimage.gaussian_filter(rng.normal(0, 1, (height, width)), sigma=rng.uniform(8, 20))
    blotch /= max(np.abs(blotch).max(), 1e-9)
    img += rng.uniform(3, 12) * blotch
    img += rng.normal(0, rng.uniform(1, 4), (height, width))
    return to_uint8(img)


def write_demo_assets(out_dir, n_backgrounds: int = 8, seed: int = 0,
                      size: tuple[int, int] = (192, 512)) -> Path:
    """Populate ``out_dir`` with fonts/, backgrounds/, lexicon.txt and config.json."""
    out = Path(out_dir)
    fonts = out / "fonts"
    fonts.mkdir(parents=True, exist_ok=True)
    src = font_source_dir()
    for name in DEMO_FONTS:
        if (src / name).is_file():
            shutil.copyfile(src / name, fonts / name)
    rng = np.random.default_rng(seed)
    for i in range(n_backgrounds):
        save_gray(paper_texture(rng, *size), out / "backgrounds" / f"bg{i:03d}.png")
    lexicon = resources.files("wordbox").joinpath("data/lexicon.txt").read_text(encoding="utf-8")
    (out / "lexicon.txt").write_text(lexicon, encoding="utf-8")
    config = {"fonts_dir": "fonts", "backgrounds_dir": "backgrounds",
              "lexicon_path": "lexicon.txt", "seed": 42}
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return out / "config.json"


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit("usage: python -m wordbox.demo_assets OUT_DIR")
    print(write_demo_assets(sys.argv[1]))
