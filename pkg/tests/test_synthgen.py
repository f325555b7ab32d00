import hashlib
import json

import numpy as np
import pytest

from oracles import first_last_nonzero_row
from wordbox.datasetio import read_manifest
from wordbox.imagecore import load_gray
from wordbox.profilenorm import NoTextFound, detect_word_band
from wordbox.synthgen import (AssetError, GeneratorConfig, GlyphMask, UnrenderableWord, compose,
                              generate_dataset, generate_item, load_assets, render_word)


def tree_digest(root):
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(root).as_posix().encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def mask(alpha):
    alpha = np.asarray(alpha, dtype=np.float64)
    rows = np.flatnonzero(alpha.max(axis=1) > 0)
    top, bottom = (int(rows[0]), int(rows[-1])) if rows.size else (0, 0)
    return GlyphMask(alpha, top, bottom)


def test_compose_identities():
    bg = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    assert np.array_equal(compose(mask(np.zeros((3, 4))), bg, 0), bg)
    assert np.all(compose(mask(np.ones((3, 4))), bg, 0) == 0)
    assert np.all(compose(mask(np.full((3, 4), 0.5)), np.full((3, 4), 200, np.uint8), 0) == 100)


def test_compose_shape_mismatch():
    with pytest.raises(ValueError):
        compose(mask(np.zeros((3, 4))), np.zeros((4, 3), np.uint8), 0)


def test_compose_bounds(rng):
    alpha = rng.random((10, 10))
    bg = rng.integers(80, 200, (10, 10), dtype=np.uint8)
    out = compose(mask(alpha), bg, 30)
    assert out.min() >= min(30, bg.min()) and out.max() <= max(30, bg.max())


def test_render_bounds_match_mask_scan(font_path):
    m = render_word("x", font_path, 32)
    assert (m.glyph_top, m.glyph_bottom) == first_last_nonzero_row(m.alpha.tolist())
    assert 0 <= m.alpha.min() and m.alpha.max() <= 1
    assert m.alpha[m.glyph_top].max() > 0 and m.alpha[m.glyph_bottom].max() > 0


@pytest.mark.parametrize("word", ["hello", "NOON", "x"])
def test_render_scaling(font_path, word):
    a = render_word(word, font_path, 20)
    b = render_word(word, font_path, 40)
    ha = a.glyph_bottom - a.glyph_top
    hb = b.glyph_bottom - b.glyph_top
    assert abs(hb - 2 * ha) <= 2


def test_render_period_is_small(font_path):
    m = render_word(".", font_path, 40)
    assert m.glyph_bottom - m.glyph_top + 1 < 0.3 * 40


def test_render_margin(font_path):
    m = render_word("NOON", font_path, 30, margin=6)
    assert np.all(m.alpha[:6] == 0) and np.all(m.alpha[-6:] == 0)
    assert np.all(m.alpha[:, :6] == 0) and np.all(m.alpha[:, -6:] == 0)


def test_unrenderable(font_path):
    with pytest.raises(UnrenderableWord):
        render_word("中文", font_path, 20)
    with pytest.raises(UnrenderableWord):
        render_word("", font_path, 20)


def test_generate_zero(gen_config, tmp_path):
    m = generate_dataset(gen_config, 0, tmp_path / "g")
    assert len(m) == 0
    assert (tmp_path / "g" / "manifest.jsonl").read_text() == ""


def test_generate_double_run_identical(gen_config, tmp_path):
    generate_dataset(gen_config, 25, tmp_path / "a")
    generate_dataset(gen_config, 25, tmp_path / "b")
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_generate_jobs_identical(gen_config, tmp_path):
    generate_dataset(gen_config, 16, tmp_path / "a", jobs=1)
    generate_dataset(gen_config, 16, tmp_path / "b", jobs=4)
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_per_item_determinism(gen_config, assets, tmp_path):
    m = generate_dataset(gen_config, 10, tmp_path / "g")
    # item 7 alone equals item 7 of a batch, and its label is its word
    item = generate_item(gen_config, load_assets(gen_config), 7)
    assert np.array_equal(load_gray(m.resolve(m.entries[7])), item.image)
    assert m.entries[7].text == item.word
    small = generate_dataset(gen_config, 8, tmp_path / "h")
    assert small.entries[:8] == m.entries[:8]


def test_manifest_layout(gen_config, tmp_path):
    generate_dataset(gen_config, 3, tmp_path / "g")
    back = read_manifest(tmp_path / "g" / "manifest.jsonl")
    assert [e.path for e in back] == ["images/000000.png", "images/000001.png", "images/000002.png"]
    assert all(e.split == "train" for e in back)


def test_band_detection_sweep(gen_config, assets):
    ok = 0
    for i in range(1000):
        try:
            detect_word_band(generate_item(gen_config, assets, i).image)
            ok += 1
        except NoTextFound:
            pass
    assert ok >= 0.99 * 1000


def test_missing_assets(tmp_path, asset_dir):
    cfg = GeneratorConfig(tmp_path / "nofonts", asset_dir / "backgrounds", asset_dir / "lexicon.txt")
    with pytest.raises(AssetError, match="nofonts"):
        load_assets(cfg)
    (tmp_path / "empty.txt").write_text("\n")
    cfg = GeneratorConfig(asset_dir / "fonts", asset_dir / "backgrounds", tmp_path / "empty.txt")
    with pytest.raises(AssetError):
        load_assets(cfg)


def test_unrenderable_words_redrawn_then_abort(asset_dir, tmp_path):
    lex = tmp_path / "lex.txt"
    lex.write_text("中文\n", encoding="utf-8")
    cfg = GeneratorConfig(asset_dir / "fonts", asset_dir / "backgrounds", lex)
    with pytest.raises(AssetError, match="no renderable"):
        generate_dataset(cfg, 1)


def test_config_json(tmp_path, asset_dir):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"fonts_dir": str(asset_dir / "fonts"), "backgrounds_dir": str(asset_dir / "backgrounds"),
                             "lexicon_path": str(asset_dir / "lexicon.txt"), "seed": 5, "margin": 2}))
    cfg = GeneratorConfig.from_json(p)
    assert cfg.seed == 5 and cfg.margin == 2 and cfg.font_size_range == (18, 48)
    p.write_text(json.dumps({"fonts_dir": "f", "backgrounds_dir": "b", "lexicon_path": "l", "colour": 1}))
    with pytest.raises(ValueError, match="colour"):
        GeneratorConfig.from_json(p)
    with pytest.raises(ValueError):
        GeneratorConfig("f", "b", "l", font_size_range=(30, 20))
