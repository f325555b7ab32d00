import json

import numpy as np
import pytest

from wordbox.datasetio import Entry, Manifest, read_manifest, write_manifest
from wordbox.imagecore import save_gray
from wordbox.profilenorm import (REPORT_NAME, NoTextFound, NormalizationParams, WordBand,
                                 detect_word_band, normalize_dataset, normalize_profile, read_report)
from wordbox.synthgen import compose, generate_dataset, generate_item, render_word


def banded(height, width, top, bottom, paper=255, ink=0):
    img = np.full((height, width), paper, np.uint8)
    img[top:bottom + 1] = ink
    return img


def test_constructed_band():
    band = detect_word_band(banded(40, 30, 10, 20))
    assert band == WordBand(10, 20) and band.profile_height == 11


def test_light_text_on_dark_paper():
    assert detect_word_band(banded(40, 30, 5, 12, paper=20, ink=230)) == WordBand(5, 12)


def test_constant_image_has_no_text():
    with pytest.raises(NoTextFound):
        detect_word_band(np.full((20, 20), 128, np.uint8))


def test_low_contrast_rejected():
    with pytest.raises(NoTextFound):
        detect_word_band(banded(20, 20, 5, 10, paper=200, ink=195))


def test_band_matches_rasterizer_extent(font_path):
    # x-height-only words (and all-caps) put every ink row inside the band
    for word, size in [("summer", 30), ("sum", 40), ("rose", 22), ("NOON", 26), ("x", 36)]:
        mask = render_word(word, font_path, size)
        img = compose(mask, np.full(mask.alpha.shape, 235, np.uint8), 10)
        band = detect_word_band(img)
        assert abs(band.top_row - mask.glyph_top) <= 1, word
        assert abs(band.bottom_row - mask.glyph_bottom) <= 1, word


def test_identity_case():
    img = banded(32, 50, 6, 25, paper=220, ink=30)
    out, rep = normalize_profile(img)
    assert rep.scale_factor == 1.0
    assert out.shape == img.shape
    assert np.abs(out.astype(int) - img).max() <= 1


def test_scale_factor_ratio():
    _, rep = normalize_profile(banded(64, 80, 12, 51))
    assert rep.detected_band.profile_height == 40
    assert rep.scale_factor == 0.5


def test_geometry_and_report_invariants(gen_config, assets):
    p = NormalizationParams()
    for i in range(60):
        img = generate_item(gen_config, assets, i).image
        out, rep = normalize_profile(img, p)
        assert out.shape == (32, max(1, int(np.floor(img.shape[1] * rep.scale_factor + 0.5))))
        assert not (rep.pad_top + rep.pad_bottom > 0 and rep.crop_top + rep.crop_bottom > 0)
        assert np.all(out[:rep.pad_top] == rep.fill_intensity)


def test_redetection_self_consistency(gen_config, assets):
    for i in range(100):
        out, _ = normalize_profile(generate_item(gen_config, assets, i).image)
        band = detect_word_band(out)
        assert abs(band.profile_height - 20) <= 1
        assert abs(band.center - 15.5) <= 1


def test_custom_params(gen_config, assets):
    p = NormalizationParams(target_profile_height=12, target_box_height=24)
    out, _ = normalize_profile(generate_item(gen_config, assets, 3).image, p)
    assert out.shape[0] == 24
    assert abs(detect_word_band(out).profile_height - 12) <= 1


def test_params_validation():
    with pytest.raises(ValueError):
        NormalizationParams(target_profile_height=40, target_box_height=32)
    with pytest.raises(ValueError):
        NormalizationParams(target_profile_height=0)


def test_fallback_resize():
    blank = np.full((20, 40), 90, np.uint8)
    with pytest.raises(NoTextFound):
        normalize_profile(blank)
    out, rep = normalize_profile(blank, fallback=True)
    assert rep.fallback and rep.detected_band is None
    assert out.shape == (32, 64)


def test_deterministic(gen_config, assets):
    img = generate_item(gen_config, assets, 7).image
    a, ra = normalize_profile(img)
    b, rb = normalize_profile(img.copy())
    assert np.array_equal(a, b) and ra == rb


def test_dataset_empty(tmp_path):
    out = normalize_dataset(Manifest([]), NormalizationParams(), tmp_path / "n")
    assert len(out) == 0
    rows, summary = read_report(tmp_path / "n" / REPORT_NAME)
    assert rows == [] and summary["n_images"] == 0


def test_dataset_three(gen_config, tmp_path):
    src = generate_dataset(gen_config, 3, tmp_path / "gen")
    out = normalize_dataset(src, NormalizationParams(), tmp_path / "n")
    back = read_manifest(tmp_path / "n" / "manifest.jsonl")
    assert [e.text for e in back] == [e.text for e in src]
    from wordbox.imagecore import load_gray
    for e in back:
        assert load_gray(back.resolve(e)).shape[0] == 32
    assert back == out


def test_dataset_jobs_independent(gen_config, tmp_path):
    src = generate_dataset(gen_config, 12, tmp_path / "gen")
    normalize_dataset(src, NormalizationParams(), tmp_path / "a", jobs=1)
    normalize_dataset(src, NormalizationParams(), tmp_path / "b", jobs=3)
    for name in ["manifest.jsonl", REPORT_NAME] + [e.path for e in src]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_dataset_partial_failure_and_fallback(tmp_path):
    root = tmp_path / "src"
    save_gray(banded(40, 30, 10, 20), root / "ok.png")
    save_gray(np.full((10, 10), 50, np.uint8), root / "blank.png")
    (root / "bad.png").write_bytes(b"not a png")
    m = Manifest([Entry("ok.png", "a"), Entry("bad.png", "b", "val"), Entry("blank.png", "c", "test")], root=root)
    out = normalize_dataset(m, NormalizationParams(), tmp_path / "n")
    assert [(e.path, e.text, e.split) for e in out] == [("ok.png", "a", "train"), ("blank.png", "c", "test")]
    rows, summary = read_report(tmp_path / "n" / REPORT_NAME)
    assert summary["n_failed"] == 1 and summary["n_fallback"] == 1
    assert [r["path"] for r in rows] == ["ok.png", "bad.png", "blank.png"]
    assert "error" in rows[1]
    assert rows[0]["detected_band"] == {"top_row": 10, "bottom_row": 20, "profile_height": 11}


def test_dataset_missing_file_aborts(tmp_path):
    m = Manifest([Entry("nope.png", "x")], root=tmp_path)
    with pytest.raises(FileNotFoundError):
        normalize_dataset(m, NormalizationParams(), tmp_path / "n")
    assert not (tmp_path / "n").exists()


def test_report_lines_are_json(gen_config, tmp_path):
    src = generate_dataset(gen_config, 2, tmp_path / "gen")
    normalize_dataset(src, NormalizationParams(), tmp_path / "n")
    for line in (tmp_path / "n" / REPORT_NAME).read_text().splitlines():
        json.loads(line)
    write_manifest(src, tmp_path / "copy.jsonl")
