import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wordbox.datasetio import (Entry, Manifest, ManifestError, manifest_from_directory,
                               output_path, parse_manifest, read_manifest, sample_subset,
                               write_manifest)


def make(n, split="train", prefix="img"):
    return Manifest([Entry(f"{prefix}/{i:06d}.png", f"w{i}", split) for i in range(n)])


def test_empty_file(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text("")
    m = read_manifest(p)
    assert len(m) == 0 and m.split("train") == []


def test_blank_lines_ignored():
    m = parse_manifest(['{"path": "a.png", "text": "x"}\n', "\n", '{"path": "b.png", "text": "y", "split": "val"}\n'])
    assert [e.split for e in m] == ["train", "val"]


def test_non_ascii_roundtrip(tmp_path):
    m = Manifest([Entry("a.png", "naïve"), Entry("b.png", "日本語", "test"), Entry("c.png", "", "val"),
                  Entry("d.png", 'quote " and \\ tab\t', "train")])
    p = tmp_path / "m.jsonl"
    write_manifest(m, p)
    assert "naïve" in p.read_text(encoding="utf-8")
    assert read_manifest(p) == m


def test_large_rewrite_byte_identical(tmp_path):
    m = Manifest([Entry(f"images/{i:06d}.png", f"wörd{i % 97}", ("train", "val", "test")[i % 3])
                  for i in range(10_000)])
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_manifest(m, a)
    write_manifest(read_manifest(a), b)
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("line,msg", [
    ("{not json", "invalid JSON"),
    ('["a.png", "x"]', "expected a JSON object"),
    ('{"path": "a.png"}', "missing field"),
    ('{"path": "a.png", "text": "x", "split": "dev"}', "split"),
    ('{"path": "a.png", "text": 3}', "must be a string"),
])
def test_malformed_line_reports_lineno(tmp_path, line, msg):
    p = tmp_path / "m.jsonl"
    p.write_text('{"path": "ok.png", "text": "x"}\n\n' + line + "\n")
    with pytest.raises(ManifestError, match=rf"m\.jsonl:3: .*{msg}"):
        read_manifest(p)


def test_duplicate_path_rejected():
    with pytest.raises(ManifestError, match=r":2: duplicate path 'a.png' \(first at line 1\)"):
        parse_manifest(['{"path": "a.png", "text": "x"}', '{"path": "a.png", "text": "y"}'])
    with pytest.raises(ManifestError):
        Manifest([Entry("a.png", "x"), Entry("a.png", "y", "val")])


def test_subset_full_and_empty():
    m = make(50)
    assert sample_subset(m, 50, 3) == m
    assert len(sample_subset(m, 0, 3)) == 0


def test_subset_too_large_message():
    with pytest.raises(ValueError, match="requested 11 train entries but the manifest has only 10"):
        sample_subset(make(10), 11, 0)


def test_subset_keeps_other_splits_and_order():
    m = Manifest(make(30).entries + make(5, "val", "v").entries + make(5, "test", "t").entries)
    sub = sample_subset(m, 7, 99)
    assert len(sub.split("train")) == 7
    assert sub.split("val") == m.split("val") and sub.split("test") == m.split("test")
    pos = [m.entries.index(e) for e in sub]
    assert pos == sorted(pos)


@given(st.integers(0, 200), st.integers(0, 2**32), st.data())
@settings(max_examples=60, deadline=None)
def test_subsets_nested(n, seed, data):
    m = make(n)
    a = data.draw(st.integers(0, n))
    b = data.draw(st.integers(a, n))
    small, big = sample_subset(m, a, seed), sample_subset(m, b, seed)
    assert len(small) == a and len(big) == b
    assert set(small.entries) <= set(big.entries)


def test_subset_seed_matters():
    m = make(100)
    assert sample_subset(m, 10, 1) != sample_subset(m, 10, 2)
    assert sample_subset(m, 10, 1) == sample_subset(m, 10, 1)


def test_write_rebases_paths(tmp_path):
    src = tmp_path / "data"
    (src / "images").mkdir(parents=True)
    (src / "images" / "a.png").write_bytes(b"x")
    m = Manifest([Entry("images/a.png", "a")], root=src)
    dest = tmp_path / "subsets" / "s1" / "manifest.jsonl"
    write_manifest(m, dest)
    back = read_manifest(dest)
    assert back.entries[0].path == "../../data/images/a.png"
    assert back.resolve(back.entries[0]).resolve() == (src / "images" / "a.png").resolve()


def test_write_same_root_keeps_paths(tmp_path):
    m = Manifest([Entry("images/a.png", "a")], root=tmp_path)
    write_manifest(m, tmp_path / "manifest.jsonl")
    assert json.loads((tmp_path / "manifest.jsonl").read_text())["path"] == "images/a.png"


def test_manifest_from_directory(tmp_path):
    labels = tmp_path / "labels.tsv"
    labels.write_text("a.jpg\thello\nb.jpg\tnew\tyork\n\n", encoding="utf-8")
    m = manifest_from_directory(tmp_path, labels, "test")
    assert [(e.path, e.text, e.split) for e in m] == [("a.jpg", "hello", "test"), ("b.jpg", "new\tyork", "test")]
    assert m.resolve(m.entries[0]) == tmp_path / "a.jpg"
    labels.write_text("nolabel\n")
    with pytest.raises(ManifestError, match=":1:"):
        manifest_from_directory(tmp_path, labels)


@pytest.mark.parametrize("src,dst", [
    ("images/000001.png", "images/000001.png"),
    ("a/b.jpg", "a/b.png"),
    ("../other/x.png", "_up/other/x.png"),
    ("/abs/y.png", "abs/y.png"),
    ("./z.bmp", "z.png"),
])
def test_output_path(src, dst):
    assert output_path(src) == dst
