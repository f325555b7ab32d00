"""Command-line entry point: ``wordbox <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error (bad manifest, config,
policy or image, missing files), 3 partial failure (some items skipped,
reports written).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PARTIAL = 0, 1, 2, 3

EXIT_CODES_HELP = """exit codes:
  0  success
  1  usage error (bad or unknown flags, invalid values)
  2  data error (bad manifest/config/policy/image, missing files)
  3  partial failure (some items skipped; reports written)
"""

log = logging.getLogger("wordbox")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(v):
    n = int(v)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _nonneg(v):
    n = int(v)
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    p = _Parser(prog="wordbox", description="Word-box OCR data toolkit.",
                epilog=EXIT_CODES_HELP, formatter_class=fmt)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, help=help_, description=help_, epilog=EXIT_CODES_HELP,
                              formatter_class=fmt)

    g = add("generate", "Generate synthetic word boxes and a manifest.")
    g.add_argument("--config", required=True, help="generator config JSON")
    g.add_argument("--count", required=True, type=_nonneg, help="number of boxes")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=int, help="override the config seed")
    g.add_argument("--jobs", type=_positive, default=1, help="worker processes (output is identical for any value)")

    n = add("normalize", "Profile-normalize every image in a manifest.")
    n.add_argument("--manifest", required=True)
    n.add_argument("--profile-height", type=_positive, default=20, help="target word band height (default 20)")
    n.add_argument("--box-height", type=_positive, default=32, help="target box height (default 32)")
    n.add_argument("--min-contrast", type=float, default=8.0, help="minimum row-cluster contrast (default 8)")
    n.add_argument("--out", required=True, help="output directory")
    n.add_argument("--jobs", type=_positive, default=1)

    a = add("augment", "Apply an augmentation policy to every image in a manifest.")
    a.add_argument("--manifest", required=True)
    a.add_argument("--policy", required=True, help="policy JSON")
    a.add_argument("--out", required=True)
    a.add_argument("--seed", type=int, help="override the policy seed")
    a.add_argument("--jobs", type=_positive, default=1)

    s = add("subset", "Sample a nested, seeded subset of the train split.")
    s.add_argument("--manifest", required=True)
    s.add_argument("--size", required=True, type=_nonneg)
    s.add_argument("--seed", required=True, type=int)
    s.add_argument("--out", required=True, help="output directory (manifest.jsonl is written there)")

    c = add("score", "Score predictions against a manifest.")
    c.add_argument("--manifest", required=True)
    c.add_argument("--predictions", required=True, help="JSON lines {\"path\", \"text\"}")
    c.add_argument("--case-fold", action=argparse.BooleanOptionalAction, default=True,
                   help="compare lower-cased text (default on)")
    c.add_argument("--split", choices=("train", "val", "test"), help="score one split (default all)")
    c.add_argument("--csv-out", help="write curve CSV here")
    c.add_argument("--train-size", type=_nonneg, default=0, help="curve x value for this score")
    c.add_argument("--variant", default="default", help="curve series name")
    c.add_argument("--append", action="store_true", help="merge into an existing --csv-out file")
    c.add_argument("--figure", help="render the curve from --csv-out to this image file")

    i = add("inspect", "Dump a box's row profile, cluster labels and detected band as CSV.")
    i.add_argument("--image", required=True)
    i.add_argument("--min-contrast", type=float, default=8.0)
    i.add_argument("--figure", help="also render the profile plot to this image file")
    return p


def cmd_generate(args) -> int:
    from .synthgen import AssetError, GeneratorConfig, generate_dataset
    try:
        config = GeneratorConfig.from_json(args.config)
    except FileNotFoundError:
        raise DataError(f"config not found: {args.config}") from None
    except (ValueError, TypeError) as exc:
        raise DataError(f"bad config {args.config}: {exc}") from None
    if args.seed is not None:
        config.seed = args.seed
    try:
        m = generate_dataset(config, args.count, args.out, jobs=args.jobs)
    except AssetError as exc:
        raise DataError(str(exc)) from None
    print(f"generated {len(m)} boxes into {args.out}", file=sys.stderr)
    return EXIT_OK


def _manifest(path):
    from .datasetio import ManifestError, read_manifest
    try:
        return read_manifest(path)
    except FileNotFoundError:
        raise DataError(f"manifest not found: {path}") from None
    except (ManifestError, UnicodeDecodeError) as exc:
        raise DataError(str(exc)) from None


def cmd_normalize(args) -> int:
    from .profilenorm import REPORT_NAME, NormalizationParams, normalize_dataset, read_report
    if args.profile_height > args.box_height:
        raise UsageError(f"--profile-height {args.profile_height} exceeds --box-height {args.box_height}")
    manifest = _manifest(args.manifest)
    params = NormalizationParams(args.profile_height, args.box_height, args.min_contrast)
    try:
        normalize_dataset(manifest, params, args.out, jobs=args.jobs)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from None
    _, summary = read_report(Path(args.out) / REPORT_NAME)
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_PARTIAL if summary["n_failed"] else EXIT_OK


def cmd_augment(args) -> int:
    from .augment import AugmentationPolicy, PolicyError, augment_dataset, load_policy
    try:
        policy = load_policy(args.policy)
    except FileNotFoundError:
        raise DataError(f"policy not found: {args.policy}") from None
    except PolicyError as exc:
        raise DataError(str(exc)) from None
    if args.seed is not None:
        policy = AugmentationPolicy(policy.specs, args.seed)
    manifest = _manifest(args.manifest)
    try:
        _, failures = augment_dataset(manifest, policy, args.out, jobs=args.jobs)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from None
    for path, err in failures:
        print(f"skipped {path}: {err}", file=sys.stderr)
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_subset(args) -> int:
    from .datasetio import MANIFEST_NAME, sample_subset, write_manifest
    manifest = _manifest(args.manifest)
    try:
        sub = sample_subset(manifest, args.size, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_manifest(sub, Path(args.out) / MANIFEST_NAME)
    return EXIT_OK


def cmd_score(args) -> int:
    from .evalharness import emit_curve, read_curve, read_predictions, score
    manifest = _manifest(args.manifest)
    try:
        preds = read_predictions(args.predictions)
    except FileNotFoundError:
        raise DataError(f"predictions not found: {args.predictions}") from None
    except (ValueError, UnicodeDecodeError) as exc:
        raise DataError(str(exc)) from None
    rep = score(preds, manifest, args.split, args.case_fold)
    cer = "NA" if rep.char_error_rate is None else f"{rep.char_error_rate:.6f}"
    print(f"word_accuracy {rep.word_accuracy:.6f}")
    print(f"char_error_rate {cer}")
    print(f"n_scored {rep.n_scored}")
    print(f"n_missing {rep.n_missing}")
    if args.figure and not args.csv_out:
        raise UsageError("--figure needs --csv-out")
    if args.csv_out:
        rows = []
        out = Path(args.csv_out)
        if args.append and out.exists():
            try:
                rows = [r for r in read_curve(out) if (r[0], r[2]) != (args.train_size, args.variant)]
            except ValueError as exc:
                raise DataError(f"{out}: {exc}") from None
        rows.append((args.train_size, rep, args.variant))
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(emit_curve(rows))
        if args.figure:
            from .plotting import plot_curve
            plot_curve(read_curve(out), args.figure)
    return EXIT_OK


def cmd_inspect(args) -> int:
    from .imagecore import load_gray
    from .profilenorm import analyze_rows
    try:
        img = load_gray(args.image)
    except FileNotFoundError:
        raise DataError(f"image not found: {args.image}") from None
    except OSError as exc:
        raise DataError(f"cannot decode {args.image}: {exc}") from None
    found = analyze_rows(img, args.min_contrast)
    band = found.band
    out = sys.stdout
    out.write("row,mean,cluster,text,in_band\n")
    for r, mean in enumerate(found.profile):
        cluster = "" if found.labels is None else int(found.labels[r])
        text = "" if found.text_label is None else int(found.labels[r] == found.text_label)
        in_band = int(band is not None and band.top_row <= r <= band.bottom_row)
        out.write(f"{r},{mean:.6f},{cluster},{text},{in_band}\n")
    if band is None:
        print(f"no text found: {found.reason}", file=sys.stderr)
    else:
        print(f"band top_row={band.top_row} bottom_row={band.bottom_row} "
              f"profile_height={band.profile_height}", file=sys.stderr)
    if args.figure:
        from .plotting import plot_band_detection
        plot_band_detection(img, found, args.figure, title=Path(args.image).name)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate, "normalize": cmd_normalize, "augment": cmd_augment,
    "subset": cmd_subset, "score": cmd_score, "inspect": cmd_inspect,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"wordbox {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"wordbox {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
