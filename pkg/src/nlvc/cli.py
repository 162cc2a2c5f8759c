"""Command-line surface: encode, decode, verify, stats, info.

Exit codes are a stable scripting contract: 0 success (and lossless for
verify), 1 runtime failure or verify mismatch, 2 usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import codec, stats, transformer_core
from .codec import EncoderConfig, MODEL_NAMES, MODEL_TRANSFORMER
from .errors import CodecError
from .frame_io import read_y4m, write_y4m
from .synthetic import fixture_suite
from .tiling import extract_patches, pad_plane
from .tokenizer import tokenize_i, tokenize_p


def _default_threads() -> int:
    env = os.environ.get("NLVC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_common_encode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=int, default=2, help="group slope (default 2)")
    p.add_argument("--gop", type=int, default=0,
                   help="intra-frame period; 0 = single leading intra frame")
    p.add_argument("--model", choices=sorted(MODEL_NAMES), default="uniform")
    p.add_argument("--weights", help="model weight file (transformer only)")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="patch-level worker pool size (adaptive model paths)")


def _build_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> EncoderConfig:
    model_kind = MODEL_NAMES[args.model]
    weights = None
    if model_kind == MODEL_TRANSFORMER:
        if not args.weights:
            parser.error("--model transformer requires --weights")
        _, weights = transformer_core.read_weights(args.weights)
    elif args.weights:
        parser.error("--weights is only meaningful with --model transformer")
    return EncoderConfig(delta=args.delta, gop_length=args.gop,
                         model_kind=model_kind, weights=weights,
                         threads=args.threads)


def _load_weights_arg(path):
    if path is None:
        return None
    _, weights = transformer_core.read_weights(path)
    return weights


def _cmd_encode(args, parser) -> int:
    config = _build_config(args, parser)
    header, frames = read_y4m(args.input)
    data = codec.encode_video(frames, config, video_header=header)
    with open(args.output, "wb") as f:
        f.write(data)
    report = codec.rate_report(data)
    print(f"{args.input}: {len(frames)} frames -> {len(data)} bytes "
          f"({report.video_rate_percent:.2f}% of raw)")
    if args.report:
        with open(args.report, "w") as f:
            f.write(report.to_csv())
        print(f"per-patch rate report written to {args.report}")
    return 0


def _cmd_decode(args, parser) -> int:
    with open(args.input, "rb") as f:
        data = f.read()
    weights = _load_weights_arg(args.weights)
    header, frames = codec.decode_video(data, weights=weights, threads=args.threads)
    write_y4m(args.output, header, frames)
    print(f"{args.input}: decoded {len(frames)} frames to {args.output}")
    return 0


def _frames_equal(a, b) -> tuple[bool, str]:
    for idx, (fa, fb) in enumerate(zip(a, b)):
        for name, pa, pb in zip("YUV", fa.planes, fb.planes):
            if not np.array_equal(pa.samples, pb.samples):
                bad = np.argwhere(pa.samples != pb.samples)[0]
                return False, f"frame {idx} plane {name} at row {bad[0]} col {bad[1]}"
    return True, ""


def _cmd_verify(args, parser) -> int:
    config = _build_config(args, parser)
    header, frames = read_y4m(args.input)
    data = codec.encode_video(frames, config, video_header=header)
    _, decoded = codec.decode_video(data, weights=config.weights, threads=args.threads)
    ok, where = _frames_equal(frames, decoded)
    raw = header.raw_bits_per_frame * len(frames) // 8
    if ok:
        print(f"LOSSLESS: OK ({len(frames)} frames, {len(data)} bytes, "
              f"{len(data) / raw * 100:.2f}% of raw)")
        return 0
    print(f"MISMATCH at {where}")
    return 1


def _cmd_stats(args, parser) -> int:
    header, frames = read_y4m(args.input)
    if not frames:
        print("empty input", file=sys.stderr)
        return 1
    intra_grids = []
    temporal_grids = []
    for idx, frame in enumerate(frames):
        for plane in frame.planes:
            padded, layout = pad_plane(plane)
            intra_grids.extend(tokenize_i(p) for p in extract_patches(padded, layout))
        if idx > 0:
            for cur, prev in zip(frame.planes, frames[idx - 1].planes):
                cur_p, layout = pad_plane(cur)
                prev_p, _ = pad_plane(prev)
                temporal_grids.extend(
                    tokenize_p(c, r) for c, r in
                    zip(extract_patches(cur_p, layout), extract_patches(prev_p, layout)))
    estimates = [stats.order0_entropy(intra_grids, source=args.input)]
    if temporal_grids:
        estimates.append(stats.order0_entropy(temporal_grids, source=args.input))
    out = stats.entropy_csv(estimates)
    sys.stdout.write(out)

    data = codec.encode_video(frames, EncoderConfig(model_kind=MODEL_NAMES[args.model],
                                                    delta=args.delta),
                              video_header=header)
    sys.stdout.write(stats.rate_series_csv(codec.rate_report(data)))
    return 0


def _cmd_info(args, parser) -> int:
    with open(args.input, "rb") as f:
        data = f.read()
    header, _ = codec.parse_header(data)
    model = {v: k for k, v in MODEL_NAMES.items()}[header.model_kind]
    print(f"container version: {codec.CONTAINER_VERSION}")
    print(f"dimensions: {header.width}x{header.height} {header.chroma}")
    print(f"frames: {header.frame_count}")
    print(f"delta: {header.delta} ({header.group_count} groups)")
    print(f"gop_length: {header.gop_length}")
    print(f"model: {model}")
    if header.model_kind == MODEL_TRANSFORMER:
        print(f"model_hash: {header.model_hash:#018x}")
    if header.stream_tags:
        print(f"stream tags: {header.stream_tags}")
    return 0


def _cmd_make_fixtures(args, parser) -> int:
    os.makedirs(args.outdir, exist_ok=True)
    for name, (header, frames) in fixture_suite().items():
        path = os.path.join(args.outdir, f"{name}.y4m")
        write_y4m(path, header, frames)
        print(f"wrote {path} ({len(frames)} frames)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlvc",
                                     description="Lossless video codec")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="compress a Y4M file")
    p.add_argument("input")
    p.add_argument("output")
    _add_common_encode_flags(p)
    p.add_argument("--report", help="write per-patch rate CSV here")
    p.set_defaults(fn=_cmd_encode)

    p = sub.add_parser("decode", help="decompress to Y4M")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--weights", help="weight file matching the stream's model hash")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(fn=_cmd_decode)

    p = sub.add_parser("verify", help="encode + decode in-process, compare exactly")
    p.add_argument("input")
    _add_common_encode_flags(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("stats", help="order-0 token entropies and rate series")
    p.add_argument("input")
    p.add_argument("--delta", type=int, default=2)
    p.add_argument("--model", choices=sorted(set(MODEL_NAMES) - {"transformer"}),
                   default="adaptive")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("info", help="print container header fields")
    p.add_argument("input")
    p.set_defaults(fn=_cmd_info)

    p = sub.add_parser("make-fixtures", help="write the synthetic fixture suite")
    p.add_argument("outdir")
    p.set_defaults(fn=_cmd_make_fixtures)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args, parser)
    except SystemExit as exc:
        # argparse .error() inside command handlers
        return int(exc.code or 0)
    except CodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
