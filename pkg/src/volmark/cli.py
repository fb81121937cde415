"""Command-line interface for the watermarking workflow.

Subcommands: embed, extract, verify, features, attack, evaluate,
gen-watermark. Key material comes from --key or the VOLMARK_KEY
environment variable (flag wins) and is never echoed.

Exit codes: 0 success / watermark detected; 3 watermark not detected;
4 input error; 5 insufficient embedding capacity.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import attacks, cde, features
from .bits import BitVector, read_bits, write_bits
from .errors import InsufficientCapacity, VolmarkError
from .keystream import keystream
from .verify import DEFAULT_ALPHA, psnr, verify
from .volume import pad_to_multiple, read_volume, write_volume

EXIT_OK = 0
EXIT_NOT_DETECTED = 3
EXIT_INPUT_ERROR = 4
EXIT_NO_CAPACITY = 5


def _key_from(args) -> bytes:
    key = args.key if args.key is not None else os.environ.get("VOLMARK_KEY")
    if not key:
        raise VolmarkError("no key given (use --key or VOLMARK_KEY)")
    return key.encode("utf-8")


def _features_for(volume, n, features_path):
    if features_path:
        return features.load_external_features(features_path, n)
    return features.extract_features_baseline(volume, n)


def cmd_embed(args) -> int:
    key = _key_from(args)
    w = read_bits(args.watermark)
    volume = read_volume(args.input, args.component)
    f = _features_for(volume, len(w), args.features)
    c = keystream(key, len(w))
    share = features.make_ownership_share(w, c, f, key=key)
    padded = pad_to_multiple(volume, 4)
    result = cde.embed(padded, share.bits)
    write_volume(result.volume, args.out)
    cde.write_location_map(result.location_map, args.locmap)
    write_bits(share.bits, args.os_out)
    print(f"embedded {len(w)} bits; PSNR {psnr(padded, result.volume):.2f} dB")
    return EXIT_OK


def cmd_extract(args) -> int:
    volume = read_volume(args.input)
    lmap = cde.read_location_map(args.locmap)
    share, restored = cde.extract(volume, lmap)
    write_volume(restored, args.out)
    write_bits(share, args.os_out)
    print(f"extracted {len(share)} bits; restored volume {restored.dims}")
    return EXIT_OK


def cmd_verify(args) -> int:
    key = _key_from(args)
    w = read_bits(args.watermark)
    stored_share = read_bits(args.os)
    volume = read_volume(args.input, args.component)
    f = _features_for(volume, len(w), args.features)
    c = keystream(key, len(w))
    w_zero = features.recover_watermark(stored_share, c, f)
    w_embedded = None
    if args.extracted_os:
        w_embedded = features.recover_watermark(read_bits(args.extracted_os), c, f)
    report = verify(w, w_embedded, w_zero, alpha=args.alpha)
    text = report.to_json()
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK if report.ownership_detected else EXIT_NOT_DETECTED


def cmd_features(args) -> int:
    volume = read_volume(args.input, args.component)
    f = features.extract_features_baseline(volume, args.n)
    write_bits(f.bits, args.out)
    print(f"wrote {args.n} feature bits to {args.out}")
    return EXIT_OK


def cmd_attack(args) -> int:
    volume = read_volume(args.input)
    params = {}
    for item in args.param or []:
        name, _, value = item.partition("=")
        if not _:
            raise VolmarkError(f"--param expects name=value, got {item!r}")
        try:
            params[name] = float(value)
        except ValueError:
            params[name] = value
    spec = attacks.AttackSpec(kind=args.kind, params=params, seed=args.seed)
    attacked = attacks.apply_attack(volume, spec)
    write_volume(attacked, args.out)
    print(f"applied {spec.describe()} seed={args.seed}; dims {attacked.dims}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    n_bits = int(config.get("n", 1024))
    items = []
    for entry in config["items"]:
        items.append(
            attacks.WatermarkedItem(
                volume_id=entry["id"],
                volume=read_volume(entry["volume"]),
                watermark=read_bits(entry["watermark"]),
                key=str(entry["key"]).encode("utf-8"),
                share=read_bits(entry["os"]),
            )
        )
    grid = [attacks.AttackSpec.from_dict(d) for d in config["attacks"]]
    rows = attacks.evaluate_grid(items, grid, n_bits=n_bits)
    attacks.write_rows_csv(rows, args.out)
    failures = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} rows to {args.out} ({failures} failed)")
    return EXIT_OK


def cmd_gen_watermark(args) -> int:
    write_bits(BitVector.random(args.n, args.seed), args.out)
    print(f"wrote {args.n} random bits to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volmark",
        description="Reversible-zero watermarking for 3D volume data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_key(p):
        p.add_argument("--key", help="key string (or set VOLMARK_KEY)")

    p = sub.add_parser("embed", help="register and embed an ownership share")
    p.add_argument("--in", dest="input", required=True)
    add_key(p)
    p.add_argument("--watermark", required=True, help="watermark .vmbits file")
    p.add_argument("--out", required=True, help="watermarked volume path")
    p.add_argument("--locmap", required=True, help="location map output (.vmloc)")
    p.add_argument("--os-out", required=True, help="ownership share output (.vmbits)")
    p.add_argument("--features", help="external feature .vmbits file")
    p.add_argument("--component", type=int, help="component index for 4D sources")
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("extract", help="extract the share and restore the volume")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--locmap", required=True)
    p.add_argument("--out", required=True, help="restored volume path")
    p.add_argument("--os-out", required=True, help="extracted share output")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("verify", help="run integrity and ownership verification")
    p.add_argument("--in", dest="input", required=True, help="suspect or restored volume")
    add_key(p)
    p.add_argument("--watermark", required=True, help="stored watermark .vmbits")
    p.add_argument("--os", required=True, help="pre-stored ownership share .vmbits")
    p.add_argument("--extracted-os", help="share extracted from the suspect data")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--features", help="external feature .vmbits file")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--component", type=int)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("features", help="export baseline features as .vmbits")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--out", required=True)
    p.add_argument("--component", type=int)
    p.set_defaults(fn=cmd_features)

    p = sub.add_parser("attack", help="apply one attack to a volume")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--param", action="append", help="name=value, repeatable")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("evaluate", help="run an attack grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("gen-watermark", help="generate a random N-bit watermark")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_watermark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; fold into the input-error code
        return EXIT_INPUT_ERROR if e.code else EXIT_OK
    try:
        return args.fn(args)
    except InsufficientCapacity as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_CAPACITY
    except (VolmarkError, OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
