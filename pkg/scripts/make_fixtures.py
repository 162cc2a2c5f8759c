#!/usr/bin/env python3
"""Write the synthetic fixture suite as .y4m files for CLI experiments."""

import argparse
import os

from nlvc.frame_io import write_y4m
from nlvc.synthetic import fixture_suite


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", nargs="?", default="fixtures")
    args = parser.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    for name, (header, frames) in fixture_suite().items():
        path = os.path.join(args.outdir, f"{name}.y4m")
        write_y4m(path, header, frames)
        print(f"wrote {path} ({header.width}x{header.height}, {len(frames)} frames)")


if __name__ == "__main__":
    main()
