"""Command line entry point: ``plots render <run-dir> [--out DIR] [--zoom]``."""

import argparse
import sys
from pathlib import Path

from .artifacts import RunArtifacts, ArtifactError
from .render import render_snapshots, render_diagnostics, DEFAULT_SIZE


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plots", description="Render muskat run outputs to PNG files")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one run directory")
    p_render.add_argument("run_dir", help="directory holding a run's outputs")
    p_render.add_argument("--out", default=None,
                          help="output directory (default: <run-dir>/plots)")
    p_render.add_argument("--zoom", action="store_true",
                          help="inset zoom of the contact zone on the "
                               "final frame")
    p_render.add_argument("--width", type=int, default=DEFAULT_SIZE[0])
    p_render.add_argument("--height", type=int, default=DEFAULT_SIZE[1])
    args = parser.parse_args(argv)
    outdir = Path(args.out) if args.out else Path(args.run_dir) / "plots"
    size = (args.width, args.height)
    try:
        artifacts = RunArtifacts(args.run_dir)
        written = render_snapshots(artifacts, outdir, zoom=args.zoom,
                                   size=size)
        if artifacts.diagnostics is not None:
            written += render_diagnostics(artifacts, outdir, size=size)
    except ArtifactError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
