import sys
import logging
import argparse
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from ..configuration.pipeline_config import apply_overrides, load_config
from ..exceptions import (ConfigError, FrameIOError, MotionVecError, ParseError,
                          ScriptError)
from ..imaging.raster import FRAME_PATTERN, read_frames, write_frames, write_png
from ..program.io import parse_program, write_program
from ..program.refactor import build_program
from ..program.render import reconstruction_error, reconstruction_heatmap, render_video
from ..segmentation.video import read_label_overrides
from ..synth.profiles import PROFILES
from ..synth.scene import generate_scene, write_scene
from ..synth.script import load_script
from ..tracking.propagation import write_decision_log
from ..tracking.tracker import track_video
from ..xform.opsfile import apply_ops, read_ops

__all__ = ["EXIT_OK", "EXIT_USAGE", "EXIT_PARSE", "EXIT_PIPELINE", "build_parser", "main"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_PIPELINE = 4


def _exit_code_for(error: Exception) -> int:
    """Map an exception to the exit code of the failure class it belongs to.

    Args:
        error: The exception that stopped the command.

    Returns:
        EXIT_PARSE for unreadable sidecars, ops files and scene scripts,
        EXIT_USAGE for configuration and path problems, EXIT_PIPELINE for
        everything else.
    """
    if isinstance(error, (ParseError, ScriptError)):
        return EXIT_PARSE
    if isinstance(error, (ConfigError, FrameIOError)):
        return EXIT_USAGE
    return EXIT_PIPELINE


def _print_error_and_exit(error: Exception) -> None:
    """Print a formatted error to stderr and exit with its code.

    Note:
        This function always exits the program.
    """
    if isinstance(error, (MotionVecError, ValueError, OSError)):
        print(f'\n✗ Error: {error}', file=sys.stderr)
    else:
        print(f'\n✗ Unexpected error: {error}', file=sys.stderr)
    logger.debug("Command failed", exc_info=error)
    sys.exit(_exit_code_for(error))


def _configure_logging(verbose: int, quiet: bool) -> None:
    """Set the root logger level from -v/-q (WARNING by default)."""
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format='%(levelname)s %(name)s: %(message)s')


def _require_dir(path: str, what: str) -> Path:
    """Resolve a directory argument, exiting with a usage error if it is missing."""
    directory = Path(path)
    if not directory.is_dir():
        print(f'\n✗ Error: {what} does not exist: {directory}', file=sys.stderr)
        sys.exit(EXIT_USAGE)
    return directory


def _require_file(path: str, what: str) -> Path:
    """Resolve a file argument, exiting with a usage error if it is missing."""
    file = Path(path)
    if not file.is_file():
        print(f'\n✗ Error: {what} does not exist: {file}', file=sys.stderr)
        sys.exit(EXIT_USAGE)
    return file


def _warn_if_exists(path: Path) -> None:
    if path.exists():
        print(f'⚠ Warning: {path} already exists and will be overwritten', file=sys.stderr)


def _cmd_vectorize(args: argparse.Namespace) -> None:
    """Segment, track, refactor and write a program for a frame directory."""
    frames_dir = _require_dir(args.frames_dir, 'Frame directory')
    config = apply_overrides(load_config(args.config), args.set or [])
    frames = read_frames(frames_dir)
    overrides = None
    if args.labels is not None:
        overrides = read_label_overrides(_require_dir(args.labels, 'Label directory'))
    flo_dir = _require_dir(args.flow, 'Flow directory') if args.flow is not None else None

    print(f"Vectorizing {len(frames)} frames from: {frames_dir}")
    result = track_video(frames, config, overrides=overrides, flo_dir=flo_dir)
    program = build_program(result, frames, config=config, fps=args.fps)

    out = Path(args.out)
    _warn_if_exists(out)
    svg, sidecar = write_program(program, out)
    print(f'\n✓ Program saved to {svg} ({len(program.objects)} objects)')
    print(f'✓ Sidecar saved to {sidecar}')
    if args.log is not None:
        write_decision_log(args.log, result.records)
        print(f'✓ Decision log saved to {args.log} ({len(result.records)} decisions)')


def _cmd_render(args: argparse.Namespace) -> None:
    """Render every frame of a program to PNGs."""
    program = parse_program(_require_file(args.program, 'Program'))
    paths = write_frames(args.out_dir, render_video(program))
    print(f'\n✓ Rendered {len(paths)} frames to {args.out_dir}')


def _cmd_diff(args: argparse.Namespace) -> None:
    """Print the per-frame and mean reconstruction error of a program."""
    from tabulate import tabulate

    program = parse_program(_require_file(args.program, 'Program'))
    frames = read_frames(_require_dir(args.frames_dir, 'Frame directory'))
    per_frame, mean = reconstruction_error(program, frames)
    rows = [[t, e] for t, e in enumerate(per_frame)]
    print(tabulate(rows, headers=['Frame', 'L2 RGB error'], tablefmt='fancy_grid',
                   floatfmt='.5f'))
    if args.heatmaps is not None:
        out_dir = Path(args.heatmaps)
        for t in range(len(frames)):
            heat = reconstruction_heatmap(program, frames, t)
            write_png(out_dir / FRAME_PATTERN.format(t), np.repeat(heat[..., None], 3, axis=2))
        print(f'\n✓ Heatmaps saved to {out_dir}')
    print(f'\n✓ Mean L2 RGB error: {mean:.5f}')


def _cmd_transform(args: argparse.Namespace) -> None:
    """Apply an ops file to a program and write the result."""
    program = parse_program(_require_file(args.program, 'Program'))
    ops_file = _require_file(args.ops, 'Ops file')
    blocks = read_ops(ops_file)
    applied = apply_ops(program, blocks, base_dir=ops_file.parent)
    out = Path(args.out)
    _warn_if_exists(out)
    svg, _ = write_program(program, out)
    print(f'\n✓ Applied {applied} operations from {len(blocks)} blocks')
    print(f'✓ Program saved to {svg} ({program.num_frames} frames, '
          f'{len(program.objects)} objects)')


def _cmd_synth(args: argparse.Namespace) -> None:
    """Render scene scripts (a file or a built-in profile) with their ground truth."""
    if (args.profile is None) == (args.script is None):
        print('\n✗ Error: Give either a scene script or --profile, not both', file=sys.stderr)
        sys.exit(EXIT_USAGE)
    if args.profile is not None:
        scripts = PROFILES[args.profile](args.seed if args.seed is not None else 0)
    else:
        script = load_script(_require_file(args.script, 'Scene script'))
        scripts = [script if args.seed is None else script.with_updates(seed=args.seed)]

    out_dir = Path(args.out_dir)
    for i, script in enumerate(scripts):
        target = out_dir if len(scripts) == 1 else out_dir / f'clip_{i:02d}'
        scene = generate_scene(script)
        write_scene(scene, target)
        print(f'✓ Scene with {len(script.sprites)} sprites and {script.num_frames} frames '
              f'saved to {target}')


def _cmd_inspect(args: argparse.Namespace) -> None:
    """Print the object table of a program."""
    from tabulate import tabulate

    program = parse_program(_require_file(args.program, 'Program'))
    rows = []
    for obj in program.objects:
        frames = obj.frames
        visible = obj.visible_frames()
        mean_z = float(np.mean([obj.keyframes[f].z for f in visible])) if visible else 0.0
        height, width = obj.canonical.shape[:2]
        rows.append([obj.object_id, len(visible), frames[0] if frames else '-',
                     frames[-1] if frames else '-', f'{width}x{height}', mean_z])
    print(f"Program {program.width}x{program.height}, {program.num_frames} frames "
          f"at {program.fps:g} fps")
    print(tabulate(rows, headers=['Object', 'Frames', 'First', 'Last', 'Canonical',
                                  'Mean z'],
                   tablefmt='fancy_grid', intfmt=',', floatfmt='.2f'))


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for the ``motionvec`` command and its subcommands."""
    parser = argparse.ArgumentParser(
        prog='motionvec',
        description='Convert motion-graphics videos into editable motion programs')
    parser.add_argument('--verbose', '-v', action='count', default=0,
                        help='Log progress (-v) or every decision (-vv) to stderr')
    parser.add_argument('--quiet', '-q', action='store_true',
                        help='Log errors only')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('vectorize', help='Vectorize a directory of frame_%%05d.png frames')
    p.add_argument('frames_dir', help='Directory of input frames')
    p.add_argument('out', help='Output SVG path; the JSON sidecar is written next to it')
    p.add_argument('--labels', help='Directory of 16-bit manual label images')
    p.add_argument('--flow', help='Directory of precomputed .flo files')
    p.add_argument('--config', help='JSON config file with per-module sections')
    p.add_argument('--set', action='append', metavar='SECTION.KEY=VALUE',
                   help='Override one config value (repeatable)')
    p.add_argument('--log', help='Write the mapping decision log to this TSV file')
    p.add_argument('--fps', type=float, default=24.0, help='Program frame rate (default: 24)')
    p.set_defaults(handler=_cmd_vectorize)

    p = sub.add_parser('render', help='Render a program to PNG frames')
    p.add_argument('program', help='Program SVG or sidecar path')
    p.add_argument('out_dir', help='Directory for rendered frames')
    p.set_defaults(handler=_cmd_render)

    p = sub.add_parser('diff', help='Compare a program against the original frames')
    p.add_argument('program', help='Program SVG or sidecar path')
    p.add_argument('frames_dir', help='Directory of original frames')
    p.add_argument('--heatmaps', help='Write per-frame error heatmaps to this directory')
    p.set_defaults(handler=_cmd_diff)

    p = sub.add_parser('transform', help='Apply an ops file to a program')
    p.add_argument('program', help='Program SVG or sidecar path')
    p.add_argument('ops', help='JSON ops file')
    p.add_argument('out', help='Output SVG path')
    p.set_defaults(handler=_cmd_transform)

    p = sub.add_parser('synth', help='Generate synthetic clips with ground truth')
    p.add_argument('script', nargs='?', help='JSON scene script')
    p.add_argument('--profile', choices=sorted(PROFILES), help='Built-in scene family')
    p.add_argument('out_dir', help='Output directory')
    p.add_argument('--seed', type=int, help='Override the script or profile seed')
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser('inspect', help='List the objects of a program')
    p.add_argument('program', help='Program SVG or sidecar path')
    p.set_defaults(handler=_cmd_inspect)
    return parser


def main(argv: Sequence[str] | None = None) -> None:
    """CLI entry point for the ``motionvec`` command.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:].

    Note:
        Exits with code 2 on usage, configuration or path errors, 3 when a
        program sidecar, ops file or scene script cannot be parsed, and 4
        when a pipeline stage fails.
    """
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        args.handler(args)
    except Exception as e:
        _print_error_and_exit(e)
