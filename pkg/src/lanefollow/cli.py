"""Command line: detect, stages, run, simulate, render.

Exit status 0 on success, 1 on I/O or decode failures, 2 on bad
configuration or flags.
"""

import argparse
import os
import re
import sys
from pathlib import Path

from . import codecs
from .annotate import annotate
from .config import AppConfig, ConfigError
from .edges import canny
from .imaging import gaussian_blur, to_grayscale, value_channel
from .lane import detect_lane, preprocess
from .records import LaneRecord, write_report
from .sim import render_frame, run_closed_loop

FRAME_RE = re.compile(r"^frame_(\d{6})\.ppm$")
STAGE_NAMES = ("hsv-value", "gray", "blur", "canny")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable, wins over --config)")

    parser = _Parser(prog="lanefollow", description="Lane detection and closed-loop lane following.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", parents=[common], help="detect the lane in one frame")
    p.add_argument("frame")
    p.add_argument("--out", help="annotated PPM output")
    p.add_argument("--json", help="write the lane record here instead of stdout")

    p = sub.add_parser("stages", parents=[common], help="dump the intermediate images of one frame")
    p.add_argument("frame")
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("run", parents=[common], help="process frame_NNNNNN.ppm files in order")
    p.add_argument("framedir")
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", parents=[common], help="closed loop on a synthetic road")
    p.add_argument("--report", required=True, help="JSON lines report; a .png figure is written next to it")

    p = sub.add_parser("render", parents=[common], help="render one synthetic frame")
    p.add_argument("--out", required=True)
    return parser


def _write_bytes(path, blob):
    with open(path, "wb") as fh:
        fh.write(blob)


def cmd_detect(args, cfg, out):
    frame = codecs.read_ppm(Path(args.frame).read_bytes())
    est = detect_lane(frame, cfg.lane())
    line = LaneRecord.from_estimate(0, est).to_line()
    if args.json:
        Path(args.json).write_text(line + "\n", encoding="utf-8")
    else:
        out.write(line + "\n")
    if args.out:
        _write_bytes(args.out, codecs.write_ppm(annotate(frame, est)))
    return 0


def stage_images(frame, lane_cfg):
    """The hsv-value, gray, blur and canny images of one frame, in that order."""
    gray = to_grayscale(frame)
    blur = gaussian_blur(preprocess(frame, lane_cfg), lane_cfg.blur_sigma, lane_cfg.blur_ksize)
    edges = canny(blur, lane_cfg.canny_low, lane_cfg.canny_high, lane_cfg.blur_sigma, lane_cfg.blur_ksize)
    return dict(zip(STAGE_NAMES, (value_channel(frame), gray, blur, edges)))


def cmd_stages(args, cfg, out):
    frame = codecs.read_ppm(Path(args.frame).read_bytes())
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, img in stage_images(frame, cfg.lane()).items():
        _write_bytes(outdir / f"{name}.pgm", codecs.write_pgm(img))
    return 0


def list_frames(framedir):
    found = []
    for name in os.listdir(framedir):
        m = FRAME_RE.match(name)
        if m:
            found.append((int(m.group(1)), name))
    return sorted(found)


def cmd_run(args, cfg, out):
    from .plotting import steering_figure

    frames = list_frames(args.framedir)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    lane_cfg = cfg.lane()
    prev = None
    records = []
    with open(outdir / "lanes.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for index, name in frames:
            frame = codecs.read_ppm((Path(args.framedir) / name).read_bytes())
            est = detect_lane(frame, lane_cfg, prev)
            rec = LaneRecord.from_estimate(index, est)
            fh.write(rec.to_line() + "\n")
            _write_bytes(outdir / name, codecs.write_ppm(annotate(frame, est)))
            records.append(rec)
            prev = est
    if records:
        steering_figure(records, outdir / "steering.png")
    return 0


def cmd_simulate(args, cfg, out):
    from .plotting import run_figure

    road = cfg.road()
    report = run_closed_loop(road, cfg.camera(), cfg.lane(), cfg.control(), cfg.sim(),
                             cfg.initial_state(), noise=cfg["sim.noise"])
    path = Path(args.report)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    write_report(path, report)
    run_figure(report, road, path.with_suffix(".png"))
    summ = report.summary()
    out.write(" ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in summ.items()) + "\n")
    return 0


def cmd_render(args, cfg, out):
    frame = render_frame(cfg.road(), cfg.initial_state(), cfg.camera(), noise=cfg["sim.noise"])
    _write_bytes(args.out, codecs.write_ppm(frame))
    return 0


COMMANDS = {
    "detect": cmd_detect,
    "stages": cmd_stages,
    "run": cmd_run,
    "simulate": cmd_simulate,
    "render": cmd_render,
}


def cli_main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = AppConfig.load(args.config, args.sets)
    except UsageError as exc:
        err.write(f"lanefollow: {exc}\n")
        return 2
    except ConfigError as exc:
        err.write(f"lanefollow: config error: {exc}\n")
        return 2
    except (OSError, UnicodeDecodeError) as exc:
        err.write(f"lanefollow: cannot read config: {exc}\n")
        return 1
    try:
        return COMMANDS[args.command](args, cfg, out)
    except codecs.NetpbmError as exc:
        err.write(f"lanefollow: decode error: {exc}\n")
        return 1
    except OSError as exc:
        err.write(f"lanefollow: {exc}\n")
        return 1
    except ValueError as exc:
        # e.g. a frame smaller than the detector accepts
        err.write(f"lanefollow: {exc}\n")
        return 1


def main():
    sys.exit(cli_main())
