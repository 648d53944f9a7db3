"""Command-line entry point: simulate -> ingest -> summary / anova / profile.

Exit codes: 0 success, 1 I/O failure, 2 invalid data or flags,
3 degenerate statistics.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import socket
import sys
from pathlib import Path

from . import analysis
from .calibration import CalibrationCurve, DividerParams, estimate_force, inverse_divider
from .datamodel import (
    Expertise,
    HandRole,
    Session,
    UserMeta,
    count_signals,
    load_session_csv,
    load_session_dir,
    load_steps_csv,
    attach_steps,
    save_session_csv,
    save_steps_csv,
    session_filename,
    total_force_table,
)
from .errors import DegenerateStatistics, GripForceError, InconsistentMetadata, InvalidData
from .profiles import (
    TRIO_SENSORS,
    overlay_steps,
    select_trio_sessions,
    session_profile,
    trio_comparison,
)
from .simulator import ARCHETYPES, SimConfig, emit_stream, generate_session, generate_study
from .svg import render_profiles_svg
from .wire import Hand, StreamDecoder

EXIT_OK, EXIT_IO, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3
PROG = "gripforce"


class UsageError(InvalidData):
    """Flags are missing or contradict each other."""


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in str(text).split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _host_port(text: str) -> tuple[str, int]:
    host, sep, port = str(text).rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file whose keys are long flag names")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic sessions / frame streams")
    p.add_argument("--archetype", choices=[e.value for e in Expertise])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration-s", type=float, default=10.0)
    p.add_argument("--hand", choices=[h.value for h in HandRole], default="dominant")
    p.add_argument("--session", type=int, default=1)
    p.add_argument("--user")
    p.add_argument("--rate", type=float, default=50.0)
    p.add_argument("--sensors", type=_int_list, default=None)
    p.add_argument("--out", help="frame output file, '-' for stdout")
    p.add_argument("--tcp", type=_host_port, help="stream frames to HOST:PORT")
    p.add_argument("--timed", action="store_true", help="pace frames at the sample rate")
    p.add_argument("--csv-out", help="also write the generated session CSV")
    p.add_argument("--steps-out", help="also write the step-annotation CSV")
    p.add_argument("--report", help="write the emission report JSON here")
    p.add_argument("--study", action="store_true",
                   help="write a full 3-user x 2-hand x N-session study as CSVs")
    p.add_argument("--sessions", type=int, default=10, help="sessions per hand with --study")
    p.add_argument("--out-dir", help="directory for --study output")

    p = sub.add_parser("ingest", help="decode a frame stream into a session CSV")
    p.add_argument("--in", dest="input", help="frame file")
    p.add_argument("--stdin", action="store_true")
    p.add_argument("--tcp-listen", type=_host_port)
    p.add_argument("--user")
    p.add_argument("--expertise", choices=[e.value for e in Expertise])
    p.add_argument("--session", type=int)
    p.add_argument("--dominant-hand", choices=[h.value for h in Hand])
    p.add_argument("--out", help="session CSV to write")
    p.add_argument("--report", help="decode report JSON (default: stdout)")

    p = sub.add_parser("summary", help="counts, means/SEM and total force")
    p.add_argument("--in", dest="input")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out")
    p.add_argument("--r-pd", type=float, default=DividerParams.r_pd)
    p.add_argument("--v-supply", type=float, default=DividerParams.v_supply)
    p.add_argument("--v-max-mv", type=float, default=CalibrationCurve.v_max_mv)
    p.add_argument("--f-max-n", type=float, default=CalibrationCurve.f_max_n)

    p = sub.add_parser("anova", help="factorial ANOVA tables")
    p.add_argument("--in", dest="input")
    p.add_argument("--model", choices=("time", "force", "trio"))
    p.add_argument("--unit", choices=analysis.UNITS)
    p.add_argument("--users", help="two user ids for --model trio")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")

    p = sub.add_parser("profile", help="windowed force profiles (CSV / SVG)")
    p.add_argument("--in", dest="input", help="session CSV")
    p.add_argument("--steps", help="step-annotation CSV")
    p.add_argument("--sensors", type=_int_list, default=TRIO_SENSORS)
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--statistic", choices=("mean", "max"), default="mean")
    p.add_argument("--rate", type=float, default=50.0)
    p.add_argument("--boundary-mode", choices=("nominal", "timestamp"), default="nominal")
    p.add_argument("--csv-dir")
    p.add_argument("--svg")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    target = subparsers.choices[args.command]
    known = {a.dest for a in target._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest == "in":
            dest = "input"
        if dest not in known:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        action = next(a for a in target._actions if a.dest == dest)
        if action.type is not None and isinstance(value, str):
            value = action.type(value)
        elif action.type is _int_list and isinstance(value, list):
            value = tuple(int(v) for v in value)
        defaults[dest] = value
    target.set_defaults(**defaults)
    return parser.parse_args(argv)


def _require(args, *names):
    for name in names:
        if getattr(args, name) in (None, ""):
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _exactly_one(args, *names):
    given = [n for n in names if getattr(args, n) not in (None, False, "")]
    if len(given) != 1:
        flags = ", ".join("--" + n.replace("_", "-").replace("input", "in") for n in names)
        raise UsageError(f"give exactly one of {flags}")


def _emit_text(text: str, out: str | None) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


# -- simulate --------------------------------------------------------------

def cmd_simulate(args) -> int:
    if args.study:
        for name in ("out", "tcp", "timed", "csv_out", "steps_out", "report"):
            if getattr(args, name):
                raise UsageError(f"--{name.replace('_', '-')} conflicts with --study")
        _require(args, "out_dir")
        kwargs = {"sessions": args.sessions, "sample_rate_hz": args.rate}
        if args.sensors:
            kwargs["sensors"] = args.sensors
        sessions = generate_study(args.seed, **kwargs)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for s in sessions:
            save_session_csv(s, out_dir / session_filename(s))
        save_steps_csv(sessions, out_dir / "steps.csv")
        return EXIT_OK

    if args.out_dir:
        raise UsageError("--out-dir needs --study")
    _require(args, "archetype")
    _exactly_one(args, "out", "tcp")
    kwargs = {}
    if args.sensors:
        kwargs["sensors"] = args.sensors
    config = SimConfig(
        ARCHETYPES[Expertise(args.archetype)], HandRole(args.hand), args.seed,
        args.duration_s, args.rate, user_id=args.user, session_index=args.session, **kwargs,
    )
    session = generate_session(config)
    if args.csv_out:
        save_session_csv(session, args.csv_out)
    if args.steps_out:
        save_steps_csv([session], args.steps_out)

    with _open_sink(args) as sink:
        report = emit_stream(session, sink, timed=args.timed)
    if args.report:
        _emit_text(json.dumps(report.to_dict(), sort_keys=True) + "\n", args.report)
    return EXIT_OK


@contextlib.contextmanager
def _open_sink(args):
    if args.tcp:
        with socket.create_connection(args.tcp) as sock, sock.makefile("wb") as fh:
            yield fh
    elif args.out == "-":
        yield sys.stdout.buffer
        sys.stdout.buffer.flush()
    else:
        with open(args.out, "wb") as fh:
            yield fh


# -- ingest ----------------------------------------------------------------

def _read_chunks(args):
    if args.input:
        with open(args.input, "rb") as fh:
            while chunk := fh.read(65536):
                yield chunk
    elif args.stdin:
        while chunk := sys.stdin.buffer.read(65536):
            yield chunk
    else:
        with socket.create_server(args.tcp_listen) as server:
            host, port = server.getsockname()[:2]
            print(f"listening on {host}:{port}", file=sys.stderr, flush=True)
            conn, _ = server.accept()
            with conn:
                while chunk := conn.recv(65536):
                    yield chunk


def cmd_ingest(args) -> int:
    _exactly_one(args, "input", "stdin", "tcp_listen")
    _require(args, "expertise", "session", "out")
    decoder = StreamDecoder()
    readings = []
    for chunk in _read_chunks(args):
        readings.extend(decoder.feed(chunk))
    if not readings:
        raise InvalidData("no valid frames decoded")
    hands = {r.hand for r in readings}
    if len(hands) != 1:
        raise InconsistentMetadata("stream mixes left- and right-hand frames")
    expertise = Expertise(args.expertise)
    user = UserMeta.default(args.user or expertise.value, expertise)
    if args.dominant_hand:
        user = UserMeta(user.user_id, expertise, Hand(args.dominant_hand))
    readings.sort(key=lambda r: r.timestamp_ms)
    session = Session(user, user.role_of(hands.pop()), args.session, tuple(readings))
    save_session_csv(session, args.out)
    report = {
        "readings": len(readings),
        "skipped_byte_spans": [list(s) for s in decoder.skipped_byte_spans],
        "skipped_bytes": sum(n for _, n in decoder.skipped_byte_spans),
        "pending_bytes": decoder.pending_bytes,
    }
    _emit_text(json.dumps(report, sort_keys=True) + "\n", args.report)
    return EXIT_OK


# -- summary ---------------------------------------------------------------

def _load(args) -> list[Session]:
    _require(args, "input")
    path = Path(args.input)
    if path.is_dir():
        return load_session_dir(path)
    return [load_session_csv(path)]


def summary_dict(sessions, divider: DividerParams, curve: CalibrationCurve) -> dict:
    counts = count_signals(sessions)
    out = {
        "signals": {
            "grand_total": counts.grand_total,
            "per_sensor": {f"S{k}": v for k, v in counts.per_sensor().items()},
            "per_cell": [{"user": u, "hand": h.value, "count": n}
                         for (u, h), n in counts.per_cell().items()],
        },
        "task_time_s": [
            {"user": u, "hand": h, **st.to_dict()}
            for (u, h), st in analysis.time_summary(sessions).items()
        ],
        "force_mv": [],
        "total_force_v": total_force_table(sessions).to_dict(),
    }
    for factor, levels in analysis.force_level_summary(sessions).items():
        for level, st in levels.items():
            row = {"factor": factor, "level": level, **st.to_dict(),
                   "force_n": estimate_force(st.mean, curve)}
            row["r_fsr_ohm"] = inverse_divider(st.mean, divider) if 0 < st.mean <= divider.supply_mv else None
            out["force_mv"].append(row)
    return out


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.2f}"
    return str(x)


def summary_text(d: dict) -> str:
    lines = [f"Signals: {d['signals']['grand_total']} total"]
    for row in d["signals"]["per_cell"]:
        lines.append(f"  {row['user']:<14} {row['hand']:<13} {row['count']}")
    lines.append("")
    lines.append("Task time (s)        Mean     SEM")
    for row in d["task_time_s"]:
        lines.append(f"  {row['user']:<14} {row['hand']:<13} {_fmt(row['mean']):>7} {_fmt(row['sem']):>7}")
    lines.append("")
    lines.append("Force (mV)           Mean     SEM   Force (N)")
    for row in d["force_mv"]:
        lines.append(f"  {row['factor']:<10} {row['level']:<17} {_fmt(row['mean']):>8} "
                     f"{_fmt(row['sem']):>7} {_fmt(row['force_n']):>9}")
    lines.append("")
    table = d["total_force_v"]
    lines.append("Total force (V)  " + "  ".join(f"{c:>20}" for c in table["columns"]))
    for row in table["rows"]:
        lines.append(f"  S{row['sensor']:<13} " + "  ".join(f"{v:>20.2f}" for v in row["values"]))
    lines.append("  Total          " + "  ".join(f"{v:>20.2f}" for v in table["totals"]))
    return "\n".join(lines) + "\n"


def summary_csv(d: dict) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("table", "row", "column", "value"))
    w.writerow(("signals", "all", "count", d["signals"]["grand_total"]))
    for row in d["signals"]["per_cell"]:
        w.writerow(("signals", f"{row['user']}/{row['hand']}", "count", row["count"]))
    for row in d["task_time_s"]:
        for col in ("n", "mean", "sem"):
            w.writerow(("task_time_s", f"{row['user']}/{row['hand']}", col, row[col]))
    for row in d["force_mv"]:
        for col in ("n", "mean", "sem", "force_n"):
            w.writerow(("force_mv", f"{row['factor']}={row['level']}", col, row[col]))
    table = d["total_force_v"]
    for row in table["rows"]:
        for col, v in zip(table["columns"], row["values"]):
            w.writerow(("total_force_v", f"S{row['sensor']}", col, v))
    for col, v in zip(table["columns"], table["totals"]):
        w.writerow(("total_force_v", "Total", col, v))
    return buf.getvalue()


def cmd_summary(args) -> int:
    sessions = _load(args)
    d = summary_dict(sessions, DividerParams(args.r_pd, args.v_supply),
                     CalibrationCurve(args.v_max_mv, args.f_max_n))
    if args.format == "json":
        text = json.dumps(d, indent=2) + "\n"
    elif args.format == "csv":
        text = summary_csv(d)
    else:
        text = summary_text(d)
    _emit_text(text, args.out)
    return EXIT_OK


# -- anova -----------------------------------------------------------------

def cmd_anova(args) -> int:
    _require(args, "model")
    if args.model == "force" and not args.unit:
        raise UsageError("--unit sample|session is required for --model force")
    if args.model == "time" and args.unit:
        raise UsageError("--unit does not apply to --model time")
    if args.model == "trio" and args.unit not in (None, "sample"):
        raise UsageError("--model trio always works on raw samples")
    if args.users and args.model != "trio":
        raise UsageError("--users only applies to --model trio")
    sessions = _load(args)
    if args.model == "time":
        result = analysis.time_anova(sessions)
    elif args.model == "force":
        result = analysis.force_anova(sessions, args.unit)
    else:
        users = args.users.split(",") if args.users else None
        result = trio_comparison(select_trio_sessions(sessions, users))
    if args.format == "json":
        text = json.dumps(result.to_dict(), indent=2) + "\n"
    else:
        text = result.format_text()
    _emit_text(text, args.out)
    return EXIT_OK


# -- profile ---------------------------------------------------------------

def cmd_profile(args) -> int:
    _require(args, "input")
    if args.window < 1:
        raise UsageError("--window must be >= 1")
    session = load_session_csv(args.input)
    if args.steps:
        ann = load_steps_csv(args.steps).get(
            (session.user.user_id, session.physical_hand, session.session_index))
        if ann is None:
            raise InvalidData(f"no step annotations for session {session.key} in {args.steps}")
        session = attach_steps(session, ann)
    profiles = []
    for sensor in args.sensors:
        prof = session_profile(session, sensor, args.window, args.statistic)
        if session.steps is not None:
            prof = overlay_steps(prof, session.steps, args.rate, args.boundary_mode)
        profiles.append(prof)

    if args.csv_dir:
        out_dir = Path(args.csv_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for prof in profiles:
            (out_dir / f"S{prof.sensor_id}.csv").write_text(prof.to_csv(), encoding="utf-8")
    if args.svg:
        title = (f"{session.user.user_id} {session.hand.value} session {session.session_index}"
                 f" ({args.statistic} per {args.window} samples)")
        Path(args.svg).write_text(render_profiles_svg(profiles, title), encoding="utf-8")
    if not args.csv_dir and not args.svg:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("sensor", "window_index", "mean_mv", "n_samples"))
        for prof in profiles:
            for p in prof.points:
                w.writerow((prof.sensor_id, p.window_index, f"{p.mean_mv:.6f}", p.n_samples))
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "ingest": cmd_ingest,
    "summary": cmd_summary,
    "anova": cmd_anova,
    "profile": cmd_profile,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except DegenerateStatistics as exc:
        code, msg = EXIT_DEGENERATE, exc
    except OSError as exc:
        code, msg = EXIT_IO, exc
    except (GripForceError, argparse.ArgumentTypeError) as exc:
        code, msg = EXIT_DATA, exc
    print(f"{PROG}: error: {msg}".replace("\n", " "), file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
