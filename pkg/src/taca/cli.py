"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 mission failure or timeout,
3 internal error. Commands run in-process unless ``--server URL`` points at a
running service, in which case this is a thin HTTP client.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import ops
from .kb import ServiceError
from .model.scenario import ScenarioError
from .service.client import Backend, HttpBackend, LocalBackend

log = logging.getLogger("taca")


@dataclass
class RunConfig:
    scenario: str
    max_ticks: int = 1000
    seed: int = 0
    trace: str | None = None
    metrics: str | None = None
    verbosity: int = 0

    def __post_init__(self) -> None:
        if self.max_ticks < 1:
            raise ValueError("max_ticks must be >= 1")


def _scenario_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("path", nargs="?", help="scenario file, or the name of a bundled scenario")
    p.add_argument("--scenario", dest="scenario_flag", help="same as the positional path")


def _global_flags(p: argparse.ArgumentParser, defaults: bool) -> None:
    sup = {} if defaults else {"default": argparse.SUPPRESS}
    p.add_argument("--server", help="base URL of a running taca service", **sup)
    p.add_argument("--quiet", "-q", action="store_true", help="only print errors", **sup)
    p.add_argument("--verbose", "-v", action="count", help="more logging (repeatable)",
                   **(sup or {"default": 0}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taca", description="Task-and-architecture co-adaptation engine")
    _global_flags(parser, defaults=True)
    # the same flags are accepted after the subcommand; SUPPRESS keeps them from
    # overwriting values given before it
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, defaults=False)
    sub = parser.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name: str, **kw) -> argparse.ArgumentParser:
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser  # type: ignore[method-assign]

    p = sub.add_parser("validate", help="check a scenario file and print element counts")
    _scenario_arg(p)

    p = sub.add_parser("run", help="run a scenario and write trace and metrics")
    _scenario_arg(p)
    p.add_argument("--ticks", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the JSONL trace here")
    p.add_argument("--metrics", help="write the metrics summary here")

    p = sub.add_parser("query", help="print a derived set of a loaded model")
    p.add_argument("path", help="scenario file, or the name of a bundled scenario")
    p.add_argument("query", choices=sorted(ops.QUERIES))
    p.add_argument("args", nargs="*")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="measurement (or component status) override")
    p.add_argument("--require", action="append", default=[], metavar="ACTION",
                   help="open a request for ACTION before evaluating")

    p = sub.add_parser("generate", help="write a hypothetical model and check its element count")
    p.add_argument("--actions", type=int, default=1)
    p.add_argument("--sa", type=int, default=0, help="structural adaptations per action")
    p.add_argument("--pa", type=int, default=0, help="parameter adaptations per action")
    p.add_argument("--out", help="output file (stdout when omitted)")

    sub.add_parser("scenarios", help="list bundled scenarios")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _path(args: argparse.Namespace) -> str:
    path = getattr(args, "scenario_flag", None) or args.path
    if not path:
        raise SystemExit("a scenario path is required")
    return path


def cmd_validate(backend: Backend, path: str, out=None) -> int:
    out = out or sys.stdout
    report = backend.validate(ops.read_scenario(path))
    out.write(report.to_text())
    return ops.EXIT_OK if report.valid else ops.EXIT_INVALID


def cmd_run(backend: Backend, cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    outcome = backend.run(ops.read_scenario(cfg.scenario), cfg.max_ticks, cfg.seed)
    if outcome.error:
        out.write(f"error: {outcome.error}\n")
        return outcome.exit_code
    if cfg.trace:
        Path(cfg.trace).write_text(outcome.trace_text)
    if cfg.metrics:
        Path(cfg.metrics).write_text(outcome.metrics_text)
    if cfg.verbosity >= 0:
        out.write(outcome.metrics_text)
    return outcome.exit_code


def cmd_query(backend: Backend, path: str, query: str, args: list[str], overrides: list[str],
              require: list[str], out=None) -> int:
    out = out or sys.stdout
    items = backend.query(ops.read_scenario(path), query, args, ops.parse_overrides(overrides), require)
    out.write(", ".join(items) + "\n")
    return ops.EXIT_OK


def cmd_generate(backend: Backend, n_actions: int, n_sa: int, n_pa: int, out_path: str | None,
                 out=None) -> int:
    out = out or sys.stdout
    if n_actions < 1 or n_sa < 0 or n_pa < 0:
        out.write("error: need actions >= 1 and non-negative adaptation counts\n")
        return ops.EXIT_INVALID
    res = backend.generate(n_actions, n_sa, n_pa)
    if out_path:
        Path(out_path).write_text(res.scenario)
    else:
        out.write(res.scenario)
    out.write(f"predicted {res.predicted} = counted {res.counted}\n" if res.predicted == res.counted
              else f"predicted {res.predicted} != counted {res.counted}\n")
    return ops.EXIT_OK if res.predicted == res.counted else ops.EXIT_INTERNAL


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    backend: Backend = HttpBackend(args.server) if args.server else LocalBackend()
    try:
        if args.command == "validate":
            return cmd_validate(backend, _path(args))
        if args.command == "run":
            cfg = RunConfig(_path(args), args.ticks, args.seed, args.trace, args.metrics, -1 if args.quiet else args.verbose)
            return cmd_run(backend, cfg)
        if args.command == "query":
            return cmd_query(backend, args.path, args.query, args.args, args.overrides, args.require)
        if args.command == "generate":
            return cmd_generate(backend, args.actions, args.sa, args.pa, args.out)
        if args.command == "scenarios":
            print("\n".join(ops.bundled_scenarios()))
            return ops.EXIT_OK
        if args.command == "serve":
            import uvicorn

            uvicorn.run("taca.service.app:app", host=args.host, port=args.port)
            return ops.EXIT_OK
    except (FileNotFoundError, ScenarioError, ServiceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ops.EXIT_INVALID
    except Exception:
        log.exception("internal error")
        return ops.EXIT_INTERNAL
    return ops.EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
