"""``sim`` command line front end.

Exit codes: 0 success, 2 invalid scenario or arguments, 3 failure while
computing or writing results.
"""
import argparse
import sys
from pathlib import Path

from .scenario import (
    ENGINES, ScenarioError, builtin_scenario, list_builtin_figures, parse_scenario,
    parse_scenario_json, run_scenario,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ENGINE = 3


def _load(path, as_json):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror or exc}") from None
    if as_json or str(path).endswith(".json"):
        return parse_scenario_json(text)
    return parse_scenario(text)


def _run(scenario, args):
    try:
        manifest = run_scenario(scenario, args.out, engine=args.engine)
    except ScenarioError:
        raise
    except (ArithmeticError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    for info in manifest["files"].values():
        print(Path(args.out) / info["path"])
    print(f"{manifest['name'] or 'scenario'}: {manifest['engine']} engine, "
          f"{manifest['wall_time_s']:.2f} s", file=sys.stderr)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--engine", choices=ENGINES, help="override the scenario's engine")
    run.add_argument("--json", action="store_true", help="read the scenario as JSON")

    fig = sub.add_parser("figure", help="run a builtin preset")
    fig.add_argument("preset")
    fig.add_argument("--out", required=True)
    fig.add_argument("--engine", choices=ENGINES)

    sub.add_parser("list-figures", help="list builtin presets")

    val = sub.add_parser("validate", help="check a scenario file without running it")
    val.add_argument("scenario")
    val.add_argument("--json", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        if args.command == "list-figures":
            for name, desc in list_builtin_figures():
                print(f"{name}\t{desc}")
            return EXIT_OK
        if args.command == "validate":
            s = _load(args.scenario, args.json)
            print(f"ok: {s.name or args.scenario} ({', '.join(s.outputs)}; engine {s.engine})")
            return EXIT_OK
        if args.command == "run":
            return _run(_load(args.scenario, args.json), args)
        return _run(builtin_scenario(args.preset), args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
