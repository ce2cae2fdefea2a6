"""Command-line interface: run, ablation, sweep, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backends import make_backend
from .errors import TracksimError
from .runner import MODES, load_human_script, run_scenario
from .scenario import load_scenario


def _parse_range(spec: str) -> list[int]:
    if "-" in spec:
        lo, hi = spec.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in spec.split(",")]


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    script = load_human_script(args.human_script) if args.human_script else None
    metrics = run_scenario(
        scenario,
        args.mode,
        steps=args.steps,
        backend=make_backend(args.backend),
        seed=args.seed,
        log_path=args.log,
        human_script=script,
    )
    print(json.dumps(metrics.as_dict(), indent=2, sort_keys=True))
    if args.plot:
        from .report import write_run_plot

        if not args.log:
            print("run: --plot requires --log", file=sys.stderr)
            return 2
        path = write_run_plot(args.log, args.plot, scenario)
        print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_ablation(args) -> int:
    from .experiments import ablation
    from .report import write_ablation_report

    scenario = load_scenario(args.scenario)
    script = (
        load_human_script(args.human_script)
        if args.human_script
        else load_human_script(Path(args.scenario).parent / "ablation_human.txt")
    )
    result = ablation(
        scenario,
        seeds=list(range(args.seeds)),
        backend_factory=lambda: make_backend(args.backend),
        steps=args.steps,
        human_script=script,
    )
    print(result.table())
    paths = write_ablation_report(result, args.out_dir)
    print(f"wrote {paths['csv']} and {paths['png']}", file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    from .experiments import sweep_success
    from .report import write_sweep_report

    cells = sweep_success(
        _parse_range(args.robots),
        _parse_range(args.targets),
        backend_factory=lambda: make_backend(args.backend),
        queries_per_cell=args.queries,
    )
    for c in cells:
        print(
            f"M={c.robots} N={c.targets} capacity={c.capacity} "
            f"task={c.task_rate:.3f} action={c.action_rate:.3f}"
        )
    paths = write_sweep_report(cells, args.out_dir)
    print(f"wrote {paths['csv']} and {paths['png']}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_service

    scenario = load_scenario(args.scenario)
    script = load_human_script(args.human_script) if args.human_script else None
    app = build_service(
        scenario,
        mode=args.mode,
        steps=args.steps,
        backend=make_backend(args.backend),
        seed=args.seed,
        log_path=args.log,
        human_script=script,
        pace=1.0 / args.rate if args.rate > 0 else 0.0,
        console_dir=args.console,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracksim",
        description="Multi-robot target tracking with verified LLM-in-the-loop tuning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and print its metrics")
    run.add_argument("--scenario", required=True)
    run.add_argument("--mode", choices=MODES, default="llm")
    run.add_argument("--human-script", default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--steps", type=int, default=300)
    run.add_argument("--backend", default="mock")
    run.add_argument("--log", default=None)
    run.add_argument("--plot", default=None, help="write a trajectory/cost figure (PNG)")
    run.set_defaults(func=_cmd_run)

    abl = sub.add_parser("ablation", help="compare no_llm / llm / llm_human over seeds")
    abl.add_argument("--scenario", required=True)
    abl.add_argument("--seeds", type=int, default=10)
    abl.add_argument("--steps", type=int, default=300)
    abl.add_argument("--backend", default="mock")
    abl.add_argument("--human-script", default=None)
    abl.add_argument("--out-dir", default="reports")
    abl.set_defaults(func=_cmd_ablation)

    swp = sub.add_parser("sweep", help="acceptance-rate grid over team/target counts")
    swp.add_argument("--backend", default="mock")
    swp.add_argument("--queries", type=int, default=100)
    swp.add_argument("--robots", default="2-8", help="range like 2-8 or list like 2,4,8")
    swp.add_argument("--targets", default="2-8")
    swp.add_argument("--out-dir", default="reports")
    swp.set_defaults(func=_cmd_sweep)

    srv = sub.add_parser("serve", help="run a scenario behind the live supervisor gateway")
    srv.add_argument("--scenario", required=True)
    srv.add_argument("--mode", choices=MODES, default="llm")
    srv.add_argument("--steps", type=int, default=300)
    srv.add_argument("--backend", default="mock")
    srv.add_argument("--seed", type=int, default=None)
    srv.add_argument("--log", default=None)
    srv.add_argument("--human-script", default=None)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8642)
    srv.add_argument("--rate", type=float, default=10.0, help="simulation steps per second")
    srv.add_argument("--console", default=None,
                     help="directory with the built console (e.g. frontend/) to serve at /")
    srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TracksimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
