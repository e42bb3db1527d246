"""Command-line entry point.

    lgsim simulate --scenario F [--seed N] [--steps N] [--trace OUT]
    lgsim explore  [--depth N] [--pilot-budget N] [--faults SPEC|none]
                   [--mutant ID] [--report OUT] ...
    lgsim check    --trace F
    lgsim serve    --port N [--host H] [--tick-ms N]

Exit codes: 0 clean, 1 violation found, 2 input/parse error, 3 internal.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import explorer, kernel, scenario
from .config import Mutant, SimConfig
from .state import FaultSpec

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_INTERNAL = 0, 1, 2, 3


def _mutant(value):
    if value is None:
        return None
    for m in Mutant:
        if m.value == value or m.name == value:
            return m
    raise argparse.ArgumentTypeError(
        f"unknown mutant {value!r}; one of {[m.value for m in Mutant]}"
    )


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lgsim", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario file")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sim.add_argument("--steps", type=int, default=None, help="override the micro-step budget")
    sim.add_argument("--trace", default=None, help="trace file to write")
    sim.add_argument("--mutant", type=_mutant, default=None)
    sim.add_argument("--voting-threshold", type=int, default=1,
                     help="dissent count that invalidates a sensor channel")
    sim.add_argument("--interleaved", action="store_true",
                     help="doors/gears move one device per cycle instead of together")
    sim.add_argument("--keep-going", action="store_true", help="do not stop at the first violation")

    exp = sub.add_parser("explore", help="bounded exhaustive exploration")
    exp.add_argument("--depth", type=int, default=400, help="micro-step depth bound")
    exp.add_argument("--pilot-budget", type=int, default=2)
    exp.add_argument("--faults", default="none",
                     help="'none' or comma-separated fault keys sensor:ch:device:mode:step")
    exp.add_argument("--f-max", type=int, default=1)
    exp.add_argument("--module-failures", default="",
                     help="comma-separated module ids allowed to fail, e.g. '1' or '1,2'")
    exp.add_argument("--mutant", type=_mutant, default=None)
    exp.add_argument("--initial", default="",
                     help="comma-separated pilot actions applied before exploring, e.g. 'handle_up'")
    exp.add_argument("--no-dedupe", action="store_true")
    exp.add_argument("--no-minimize", action="store_true")
    exp.add_argument("--report", default=None, help="report file to write")

    chk = sub.add_parser("check", help="replay a trace and re-monitor it")
    chk.add_argument("--trace", required=True)
    chk.add_argument("--mutant", type=_mutant, default=None)

    srv = sub.add_parser("serve", help="cockpit session server")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--tick-ms", type=int, default=500)
    srv.add_argument("--preset", default=None,
                     help="scenario file run to completion before each session starts")
    srv.add_argument("--mutant", type=_mutant, default=None)
    return p


def cmd_simulate(args) -> int:
    try:
        sc = scenario.load(args.scenario)
    except kernel.ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    if args.steps is not None:
        if args.steps <= 0:
            print("scenario error: --steps must be positive", file=sys.stderr)
            return EXIT_PARSE
        sc = replace(sc, max_steps=args.steps)
    if args.keep_going:
        sc = replace(sc, stop_on_violation=False)

    config = SimConfig(
        voting_threshold=args.voting_threshold,
        interleaved_devices=args.interleaved,
        mutant=args.mutant,
    )
    result = kernel.run(sc, config, record_deltas=True)
    if args.trace:
        result.trace.dump(args.trace)
        print(f"trace written to {args.trace}")

    f = result.trace.footer
    print(f"scenario '{sc.name}': {f['steps']} events over {f['cycles']} cycles, stop={f['stop']}")
    s = result.final_state
    stamps = ", ".join(f"{k.value}@{v}" for k, v in sorted(s.stamps().items(), key=lambda kv: kv[1]))
    print(f"stamps: {stamps or '(none)'}; endCycle={s.internals.endCycle}")
    for w in result.warnings:
        print(f"warning: {w}")
    if result.violations:
        for v in result.violations:
            print(f"VIOLATION {v['requirement']} at step {v['step']}: {v['witness']}")
        return EXIT_VIOLATION
    print("verdict: all monitored requirements hold")
    return EXIT_OK


def _parse_fault_list(text: str) -> tuple[FaultSpec, ...]:
    if text in ("", "none"):
        return ()
    out = []
    for part in text.split(","):
        try:
            out.append(FaultSpec.from_key(part.strip()))
        except (ValueError, KeyError) as e:
            raise kernel.ScenarioError(f"fault {part!r}: {e}") from None
    return tuple(out)


def cmd_explore(args) -> int:
    try:
        faults = _parse_fault_list(args.faults)
        failures = tuple(int(x) for x in args.module_failures.split(",") if x.strip())
        initial = tuple(f"pilot.{a.strip()}" for a in args.initial.split(",") if a.strip())
        cfg = explorer.ExploreConfig(
            max_depth=args.depth,
            pilot_budget=args.pilot_budget,
            fault_envelope=faults,
            f_max=args.f_max,
            module_failure_envelope=failures,
            mutant=args.mutant,
            dedupe=not args.no_dedupe,
            initial_actions=initial,
        )
    except (kernel.ScenarioError, ValueError) as e:
        print(f"flag error: {e}", file=sys.stderr)
        return EXIT_PARSE

    try:
        report = explorer.explore(cfg)
    except explorer.FrontierBudgetExceeded as e:
        report = e.report
        report.truncated = True
        report.frontier_exhausted = False

    if not args.no_minimize and report.violations:
        minimized: dict[tuple, explorer.Counterexample] = {}
        for c in report.violations:
            m = explorer.minimize(c, cfg.sim_config())
            minimized.setdefault((m.requirement, m.fp), m)
        report.violations = sorted(minimized.values(), key=lambda c: (c.requirement, c.depth, c.fp))

    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.dumps())
        print(f"report written to {args.report}")
        stem = args.report.rsplit(".", 1)[0]
        for n, c in enumerate(report.violations):
            path = f"{stem}.cx{n}-{c.requirement}.jsonl"
            kernel.trace_from_events(
                c.events, cfg.sim_config(), name=f"counterexample-{c.requirement}"
            ).dump(path)
            print(f"counterexample trace written to {path}")

    status = "frontier exhausted" if report.frontier_exhausted else "state budget exceeded"
    if report.truncated:
        status += " (depth bound reached)"
    print(f"explored {report.states_visited} states, {report.edges_fired} events fired, {status}")
    print(f"quiescent states: {report.quiescent_states}, max depth: {report.max_depth_reached}")
    if report.violations:
        for c in report.violations:
            print(f"COUNTEREXAMPLE {c.requirement} at depth {c.depth}: {c.witness}")
        return EXIT_VIOLATION
    print("no violations found")
    return EXIT_OK if report.frontier_exhausted else EXIT_VIOLATION


def cmd_check(args) -> int:
    try:
        trace = kernel.Trace.load(args.trace)
    except (OSError, kernel.ScenarioError) as e:
        print(f"trace error: {e}", file=sys.stderr)
        return EXIT_PARSE
    config = kernel.config_from_header(trace.header)
    if args.mutant is not None:
        config = replace(config, mutant=args.mutant)
    try:
        result = kernel.replay(trace, config)
    except kernel.CatalogMismatch as e:
        print(f"catalog mismatch: {e}", file=sys.stderr)
        return EXIT_PARSE
    if not result.ok:
        print(f"replay FAILED: {result.detail}")
        return EXIT_VIOLATION
    print(f"replay OK: {result.steps} events re-fired, fingerprints match")
    violations = trace.footer.get("violations", [])
    if violations:
        print(f"trace footer reports {len(violations)} violation(s)")
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_serve(args) -> int:
    from . import server

    preset = None
    if args.preset:
        try:
            preset = scenario.load(args.preset)
        except kernel.ScenarioError as e:
            print(f"preset error: {e}", file=sys.stderr)
            return EXIT_PARSE
    config = SimConfig(mutant=args.mutant)
    print(f"serving on ws://{args.host}:{args.port} (tick {args.tick_ms} ms)")
    server.main(args.host, args.port, config, args.tick_ms / 1000.0, preset=preset)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "explore":
            return cmd_explore(args)
        if args.command == "check":
            return cmd_check(args)
        if args.command == "serve":
            return cmd_serve(args)
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as e:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
