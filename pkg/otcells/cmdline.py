import argparse
import logging
import sys

import otcells
from otcells.errors import OTCellsUserError, filtered_exceptions, otcells_exc_handler

VERSION = "otcells " + otcells.__version__
EPILOG = """
SCENARIO is a scenario file or the name of a bundled preset
(see `otcells presets list`).

exit status:
  0  solved and converged
  1  error
  2  outputs written, but some solve did not converge
"""

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def _status(converged):
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def format_summary(scenario, record):
    report = record.report
    lines = [
        f"scenario {scenario.name} ({scenario.policy})",
        "  converged: {} after {} iteration(s), residual {:.3g}".format(
            report["converged"], report["iterations"], report["residual"]
        ),
        "  total cost: {:.10g}".format(report["total_cost"]),
    ]
    for s, m in zip(scenario.stations, report["masses"]):
        lines.append(
            "  station {}: mass {:.6f}, {:.1f} users".format(
                s.index, m, m * scenario.total_users
            )
        )
    if "price_of_anarchy" in report:
        lines.append(
            "  {} equilibri{}, price of anarchy {:.6g}".format(
                len(report["equilibria"]),
                "um" if len(report["equilibria"]) == 1 else "a",
                report["price_of_anarchy"],
            )
        )
    lines.append(f"  partition: {record.partition_path}")
    lines.append(f"  report: {record.report_path}")
    return "\n".join(lines)


def run_main(options):
    from otcells.experiments import run_scenario
    from otcells.scenario import load_scenario

    scenario = load_scenario(options.scenario)
    record = run_scenario(scenario, options.out_dir)
    print(format_summary(scenario, record))
    return _status(record.converged)


def sweep_main(options):
    from otcells.experiments import sweep_station_position
    from otcells.scenario import load_scenario

    scenario = load_scenario(options.scenario)
    result = sweep_station_position(
        scenario,
        options.station,
        options.start,
        options.stop,
        options.steps,
        jobs=options.jobs,
        out_dir=options.out_dir,
        criterion=options.criterion,
    )
    print(f"{len(result.rows)} positions written to {result.path}")
    return _status(result.converged)


def compare_main(options):
    from otcells.experiments import compare_policies
    from otcells.scenario import load_scenario

    scenario = load_scenario(options.scenario)
    policies = [p.strip() for p in options.policies.split(",") if p.strip()]
    comparison = compare_policies(scenario, policies, options.out_dir)
    for name, entry in comparison["policies"].items():
        print("{:<12} cost {:.10g}".format(name, entry["total_cost"]))
    for pair, ratio in comparison["ratios"].items():
        print("{:<25} ratio {}".format(pair, "undefined" if ratio is None else f"{ratio:.6g}"))
    return _status(comparison["converged"])


def oracle_main(options):
    from otcells.experiments import check_oracle
    from otcells.scenario import load_scenario

    scenario = load_scenario(options.scenario)
    check = check_oracle(scenario, options.rtol)
    print(f"oracle ({check.mode}): {check.oracle_cost:.12g}")
    print(f"solver: {check.solver_cost:.12g} (relative gap {check.gap:.3g})")
    if not check.agrees:
        print("solver and oracle disagree", file=sys.stderr)
        return EXIT_ERROR
    return _status(check.converged)


def presets_main(options):
    from otcells.scenario import preset_names, read_preset

    if options.action == "list":
        for name in preset_names():
            print(name)
    else:
        if not options.name:
            print("presets show: a preset name is required", file=sys.stderr)
            return EXIT_ERROR
        sys.stdout.write(read_preset(options.name))
    return EXIT_OK


def make_parser():
    parser = argparse.ArgumentParser(
        prog="otcells",
        description="Optimal and equilibrium cell partitions for base-station association.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=VERSION)
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log solver progress to stderr (-vv for every iteration)",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def scenario_command(name, handler, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("scenario", metavar="SCENARIO")
        p.add_argument(
            "-o",
            "--out-dir",
            default=None,
            help="directory for the output files (default: the working directory)",
        )
        p.set_defaults(handler=handler)
        return p

    scenario_command("run", run_main, "solve a scenario with its policy")

    p = scenario_command(
        "sweep", sweep_main, "move one station along a 1D domain and tabulate the cells"
    )
    p.add_argument("--station", type=int, required=True, help="index of the station to move")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1, help="worker threads (default: 1)")
    p.add_argument(
        "--criterion",
        choices=["worst", "best"],
        default="worst",
        help="equilibrium to record when there are several (default: worst)",
    )

    p = scenario_command(
        "compare", compare_main, "price several policies under one objective"
    )
    p.add_argument(
        "--policies",
        required=True,
        help="comma-separated policies, e.g. rate-fair,wardrop",
    )

    p = scenario_command(
        "oracle", oracle_main, "check the congestion solver against brute force"
    )
    p.add_argument(
        "--rtol", type=float, default=None, help="allowed relative cost gap"
    )

    p = sub.add_parser("presets", help="list or print the bundled scenarios")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p.set_defaults(handler=presets_main)
    return parser


def _configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )
    # Convergence warnings go through the same handler.
    logging.captureWarnings(True)


# entry point for cmd line script "otcells"
def otcells_main(argv=None):
    options = make_parser().parse_args(sys.argv[1:] if argv is None else argv)
    _configure_logging(options.verbose)
    with filtered_exceptions():
        try:
            return options.handler(options)
        except OTCellsUserError:
            otcells_exc_handler(*sys.exc_info())
            return EXIT_ERROR
