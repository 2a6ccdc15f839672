import json
import os

from .._file_utils import get_files_from_dir, read_json
from .._settings import (
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    REPORT_FILE_NAME,
    REPORT_FILE_TYPE,
    SERIES_FILE_TYPE,
)
from ._config import ConfigError, load_config, output_dir
from ._reports import (
    add_common_arguments,
    log_and_print,
    open_run_log,
    publish,
    write_report,
)


def outcome(report: dict) -> str:
    """One line verdict of a command report."""
    command = report.get("command")
    if command == "validate":
        validation = report.get("validation", {})
        return "generator_ok=%s contractive_ok=%s" % (
            validation.get("generator_ok"),
            validation.get("contractive_ok"),
        )
    if command == "simulate":
        simulation = report.get("simulation", {})
        return "E0=%s E_end=%s drift=%s" % (
            simulation.get("initial_energy"),
            simulation.get("final_energy"),
            simulation.get("relative_drift"),
        )
    if command == "certify":
        if "refused" in report:
            return "refused (%s)" % report["refused"].get("hypothesis")
        certificate = report.get("certificate", {})
        return "omega=%s L=%s tau=%s" % (
            certificate.get("omega"),
            certificate.get("L"),
            certificate.get("tau"),
        )
    if command == "counterexample":
        counterexample = report.get("counterexample", {})
        return "alpha=%s verdict=%s" % (
            counterexample.get("alpha"),
            counterexample.get("verdict"),
        )
    return "-"


def gather(dir_path: str):
    """Command reports of an output directory by file name, and the series files next to them."""
    reports = {}
    for file_name in get_files_from_dir(dir_path, REPORT_FILE_TYPE):
        if file_name == REPORT_FILE_NAME:
            continue
        try:
            content = read_json(os.path.join(dir_path, file_name))
        except (OSError, json.JSONDecodeError) as e:
            print("Skipping %s: %s" % (file_name, e))
            continue
        if isinstance(content, dict) and "command" in content:
            reports[file_name] = content
    series = get_files_from_dir(dir_path, SERIES_FILE_TYPE)
    return reports, series


def main(args) -> int:
    try:
        config = load_config(args.config, args.strict) if args.config is not None else None
        out_dir = output_dir(config, args.out)
    except ConfigError as e:
        print("Config error: %s" % e)
        return EXIT_CONFIG_ERROR

    if not os.path.isdir(out_dir):
        print("Output directory %s does not exist" % out_dir)
        return EXIT_CONFIG_ERROR
    reports, series = gather(out_dir)
    with open_run_log(out_dir) as log_file:
        log_and_print(log_file, "%-28s %-16s %s" % ("file", "command", "outcome"))
        for file_name, content in reports.items():
            log_and_print(
                log_file, "%-28s %-16s %s" % (file_name, content["command"], outcome(content))
            )
        for file_name in series:
            log_and_print(log_file, "%-28s %-16s %s" % (file_name, "series", "-"))

        report_path = write_report(
            os.path.join(out_dir, REPORT_FILE_NAME),
            "report",
            {
                "reports": {
                    file_name: {key: value for key, value in content.items() if key != "paper_notes"}
                    for file_name, content in reports.items()
                },
                "series": series,
            },
        )
        log_and_print(log_file, "Wrote %s" % report_path)
        publish(args, log_file, "report", [report_path, log_file.name])

    return EXIT_OK


def add_arguments(parser) -> None:
    add_common_arguments(parser, config_required=False)


if __name__ == "__main__":
    import argparse
    import sys

    parser = argparse.ArgumentParser(
        description="Gather the reports of an output directory into one file."
    )
    add_arguments(parser)

    args = parser.parse_args()

    sys.exit(main(args))
