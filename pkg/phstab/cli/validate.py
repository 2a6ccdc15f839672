import os

import numpy as np

from .. import algebra
from .._file_utils import create_output_dir
from .._settings import (
    ENDPOINTS,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_VALIDATION_FAILED,
    VALIDATION_REPORT_FILE_NAME,
)
from ..model import (
    FieldEvaluationError,
    PHSystem,
    ValidationReport,
    boundary_dissipation_kappa,
    h_weighted_kappa,
    validate,
)
from ..model.validation import BOUNDARY_RANK, HERMITIAN_P1, PASS
from ._config import ConfigError, load_config, output_dir, system_from_config
from ._reports import (
    add_common_arguments,
    log_and_print,
    open_run_log,
    publish,
    write_report,
)


def _matrix(m) -> dict:
    m = np.asarray(m, dtype=complex)
    description = {"real": m.real.tolist()}
    if np.any(m.imag != 0):
        description["imag"] = m.imag.tolist()
    return description


def print_hypotheses(log_file, report: ValidationReport) -> None:
    log_and_print(log_file, "%-28s %-8s %s" % ("hypothesis", "verdict", "detail"))
    for record in report.records:
        line = "%-28s %-8s %s" % (record.name, record.verdict, record.detail)
        if record.verdict != PASS and record.witness_t is not None:
            line += " (t=%.6g, zeta=%.6g)" % (record.witness_t, record.witness_zeta)
        log_and_print(log_file, line)
    log_and_print(
        log_file,
        "generator_ok: %s, contractive_ok: %s" % (report.generator_ok, report.contractive_ok),
    )


def dissipation_summary(system: PHSystem, report: ValidationReport) -> dict:
    """kappa at both endpoints and its H-weighted variant, when the boundary is usable."""
    if report.record(HERMITIAN_P1).verdict != PASS or report.record(BOUNDARY_RANK).verdict != PASS:
        return {}
    W_B = system.W_B
    summary = {
        "W_B": _matrix(W_B),
        "W_B_Sigma_W_B_star": _matrix(algebra.wb_sigma_wbstar(W_B)),
        "kappa": {},
        "kappa_H": {},
    }
    for endpoint in ENDPOINTS:
        kappa = boundary_dissipation_kappa(system, endpoint)
        summary["kappa"][endpoint] = kappa
        summary["kappa_H"][endpoint] = [
            {"t": t, "kappa_H": value} for t, value in h_weighted_kappa(system, kappa, endpoint)
        ]
    return summary


def run_validation(system: PHSystem, log_file):
    """Validate, print the hypothesis table and build the report payload."""
    report = validate(system)
    print_hypotheses(log_file, report)
    payload = {
        "system": system.describe(),
        "fingerprint": system.fingerprint(),
        "validation": report.as_dict(),
        "dissipation": dissipation_summary(system, report),
    }
    return report, payload


def main(args) -> int:
    try:
        config = load_config(args.config, args.strict)
        system = system_from_config(config)
        out_dir = output_dir(config, args.out)
    except ConfigError as e:
        print("Config error: %s" % e)
        return EXIT_CONFIG_ERROR

    if not create_output_dir(out_dir):
        return EXIT_CONFIG_ERROR

    with open_run_log(out_dir) as log_file:
        log_and_print(log_file, "Validating system %s from %s" % (system.name, args.config))
        for warning in config.warnings:
            log_and_print(log_file, "Warning: %s" % warning)
        try:
            report, payload = run_validation(system, log_file)
        except FieldEvaluationError as e:
            log_and_print(log_file, "Config error: coefficient evaluation failed: %s" % e)
            return EXIT_CONFIG_ERROR

        report_path = write_report(
            os.path.join(out_dir, VALIDATION_REPORT_FILE_NAME), "validate", payload
        )
        log_and_print(log_file, "Validation report written to %s" % report_path)
        publish(args, log_file, "validate", [report_path, log_file.name])

    if not report.generator_ok:
        for record in report.failures():
            print("Failed hypothesis: %s (%s)" % (record.name, record.detail))
        return EXIT_VALIDATION_FAILED
    return EXIT_OK


def add_arguments(parser) -> None:
    add_common_arguments(parser)


if __name__ == "__main__":
    import argparse
    import sys

    parser = argparse.ArgumentParser(
        description="Check the well-posedness and contractivity hypotheses of a system."
    )
    add_arguments(parser)

    args = parser.parse_args()

    sys.exit(main(args))
