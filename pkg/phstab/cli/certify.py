import os

import numpy as np

from .. import analysis, certificates
from .._file_utils import create_output_dir, write_csv
from .._settings import (
    CERTIFICATE_FILE_NAME,
    EXIT_BLOW_UP,
    EXIT_CERTIFICATE_REFUSED,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    OBSERVABILITY_FILE_NAME,
)
from ..model import (
    FieldEvaluationError,
    PHSystem,
    ValidationReport,
    boundary_dissipation_kappa,
    h_weighted_kappa,
)
from ..solver import SimulationBlowUp
from ._config import (
    CertifySettings,
    ConfigError,
    certify_settings,
    load_config,
    output_dir,
    output_formats,
    sim_settings,
    system_from_config,
)
from ._reports import (
    add_common_arguments,
    log_and_print,
    open_run_log,
    publish,
    write_report,
)
from .simulate import initial_state, run_simulation
from .validate import run_validation


def tau_grid(system: PHSystem, settings: CertifySettings):
    if settings.tau_grid is not None:
        return list(settings.tau_grid)
    if settings.tau_bounds is not None:
        lower, upper = settings.tau_bounds
        return np.geomspace(lower, upper, settings.tau_count).tolist()
    return certificates.default_tau_grid(system, settings.tau_count).tolist()


def refusal(report: ValidationReport, system: PHSystem, taus, error=None) -> dict:
    """Payload of a refused certificate: the failed hypothesis and the growth that still holds."""
    if error is not None:
        hypothesis, message = error.hypothesis, str(error)
    else:
        failed = report.failures()
        hypothesis = failed[0].name if failed else None
        message = "; ".join("%s: %s" % (record.name, record.detail) for record in failed)
    refused = {"hypothesis": hypothesis, "message": message}
    if report.generator_ok:
        refused["M_tau"] = [
            {"tau": float(tau), "M_tau": certificates.growth_constant(system, tau)} for tau in taus
        ]
    return refused


def cross_check(config, system, certificate, log_file, out_dir, formats) -> dict:
    """Simulate the configured initial state and hold the trajectory against the certificate."""
    settings = sim_settings(config)
    # surfaces bad x0 expressions as config errors before stepping
    initial_state(system, settings)
    trajectory = run_simulation(system, settings, log_file)
    comparison = analysis.compare_certificate(trajectory, certificate)
    comparison["growth_bound"] = analysis.check_growth_bound(
        trajectory, certificate.c_T
    ).as_dict()
    try:
        observability = analysis.check_observability(
            trajectory, system, certificate.tau, certificate.endpoint, C=certificate.C_tau
        )
    except ValueError as e:
        log_and_print(log_file, "Observability check skipped: %s" % e)
        comparison["observability"] = {"skipped": str(e)}
        return comparison
    comparison["observability"] = observability.as_dict()
    if "csv" in formats:
        comparison["observability_file"] = write_csv(
            os.path.join(out_dir, OBSERVABILITY_FILE_NAME),
            ["s", "lhs", "rhs"],
            observability.rows,
        )
    log_and_print(
        log_file,
        "Cross-check: soundness %s (worst ratio %.4g), observability %s (worst ratio %.4g)"
        % (
            "passed" if comparison["soundness"]["passed"] else "FAILED",
            comparison["soundness"]["worst_ratio"],
            "passed" if observability.passed else "FAILED",
            observability.worst_ratio,
        ),
    )
    return comparison


def main(args) -> int:
    try:
        config = load_config(args.config, args.strict)
        system = system_from_config(config)
        settings = certify_settings(config)
        formats = output_formats(config)
        out_dir = output_dir(config, args.out)
    except ConfigError as e:
        print("Config error: %s" % e)
        return EXIT_CONFIG_ERROR

    if not create_output_dir(out_dir):
        return EXIT_CONFIG_ERROR

    certificate_path = os.path.join(out_dir, CERTIFICATE_FILE_NAME)
    with open_run_log(out_dir) as log_file:
        log_and_print(log_file, "Certifying system %s from %s" % (system.name, args.config))
        for warning in config.warnings:
            log_and_print(log_file, "Warning: %s" % warning)
        try:
            report, validation = run_validation(system, log_file)
        except FieldEvaluationError as e:
            log_and_print(log_file, "Config error: coefficient evaluation failed: %s" % e)
            return EXIT_CONFIG_ERROR

        taus = tau_grid(system, settings)
        payload = {
            "system": system.describe(),
            "fingerprint": system.fingerprint(),
            "validation": validation["validation"],
        }
        if not report.generator_ok:
            payload["refused"] = refusal(report, system, taus)
            write_report(certificate_path, "certify", payload)
            log_and_print(
                log_file, "Certificate refused: %s" % payload["refused"]["message"]
            )
            publish(args, log_file, "certify", [certificate_path, log_file.name])
            return EXIT_CERTIFICATE_REFUSED

        if settings.kappa is not None:
            kappa = settings.kappa
            log_and_print(log_file, "Using kappa = %.6g from the config" % kappa)
        else:
            kappa = boundary_dissipation_kappa(system, settings.endpoint)
            log_and_print(
                log_file, "Boundary dissipation kappa = %.6g at %s" % (kappa, settings.endpoint)
            )
        payload["kappa"] = kappa
        payload["kappa_H"] = [
            {"t": t, "kappa_H": value}
            for t, value in h_weighted_kappa(system, kappa, settings.endpoint)
        ]
        payload["tau_table"] = certificates.certificate_table(system, kappa, taus)

        try:
            certificate = certificates.decay_certificate(
                system, kappa, taus, report=report, endpoint=settings.endpoint
            )
        except certificates.CertificateError as e:
            payload["refused"] = refusal(report, system, taus, e)
            write_report(certificate_path, "certify", payload)
            log_and_print(log_file, "Certificate refused (%s): %s" % (e.hypothesis, e))
            publish(args, log_file, "certify", [certificate_path, log_file.name])
            return EXIT_CERTIFICATE_REFUSED

        payload["certificate"] = certificate.as_dict()
        log_and_print(
            log_file,
            "Certificate: E(t) <= %.6g exp(%.6g (t - s)) E(s), tau = %.6g, C_tau = %.6g"
            % (certificate.L, certificate.omega, certificate.tau, certificate.C_tau),
        )

        written = [certificate_path]
        if settings.cross_check and "sim" in config.data:
            try:
                comparison = cross_check(config, system, certificate, log_file, out_dir, formats)
            except ConfigError as e:
                log_and_print(log_file, "Config error: %s" % e)
                return EXIT_CONFIG_ERROR
            except SimulationBlowUp as e:
                log_and_print(log_file, "Simulation blew up: %s" % e)
                return EXIT_BLOW_UP
            observability_file = comparison.pop("observability_file", None)
            if observability_file is not None:
                written.append(observability_file)
            payload["cross_check"] = comparison
        elif settings.cross_check:
            log_and_print(log_file, "Warning: cross_check requested without a sim block, skipped")

        write_report(certificate_path, "certify", payload)
        for path in written:
            log_and_print(log_file, "Wrote %s" % path)
        publish(args, log_file, "certify", written + [log_file.name])

    return EXIT_OK


def add_arguments(parser) -> None:
    add_common_arguments(parser)


if __name__ == "__main__":
    import argparse
    import sys

    parser = argparse.ArgumentParser(
        description="Compute an explicit exponential decay certificate for a system."
    )
    add_arguments(parser)

    args = parser.parse_args()

    sys.exit(main(args))
