import os

from .. import analysis, certificates
from .._file_utils import create_output_dir
from .._settings import (
    EXIT_BLOW_UP,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_VALIDATION_FAILED,
    SIMULATION_SUMMARY_FILE_NAME,
    TRAJECTORY_FILE_NAME,
)
from ..exprlang import ExpressionEvaluationError, ExpressionSyntaxError
from ..model import FieldEvaluationError, PHSystem, ValidationReport
from ..solver import (
    Grid,
    SimulationBlowUp,
    Trajectory,
    check_compatibility,
    export_csv,
    sample_initial_state,
    simulate,
)
from ._config import (
    ConfigError,
    SimSettings,
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
from .validate import run_validation


def initial_state(system: PHSystem, settings: SimSettings):
    try:
        grid = Grid(settings.N, system.interval)
        return sample_initial_state(system, grid, settings.x0)
    except ExpressionSyntaxError as e:
        raise ConfigError("sim.x0", str(e)) from e
    except ExpressionEvaluationError as e:
        raise ConfigError("sim.x0", "evaluation failed: %s" % e) from e
    except ValueError as e:
        raise ConfigError("sim", str(e)) from e


def run_simulation(system: PHSystem, settings: SimSettings, log_file) -> Trajectory:
    log_and_print(
        log_file,
        "Simulating to t=%.6g with N=%d, cfl=%.3g, closure %s"
        % (settings.t_end, settings.N, settings.cfl, settings.closure),
    )
    try:
        return simulate(
            system,
            settings.x0,
            settings.t_end,
            N=settings.N,
            cfl=settings.cfl,
            record_stride=settings.record_stride,
            closure=settings.closure,
            store_states=settings.store_states or settings.include_states,
        )
    except ValueError as e:
        if isinstance(e, ExpressionSyntaxError):
            raise ConfigError("sim.x0", str(e)) from e
        raise ConfigError("sim", str(e)) from e


def trajectory_checks(system: PHSystem, report: ValidationReport, trajectory: Trajectory) -> dict:
    """Decay fit and the energy inequalities that apply to this system."""
    checks = {}
    try:
        checks["decay_fit"] = analysis.decay_fit(trajectory).as_dict()
    except ValueError as e:
        checks["decay_fit"] = {"skipped": str(e)}
    if len(trajectory) > 1:
        checks["growth_bound"] = analysis.check_growth_bound(
            trajectory, certificates.c_T(system)
        ).as_dict()
        if report.contractive_ok:
            checks["contraction"] = analysis.check_contraction(trajectory).as_dict()
        checks["datko"] = analysis.datko_indicator(trajectory).as_dict()
    return checks


def main(args) -> int:
    try:
        config = load_config(args.config, args.strict)
        system = system_from_config(config)
        settings = sim_settings(config)
        formats = output_formats(config)
        out_dir = output_dir(config, args.out)
        x0 = initial_state(system, settings)
    except ConfigError as e:
        print("Config error: %s" % e)
        return EXIT_CONFIG_ERROR

    if not create_output_dir(out_dir):
        return EXIT_CONFIG_ERROR

    with open_run_log(out_dir) as log_file:
        log_and_print(log_file, "Simulating system %s from %s" % (system.name, args.config))
        for warning in config.warnings:
            log_and_print(log_file, "Warning: %s" % warning)
        try:
            report, validation = run_validation(system, log_file)
        except FieldEvaluationError as e:
            log_and_print(log_file, "Config error: coefficient evaluation failed: %s" % e)
            return EXIT_CONFIG_ERROR
        if not report.generator_ok:
            log_and_print(log_file, "System does not generate an evolution family, not simulating")
            return EXIT_VALIDATION_FAILED

        compatibility = check_compatibility(system, x0)
        if not compatibility.ok:
            log_and_print(
                log_file,
                "Warning: initial state violates the boundary condition (residual %.3e)"
                % compatibility.residual,
            )
        if not compatibility.smooth:
            log_and_print(
                log_file,
                "Warning: initial state is rough (curvature indicator %.3e)"
                % compatibility.curvature,
            )

        try:
            trajectory = run_simulation(system, settings, log_file)
        except SimulationBlowUp as e:
            log_and_print(log_file, "Simulation blew up: %s" % e)
            return EXIT_BLOW_UP
        except ConfigError as e:
            log_and_print(log_file, "Config error: %s" % e)
            return EXIT_CONFIG_ERROR

        written = []
        if "csv" in formats:
            written.append(
                export_csv(
                    trajectory,
                    os.path.join(out_dir, TRAJECTORY_FILE_NAME),
                    include_states=settings.include_states,
                )
            )
        summary = trajectory.summary()
        summary["compatibility"] = compatibility._asdict()
        summary["checks"] = trajectory_checks(system, report, trajectory)
        written.append(
            write_report(
                os.path.join(out_dir, SIMULATION_SUMMARY_FILE_NAME),
                "simulate",
                {
                    "system": system.describe(),
                    "fingerprint": system.fingerprint(),
                    "validation": validation["validation"],
                    "simulation": summary,
                },
            )
        )
        log_and_print(
            log_file,
            "E(0) = %.6g, E(%.6g) = %.6g, relative drift %.3e"
            % (
                trajectory.initial_energy,
                trajectory.times[-1],
                trajectory.final_energy,
                trajectory.relative_drift(),
            ),
        )
        for path in written:
            log_and_print(log_file, "Wrote %s" % path)
        publish(args, log_file, "simulate", written + [log_file.name])

    return EXIT_OK


def add_arguments(parser) -> None:
    add_common_arguments(parser)


if __name__ == "__main__":
    import argparse
    import sys

    parser = argparse.ArgumentParser(
        description="Simulate a port-Hamiltonian system and record energies and traces."
    )
    add_arguments(parser)

    args = parser.parse_args()

    sys.exit(main(args))
