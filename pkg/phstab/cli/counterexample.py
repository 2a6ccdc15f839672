import os

from .. import transportnet
from .._file_utils import create_output_dir, write_csv
from .._settings import (
    COUNTEREXAMPLE_FILE_NAME,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    GROWTH_FILE_NAME,
)
from ._config import (
    counterexample_settings,
    load_config,
    output_dir,
    output_formats,
)
from ._reports import (
    add_common_arguments,
    log_and_print,
    open_run_log,
    publish,
    write_report,
)


def envelope_holds(sequence, envelope, period) -> bool:
    """|x(kT)| <= M_tilde exp(omega_tilde kT) |x(0)| at every period end."""
    initial = sequence.norms[0]
    return all(
        norm <= envelope.bound(k * period) * initial * (1.0 + 1e-12)
        for k, norm in enumerate(sequence.norms)
    )


def main(args) -> int:
    try:
        config = load_config(args.config, args.strict) if args.config is not None else None
        settings = counterexample_settings(config, args.alpha, args.periods)
        formats = output_formats(config)
        out_dir = output_dir(config, args.out)
        net = transportnet.counterexample_network(settings.alpha)
        sequence = transportnet.growth_sequence(settings.alpha, settings.periods, net)
    except ValueError as e:
        print("Config error: %s" % e)
        return EXIT_CONFIG_ERROR

    if not create_output_dir(out_dir):
        return EXIT_CONFIG_ERROR

    with open_run_log(out_dir) as log_file:
        if config is not None:
            for warning in config.warnings:
                log_and_print(log_file, "Warning: %s" % warning)
        log_and_print(
            log_file,
            "Transport network, alpha = %.6g, %d periods" % (settings.alpha, settings.periods),
        )
        for k, norm, ratio, sup_norm in sequence.rows():
            log_and_print(
                log_file, "%4d  |x| = %.10g  ratio = %.6g  sup = %.6g" % (k, norm, ratio, sup_norm)
            )

        envelope = transportnet.exponential_envelope(net)
        result = {
            "alpha": sequence.alpha,
            "periods": settings.periods,
            "norms": sequence.norms,
            "ratios": sequence.ratios,
            "sup_norms": sequence.sup_norms,
            "slope": sequence.slope,
            "verdict": sequence.verdict,
            "measured_factor": sequence.measured_factor,
            "claimed_factor": sequence.claimed_factor,
            "envelope": {
                "step_bound": envelope.step_bound,
                "step": float(envelope.step),
                "M_tilde": envelope.M_tilde,
                "omega_tilde": envelope.omega_tilde,
                "holds": envelope_holds(sequence, envelope, net.schedule.period),
            },
        }
        if settings.cross_check:
            period = net.schedule.period
            exact = sequence.norms[1]
            estimate = transportnet.riemann_l2_norm(net, period)
            result["riemann_cross_check"] = {
                "t": float(period),
                "exact": exact,
                "midpoint": estimate,
                "relative_difference": abs(estimate - exact) / exact if exact > 0 else 0.0,
            }

        written = []
        if "csv" in formats:
            written.append(
                write_csv(
                    os.path.join(out_dir, GROWTH_FILE_NAME),
                    ["k", "norm", "ratio", "sup_norm"],
                    sequence.rows(),
                )
            )
        written.append(
            write_report(
                os.path.join(out_dir, COUNTEREXAMPLE_FILE_NAME),
                "counterexample",
                {"counterexample": result},
            )
        )
        log_and_print(
            log_file,
            "Verdict: %s (log slope %.4g per period, measured factor %.6g, 2 alpha = %.6g)"
            % (sequence.verdict, sequence.slope, sequence.measured_factor, sequence.claimed_factor),
        )
        for path in written:
            log_and_print(log_file, "Wrote %s" % path)
        publish(args, log_file, "counterexample", written + [log_file.name])

    return EXIT_OK


def add_arguments(parser) -> None:
    add_common_arguments(parser, config_required=False)
    parser.add_argument(
        "--alpha", type=float, default=None, help="Coupling gain, overrides counterexample.alpha."
    )
    parser.add_argument(
        "--periods", type=int, default=None, help="Number of periods, overrides counterexample.periods."
    )


if __name__ == "__main__":
    import argparse
    import sys

    parser = argparse.ArgumentParser(
        description="Norm growth of the transport network with time-varying speeds."
    )
    add_arguments(parser)

    args = parser.parse_args()

    sys.exit(main(args))
