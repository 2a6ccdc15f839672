import datetime
import math
import os
from typing import Any, List

import numpy as np

from .._file_utils import write_json
from .._s3_utils import publish_outputs, s3_bucket_exists
from .._settings import DEFAULT_S3_DATA_DIR, RUN_LOG_FILE_NAME

REPORT_NOTES = [
    "W_B is computed literally as W_tilde_B R^-1 with R = [[P1, -P1], [I, I]]; its "
    "inverse carries a factor 1/2, so W_B Sigma W_B* may differ from unscaled "
    "hand computations by a global positive factor. Definiteness and rank are unaffected.",
    "Boundary traces are ordered (b, a): u = ((Hx)(b), (Hx)(a)). Configs declaring "
    "trace_order 'ab' have the two column blocks of W_tilde_B swapped on load.",
    "kappa bounds 1/2 (u_b* P1 u_b - u_a* P1 u_a) <= -kappa |u_endpoint|^2 on the "
    "traces u of Hx; the H-weighted variant kappa_H(t) = kappa lambda_min(H(t, endpoint))^2 "
    "is reported alongside.",
    "Certificates use kappa_tau = (2 M (|P0| + K_max) |P1^-1| + L_zeta) / m; the shorter "
    "form 2 |P0* P1^-1| + L_zeta / m is reported as kappa_tau_literal for comparison only.",
    "omega is the exponent of squared energies; unsquared norms decay at "
    "amplitude_rate = omega / 2 with prefactor sqrt(L).",
    "The transport counterexample is decided by the exact characteristic solver; the "
    "measured per-period factor is reported next to 2 alpha and need not agree with it.",
    "All discretization choices (central differences with second order one-sided end rows "
    "by default, summation_by_parts as an option, Runge-Kutta 4, trace projection, "
    "trapezoid quadrature) belong to this tool, not to the stability theory.",
]


def log_and_print(log_file, message: str) -> None:
    print(message)
    if log_file is not None:
        log_file.write("%s\n" % message)
        log_file.flush()


def open_run_log(out_dir: str):
    return open(os.path.join(out_dir, RUN_LOG_FILE_NAME), "a")


def sanitize(value: Any) -> Any:
    """Plain JSON types; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(key): sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(item) for item in value]
    if isinstance(value, np.ndarray):
        return [sanitize(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return {"real": sanitize(value.real), "imag": sanitize(value.imag)}
    return value


def write_report(file_path: str, command: str, payload: dict) -> str:
    report = {"command": command}
    report.update(payload)
    report["paper_notes"] = REPORT_NOTES
    # excluded from comparisons between runs
    report["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return write_json(file_path, sanitize(report))


def publish(args, log_file, run_name: str, files: List[str]) -> None:
    use_s3 = True if getattr(args, "s3_bucket_name", None) is not None else False

    if use_s3:
        if not s3_bucket_exists(args.s3_bucket_name):
            use_s3 = False
            log_and_print(
                log_file,
                "Bucket: %s either does not exist or you do not have access to it"
                % args.s3_bucket_name,
            )
        else:
            log_and_print(
                log_file, "Bucket: %s exists and you have access to it" % args.s3_bucket_name
            )

    if use_s3:
        if log_file is not None:
            log_file.flush()
        publish_outputs(args.s3_bucket_name, args.s3_data_dir, run_name, files)


def add_common_arguments(parser, config_required: bool = True) -> None:
    parser.add_argument(
        "--config", type=str, required=config_required, help="Path of the JSON run config."
    )
    parser.add_argument(
        "--out", type=str, default=None, help="Output directory, overrides output.directory."
    )
    parser.add_argument(
        "--strict", action="store_true", help="Reject unknown config keys instead of warning."
    )
    parser.add_argument(
        "--s3_bucket_name", type=str,
    )
    parser.add_argument(
        "--s3_data_dir",
        type=str,
        default=DEFAULT_S3_DATA_DIR,
        help="Prefix of the s3 objects the outputs are published under.",
    )
