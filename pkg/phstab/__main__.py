import argparse
import logging
import sys

from ._settings import EXIT_CONFIG_ERROR
from .cli import certify, counterexample, report, simulate, validate

COMMANDS = [
    ("validate", validate, "Check the well-posedness and contractivity hypotheses of a system."),
    ("simulate", simulate, "Simulate a system and record energies and boundary traces."),
    ("certify", certify, "Compute an explicit exponential decay certificate."),
    ("counterexample", counterexample, "Norm growth of the non-contractive transport network."),
    ("report", report, "Gather the reports of an output directory into one file."),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phstab",
        description="Simulation and stability certificates for non-autonomous port-Hamiltonian systems.",
    )
    parser.add_argument(
        "--verbose", action="store_true", help="Show the debug log of the library modules."
    )
    subparsers = parser.add_subparsers(dest="command")
    for name, module, help_text in COMMANDS:
        subparser = subparsers.add_parser(name, help=help_text, description=help_text)
        module.add_arguments(subparser)
        subparser.set_defaults(func=module.main)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help()
        return EXIT_CONFIG_ERROR
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(run())
