#!/usr/bin/env python3
"""
BatteryCap - Quantum battery capacity toolkit

A CLI tool to simulate two-photon polarization experiments, reconstruct the
states by maximum-likelihood tomography, and report the battery capacity of
photon I against its entropy, coherence and entanglement with photon II.

Usage:
    bcap <command> [options]

Example:
    bcap pipeline --seed 7 --output-dir ./report
    bcap verify-relations --samples 100000
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np
import yaml
from tqdm import tqdm

# Install directory for all BatteryCap files
INSTALL_DIR = Path.home() / ".batterycap"

# Add install directory to path for module imports
if INSTALL_DIR.exists():
    sys.path.insert(0, str(INSTALL_DIR))
# Also add script directory for development
sys.path.insert(0, str(Path(__file__).parent))

from banner import print_banner  # noqa: E402
from battery import capacity  # noqa: E402
from estimators import (  # noqa: E402
    ESTIMATORS,
    TomographyResult,
    UnderdeterminedSet,
    get_estimator,
    list_estimators,
)
from photonics import (  # noqa: E402
    TOMOGRAPHY_SETTINGS,
    EmptyRecord,
    list_noise_models,
    records_from_data,
    records_to_json,
    simulate_counts,
)
from qstate import (  # noqa: E402
    BatteryCapError,
    ObservableHamiltonian,
    matrix_from_pairs,
    qubit_matrices,
    validate_density,
)
from report import (  # noqa: E402
    ConfigError,
    PipelineConfig,
    PipelineError,
    __version__,
    analyze_state,
    canonical_json,
    emit_report,
    run_pipeline,
)
from resources import ANALYTIC_TOLERANCE, check_relations_batch  # noqa: E402

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_DEGENERATE = 2
EXIT_USAGE = 64

RELATION_ORDERS = (2.0, 2.5, 3.0, 5.0)
MAX_PRINTED_VIOLATIONS = 20
SWEEP_CHUNK = 10_000

logger = logging.getLogger("batterycap")


class UsageError(BatteryCapError):
    pass


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def get_file_path(filename: str) -> Path:
    """Get the path to a file, checking install dir first, then script dir."""
    install_path = INSTALL_DIR / filename
    if install_path.exists():
        return install_path

    script_path = Path(__file__).parent / filename
    if script_path.exists():
        return script_path

    return install_path


def load_config(path: Optional[str] = None) -> dict:
    """
    Load configuration from YAML (or JSON).

    An explicit path must exist. Without one, config.yaml is looked up in the
    install directory and then next to the script; if neither exists the
    built-in defaults apply.
    """
    if path:
        config_path = Path(path).expanduser()
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}")
    else:
        config_path = get_file_path("config.yaml")
        if not config_path.exists():
            return {}

    try:
        with open(config_path) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not parse {config_path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{config_path} must contain a mapping of configuration keys")
    return data


def load_pipeline_config(args) -> PipelineConfig:
    config = PipelineConfig.from_dict(load_config(args.config))
    for flag, attr in (
        ("seed", "seed"),
        ("output_dir", "output_dir"),
        ("format", "format"),
        ("workers", "workers"),
        ("resamples", "bootstrap_resamples"),
        ("estimator", "estimator"),
        ("theta", "thetas"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(config, attr, value)
    if getattr(args, "analytic", False):
        config.analytic = True
    if getattr(args, "summary", False):
        config.summary = True
    return config


def read_json(path: str):
    file_path = Path(path).expanduser()
    if not file_path.exists():
        raise UsageError(f"File not found: {file_path}")
    try:
        return json.loads(file_path.read_text())
    except json.JSONDecodeError as e:
        raise UsageError(f"{file_path} is not valid JSON: {e}")


def read_state(path: str):
    """A TomographyResult document, or a bare matrix of [re, im] pairs."""
    data = read_json(path)
    if isinstance(data, dict):
        return TomographyResult.from_dict(data).rho
    return validate_density(matrix_from_pairs(data))


def write_output(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    output_path = Path(output).expanduser()
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(text if text.endswith("\n") else text + "\n")
    print(f"Saved: {output_path}")


def cmd_simulate(args) -> int:
    config = load_pipeline_config(args)
    source = config.source(args.theta_deg)
    is_valid, error = source.validate()
    if not is_valid:
        raise ConfigError(error)

    logger.info("Simulating theta = %g deg, %s noise s = %g", source.theta, source.noise_model, source.noise_strength)
    rho = source.prepare()
    records = simulate_counts(rho, TOMOGRAPHY_SETTINGS, source.mean_counts_per_setting, source.seed)
    write_output(records_to_json(records), args.output)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    config = load_pipeline_config(args)
    records = records_from_data(read_json(args.counts))

    target = read_state(args.target) if args.target else None
    estimator = get_estimator(config.estimator, {"max_iter": config.max_iter, "grad_tol": config.grad_tol})
    logger.info("Reconstructing with %s", estimator.name)
    result = estimator.reconstruct(records, target=target, strict=args.strict)
    write_output(json.dumps(result.to_dict(), indent=2), args.output)
    return EXIT_OK


def cmd_analyze(args) -> int:
    config = load_pipeline_config(args)
    rho = read_state(args.state)
    unit_energy = args.unit_energy if args.unit_energy is not None else config.unit_energy
    q = args.q if args.q is not None else config.tsallis_q
    write_output(canonical_json(analyze_state(rho, unit_energy, q)), args.output)
    return EXIT_OK


def cmd_capacity(args) -> int:
    rho = read_state(args.state)
    if args.matrix:
        hamiltonian = ObservableHamiltonian.from_matrix(_read_matrix(args.matrix), args.unit_energy)
    elif args.levels:
        try:
            levels = [float(level) for level in args.levels.split(",")]
        except ValueError:
            raise UsageError(f"--levels must be comma-separated numbers, got '{args.levels}'")
        hamiltonian = ObservableHamiltonian.from_levels(levels, args.unit_energy)
    else:
        hamiltonian = ObservableHamiltonian.from_levels(range(rho.dim), args.unit_energy)
    write_output(json.dumps(capacity(rho, hamiltonian).to_dict(), indent=2), args.output)
    return EXIT_OK


def _read_matrix(path: str) -> np.ndarray:
    data = np.asarray(read_json(path))
    if data.ndim == 3:
        return matrix_from_pairs(data)
    return np.asarray(data, dtype=complex)


def cmd_pipeline(args) -> int:
    print("Loading configuration...")
    config = load_pipeline_config(args)
    is_valid, error = config.validate()
    if not is_valid:
        raise ConfigError(error)

    mode = "analytic" if config.analytic else f"{config.estimator}, {config.bootstrap_resamples} resamples"
    print(f"  Angles: {', '.join(f'{t:g}' for t in config.thetas) or 'none'}")
    print(f"  Noise: {config.noise_model} (s = {config.noise_strength:g})")
    print(f"  Mode: {mode}")
    print(f"  Seed: {config.seed}")

    print("Running pipeline...")
    bundle = run_pipeline(config, progress=args.verbose)
    for row in bundle.rows:
        status = "" if row.converged else "  (not converged)"
        print(
            f"  theta = {row.theta:g}: capacity = {row.values['capacity']:.4f} +/- {row.errors['capacity']:.4f}, "
            f"fidelity = {row.fidelity_to_ideal:.4f}{status}"
        )

    print("Writing report...")
    written = emit_report(bundle, config.format, config.output_dir)
    for path in written:
        print(f"  {path}")

    if bundle.is_empty:
        print("No angles configured; wrote manifest only.")
        return EXIT_DEGENERATE
    return EXIT_OK


def _describe_violation(sweep, index: int, p: np.ndarray, r: np.ndarray, phase: np.ndarray) -> str:
    sums = ", ".join(f"{name}={value:.12g}" for name, value in sweep.violations(index))
    return f"p={float(p[index])!r} r={float(r[index])!r} phase={float(phase[index])!r}: {sums}"


def cmd_verify_relations(args) -> int:
    if args.samples <= 0:
        raise UsageError(f"--samples must be positive, got {args.samples}")
    orders = args.q or list(RELATION_ORDERS)
    low = [q for q in orders if q < 2.0]
    if low:
        raise UsageError(f"--q must be >= 2 for the capacity relations, got {low[0]:g}")

    rng = np.random.default_rng(args.seed)
    hamiltonian = ObservableHamiltonian.from_levels([0.0, 1.0], 1.0)

    print(f"Checking {args.samples} random qubit states at tolerance {args.tolerance:g}...")
    failed = 0
    rel_negative = 0
    examples = []
    with tqdm(total=args.samples, disable=not args.verbose) as bar:
        for start in range(0, args.samples, SWEEP_CHUNK):
            n = min(SWEEP_CHUNK, args.samples - start)
            p = rng.uniform(0.0, 1.0, size=n)
            r = rng.uniform(0.0, np.sqrt(p * (1 - p)))
            phase = rng.uniform(0.0, 2 * np.pi, size=n)
            sweep = check_relations_batch(qubit_matrices(p, r, phase), hamiltonian, orders, args.tolerance)

            broken = np.flatnonzero(sweep.failed)
            failed += broken.size
            rel_negative += int(np.count_nonzero(sweep.ccu_rel < -args.tolerance))
            for index in broken[: MAX_PRINTED_VIOLATIONS - len(examples)]:
                examples.append(_describe_violation(sweep, index, p, r, phase))
            bar.update(n)

    print(f"  Orders q: {', '.join(f'{q:g}' for q in orders)}")
    print(f"  Violations: {failed}")
    print(f"  Relative-entropy coherence above capacity: {rel_negative} (informational)")
    for line in examples:
        print(f"  Violation: {line}")
    if failed > len(examples):
        print(f"  ... and {failed - len(examples)} more")
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_status(args) -> int:
    """Display effective configuration and available components."""
    print("BatteryCap - Status\n")
    print("=" * 50)

    config_path = Path(args.config).expanduser() if args.config else get_file_path("config.yaml")
    if config_path.exists():
        print(f"\nConfig file: {config_path}")
    else:
        print("\nConfig file: NOT FOUND (using defaults)")
        print(f"  Expected at: {config_path}")

    config = load_pipeline_config(args)
    is_valid, error = config.validate()

    print("\n--- Pipeline ---")
    print(f"Angles: {', '.join(f'{t:g}' for t in config.thetas)}")
    print(f"Unit energy: {config.unit_energy:g}")
    print(f"Tsallis order: {config.tsallis_q:g}")
    print(f"Bootstrap resamples: {config.bootstrap_resamples}")
    print(f"Analytic: {'Yes' if config.analytic else 'No'}")

    print("\n--- Source ---")
    print(f"Noise model: {config.noise_model} (available: {', '.join(list_noise_models())})")
    print(f"Noise strength: {config.noise_strength:g}")
    print(f"Mean counts per setting: {config.mean_counts_per_setting:g}")
    print(f"Seed: {config.seed}")

    print("\n--- Estimator ---")
    print(f"Estimator: {config.estimator}")
    for name in list_estimators():
        estimator = ESTIMATORS[name]({})
        print(f"  {name}: {estimator.description}")
    print(f"Max iterations: {config.max_iter}")
    print(f"Gradient tolerance: {config.grad_tol:g}")

    print("\n--- Output ---")
    print(f"Directory: {config.output_dir}")
    print(f"Format: {config.format}")
    print(f"HTML summary: {'Yes' if config.summary else 'No'}")

    print("\n--- Installation ---")
    print(f"Version: {__version__}")
    print(f"Install directory: {INSTALL_DIR}")
    print(f"Status: {'Installed' if INSTALL_DIR.exists() else 'Running from source'}")
    print(f"Config: {'Valid' if is_valid else f'Invalid - {error}'}")
    print("\n" + "=" * 50)
    return EXIT_OK if is_valid else EXIT_USAGE


def build_parser() -> CliParser:
    parser = CliParser(
        prog="bcap",
        description="BatteryCap - Quantum battery capacity from simulated two-photon tomography",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  bcap simulate --theta-deg 30 -o counts.json
  bcap reconstruct counts.json -o state.json
  bcap analyze state.json
  bcap capacity state.json --levels 0,1 --unit-energy 2

  # Full report for the default angles 15, 30, 45, 60
  bcap pipeline --seed 7 --output-dir ./report --format csv
  bcap pipeline --analytic --summary

  # Relation sweep over random qubit states
  bcap verify-relations --samples 100000

  bcap status

Exit codes:
  0 success, 1 relation violation, 2 degenerate input, 64 usage error
""",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="Configuration file (YAML or JSON)")
    common.add_argument("--verbose", "-v", action="store_true", help="Show progress and detailed logging")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--output", "-o", metavar="FILE", help="Write to FILE instead of stdout")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")

    simulate = subparsers.add_parser(
        "simulate", parents=[common, output], help="Simulate coincidence counts for one angle"
    )
    simulate.add_argument("--theta-deg", type=float, required=True, help="Preparation angle in degrees")
    simulate.add_argument("--seed", type=int, help="Override the source seed")
    simulate.set_defaults(handler=cmd_simulate)

    reconstruct = subparsers.add_parser(
        "reconstruct", parents=[common, output], help="Reconstruct a state from a counts file"
    )
    reconstruct.add_argument("counts", help="Counts JSON file")
    reconstruct.add_argument("--estimator", choices=list_estimators(), help="Estimator (default: mle)")
    reconstruct.add_argument("--target", metavar="STATE", help="State file to report the fidelity against")
    reconstruct.add_argument("--strict", action="store_true", help="Fail if the optimizer does not converge")
    reconstruct.set_defaults(handler=cmd_reconstruct)

    analyze = subparsers.add_parser(
        "analyze", parents=[common, output], help="Battery, resource and entanglement quantities of a state"
    )
    analyze.add_argument("state", help="Two-photon state JSON file")
    analyze.add_argument("--unit-energy", type=float, help="Unit energy E")
    analyze.add_argument("--q", type=float, help="Tsallis order")
    analyze.set_defaults(handler=cmd_analyze)

    pipeline = subparsers.add_parser("pipeline", parents=[common], help="Run the full report pipeline")
    pipeline.add_argument("--seed", type=int, help="Override the seed")
    pipeline.add_argument("--output-dir", metavar="DIR", help="Override the output directory")
    pipeline.add_argument("--format", "-f", choices=["json", "csv"], help="Report format")
    pipeline.add_argument("--theta", type=float, action="append", metavar="DEG", help="Angle (repeatable)")
    pipeline.add_argument("--estimator", choices=list_estimators(), help="Estimator")
    pipeline.add_argument("--resamples", type=int, help="Bootstrap resamples (0 disables)")
    pipeline.add_argument("--workers", type=int, help="Bootstrap worker threads")
    pipeline.add_argument("--analytic", action="store_true", help="Exact states, no sampling")
    pipeline.add_argument("--summary", action="store_true", help="Also write summary.html")
    pipeline.set_defaults(handler=cmd_pipeline)

    verify = subparsers.add_parser(
        "verify-relations", parents=[common], help="Check the capacity relations on random qubit states"
    )
    verify.add_argument("--samples", type=int, default=100_000, help="Number of random states (default: 100000)")
    verify.add_argument("--seed", type=int, default=0, help="Sampling seed (default: 0)")
    verify.add_argument(
        "--tolerance", type=float, default=ANALYTIC_TOLERANCE, help="Relation tolerance (default: 1e-9)"
    )
    verify.add_argument("--q", type=float, action="append", help="Tsallis order (repeatable; default: 2, 2.5, 3, 5)")
    verify.set_defaults(handler=cmd_verify_relations)

    cap = subparsers.add_parser(
        "capacity", parents=[common, output], help="Ergotropy, antiergotropy and capacity of a state"
    )
    cap.add_argument("state", help="State JSON file ([re, im] pairs or a reconstruct result)")
    cap.add_argument("--levels", help="Comma-separated dimensionless levels (computational basis)")
    cap.add_argument("--matrix", metavar="FILE", help="Hamiltonian matrix JSON (energy units)")
    cap.add_argument("--unit-energy", type=float, default=1.0, help="Unit energy E (default: 1)")
    cap.set_defaults(handler=cmd_capacity)

    status = subparsers.add_parser("status", parents=[common], help="Show configuration and components")
    status.set_defaults(handler=cmd_status)

    return parser


def main(argv: Optional[list] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv

    # Show banner for help
    if not argv or "-h" in argv or "--help" in argv:
        print_banner()

    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.handler(args)
    except (ConfigError, UsageError) as e:
        print(f"Error: {e}")
        return EXIT_USAGE
    except PipelineError as e:
        print(f"Error: {e}")
        if isinstance(e.cause, (EmptyRecord, UnderdeterminedSet)):
            return EXIT_DEGENERATE
        return EXIT_VIOLATION
    except (EmptyRecord, UnderdeterminedSet) as e:
        print(f"Error: {e}")
        return EXIT_DEGENERATE
    except BatteryCapError as e:
        print(f"Error: {e}")
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
