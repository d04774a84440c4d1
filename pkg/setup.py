#!/usr/bin/env python3
"""
BatteryCap Setup Script

Installs BatteryCap into ~/.batterycap:
1. Installs required dependencies
2. Copies the modules
3. Asks for the pipeline settings and writes config.yaml
4. Checks the installed copy against the analytic theta = 30 deg row
5. Installs the bcap CLI wrapper

Run with --uninstall to remove the wrapper and, optionally, the files.
"""

import argparse
import os
import shutil
import stat
import subprocess
import sys
from pathlib import Path
from typing import Optional

from banner import print_banner


SCRIPT_DIR = Path(__file__).parent
INSTALL_DIR = Path.home() / ".batterycap"
REQUIREMENTS_PATH = SCRIPT_DIR / "requirements.txt"
CLI_NAME = "bcap"

INSTALL_FILES = [
    "batterycap.py",
    "banner.py",
    "qstate.py",
    "battery.py",
    "resources.py",
    "photonics.py",
    "report.py",
    "config.example.yaml",
]
INSTALL_DIRS = ["estimators"]

# theta = 30 deg, no noise. Capacity is |cos 2 theta| E; the absolute value
# matters past 45 deg, where cos 2 theta turns negative.
SELF_TEST_EXPECTED = {
    "capacity": 0.5,
    "von_neumann": 0.8112781244591328,
    "l1_coherence": 0.0,
    "capacity_gap": 1.0,
    "concurrence": 0.8660254037844386,
}
SELF_TEST_TOLERANCE = 1e-6

STEPS = ["deps", "files", "config", "test", "cli"]


def print_header(text: str):
    print(f"\n{'=' * 60}\n  {text}\n{'=' * 60}\n")


def print_step(step: str, text: str):
    print(f"\n[{STEPS.index(step) + 1}/{len(STEPS)}] {text}")
    print("-" * 40)


def prompt(text: str, default: Optional[str] = None) -> str:
    if default:
        return input(f"{text} [{default}]: ").strip() or default
    return input(f"{text}: ").strip()


def prompt_choice(text: str, choices: list, default: int = 0) -> int:
    """Numbered menu; returns the chosen index."""
    print(text)
    for i, choice in enumerate(choices):
        marker = "(default) " if i == default else ""
        print(f"  {i + 1}. {marker}{choice}")

    while True:
        result = input(f"Enter choice [1-{len(choices)}]: ").strip()
        if not result:
            return default
        if result.isdigit() and 1 <= int(result) <= len(choices):
            return int(result) - 1
        print(f"Please enter a number between 1 and {len(choices)}")


def prompt_yes_no(text: str, default: bool = True) -> bool:
    result = input(f"{text} [{'Y/n' if default else 'y/N'}]: ").strip().lower()
    return default if not result else result in ("y", "yes")


def prompt_number(text: str, default, cast=float):
    """Prompt until the answer parses with `cast`."""
    while True:
        result = prompt(text, default=str(default))
        try:
            return cast(result)
        except ValueError:
            print(f"Please enter a valid {cast.__name__}")


def install_dependencies() -> bool:
    print_step("deps", "Installing Dependencies")
    if not REQUIREMENTS_PATH.exists():
        print("Error: requirements.txt not found")
        return False
    try:
        subprocess.run([sys.executable, "-m", "pip", "install", "-r", str(REQUIREMENTS_PATH)], check=True)
    except subprocess.CalledProcessError as e:
        print(f"Error installing dependencies: {e}")
        return False
    print("Dependencies installed.")
    return True


def install_files(install_dir: Path = INSTALL_DIR, source_dir: Path = SCRIPT_DIR) -> list[str]:
    """Copy the modules into install_dir. Returns what was copied."""
    print_step("files", "Installing Files")
    install_dir.mkdir(parents=True, exist_ok=True)

    copied = []
    for name in INSTALL_FILES + INSTALL_DIRS:
        src = source_dir / name
        dst = install_dir / name
        if not src.exists():
            print(f"  Warning: {name} not found in {source_dir}")
            continue
        if src.is_dir():
            if dst.exists():
                shutil.rmtree(dst)
            shutil.copytree(src, dst, ignore=shutil.ignore_patterns("__pycache__"))
        else:
            shutil.copy2(src, dst)
        copied.append(name)
        print(f"  Copied: {name}")

    print(f"\nFiles installed to {install_dir}")
    return copied


def build_config() -> dict:
    """Ask for the pipeline settings and return them in config.yaml layout."""
    print("\nSource settings")
    noise_models = ["white", "dephasing", "none"]
    noise_choice = prompt_choice("Noise model:", noise_models, default=0)
    noise_strength = 0.0
    if noise_models[noise_choice] != "none":
        noise_strength = prompt_number("Noise strength s in [0, 1]", 0.02)
    counts = prompt_number("Mean coincidences per measurement setting", 10000.0)
    seed = prompt_number("Random seed", 0, cast=int)

    print("\nEstimation settings")
    estimators = ["mle", "linear"]
    estimator_choice = prompt_choice("Estimator:", estimators, default=0)
    resamples = prompt_number("Bootstrap resamples (0 disables error bars)", 200, cast=int)

    print("\nOutput settings")
    output_dir = prompt("Directory for report files", default="~/batterycap-reports")
    formats = ["json", "csv"]
    format_choice = prompt_choice("Report format:", formats, default=0)
    summary = prompt_yes_no("Also write summary.html?", default=False)

    return {
        "thetas": [15, 30, 45, 60],
        "unit_energy": 1.0,
        "tsallis_q": 2.0,
        "bootstrap_resamples": resamples,
        "output_dir": output_dir,
        "format": formats[format_choice],
        "source": {
            "noise_model": noise_models[noise_choice],
            "noise_strength": noise_strength,
            "mean_counts_per_setting": counts,
            "seed": seed,
        },
        "estimator": {
            "name": estimators[estimator_choice],
            "max_iter": 2000,
            "grad_tol": 1e-8,
            "bootstrap_grad_tol": 1e-6,
        },
        "workers": 1,
        "summary": summary,
    }


def create_config(config_path: Path) -> bool:
    """Write config.yaml from the answers to build_config(); keeps an existing file unless told otherwise."""
    print_step("config", "Configuration Setup")
    if config_path.exists() and not prompt_yes_no("config.yaml already exists. Overwrite?", default=False):
        print("Keeping existing config.yaml")
        return True

    import yaml

    data = build_config()
    try:
        config_path.parent.mkdir(parents=True, exist_ok=True)
        config_path.write_text(yaml.safe_dump(data, default_flow_style=False, sort_keys=False))
    except OSError as e:
        print(f"Error saving config: {e}")
        return False
    print(f"\nConfiguration saved to: {config_path}")
    return True


def run_self_test(module_dir: Path = INSTALL_DIR) -> bool:
    """Import the installed modules and check the analytic theta = 30 deg row."""
    sys.path.insert(0, str(module_dir))
    try:
        from report import PipelineConfig, run_pipeline
    except ImportError as e:
        print(f"  Could not import BatteryCap modules: {e}")
        return False

    config = PipelineConfig(thetas=[30.0], noise_model="none", noise_strength=0.0, analytic=True)
    row = run_pipeline(config).rows[0]

    passed = True
    for name, expected in SELF_TEST_EXPECTED.items():
        value = row.values[name]
        ok = abs(value - expected) <= SELF_TEST_TOLERANCE
        passed = passed and ok
        print(f"  {name}: {value:.10f} (expected {expected:.10f}) {'OK' if ok else 'FAILED'}")
    return passed


def check_installation(install_dir: Path = INSTALL_DIR) -> bool:
    """Validate config.yaml, if any, then run the self-test."""
    print_step("test", "Testing Installation")
    passed = True
    config_path = install_dir / "config.yaml"

    if config_path.exists():
        import yaml

        sys.path.insert(0, str(install_dir))
        from report import ConfigError, PipelineConfig

        try:
            is_valid, error = PipelineConfig.from_dict(yaml.safe_load(config_path.read_text())).validate()
        except (ConfigError, yaml.YAMLError) as e:
            is_valid, error = False, str(e)
        print("config.yaml is valid" if is_valid else f"config.yaml is INVALID: {error}")
        passed = is_valid
    else:
        print("config.yaml: Not configured (built-in defaults will be used)")

    print("\nRunning analytic self-test (theta = 30 deg)...")
    passed = run_self_test(install_dir) and passed
    print("\nAll tests PASSED" if passed else "\nSome tests FAILED - please check your installation")
    return passed


def get_cli_install_dir(home: Optional[Path] = None, path_env: Optional[str] = None) -> Path:
    """~/.local/bin unless only a writable /usr/local/bin is on PATH."""
    local_bin = (home or Path.home()) / ".local" / "bin"
    path_dirs = (os.environ.get("PATH", "") if path_env is None else path_env).split(os.pathsep)
    usr_local_bin = Path("/usr/local/bin")
    if str(local_bin) not in path_dirs and str(usr_local_bin) in path_dirs and os.access(usr_local_bin, os.W_OK):
        return usr_local_bin
    return local_bin


def wrapper_script(main_script: Path) -> str:
    return f"""#!/bin/bash
# BatteryCap CLI wrapper, installed by setup.py
exec "{sys.executable}" "{main_script}" "$@"
"""


def install_cli(install_dir: Path = INSTALL_DIR, bin_dir: Optional[Path] = None) -> Optional[Path]:
    """Write the executable bcap wrapper. Returns its path, or None on failure."""
    print_step("cli", "Installing CLI Command")
    bin_dir = bin_dir or get_cli_install_dir()
    cli_path = bin_dir / CLI_NAME

    try:
        bin_dir.mkdir(parents=True, exist_ok=True)
        cli_path.write_text(wrapper_script(install_dir / "batterycap.py"))
        cli_path.chmod(cli_path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    except OSError as e:
        print(f"Error: could not write {cli_path}: {e}")
        return None

    print(f"Installed: {cli_path}")
    if str(bin_dir) not in os.environ.get("PATH", "").split(os.pathsep):
        print(f"\nNote: {bin_dir} is not in your PATH. Add it to your shell profile:")
        print(f'  export PATH="$PATH:{bin_dir}"')
    return cli_path


def uninstall(
    install_dir: Path = INSTALL_DIR,
    bin_dirs: Optional[list] = None,
    remove_files: Optional[bool] = None,
) -> list[Path]:
    """
    Remove the bcap wrapper from bin_dirs and, if confirmed, install_dir.

    remove_files=None asks interactively. Returns the removed paths.
    """
    print_header("Uninstalling BatteryCap")
    if bin_dirs is None:
        bin_dirs = [Path.home() / ".local" / "bin", Path("/usr/local/bin")]

    removed = []
    for bin_dir in bin_dirs:
        cli_path = Path(bin_dir) / CLI_NAME
        if not cli_path.exists():
            continue
        try:
            cli_path.unlink()
        except OSError as e:
            print(f"Error removing {cli_path}: {e}")
            continue
        removed.append(cli_path)
        print(f"Removed CLI: {cli_path}")
    if not removed:
        print(f"CLI command '{CLI_NAME}' not found.")

    if install_dir.exists():
        if remove_files is None:
            remove_files = prompt_yes_no(f"Remove {install_dir} (including config.yaml)?", default=False)
        if remove_files:
            shutil.rmtree(install_dir)
            removed.append(install_dir)
            print(f"Removed: {install_dir}")
        else:
            print(f"Keeping {install_dir}")

    print("\nInstalled Python packages were not removed.")
    print("To remove them: pip uninstall numpy scipy pyyaml markdown tqdm")
    return removed


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(description="BatteryCap Setup")
    parser.add_argument("--uninstall", action="store_true", help="Remove the CLI command and installed files")
    parser.add_argument(
        "--only",
        choices=STEPS,
        action="append",
        help="Run only these steps (repeatable; default: all)",
    )
    parser.add_argument("--install-dir", type=Path, default=INSTALL_DIR, help=f"Default: {INSTALL_DIR}")
    args = parser.parse_args(argv)

    if args.uninstall:
        uninstall(args.install_dir)
        return 0

    print_banner()
    print_header("BatteryCap Setup")
    print(f"Files will be installed to: {args.install_dir}\n")

    steps = args.only or STEPS
    if "deps" in steps and not install_dependencies():
        print("\nSetup failed at dependency installation.")
        return 1
    if "files" in steps and not install_files(args.install_dir):
        print("\nSetup failed at file installation.")
        return 1
    if "config" in steps and not create_config(args.install_dir / "config.yaml"):
        print("\nSetup failed at configuration.")
        return 1
    if "test" in steps:
        check_installation(args.install_dir)
    if "cli" in steps and install_cli(args.install_dir) is None:
        return 1

    print_header("Setup Complete")
    print("Commands:")
    for command, text in [
        ("pipeline", "Run the full report pipeline"),
        ("simulate", "Simulate coincidence counts"),
        ("reconstruct", "Reconstruct a state from counts"),
        ("analyze", "Quantities of a reconstructed state"),
        ("capacity", "Capacity of a state for a Hamiltonian"),
        ("verify-relations", "Check the capacity relations"),
        ("status", "Show configuration status"),
    ]:
        print(f"  {CLI_NAME} {command:<20}{text}")
    print(f"\nExample:\n  {CLI_NAME} pipeline --seed 7 --output-dir ./report")
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\nSetup cancelled.")
        sys.exit(0)
