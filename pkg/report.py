"""
BatteryCap - Pipeline and report files

Runs prepare -> simulate -> reconstruct -> analyze for every preparation
angle and writes the tables behind the capacity, relation and entanglement
figures:

    fig3.{json|csv}   capacity, entropy and coherence of photon I
    fig4.{json|csv}   the four capacity relation sums
    fig5.{json|csv}   capacity gap and entanglement measures
    states.json       reconstructed two-photon states
    manifest.json     effective configuration, seed and config hash
    summary.html      optional, when summary is enabled
"""

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from battery import capacity, capacity_gap, polarization_hamiltonian
from estimators import ESTIMATORS, bootstrap_estimates, get_estimator
from photonics import NOISE_MODELS, TOMOGRAPHY_SETTINGS, SourceConfig, prepare_phi, simulate_counts
from qstate import BatteryCapError, DensityMatrix, fidelity, matrix_from_pairs, partial_trace, validate_density
from resources import (
    ANALYTIC_TOLERANCE,
    check_relations,
    concurrence,
    eof_from_concurrence,
    geometric_from_concurrence,
    l1_coherence,
    linear_entropy,
    relative_entropy_coherence,
    tsallis_entropy,
    von_neumann_entropy,
)

__version__ = "1.0.0"

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")
SIGNIFICANT_DIGITS = 12

FIGURES = {
    "fig3": [
        "capacity",
        "von_neumann",
        "l1_coherence",
        "ergotropy",
        "antiergotropy",
        "relative_entropy_coherence",
    ],
    "fig4": ["csu", "ctu", "clu", "ccu", "ccu_rel"],
    "fig5": ["capacity_gap", "concurrence", "eof", "geometric"],
}

# Stage offsets mixed into the per-theta seed
STAGE_SIMULATE = 1
STAGE_BOOTSTRAP = 2

_SOURCE_KEYS = ("noise_model", "noise_strength", "mean_counts_per_setting", "seed")
_ESTIMATOR_KEYS = ("name", "max_iter", "grad_tol", "bootstrap_grad_tol")
_TOP_KEYS = (
    "thetas",
    "unit_energy",
    "tsallis_q",
    "bootstrap_resamples",
    "output_dir",
    "format",
    "workers",
    "analytic",
    "summary",
)


class ConfigError(BatteryCapError):
    pass


class PipelineError(BatteryCapError):
    """A module error raised while processing one angle."""

    def __init__(self, theta: float, stage: str, cause: Exception):
        super().__init__(f"theta = {theta:g} deg, stage '{stage}': {type(cause).__name__}: {cause}")
        self.theta = theta
        self.stage = stage
        self.cause = cause


class ReportIoError(BatteryCapError):
    pass


@dataclass
class PipelineConfig:
    thetas: list = field(default_factory=lambda: [15.0, 30.0, 45.0, 60.0])
    unit_energy: float = 1.0
    tsallis_q: float = 2.0
    bootstrap_resamples: int = 200
    output_dir: str = "./batterycap-report"
    format: str = "json"
    noise_model: str = "white"
    noise_strength: float = 0.02
    mean_counts_per_setting: float = 1e4
    seed: int = 0
    estimator: str = "mle"
    max_iter: int = 2000
    grad_tol: float = 1e-8
    bootstrap_grad_tol: float = 1e-6
    workers: int = 1
    analytic: bool = False
    summary: bool = False

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "PipelineConfig":
        """
        Build a config from the YAML/JSON layout.

        Accepts `source` and `estimator` sections as well as flat source keys.

        Raises:
            ConfigError: On unknown keys or malformed sections
        """
        data = dict(data or {})
        values: dict[str, Any] = {}

        source = data.pop("source", None) or {}
        if not isinstance(source, dict):
            raise ConfigError("'source' must be a mapping")
        for key, value in source.items():
            if key not in _SOURCE_KEYS:
                raise ConfigError(f"Unknown key 'source.{key}'. Allowed: {', '.join(_SOURCE_KEYS)}")
            values[key] = value

        estimator = data.pop("estimator", None)
        if isinstance(estimator, str):
            values["estimator"] = estimator
        elif isinstance(estimator, dict):
            for key, value in estimator.items():
                if key not in _ESTIMATOR_KEYS:
                    raise ConfigError(f"Unknown key 'estimator.{key}'. Allowed: {', '.join(_ESTIMATOR_KEYS)}")
                values["estimator" if key == "name" else key] = value
        elif estimator is not None:
            raise ConfigError("'estimator' must be a name or a mapping")

        for key, value in data.items():
            if key not in _TOP_KEYS and key not in _SOURCE_KEYS:
                raise ConfigError(f"Unknown configuration key '{key}'")
            values[key] = value

        try:
            config = cls(**values)
            config.thetas = [float(t) for t in config.thetas]
            config.unit_energy = float(config.unit_energy)
            config.tsallis_q = float(config.tsallis_q)
            config.bootstrap_resamples = int(config.bootstrap_resamples)
            config.noise_strength = float(config.noise_strength)
            config.mean_counts_per_setting = float(config.mean_counts_per_setting)
            config.seed = int(config.seed)
            config.max_iter = int(config.max_iter)
            config.grad_tol = float(config.grad_tol)
            config.bootstrap_grad_tol = float(config.bootstrap_grad_tol)
            config.workers = int(config.workers)
            config.analytic = bool(config.analytic)
            config.summary = bool(config.summary)
            config.output_dir = str(config.output_dir)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Malformed configuration value: {e}")
        return config

    def to_dict(self) -> dict:
        return {
            "thetas": list(self.thetas),
            "unit_energy": self.unit_energy,
            "tsallis_q": self.tsallis_q,
            "bootstrap_resamples": self.bootstrap_resamples,
            "output_dir": self.output_dir,
            "format": self.format,
            "source": {
                "noise_model": self.noise_model,
                "noise_strength": self.noise_strength,
                "mean_counts_per_setting": self.mean_counts_per_setting,
                "seed": self.seed,
            },
            "estimator": {
                "name": self.estimator,
                "max_iter": self.max_iter,
                "grad_tol": self.grad_tol,
                "bootstrap_grad_tol": self.bootstrap_grad_tol,
            },
            "workers": self.workers,
            "analytic": self.analytic,
            "summary": self.summary,
        }

    def source(self, theta: float, seed: Optional[int] = None) -> SourceConfig:
        return SourceConfig(
            theta=theta,
            noise_model=self.noise_model,
            noise_strength=self.noise_strength,
            mean_counts_per_setting=self.mean_counts_per_setting,
            seed=self.seed if seed is None else seed,
        )

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form, ignoring where output goes."""
        canonical = self.to_dict()
        canonical.pop("output_dir")
        canonical.pop("format")
        return hashlib.sha256(json.dumps(canonical, sort_keys=True).encode("utf-8")).hexdigest()

    def validate(self) -> tuple[bool, Optional[str]]:
        for theta in self.thetas:
            if not 0.0 <= theta <= 90.0:
                return False, f"theta = {theta} deg outside [0, 90]"
        if not self.unit_energy > 0:
            return False, f"unit_energy must be positive, got {self.unit_energy}"
        if self.tsallis_q < 2.0:
            return False, f"tsallis_q must be >= 2 for the capacity relations, got {self.tsallis_q}"
        if self.bootstrap_resamples != 0 and self.bootstrap_resamples < 2:
            return False, f"bootstrap_resamples must be 0 or >= 2, got {self.bootstrap_resamples}"
        if self.format not in FORMATS:
            return False, f"format must be one of {', '.join(FORMATS)}, got '{self.format}'"
        if self.noise_model not in NOISE_MODELS:
            return False, f"Unknown noise model '{self.noise_model}'. Available: {', '.join(NOISE_MODELS)}"
        is_valid, error = self.source(0.0).validate()
        if not is_valid:
            return False, error
        if self.estimator not in ESTIMATORS:
            return False, f"Unknown estimator '{self.estimator}'. Available: {', '.join(ESTIMATORS)}"
        if self.max_iter < 1:
            return False, f"max_iter must be >= 1, got {self.max_iter}"
        if not (self.grad_tol > 0 and self.bootstrap_grad_tol > 0):
            return False, "grad_tol and bootstrap_grad_tol must be positive"
        if self.workers < 1:
            return False, f"workers must be >= 1, got {self.workers}"
        return True, None


@dataclass(frozen=True, eq=False)
class ThetaRow:
    theta: float
    values: dict
    errors: dict
    rho: DensityMatrix
    fidelity_to_ideal: float
    fidelity_to_target: float
    log_likelihood: float = 0.0
    iterations: int = 0
    converged: bool = True


@dataclass(frozen=True, eq=False)
class ReportBundle:
    rows: list
    metadata: dict
    config: PipelineConfig

    @property
    def is_empty(self) -> bool:
        return not self.rows


def analyze_state(rho_ab: DensityMatrix, unit_energy: float = 1.0, q: float = 2.0) -> dict:
    """
    Every per-state quantity of the two-photon battery as a flat dict.

    Photon I (subsystem A) is the battery whose capacity, entropies and
    coherence are reported; both photons use E|H><H|.
    """
    h = polarization_hamiltonian(unit_energy)
    rho_a = partial_trace(rho_ab, "A")
    rho_b = partial_trace(rho_ab, "B")
    quantities_a = capacity(rho_a, h)
    relations = check_relations(rho_a, h, q=q, tolerance=ANALYTIC_TOLERANCE)
    c = concurrence(rho_ab)
    return {
        "capacity": quantities_a.capacity,
        "ergotropy": quantities_a.ergotropy,
        "antiergotropy": quantities_a.antiergotropy,
        "capacity_b": capacity(rho_b, h).capacity,
        "von_neumann": von_neumann_entropy(rho_a),
        "tsallis": tsallis_entropy(rho_a, q),
        "linear_entropy": linear_entropy(rho_a),
        "l1_coherence": l1_coherence(rho_a, h),
        "relative_entropy_coherence": relative_entropy_coherence(rho_a, h),
        "csu": relations.csu,
        "ctu": relations.ctu,
        "clu": relations.clu,
        "ccu": relations.ccu,
        "ccu_rel": relations.ccu_rel,
        "capacity_gap": capacity_gap(rho_ab, h, h),
        "concurrence": c,
        "eof": eof_from_concurrence(c),
        "geometric": geometric_from_concurrence(c),
    }


def stage_seed(seed: int, index: int, stage: int) -> int:
    return int(np.random.SeedSequence([seed, index, stage]).generate_state(1)[0])


def _run_theta(config: PipelineConfig, index: int, theta: float, progress: bool) -> ThetaRow:
    stage = "prepare"
    try:
        ideal = prepare_phi(theta)
        target = config.source(theta).prepare()

        if config.analytic:
            stage = "analyze"
            values = analyze_state(target, config.unit_energy, config.tsallis_q)
            return ThetaRow(
                theta=theta,
                values=values,
                errors={name: 0.0 for name in values},
                rho=target,
                fidelity_to_ideal=fidelity(target, ideal),
                fidelity_to_target=1.0,
            )

        stage = "simulate"
        records = simulate_counts(
            target,
            TOMOGRAPHY_SETTINGS,
            config.mean_counts_per_setting,
            stage_seed(config.seed, index, STAGE_SIMULATE),
        )

        stage = "reconstruct"
        estimator = get_estimator(config.estimator, {"max_iter": config.max_iter, "grad_tol": config.grad_tol})
        result = estimator.reconstruct(records, target=target)

        stage = "analyze"
        values = analyze_state(result.rho, config.unit_energy, config.tsallis_q)

        stage = "bootstrap"
        errors = {name: 0.0 for name in values}
        if config.bootstrap_resamples:
            resample_estimator = get_estimator(
                config.estimator, {"max_iter": config.max_iter, "grad_tol": config.bootstrap_grad_tol}
            )

            def statistic(resampled):
                rho = resample_estimator.reconstruct(resampled).rho
                return analyze_state(rho, config.unit_energy, config.tsallis_q)

            estimates = bootstrap_estimates(
                records,
                statistic,
                config.bootstrap_resamples,
                stage_seed(config.seed, index, STAGE_BOOTSTRAP),
                workers=config.workers,
                progress=progress,
            )
            errors = {name: estimate.std for name, estimate in estimates.items()}
    except BatteryCapError as e:
        raise PipelineError(theta, stage, e) from e

    return ThetaRow(
        theta=theta,
        values=values,
        errors=errors,
        rho=result.rho,
        fidelity_to_ideal=fidelity(result.rho, ideal),
        fidelity_to_target=result.fidelity_to_target,
        log_likelihood=result.log_likelihood,
        iterations=result.iterations,
        converged=result.converged,
    )


def run_pipeline(config: PipelineConfig, progress: bool = False) -> ReportBundle:
    """
    Process every angle of the configuration.

    Rows keep the order of config.thetas. Each angle draws its counts and
    bootstrap resamples from seeds derived from (seed, angle index, stage).

    Raises:
        ConfigError: If the configuration is invalid
        PipelineError: If any stage fails, annotated with the angle and stage
    """
    is_valid, error = config.validate()
    if not is_valid:
        raise ConfigError(error)

    rows = []
    for index, theta in enumerate(config.thetas):
        logger.info("Processing theta = %g deg", theta)
        rows.append(_run_theta(config, index, theta, progress))

    metadata = {
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "version": __version__,
    }
    return ReportBundle(rows=rows, metadata=metadata, config=config)


def _round(value):
    if isinstance(value, float):
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, dict):
        return {key: _round(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(item) for item in value]
    return value


def canonical_json(data) -> str:
    """Sorted keys, floats at 12 significant digits; identical input gives identical bytes."""
    return json.dumps(_round(data), sort_keys=True, indent=2) + "\n"


def figure_table(bundle: ReportBundle, figure: str) -> dict:
    return {
        name: [
            {"theta_deg": row.theta, "value": row.values[name], "err": row.errors[name]}
            for row in bundle.rows
        ]
        for name in FIGURES[figure]
    }


def figure_csv(bundle: ReportBundle, figure: str) -> str:
    """One block per quantity: a '# name' line then theta_deg,value,err rows."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for name, entries in figure_table(bundle, figure).items():
        buffer.write(f"# {name}\n")
        writer.writerow(["theta_deg", "value", "err"])
        for entry in entries:
            writer.writerow([f"{entry[key]:.{SIGNIFICANT_DIGITS}g}" for key in ("theta_deg", "value", "err")])
    return buffer.getvalue()


def states_document(bundle: ReportBundle) -> dict:
    return {
        "metadata": bundle.metadata,
        "states": [
            {
                "theta_deg": row.theta,
                "rho": row.rho.to_pairs(),
                "log_likelihood": row.log_likelihood,
                "iterations": row.iterations,
                "converged": row.converged,
                "fidelity_to_target": row.fidelity_to_target,
                "fidelity_to_ideal": row.fidelity_to_ideal,
            }
            for row in bundle.rows
        ],
    }


def load_states(path: Path) -> list[tuple[float, DensityMatrix]]:
    """Read back the (theta, state) pairs of a states.json file."""
    document = json.loads(Path(path).read_text())
    return [(entry["theta_deg"], validate_density(matrix_from_pairs(entry["rho"]))) for entry in document["states"]]


def emit_report(bundle: ReportBundle, fmt: str, output_dir) -> list[Path]:
    """
    Write the report files.

    An empty bundle writes only the manifest.

    Returns:
        Paths written, manifest last

    Raises:
        ReportIoError: If the directory or a file cannot be written
    """
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got '{fmt}'")

    output_dir = Path(output_dir).expanduser()
    files: dict[str, str] = {}
    if not bundle.is_empty:
        for figure in FIGURES:
            if fmt == "json":
                files[f"{figure}.json"] = canonical_json(
                    {"metadata": bundle.metadata, "quantities": figure_table(bundle, figure)}
                )
            else:
                files[f"{figure}.csv"] = figure_csv(bundle, figure)
        files["states.json"] = canonical_json(states_document(bundle))
        if bundle.config.summary:
            files["summary.html"] = render_summary(bundle)

    manifest = dict(bundle.metadata)
    manifest["config"] = bundle.config.to_dict()
    manifest["files"] = sorted(files)
    files["manifest.json"] = canonical_json(manifest)

    written = []
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        for name, content in files.items():
            path = output_dir / name
            path.write_text(content)
            written.append(path)
    except OSError as e:
        raise ReportIoError(f"Could not write report to {output_dir}: {e}")
    return written


# Minimal table styling for summary.html
SUMMARY_CSS = """
<style>
body {
    font-family: -apple-system, BlinkMacSystemFont, "Segoe UI", Helvetica, Arial, sans-serif;
    color: #1f2328;
    max-width: 1012px;
    margin: 0 auto;
    padding: 32px;
    line-height: 1.5;
}
h1, h2 { border-bottom: 1px solid #d1d9e0; padding-bottom: .3em; }
table { border-collapse: collapse; margin: 16px 0; }
th, td { border: 1px solid #d1d9e0; padding: 6px 13px; text-align: right; }
th { background-color: #f6f8fa; font-weight: 600; }
tr:nth-child(2n) { background-color: #f6f8fa; }
code { background-color: #eff1f3; border-radius: 6px; padding: .2em .4em; }
</style>
"""


def summary_markdown(bundle: ReportBundle) -> str:
    lines = [
        "# BatteryCap report",
        "",
        f"Seed `{bundle.metadata['seed']}`, config `{bundle.metadata['config_hash'][:12]}`, "
        f"version {bundle.metadata['version']}.",
        "",
    ]
    for figure, names in FIGURES.items():
        lines.append(f"## {figure}")
        lines.append("")
        lines.append("| theta (deg) | " + " | ".join(names) + " |")
        lines.append("|---" * (len(names) + 1) + "|")
        for row in bundle.rows:
            cells = [f"{row.values[name]:.4f} ± {row.errors[name]:.4f}" for name in names]
            lines.append(f"| {row.theta:g} | " + " | ".join(cells) + " |")
        lines.append("")
    lines.append("## Reconstruction")
    lines.append("")
    lines.append("| theta (deg) | fidelity to ideal | fidelity to target | converged |")
    lines.append("|---|---|---|---|")
    for row in bundle.rows:
        lines.append(
            f"| {row.theta:g} | {row.fidelity_to_ideal:.4f} | {row.fidelity_to_target:.4f} | "
            f"{'yes' if row.converged else 'no'} |"
        )
    return "\n".join(lines) + "\n"


def render_summary(bundle: ReportBundle, title: str = "BatteryCap report") -> str:
    """Markdown summary tables converted to a styled HTML page."""
    import markdown
    from markdown.extensions.tables import TableExtension

    html_body = markdown.Markdown(extensions=[TableExtension()]).convert(summary_markdown(bundle))
    return f"""<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>{title}</title>
    {SUMMARY_CSS}
</head>
<body>
{html_body}
</body>
</html>
"""
