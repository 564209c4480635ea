from cropd.runner.config import (
    ExperimentConfig,
    DatasetConfig,
    ThreatConfig,
    TrainSection,
    load_config,
    validate_config,
    apply_overrides,
    serialize_config,
    config_hash,
)
from cropd.runner.artifact_store import ArtifactStore
from cropd.runner.stage_keys import stage_keys
from cropd.runner.stages import pipeline_stage, list_stages, StageMetadata
from cropd.runner.runtime import ExperimentRuntime
from cropd.runner.results import ResultsRecord, SeedRun, SuiteFailure, load_results
from cropd.runner.experiment import run_experiment, run_stages, run_suite, output_root
from cropd.runner.report import emit_report, format_cell
from cropd.runner.exceptions import RunnerError, ConfigError, StageError, ReportError

__all__ = [
    "ExperimentConfig",
    "DatasetConfig",
    "ThreatConfig",
    "TrainSection",
    "load_config",
    "validate_config",
    "apply_overrides",
    "serialize_config",
    "config_hash",
    "ArtifactStore",
    "stage_keys",
    "pipeline_stage",
    "list_stages",
    "StageMetadata",
    "ExperimentRuntime",
    "ResultsRecord",
    "SeedRun",
    "SuiteFailure",
    "load_results",
    "run_experiment",
    "run_stages",
    "run_suite",
    "output_root",
    "emit_report",
    "format_cell",
    "RunnerError",
    "ConfigError",
    "StageError",
    "ReportError",
]
