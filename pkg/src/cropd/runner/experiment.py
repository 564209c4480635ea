"""Single-experiment and suite entry points."""

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from cropd.runner.artifact_store import ArtifactStore, write_json
from cropd.runner.config import ExperimentConfig, apply_overrides, config_dict, load_config, validate_config
from cropd.runner.exceptions import StageError
from cropd.runner.results import ResultsRecord, SuiteFailure
from cropd.runner.runtime import ExperimentRuntime

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_ROOT = "runs"


def output_root(config: ExperimentConfig) -> Path:
    """Config output_dir, else $CROPD_OUTPUT_DIR, else ./runs."""
    return Path(config.output_dir or os.getenv("CROPD_OUTPUT_DIR") or DEFAULT_OUTPUT_ROOT)


def _resolve(config: str | Path | ExperimentConfig, overrides: Sequence[str]) -> ExperimentConfig:
    if isinstance(config, ExperimentConfig):
        return validate_config(apply_overrides(config_dict(config), overrides)) if overrides else config
    return load_config(config, overrides)


def build_runtime(
    config: str | Path | ExperimentConfig,
    overrides: Sequence[str] = (),
    debug: bool = False,
    spinner: bool = False,
) -> ExperimentRuntime:
    """Validate the configuration and bind it to the artifact store under its output root."""
    resolved = _resolve(config, overrides)
    return ExperimentRuntime(resolved, ArtifactStore(output_root(resolved)), debug=debug, spinner=spinner)


def run_stages(
    config: str | Path | ExperimentConfig,
    until: str,
    overrides: Sequence[str] = (),
    debug: bool = False,
    spinner: bool = False,
) -> ExperimentRuntime:
    """Run every seed up to and including stage `until`; returns the runtime with its stage log."""
    runtime = build_runtime(config, overrides, debug=debug, spinner=spinner)
    runtime.run(until=until)
    return runtime


def run_experiment(
    config: str | Path | ExperimentConfig,
    overrides: Sequence[str] = (),
    debug: bool = False,
    spinner: bool = False,
) -> ResultsRecord:
    """
    Run the full pipeline for every seed and write results under `<output root>/<config hash>/`.

    Args:
        config: Path to a JSON config or an ExperimentConfig
        overrides: `key=value` overrides applied before validation
        debug: Verbose logging
        spinner: Show a spinner per stage

    Returns:
        ResultsRecord: One SeedRun per configured seed

    Raises:
        ConfigError: If the configuration is invalid
        StageError: If a stage fails, naming the stage
    """
    started = time.perf_counter()
    runtime = build_runtime(config, overrides, debug=debug, spinner=spinner)
    runs = runtime.run()
    cfg = runtime.config

    record = ResultsRecord(
        config_hash=runtime.config_hash,
        config=config_dict(cfg),
        name=cfg.name,
        variant=cfg.variant.value,
        weight=cfg.preprocessor_weight,
        head_mode=cfg.head_mode,
        seeds=runs,
        output_dir=str(runtime.run_dir),
        wall_clock_sec=time.perf_counter() - started,
    )
    write_json(runtime.run_dir / "config.json", record.config)
    record.save(runtime.run_dir)
    logger.info("Results written to %s", runtime.run_dir)
    return record


def _suite_worker(path: str, overrides: Sequence[str]) -> dict[str, Any]:
    try:
        return {"record": run_experiment(path, overrides).to_dict()}
    except Exception as e:
        logger.debug("Configuration %s failed", path, exc_info=True)
        failure = SuiteFailure(
            config_path=path,
            error=str(e),
            error_type=type(e).__name__,
            stage=e.stage if isinstance(e, StageError) else None,
        )
        return {"failure": failure.to_dict()}


def run_suite(
    paths: Sequence[str | Path],
    parallelism: int = 1,
    overrides: Sequence[str] = (),
) -> list[ResultsRecord | SuiteFailure]:
    """
    Run many configurations, one worker process each when parallelism > 1.

    Results come back in input order whatever the parallelism; a failing
    configuration yields a SuiteFailure in its slot and does not stop the rest.

    Raises:
        ValueError: If parallelism < 1
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be at least 1, got {parallelism}")
    jobs = [str(p) for p in paths]
    if not jobs:
        return []

    if parallelism == 1:
        outcomes = [_suite_worker(path, overrides) for path in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(parallelism, len(jobs))) as pool:
            outcomes = list(pool.map(_suite_worker, jobs, [tuple(overrides)] * len(jobs)))

    results: list[ResultsRecord | SuiteFailure] = []
    for path, outcome in zip(jobs, outcomes):
        if "record" in outcome:
            results.append(ResultsRecord.from_dict(outcome["record"]))
        else:
            failure = SuiteFailure(**outcome["failure"])
            logger.warning("Config %s failed: %s", path, failure.error)
            results.append(failure)
    return results
