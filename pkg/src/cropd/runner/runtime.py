"""Staged execution of one experiment configuration."""

import logging
import math
import shutil
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Generator, Optional

from halo import Halo

from cropd.attacks.threat_model import ThreatModel
from cropd.data.container import load_tensor_dataset, save_tensor_dataset
from cropd.data.dataset_types import LabeledDataset
from cropd.data.exceptions import InvalidDatasetParameterError
from cropd.data.synthetic import make_separated_discrete, make_synthetic_gaussian
from cropd.evaluation.evaluate import evaluate, transfer_evaluate
from cropd.evaluation.evaluation_types import EvalResult
from cropd.evaluation.pipeline import Pipeline
from cropd.models.autoencoder import Autoencoder
from cropd.models.backbone import FeatureBackbone
from cropd.models.checkpoint import load_checkpoint, save_checkpoint
from cropd.models.head import LinearHead
from cropd.runner.artifact_store import ArtifactStore, read_json, write_json
from cropd.runner.config import DatasetConfig, ExperimentConfig, config_dict, config_hash
from cropd.runner.exceptions import ConfigError
from cropd.runner.results import SeedRun
from cropd.runner.stage_keys import stage_keys
from cropd.runner.stages import list_stages, pipeline_stage
from cropd.theory.bound import check_theorem_bound
from cropd.theory.eta import estimate_eta
from cropd.theory.exceptions import InvalidWitnessParameterError
from cropd.theory.witness import proposition1_witness
from cropd.training.foundation import pretrain_foundation
from cropd.training.head_training import train_head
from cropd.training.history import TrainHistory
from cropd.training.preprocessor import train_preprocessor
from cropd.utils.serialization import parse_real

logger = logging.getLogger(__name__)

HISTORY_FILE = "history.csv"
THEORY_REPORT_FILE = "theory_report.json"
TEST_SEED_OFFSET = 1


@dataclass
class DataSplits:
    train: LabeledDataset
    test: LabeledDataset
    source_train: Optional[LabeledDataset] = None

    @property
    def preprocessor_train(self) -> LabeledDataset:
        return self.source_train if self.source_train is not None else self.train


def _finite_tree(value: Any) -> Any:
    """Replace non-finite floats inside nested containers with None."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _finite_tree(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_tree(v) for v in value]
    return value


class ExperimentRuntime:
    """
    Runs the stages of one experiment for each configured seed.

    Stages read and write the shared ArtifactStore, so any stage whose key
    was already produced (by this or another configuration) is loaded
    instead of recomputed.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        store: ArtifactStore,
        debug: bool = False,
        spinner: bool = False,
    ) -> None:
        """
        Initialize the runtime.

        Args:
            config: Validated experiment configuration
            store: Artifact cache shared between experiments
            debug: Enable debug logging if True
            spinner: Show a terminal spinner per stage
        """
        self._debug = debug
        self._logger = logging.getLogger(__name__) if debug else None
        self._spinner = spinner

        self.config = config
        self.config_hash = config_hash(config)
        self.store = store
        self.stage_log: list[tuple[int, str, str]] = []

    @property
    def run_dir(self) -> Path:
        """Per-configuration output directory `<output root>/<config hash>`."""
        return self.store.root / self.config_hash

    def _debug_log(self, message: str, data: Optional[Any] = None) -> None:
        """Log debug information if debug mode is enabled

        Args:
            message: Debug message to log
            data: Optional data to include in debug output
        """
        if self._debug and self._logger:
            if data:
                self._logger.debug(f"{message}: {data}")
            else:
                self._logger.debug(message)

    @contextmanager
    def _progress(self, stage: str, seed: int, cached: bool) -> Generator[None, None, None]:
        status = "cached" if cached else "done"
        spinner = Halo(text=f"{stage} (seed {seed})", spinner="dots", enabled=self._spinner)
        spinner.start()
        try:
            yield
        except Exception:
            spinner.fail(f"{stage}: failed")
            raise
        spinner.succeed(f"{stage}: {status}")
        self.stage_log.append((seed, stage, status))
        logger.info("%s (seed %d): %s", stage, seed, status)

    def _threat(self, preset: str) -> ThreatModel:
        return self.config.threat.threat_model(preset)

    def _theory_threat(self) -> ThreatModel:
        attacks = self.config.threat.eval_attacks
        return self._threat(attacks[0] if attacks else "pgd10")

    def _witness(self, seed: int, test: LabeledDataset, tm: ThreatModel) -> Optional[dict[str, Any]]:
        """Brittle-classifier counterexample at the test dimension and the theory budget."""
        n = min(self.config.theory.witness_points, len(test))
        d = test.inputs[0].numel()
        try:
            return proposition1_witness(n, d, epsilon=tm.epsilon, p=tm.p, seed=seed).to_dict()
        except (InvalidDatasetParameterError, InvalidWitnessParameterError) as e:
            logger.warning("Skipping the counterexample measurement: %s", e)
            return None

    def _store_history(self, directory: Path, history: TrainHistory) -> None:
        if len(history):
            history.to_csv(directory / HISTORY_FILE)

    def status(self, seed: int) -> dict[str, str]:
        """Stage status recorded so far for `seed`."""
        return {stage: status for run_seed, stage, status in self.stage_log if run_seed == seed}

    # Stages

    def _generate(self, section: DatasetConfig) -> tuple[LabeledDataset, LabeledDataset]:
        if section.kind == "container":
            if not section.path:
                raise ConfigError("dataset.path is required for container datasets", field_path="dataset.path")
            root = Path(section.path)
            return load_tensor_dataset(root / "train"), load_tensor_dataset(root / "test")
        if section.kind == "separated":
            epsilon = parse_real(section.epsilon)
            return (
                make_separated_discrete(section.n_train, section.d, epsilon, section.seed, split="train"),
                make_separated_discrete(section.n_test, section.d, epsilon, section.seed + TEST_SEED_OFFSET, split="test"),
            )
        common = dict(
            d=section.d,
            k=section.k,
            separation=section.separation,
            image_shape=section.image_shape,
            rescale_unit=section.rescale_unit,
            name=section.name or None,
        )
        return (
            make_synthetic_gaussian(section.n_train, seed=section.seed, split="train", **common),
            make_synthetic_gaussian(section.n_test, seed=section.seed + TEST_SEED_OFFSET, split="test", **common),
        )

    def _dataset(self, section: DatasetConfig, key: str, seed: int, stage: str) -> tuple[LabeledDataset, LabeledDataset]:
        directory = self.store.fetch("data", key)
        with self._progress(stage, seed, cached=directory is not None):
            if directory is None:
                train, test = self._generate(section)
                with self.store.writing("data", key) as tmp:
                    save_tensor_dataset(train, tmp / "train")
                    save_tensor_dataset(test, tmp / "test")
                    write_json(tmp / "dataset.json", config_dict(section))
                self._debug_log("Generated dataset", {"train": len(train), "test": len(test)})
                return train, test
            return load_tensor_dataset(directory / "train"), load_tensor_dataset(directory / "test")

    @pipeline_stage(name="gen_data")
    def gen_data(self, seed: int) -> DataSplits:
        """Generate (or load) the train/test splits and the transfer source."""
        keys = stage_keys(self.config, seed)
        train, test = self._dataset(self.config.dataset, keys["data"], seed, "gen_data")
        source_train = None
        if self.config.transfer.enabled:
            source_train, _ = self._dataset(self.config.transfer.source, keys["source_data"], seed, "gen_source_data")
        return DataSplits(train=train, test=test, source_train=source_train)

    @pipeline_stage(name="pretrain", depends_on=("gen_data",))
    def pretrain(self, seed: int, data: DataSplits) -> FeatureBackbone:
        """Clean pre-training of the frozen foundation backbone."""
        key = stage_keys(self.config, seed)["pretrain"]
        directory = self.store.fetch("pretrain", key)
        with self._progress("pretrain", seed, cached=directory is not None):
            if directory is not None:
                return load_checkpoint(directory / "backbone")

            spec = self.config.backbone_spec(data.train.sample_shape)
            history = TrainHistory("pretrain")
            cfg = self.config.foundation_training.to_train_config(seed)
            backbone = pretrain_foundation(spec, data.train, cfg, history=history, debug=self._debug)
            with self.store.writing("pretrain", key) as tmp:
                save_checkpoint(backbone, tmp / "backbone", seed=seed, provenance={"stage": "pretrain", "key": key})
                self._store_history(tmp, history)
            return backbone

    @pipeline_stage(name="train_preproc", depends_on=("gen_data", "pretrain"))
    def train_preproc(self, seed: int, data: DataSplits, backbone: FeatureBackbone) -> tuple[Optional[Autoencoder], int]:
        """
        Train the pre-processing auto-encoder.

        Returns:
            tuple: (frozen auto-encoder or None for Identity, backbone forward calls observed meanwhile)
        """
        key = stage_keys(self.config, seed)["preproc"]
        if key is None:
            self._debug_log("Identity variant has no pre-processor")
            return None, 0

        directory = self.store.fetch("preproc", key)
        with self._progress("train_preproc", seed, cached=directory is not None):
            if directory is not None:
                diagnostics = read_json(directory / "diagnostics.json")
                return load_checkpoint(directory / "autoencoder"), int(diagnostics["foundation_queries"])

            section = self.config.transfer.source if self.config.transfer.enabled else self.config.dataset
            train = data.preprocessor_train.take_fraction(section.train_fraction, section.seed)
            spec = self.config.autoencoder_spec(train.sample_shape, seed)
            cfg = self.config.preprocessor_training.to_train_config(seed)
            aug = self.config.augmentation.to_policy() if self.config.augmentation.enabled else None

            calls_before = backbone.forward_calls
            ae, history = train_preprocessor(
                spec,
                train,
                self.config.variant,
                self.config.preprocessor_weight,
                self._threat(self.config.threat.train_attack),
                cfg,
                tau=self.config.tau,
                aug=aug,
                history=TrainHistory("preproc"),
                debug=self._debug,
            )
            queries = backbone.forward_calls - calls_before
            if queries:
                logger.warning("Backbone was queried %d times during pre-processor training", queries)

            with self.store.writing("preproc", key) as tmp:
                save_checkpoint(ae, tmp / "autoencoder", seed=seed, provenance={"stage": "preproc", "key": key})
                write_json(
                    tmp / "diagnostics.json",
                    {"foundation_queries": queries, "train_samples": len(train)},
                )
                self._store_history(tmp, history)
            return ae, queries

    @pipeline_stage(name="train_head", depends_on=("gen_data", "pretrain", "train_preproc"))
    def train_head(
        self,
        seed: int,
        data: DataSplits,
        backbone: FeatureBackbone,
        autoencoder: Optional[Autoencoder],
    ) -> Pipeline:
        """Fit the linear head behind the frozen pre-processor and backbone."""
        key = stage_keys(self.config, seed)["head"]
        directory = self.store.fetch("head", key)
        with self._progress("train_head", seed, cached=directory is not None):
            if directory is not None:
                head = load_checkpoint(directory / "head")
                return Pipeline(self.config.variant, backbone, head, autoencoder)

            head = LinearHead.build(self.config.head_spec(backbone.feature_dim, data.train.num_classes), seed)
            pipe = Pipeline(self.config.variant, backbone, head, autoencoder)
            history = TrainHistory("head")
            train_head(
                pipe,
                data.train,
                self.config.head_mode,
                self._threat(self.config.threat.train_attack),
                self.config.head_training.to_train_config(seed),
                history=history,
                debug=self._debug,
            )
            head.freeze()
            with self.store.writing("head", key) as tmp:
                save_checkpoint(head, tmp / "head", seed=seed, provenance={"stage": "head", "key": key})
                self._store_history(tmp, history)
            return pipe

    @pipeline_stage(name="eval", depends_on=("gen_data", "train_head"))
    def eval(self, seed: int, data: DataSplits, pipe: Pipeline) -> EvalResult:
        """Clean and robust accuracy with bootstrap intervals."""
        key = stage_keys(self.config, seed)["eval"]
        directory = self.store.fetch("eval", key)
        with self._progress("eval", seed, cached=directory is not None):
            if directory is not None:
                return EvalResult.from_dict(read_json(directory / "eval.json"))

            attacks = self.config.threat.eval_threat_models()
            options = dict(
                batch_size=self.config.evaluation.batch_size,
                bootstrap_repeats=self.config.evaluation.bootstrap_repeats,
                seed=seed,
            )
            if self.config.transfer.enabled and pipe.autoencoder is not None:
                result = transfer_evaluate(
                    pipe.autoencoder, data.test, pipe.foundation, pipe.head, attacks, variant=pipe.variant, **options
                )
            else:
                result = evaluate(pipe, data.test, attacks, **options)
            with self.store.writing("eval", key) as tmp:
                write_json(tmp / "eval.json", result.to_dict())
            return result

    @pipeline_stage(name="theory", depends_on=("gen_data", "train_head"))
    def theory(self, seed: int, data: DataSplits, pipe: Pipeline) -> Optional[dict[str, Any]]:
        """Robust-margin estimate and the adversarial loss bound check."""
        key = stage_keys(self.config, seed)["theory"]
        if key is None:
            return None
        directory = self.store.fetch("theory", key)
        with self._progress("theory", seed, cached=directory is not None):
            if directory is not None:
                return read_json(directory / THEORY_REPORT_FILE)

            settings = self.config.theory
            tm = self._theory_threat()
            eta = estimate_eta(
                pipe.autoencoder,
                data.test,
                tm,
                space=settings.eta_space,
                tau=self.config.tau,
                batch_size=self.config.evaluation.batch_size,
                max_samples=settings.max_eta_samples,
                seed=seed,
            )
            bound = check_theorem_bound(
                pipe,
                data.test,
                tm,
                kappa=settings.kappa,
                seed=seed,
                tau=self.config.tau,
                batch_size=self.config.evaluation.batch_size,
                lipschitz_pairs=settings.lipschitz_pairs,
            )
            report = _finite_tree(
                {"eta": eta.to_dict(), "bound": bound.to_dict(), "witness": self._witness(seed, data.test, tm)}
            )
            with self.store.writing("theory", key) as tmp:
                write_json(tmp / THEORY_REPORT_FILE, report)
            return report

    # Orchestration

    def run_seed(self, seed: int, until: Optional[str] = None) -> Optional[SeedRun]:
        """
        Run the stages for one seed, stopping after `until` if given.

        Returns:
            Optional[SeedRun]: The full record, or None when stopped early
        """
        names = [stage.name for stage in list_stages(self)]
        if until is not None and until not in names:
            raise ConfigError(f"Unknown stage '{until}'; expected one of {names}")
        self._debug_log("Running seed", seed)

        data = self.gen_data(seed)
        if until == "gen_data":
            return None
        backbone = self.pretrain(seed, data)
        if until == "pretrain":
            return None
        autoencoder, queries = self.train_preproc(seed, data, backbone)
        if until == "train_preproc":
            return None
        pipe = self.train_head(seed, data, backbone, autoencoder)
        if until == "train_head":
            return None
        if until == "theory":
            self.theory(seed, data, pipe)
            return None
        result = self.eval(seed, data, pipe)
        if until == "eval":
            return None
        theory = self.theory(seed, data, pipe)

        keys = stage_keys(self.config, seed)
        histories = {
            stage: str(self.store.stage_dir(stage, key) / HISTORY_FILE)
            for stage, key in keys.items()
            if key is not None and (self.store.stage_dir(stage, key) / HISTORY_FILE).is_file()
        }
        return SeedRun(
            seed=seed,
            eval_result=result,
            stage_keys=keys,
            eta=theory["eta"] if theory else None,
            bound=theory["bound"] if theory else None,
            histories=histories,
            foundation_queries_during_preprocessing=queries,
            stage_status=self.status(seed),
        )

    def run(self, until: Optional[str] = None) -> list[SeedRun]:
        """Run every configured seed and copy per-seed artifacts into `run_dir`."""
        started = time.perf_counter()
        runs = []
        for seed in self.config.seeds:
            run = self.run_seed(seed, until=until)
            if run is not None:
                runs.append(run)
                self._export_seed(run)
        self._debug_log("Runtime finished", f"{time.perf_counter() - started:.2f}s")
        return runs

    def _export_seed(self, run: SeedRun) -> None:
        target = self.run_dir / f"seed-{run.seed}"
        target.mkdir(parents=True, exist_ok=True)
        write_json(target / "stages.json", {"keys": run.stage_keys, "status": run.stage_status})
        for stage, history in run.histories.items():
            shutil.copyfile(history, target / f"{stage}_{HISTORY_FILE}")
        for stage, filename in (("eval", "eval.json"), ("theory", THEORY_REPORT_FILE)):
            key = run.stage_keys.get(stage)
            if key is not None and self.store.has(stage, key):
                shutil.copyfile(self.store.stage_dir(stage, key) / filename, target / filename)
