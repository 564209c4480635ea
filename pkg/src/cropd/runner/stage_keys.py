"""Per-stage cache keys.

Each key hashes only the configuration subtree its stage reads plus the keys
of its upstream stages, so changing evaluation settings never retrains and
changing the head recipe never regenerates data.
"""

from typing import Any, Optional

from cropd.runner.config import ExperimentConfig, config_dict
from cropd.utils.serialization import sha256_hex

STAGES = ("data", "source_data", "pretrain", "preproc", "head", "eval", "theory")


def _dataset_subtree(config: ExperimentConfig, source: bool) -> dict[str, Any]:
    section = config.transfer.source if source else config.dataset
    data = config_dict(section)
    # train_fraction only narrows pre-processor training.
    data.pop("train_fraction")
    return data


def _threat_budget(config: ExperimentConfig) -> dict[str, Any]:
    threat = config_dict(config.threat)
    return {"norm": threat["norm"], "epsilon": threat["epsilon"], "clamp": threat["clamp"]}


def stage_keys(config: ExperimentConfig, seed: int) -> dict[str, Optional[str]]:
    """
    Cache keys of every stage for one seed.

    `source_data` and `preproc` are None when the stage does not run
    (no transfer, or the Identity variant); `theory` is None when disabled.
    """
    keys: dict[str, Optional[str]] = {key: None for key in STAGES}
    keys["data"] = sha256_hex({"stage": "data", "dataset": _dataset_subtree(config, source=False)})
    if config.transfer.enabled:
        keys["source_data"] = sha256_hex({"stage": "data", "dataset": _dataset_subtree(config, source=True)})

    keys["pretrain"] = sha256_hex(
        {
            "stage": "pretrain",
            "data": keys["data"],
            "backbone": config_dict(config.backbone),
            "train": config_dict(config.foundation_training),
            "dtype": config.dtype,
            "seed": seed,
        }
    )

    if config.variant.uses_autoencoder:
        source = config.transfer.source if config.transfer.enabled else config.dataset
        keys["preproc"] = sha256_hex(
            {
                "stage": "preproc",
                "data": keys["source_data"] or keys["data"],
                "train_fraction": source.train_fraction,
                "variant": config.variant.value,
                "weight": config.preprocessor_weight,
                "tau": config.tau,
                "threat": {**_threat_budget(config), "train_attack": config.threat.train_attack},
                "autoencoder": config_dict(config.autoencoder),
                "augmentation": config_dict(config.augmentation),
                "train": config_dict(config.preprocessor_training),
                "dtype": config.dtype,
                "seed": seed,
            }
        )

    keys["head"] = sha256_hex(
        {
            "stage": "head",
            "pretrain": keys["pretrain"],
            "preproc": keys["preproc"],
            "mode": config.head_mode,
            "threat": _threat_budget(config),
            "train": config_dict(config.head_training),
            "seed": seed,
        }
    )
    keys["eval"] = sha256_hex(
        {
            "stage": "eval",
            "head": keys["head"],
            "threat": _threat_budget(config),
            "attacks": list(config.threat.eval_attacks),
            "evaluation": config_dict(config.evaluation),
            "seed": seed,
        }
    )
    if config.theory.enabled:
        keys["theory"] = sha256_hex(
            {
                "stage": "theory",
                "head": keys["head"],
                "threat": _threat_budget(config),
                "attacks": list(config.threat.eval_attacks),
                "theory": config_dict(config.theory),
                "tau": config.tau,
                "evaluation_batch_size": config.evaluation.batch_size,
                "seed": seed,
            }
        )
    return keys
