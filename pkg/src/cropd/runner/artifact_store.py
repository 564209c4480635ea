"""Filesystem cache of stage artifacts."""

import json
import logging
import os
import shutil
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Generator, Optional

import shortuuid

from cropd.runner.exceptions import RunnerError

logger = logging.getLogger(__name__)

COMPLETE_MARKER = "complete.json"
CACHE_DIR = "cache"


class ArtifactStore:
    """
    Stage artifacts under `<root>/cache/<stage>/<key>/`.

    A stage directory becomes visible only once complete: writers fill a
    private temporary sibling and rename it into place, so concurrent workers
    producing the same key never observe partial output. The first finished
    writer wins; later ones discard their copy.
    """

    def __init__(self, root: str | Path) -> None:
        """
        Initialize the store.

        Args:
            root: Output root shared by every experiment using this cache
        """
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def stage_dir(self, stage: str, key: str) -> Path:
        return self.root / CACHE_DIR / stage / key

    def has(self, stage: str, key: str) -> bool:
        """True if a completed artifact exists for (stage, key)."""
        return (self.stage_dir(stage, key) / COMPLETE_MARKER).is_file()

    def fetch(self, stage: str, key: str) -> Optional[Path]:
        """Return the completed artifact directory, or None."""
        return self.stage_dir(stage, key) if self.has(stage, key) else None

    @contextmanager
    def writing(self, stage: str, key: str) -> Generator[Path, None, None]:
        """
        Yield a temporary directory that is published as (stage, key) on success.

        The temporary directory is removed if the block raises.

        Raises:
            RunnerError: If publishing fails for a reason other than a concurrent winner
        """
        final = self.stage_dir(stage, key)
        final.parent.mkdir(parents=True, exist_ok=True)
        tmp = final.parent / f".{key}.{shortuuid.uuid()}.tmp"
        tmp.mkdir()
        try:
            yield tmp
            write_json(tmp / COMPLETE_MARKER, {"stage": stage, "key": key})
            self._publish(tmp, final)
        finally:
            if tmp.exists():
                shutil.rmtree(tmp, ignore_errors=True)

    def _publish(self, tmp: Path, final: Path) -> None:
        if self.has(final.parent.name, final.name):
            logger.info("Artifact %s was completed by another worker", final)
            return
        if final.exists():
            self._discard_stale(final)
        try:
            os.replace(tmp, final)
        except OSError as e:
            if (final / COMPLETE_MARKER).is_file():
                logger.info("Artifact %s was completed by another worker", final)
                return
            raise RunnerError(f"Failed to publish artifact {final}: {str(e)}")

    def _discard_stale(self, final: Path) -> None:
        """Remove a directory left by an interrupted writer, keeping one that completed meanwhile."""
        aside = final.parent / f".{final.name}.{shortuuid.uuid()}.stale"
        try:
            os.replace(final, aside)
        except OSError:
            return
        if (aside / COMPLETE_MARKER).is_file():
            try:
                os.replace(aside, final)
                return
            except OSError:
                pass
        shutil.rmtree(aside, ignore_errors=True)


def write_json(path: str | Path, data: Any) -> Path:
    """Write JSON with sorted keys, creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(data, indent=2, sort_keys=True))
    return target


def read_json(path: str | Path) -> Any:
    target = Path(path)
    try:
        return json.loads(target.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise RunnerError(f"Cannot read artifact {target}: {str(e)}")
