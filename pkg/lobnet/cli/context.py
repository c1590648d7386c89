"""Run manifest loading, output layout and the per-day worker pool."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence, TypeVar

import yaml

from lobnet.common.core.exceptions import ConfigError
from lobnet.common.models.schemas import FitConfig, RunManifest
from lobnet.common.utils import artifacts
from lobnet.common.utils.rng import derive_int_seed

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# keys that do not change any artifact and stay out of the manifest hash
UNHASHED_KEYS = {"output", "jobs"}


def read_manifest_file(path: Optional[Path]) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle) or {}
    except OSError as e:
        raise ConfigError(f"cannot read manifest {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"manifest {path} is not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"manifest {path} must be a key-value mapping")
    return data


def load_manifest(
    path: Optional[Path],
    overrides: Mapping[str, Any],
    gen_file: Optional[Path] = None,
) -> RunManifest:
    """
    Manifest file keys, then a generator config file over the `gen` section,
    then CLI flags on top (None means the flag was not given).
    """
    data = read_manifest_file(path)
    if gen_file is not None:
        data["gen"] = {**(data.get("gen") or {}), **read_manifest_file(gen_file)}
    data.update({key: value for key, value in overrides.items() if value is not None})
    return RunManifest(**data)


@dataclass
class RunContext:
    manifest: RunManifest
    digest: str

    @classmethod
    def from_manifest(cls, manifest: RunManifest) -> "RunContext":
        payload = manifest.model_dump(mode="json", exclude=UNHASHED_KEYS)
        return cls(manifest=manifest, digest=artifacts.manifest_hash(payload))

    @property
    def output(self) -> Path:
        return self.manifest.output

    @property
    def jobs(self) -> int:
        return self.manifest.jobs

    def path(self, *parts: str) -> Path:
        return self.output.joinpath(*parts)

    def write_csv(self, relative: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return artifacts.write_csv(self.path(relative), columns, rows, self.digest)

    def write_json(self, relative: str, payload: Any) -> Path:
        return artifacts.write_json(self.path(relative), payload, self.digest)

    def fit_config(self, stream: int, day: Optional[date] = None, *path: int, jobs: int = 1) -> FitConfig:
        """The manifest's fit settings with a seed derived for one (stream, day) pair."""
        ordinal = day.toordinal() if day is not None else 0
        return self.manifest.fit.model_copy(update={
            "significance": self.manifest.significance,
            "rng_seed": derive_int_seed(self.manifest.seed, stream, ordinal, *path),
            "jobs": jobs,
        })

    def day_seed(self, stream: int, day: Optional[date] = None) -> int:
        return derive_int_seed(self.manifest.seed, stream, day.toordinal() if day is not None else 0)


def fan_out(func: Callable[..., R], items: Sequence[T], jobs: int) -> list[R]:
    """Apply func to every item, in a process pool when jobs > 1; results keep item order."""
    if jobs <= 1 or len(items) < 2:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(func, items))
