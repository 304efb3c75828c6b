"""
Manifest Service - Record what a CLI run read, wrote and how long it took.

Every command writes manifest.json next to its outputs:
  - command, config path, master seed and tool version
  - output paths relative to the output directory (sorted)
  - wall times per named step, plus the total

Schema: docs/manifest-schema.md
"""

import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

from loguru import logger

from utils.helpers import write_json

MANIFEST_NAME = "manifest.json"


def tool_version() -> str:
    try:
        return version("sepkit")
    except PackageNotFoundError:
        return "0.1.0"


@dataclass
class RunManifest:
    command: str
    config_path: str | None
    master_seed: int
    tool_version: str = field(default_factory=tool_version)
    output_paths: list[str] = field(default_factory=list)
    wall_times: dict[str, float] = field(default_factory=dict)
    exit_code: int | None = None

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["output_paths"] = sorted(set(self.output_paths))
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunManifest":
        return cls(**data)


class ManifestService:
    """
    Collects a RunManifest over one command.

    Methods:
        begin(command, out_dir, config_path, seed): start a manifest
        timed(step): context manager recording a step's wall time
        add_output(path): register a written file
        finish(exit_code): write manifest.json atomically
    """

    def __init__(self):
        self.manifest: RunManifest | None = None
        self.out_dir: Path | None = None
        self._start = 0.0

    def begin(self, command: str, out_dir: str | Path, config_path: str | Path | None, seed: int) -> RunManifest:
        self.out_dir = Path(out_dir)
        self.manifest = RunManifest(command, str(config_path) if config_path else None, int(seed))
        self._start = time.perf_counter()
        logger.debug(f"Manifest started for '{command}' in {self.out_dir}")
        return self.manifest

    def _require(self) -> RunManifest:
        if self.manifest is None:
            raise RuntimeError("ManifestService.begin() was not called")
        return self.manifest

    @contextmanager
    def timed(self, step: str) -> Iterator[None]:
        manifest = self._require()
        start = time.perf_counter()
        try:
            yield
        finally:
            manifest.wall_times[step] = time.perf_counter() - start

    def add_output(self, path: str | Path) -> Path:
        manifest = self._require()
        path = Path(path)
        try:
            manifest.output_paths.append(path.relative_to(self.out_dir).as_posix())
        except ValueError:
            manifest.output_paths.append(path.as_posix())
        return path

    def finish(self, exit_code: int) -> Path:
        """Write the manifest (log file included in the output list if present)."""
        manifest = self._require()
        manifest.exit_code = int(exit_code)
        manifest.wall_times["total"] = time.perf_counter() - self._start
        log_file = self.out_dir / "sepkit.log"
        if log_file.exists():
            self.add_output(log_file)
        path = write_json(self.out_dir / MANIFEST_NAME, manifest.to_dict())
        logger.debug(f"Manifest written to {path}")
        return path


# Singleton accessor
_manifest_service_instance = None


def get_manifest_service() -> ManifestService:
    """
    Get the singleton ManifestService instance.

    Returns:
        ManifestService: The global instance
    """
    global _manifest_service_instance
    if _manifest_service_instance is None:
        _manifest_service_instance = ManifestService()
    return _manifest_service_instance
