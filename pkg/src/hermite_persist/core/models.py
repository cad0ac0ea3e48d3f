"""Core data models.

Provides command metadata, command results and the run manifest.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

UTC = timezone.utc


@dataclass(frozen=True)
class CommandMetadata:
    """
    Metadata describing command behavior.

    Attributes:
        monte_carlo: Command draws random replicas (seeded, worker-invariant).
        default_budget_minutes: Documented wall-clock budget of the default
            configuration on a 4-core desktop.
        outputs: File names the command writes into the output directory.
    """

    monte_carlo: bool = True
    default_budget_minutes: float = 1.0
    outputs: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "monte_carlo": self.monte_carlo,
            "default_budget_minutes": self.default_budget_minutes,
            "outputs": list(self.outputs),
        }


@dataclass
class CommandResult:
    """
    Result of a command execution.

    Attributes:
        summary: JSON-serializable summary printed on stdout.
        files: Output files written, relative to the output directory.
        timings: Seconds spent per module.
    """

    summary: dict[str, Any]
    files: list[Path] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file."""
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    """
    Provenance record written next to every run's outputs.

    Attributes:
        command: Subcommand name.
        config: Validated option values echoed back.
        version: Toolkit version.
        started_at: UTC start time.
        wall_clock_s: Total elapsed seconds.
        timings: Per-module seconds.
        digests: SHA-256 per output file name.
    """

    command: str
    config: dict[str, Any]
    version: str
    started_at: datetime = field(default_factory=lambda: datetime.now(UTC))
    wall_clock_s: float = 0.0
    timings: dict[str, float] = field(default_factory=dict)
    digests: dict[str, str] = field(default_factory=dict)

    def record_files(self, root: Path, files: list[Path]) -> None:
        """Digest each output file."""
        for path in files:
            self.digests[path.name] = file_digest(root / path.name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "version": self.version,
            "started_at": self.started_at.isoformat(),
            "wall_clock_s": self.wall_clock_s,
            "timings": self.timings,
            "digests": self.digests,
        }

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def verify_manifest(path: Path) -> dict[str, bool]:
    """
    Re-check every digest recorded in a manifest.

    Returns:
        Mapping of file name to whether its current digest matches.
    """
    data = json.loads(path.read_text())
    root = path.parent
    return {
        name: (root / name).exists() and file_digest(root / name) == digest
        for name, digest in data.get("digests", {}).items()
    }
