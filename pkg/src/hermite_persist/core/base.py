"""Base classes for experiment services and commands.

Provides ExperimentService and ExperimentCommand base classes.
"""

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel

from hermite_persist.core.config import Settings, get_settings
from hermite_persist.core.errors import handle_error
from hermite_persist.core.models import CommandMetadata, CommandResult
from hermite_persist.core.output import OutputWriter
from hermite_persist.core.parallel import ChunkTask, parallel_map

T = TypeVar("T")
S = TypeVar("S", bound="ExperimentService")


class ExperimentService:
    """
    Base class for experiment computations.

    Provides:
    - Settings access (tolerances, caps, default seed)
    - Replica-parallel mapping with worker-invariant results
    - Per-module timing
    """

    def __init__(
        self,
        settings: Settings | None = None,
        workers: int | None = None,
    ) -> None:
        """
        Initialize the service.

        Args:
            settings: Optional settings override.
            workers: Optional worker count override.
        """
        self._settings = settings
        self._workers = workers
        self.timings: dict[str, float] = {}
        self._nested: list[ExperimentService] = []

    @property
    def settings(self) -> Settings:
        if self._settings is not None:
            return self._settings
        return get_settings()

    @property
    def workers(self) -> int:
        return self._workers if self._workers is not None else self.settings.workers

    def resolve_seed(self, seed: int | None) -> int:
        """Explicit seed, else the configured default."""
        return self.settings.seed if seed is None else seed

    def map_replicas(self, replicas: int, task: ChunkTask[T]) -> list[T]:
        """
        Run ``task`` over ``range(replicas)`` in fixed chunks.

        Returns:
            Chunk results in replica order.
        """
        return parallel_map(
            range(replicas),
            task,
            workers=self.workers,
            chunk_size=self.settings.chunk_size,
        )

    @contextmanager
    def timed(self, module: str) -> Iterator[None]:
        """Accumulate wall time spent under ``module``."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[module] = self.timings.get(module, 0.0) + time.perf_counter() - start

    def nest(self, service: S) -> S:
        """Register a service this one delegates to, so its timers are reported."""
        self._nested.append(service)
        return service

    def all_timings(self) -> dict[str, float]:
        """Timers of this service and every nested service, summed per module."""
        merged = dict(self.timings)
        for service in self._nested:
            for module, seconds in service.all_timings().items():
                merged[module] = merged.get(module, 0.0) + seconds
        return merged


@dataclass
class RunContext:
    """Everything a command needs besides its options."""

    settings: Settings
    output_dir: Path
    writer: OutputWriter
    workers: int = 1
    timings: dict[str, float] = field(default_factory=dict)

    @classmethod
    def create(
        cls,
        settings: Settings | None = None,
        output_dir: Path | None = None,
        workers: int | None = None,
    ) -> RunContext:
        settings = settings or get_settings()
        root = output_dir or settings.output_dir
        return cls(
            settings=settings,
            output_dir=root,
            writer=OutputWriter(root),
            workers=workers or settings.workers,
        )

    def merge_timings(self, timings: dict[str, float]) -> None:
        for module, seconds in timings.items():
            self.timings[module] = self.timings.get(module, 0.0) + seconds


class ExperimentCommand(ABC):
    """
    Base class for all CLI subcommands.

    Commands are the user-facing interface. They:
    1. Define their name, description, and metadata
    2. Define their input parameters (options schema)
    3. Validate inputs using Pydantic
    4. Call services to perform computations
    5. Write result files and return a summary

    Subclasses must define:
    - name: Subcommand identifier
    - description: Help text
    - options_model: Pydantic model for options
    - execute(): Implementation method
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """
        Subcommand name.

        Example: "exponent", "decorrelate"
        """

    @property
    @abstractmethod
    def description(self) -> str:
        """Help text shown by ``--help`` and ``list``."""

    @property
    def metadata(self) -> CommandMetadata:
        """
        Command behavioral metadata.

        Override to customize. Default assumes a seeded Monte Carlo command.
        """
        return CommandMetadata()

    @property
    @abstractmethod
    def options_model(self) -> type[BaseModel]:
        """
        Pydantic model class for command options.

        Used for:
        - Input validation
        - Building the argparse flags
        """

    def get_options_schema(self) -> dict[str, Any]:
        """Get JSON Schema for command parameters."""
        return self.options_model.model_json_schema()

    @abstractmethod
    def execute(self, options: Any, context: RunContext) -> CommandResult:
        """
        Execute the command with validated options.

        Args:
            options: Validated Pydantic model instance.
            context: Settings, output writer and worker count.

        Returns:
            Summary and list of written files.

        Raises:
            HermiteError: On any error during execution.
        """

    def parse_options(self, raw_options: dict[str, Any]) -> BaseModel:
        """
        Validate a raw options dictionary.

        Raises:
            ValidationError: If options are invalid.
        """
        try:
            return self.options_model(**raw_options)
        except Exception as e:
            raise handle_error(e, context=f"Invalid options for '{self.name}'") from e

    def run(self, raw_options: dict[str, Any], context: RunContext) -> CommandResult:
        """
        Run the command with raw options dictionary.

        Validates options using the Pydantic model before execution.

        Raises:
            ValidationError: If options are invalid.
            HermiteError: If execution fails.
        """
        return self.execute(self.parse_options(raw_options), context)
