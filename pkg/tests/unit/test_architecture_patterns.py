"""Architecture pattern validation tests.

These tests enforce architectural constraints that keep results reproducible:
all randomness goes through the keyed streams in core/rng.py, and all
concurrency through core/parallel.py.
"""

from __future__ import annotations

import re
from pathlib import Path

# Paths
SRC_ROOT = Path(__file__).parent.parent.parent / "src" / "hermite_persist"
CORE_ROOT = SRC_ROOT / "core"
EXPERIMENTS_ROOT = SRC_ROOT / "experiments"


class TestRandomnessPatterns:
    """Ensure random generators are only built in core/rng.py."""

    ALLOWED_FILES = {
        CORE_ROOT / "rng.py",
    }

    def test_no_direct_random_generators(self):
        """numpy.random / random should only appear in core/rng.py.

        Seeding a generator anywhere else breaks worker invariance. Use:

            from hermite_persist.core.rng import Stream, replica_generator
            gen = replica_generator(seed, replica, Stream.GAUSSIAN)
        """
        violations = []
        pattern = re.compile(
            r"np\.random\.|numpy\.random|^\s*import random\b|^\s*from random import",
            re.MULTILINE,
        )
        for py_file in SRC_ROOT.rglob("*.py"):
            if py_file in self.ALLOWED_FILES:
                continue
            if pattern.search(py_file.read_text()):
                violations.append(str(py_file.relative_to(SRC_ROOT)))

        assert not violations, (
            "Random generators should only be created in core/rng.py.\n"
            "Found violations in:\n" + "\n".join(f"  - {v}" for v in violations)
        )

    def test_no_time_based_seeds(self):
        """Seeds must never come from the clock."""
        violations = []
        for py_file in SRC_ROOT.rglob("*.py"):
            content = py_file.read_text()
            if re.search(r"seed\s*=\s*.*time\.(time|perf_counter)", content):
                violations.append(str(py_file.relative_to(SRC_ROOT)))
        assert not violations


class TestConcurrencyPatterns:
    """Ensure executors are only created in core/parallel.py."""

    ALLOWED_FILES = {
        CORE_ROOT / "parallel.py",
    }

    def test_executors_only_in_parallel(self):
        """Services should call self.map_replicas() instead of building pools."""
        violations = []
        for py_file in SRC_ROOT.rglob("*.py"):
            if py_file in self.ALLOWED_FILES:
                continue
            content = py_file.read_text()
            pattern = r"^\s*(from|import).*(concurrent\.futures|multiprocessing)"
            if re.search(pattern, content, re.M):
                violations.append(str(py_file.relative_to(SRC_ROOT)))
        assert not violations, "Use ExperimentService.map_replicas(): " + ", ".join(violations)


class TestCommandPatterns:
    """Ensure commands follow the command/service split."""

    def test_commands_register(self):
        """Every experiment module defining a Command class registers it."""
        missing = []
        for py_file in EXPERIMENTS_ROOT.rglob("*.py"):
            content = py_file.read_text()
            if re.search(r"^class \w+Command\(ExperimentCommand\)", content, re.M) and (
                "@register_command(" not in content
            ):
                missing.append(str(py_file.relative_to(SRC_ROOT)))
        assert not missing, "Commands without @register_command: " + ", ".join(missing)

    def test_services_extend_base(self):
        """Service classes extend ExperimentService for settings and timing."""
        offenders = []
        for py_file in EXPERIMENTS_ROOT.rglob("service.py"):
            content = py_file.read_text()
            for match in re.finditer(r"^class (\w+Service)\((\w+)\)", content, re.M):
                if match.group(2) != "ExperimentService":
                    offenders.append(f"{py_file.relative_to(SRC_ROOT)}:{match.group(1)}")
        assert not offenders
