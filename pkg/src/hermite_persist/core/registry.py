"""Command registration and discovery.

Provides the registry of all CLI subcommands.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from hermite_persist.core.base import ExperimentCommand


@dataclass
class CommandDefinition:
    """Complete definition of a registered command."""

    command_class: type[ExperimentCommand]
    group: str
    subgroup: str | None = None


class CommandRegistry:
    """
    Registry of all available subcommands.

    Commands self-register using the @register_command decorator.
    The CLI builds its argument parser from the registry.
    """

    _commands: dict[str, CommandDefinition] = {}
    _instance: CommandRegistry | None = None

    def __new__(cls) -> CommandRegistry:
        """Singleton pattern."""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._commands = {}
        return cls._instance

    def register(
        self,
        command_class: type[ExperimentCommand],
        group: str,
        subgroup: str | None = None,
    ) -> None:
        """
        Register a command class.

        Args:
            command_class: The command class to register.
            group: Experiment family (e.g., "persistence", "hermite").
            subgroup: Optional subgroup (e.g., "exponent").
        """
        instance = command_class()
        self._commands[instance.name] = CommandDefinition(
            command_class=command_class,
            group=group,
            subgroup=subgroup,
        )

    def get_command(self, name: str) -> ExperimentCommand | None:
        """
        Get a command instance by name.

        Args:
            name: Subcommand name (e.g., "exponent").

        Returns:
            A new command instance, or None if not found.
        """
        definition = self._commands.get(name)
        if definition:
            return definition.command_class()
        return None

    def list_commands(self, group: str | None = None) -> list[ExperimentCommand]:
        """
        List registered commands, sorted by name.

        Args:
            group: Optional group to filter by.
        """
        return [
            self._commands[name].command_class()
            for name in self.list_command_names(group)
        ]

    def list_command_names(self, group: str | None = None) -> list[str]:
        """List registered command names, optionally for one group."""
        names = [
            name
            for name, definition in self._commands.items()
            if group is None or definition.group == group
        ]
        return sorted(names)

    def list_groups(self) -> list[str]:
        """List all registered command groups."""
        return sorted({d.group for d in self._commands.values()})

    def get_command_schemas(self) -> dict[str, Any]:
        """
        Get descriptions and option schemas for all commands.

        Returns:
            Dictionary mapping command names to their schemas.
        """
        schemas: dict[str, Any] = {}
        for name in self.list_command_names():
            command = self._commands[name].command_class()
            schemas[name] = {
                "name": name,
                "group": self._commands[name].group,
                "description": command.description,
                "inputSchema": command.get_options_schema(),
                "metadata": command.metadata.to_dict(),
            }
        return schemas

    def clear(self) -> None:
        """Clear all registered commands (for testing)."""
        self._commands.clear()

    def __len__(self) -> int:
        return len(self._commands)

    def __contains__(self, name: str) -> bool:
        return name in self._commands


# Global registry instance
registry = CommandRegistry()


def register_command(
    group: str,
    subgroup: str | None = None,
) -> Callable[[type[ExperimentCommand]], type[ExperimentCommand]]:
    """
    Decorator to register a command class.

    Usage:
        @register_command("persistence", "exponent")
        class ExponentCommand(ExperimentCommand):
            ...

    Args:
        group: Experiment family.
        subgroup: Optional subgroup.

    Returns:
        Decorator function.
    """

    def decorator(cls: type[ExperimentCommand]) -> type[ExperimentCommand]:
        registry.register(cls, group, subgroup)
        return cls

    return decorator
