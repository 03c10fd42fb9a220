"""Python bindings for the qosim discrete-event QoS simulator."""

from ._core import (
    ConfigError,
    Error,
    PreconditionError,
    RunOutput,
    Scenario,
    load,
    load_file,
    preset,
    preset_description,
    preset_names,
    run,
)

__all__ = [
    "ConfigError",
    "Error",
    "PreconditionError",
    "RunOutput",
    "Scenario",
    "load",
    "load_file",
    "preset",
    "preset_description",
    "preset_names",
    "run",
]
