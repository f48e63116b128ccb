"""Joint sensing/communication waveform and RIS phase design with tunable PAPR."""

from .exceptions import ConfigError, SolverAbort
from .model import (
    ChannelSet,
    SystemConfig,
    effective_channel,
    generate_channels,
    generate_symbols,
    mui_power,
    papr,
    sum_rate,
)

__all__ = [
    "ChannelSet",
    "ConfigError",
    "SolverAbort",
    "SystemConfig",
    "effective_channel",
    "generate_channels",
    "generate_symbols",
    "mui_power",
    "papr",
    "sum_rate",
]

__version__ = "0.1.0"
