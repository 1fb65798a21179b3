"""Exception hierarchy shared across the simulator.

ConfigError covers anything wrong with user input (config files, profiles,
CLI arguments); SimulationFault covers physics-level failures detected while
a run is in progress. The CLI maps these onto exit codes 1 and 2.
"""


class FlycapError(Exception):
    """Base class for all package errors."""


class ConfigError(FlycapError):
    """Invalid configuration, file format, or CLI input."""


class ProfileError(ConfigError):
    """Malformed or non-monotone current profile."""


class SimulationFault(FlycapError):
    """A running simulation produced a physically invalid state."""


class OcvDomainError(SimulationFault):
    """Open-circuit voltage requested outside the open interval (0, 1)."""


class SocRangeError(SimulationFault):
    """A Coulomb-counting update pushed SoC outside [0, 1]."""


class SingularSystemError(SimulationFault):
    """The current-split system is rank deficient."""


class MetricsError(FlycapError):
    """A metric is undefined for the given trace (e.g. no balancer activity)."""
