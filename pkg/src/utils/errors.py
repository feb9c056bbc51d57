class SimulationError(Exception):
    """Base class for every error raised by the simulator"""


class InvalidInputError(SimulationError, ValueError):
    """An argument is out of its valid domain (negative distance, length mismatch, bad index)"""


class DegenerateChannelError(SimulationError):
    """Channel energy is zero, so no normalized beamformer exists"""


class RankDeficiencyError(SimulationError):
    """The stacked zero-forcing system has no full row rank"""

    def __init__(self, rank: int, rows: int):
        super().__init__(f"ZF system rank {rank} < {rows} rows")
        self.rank = rank
        self.rows = rows


class ConfigError(SimulationError):
    """Configuration file is missing or malformed"""
