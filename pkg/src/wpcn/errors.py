"""Exception hierarchy shared by all wpcn modules."""


class WPCNError(Exception):
    pass


class DomainError(WPCNError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(DomainError):
    pass


class UnrepresentableScheduleError(DomainError):
    """Requested uplink fractions need a downlink level above the peak power."""

    def __init__(self, user, level, peak):
        self.user = user
        self.level = level
        self.peak = peak
        super().__init__(
            f"unrepresentable schedule: user {user} needs downlink level "
            f"{level:.6g} W above peak power {peak:.6g} W"
        )


class NoEnergyError(DomainError):
    pass


class OracleLimitError(DomainError):
    pass


class SolverError(WPCNError, RuntimeError):
    pass
