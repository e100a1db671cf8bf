"""Exception types raised across the package."""


class DiscordGateError(Exception):
    """Base class for all errors raised by discord_gate."""


class DimensionError(DiscordGateError, ValueError):
    pass


class HermiticityError(DiscordGateError, ValueError):
    pass


class UnitarityError(DiscordGateError, ValueError):
    pass


class StateInvariantError(DiscordGateError, ValueError):
    """A matrix failed one of the density-operator invariants.

    ``invariant`` names the violated property so that callers (the CLI in
    particular) can report it verbatim.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class NotSLError(DiscordGateError, ValueError):
    """Operation requires a state whose bath blocks have unit trace or vanish."""


class ConfigError(DiscordGateError, ValueError):
    pass
