"""Exception types shared across the generator."""


class DungeonError(Exception):
    """Base class for all generator errors."""


class UnpairedKeyOrLock(DungeonError):
    """A key or lock id has no matching partner; a repair step was skipped."""


class CannotDetachRoot(DungeonError):
    """The root (start room) can never be removed from a level tree."""


class NoLockedRoom(DungeonError):
    """Goal resolution needs at least one locked room."""


class DegenerateLevel(DungeonError):
    """The level is too small for the requested metric."""


class EmptyArchive(DungeonError):
    """Selection requires at least one occupied archive cell."""


class NoEligibleRoom(DungeonError):
    """The level has no room that can host the requested element."""


class InitExhausted(DungeonError):
    """Initialization failed to produce a usable individual within its cap."""
