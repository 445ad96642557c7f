"""Domain exceptions raised across the simulator."""


class LevelStructureError(ValueError):
    """Level grid has the wrong shape or references unknown tiles."""


class LevelValidationError(ValueError):
    """Adjacent tiles disagree on their shared edge heights."""

    def __init__(self, message: str, positions: list[tuple[tuple[int, int], tuple[int, int]]]):
        super().__init__(message)
        self.positions = positions


class RaycastError(ValueError):
    """Ray request is malformed (origin outside bounds, zero direction)."""


class TileSetError(ValueError):
    """Tileset violates its invariants."""


class WFCContradictionError(RuntimeError):
    """Wave function collapse failed on every restart."""

    def __init__(self, message: str, first_seed: int, last_seed: int, cell: tuple[int, int] | None):
        super().__init__(message)
        self.first_seed = first_seed
        self.last_seed = last_seed
        self.cell = cell


class MotivationUnavailableError(ValueError):
    """Motivation was requested for a trace that carries no motivation samples."""


class FitnessInputError(ValueError):
    """Fitness was requested without results for every weighted configuration."""

    def __init__(self, message: str, missing: list[str]):
        super().__init__(message)
        self.missing = missing


class SpawnSelectionError(RuntimeError):
    """No spawn set satisfies the separation constraint."""
