"""Exception types shared across the simulator."""


class ScenarioError(ValueError):
    """A scenario description violates an invariant; message carries the field path."""


class SimulationBug(RuntimeError):
    """Fatal internal inconsistency (e.g. scheduling in the past); signals a model bug."""
