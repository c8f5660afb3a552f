"""Exception types shared across the package."""


class WindmapError(Exception):
    """Base class for all package errors."""


class SelfIntersecting(WindmapError):
    """Decoded footprint polygon intersects itself (infeasible genome)."""


class OutOfBounds(WindmapError):
    """Polygon does not fit inside the target grid after offsetting."""


class UnstableViscosity(WindmapError):
    """Relaxation parameter too close to its stability limit."""


class NonPositiveDensity(WindmapError):
    """A cell density dropped to zero or below (simulation blow-up)."""


class SimulationDiverged(WindmapError):
    """Simulation produced NaNs or non-positive densities."""


class DegenerateEntropicStep(WindmapError):
    """Entropic relaxation denominator underflowed (handled per cell)."""


class IllConditioned(WindmapError):
    """Kernel matrix factorization failed even after jitter escalation."""


class RankDeficient(WindmapError):
    """Least-squares design matrix does not have full column rank."""


class ZeroVariance(WindmapError):
    """Rank correlation undefined because one input is constant."""


class DimensionTooLarge(WindmapError):
    """Requested Sobol dimension exceeds the direction-number table."""


class CacheCorrupt(WindmapError):
    """A cache entry could not be parsed; the caller re-runs and overwrites."""


class ConfigInvalid(WindmapError):
    """Configuration file failed validation; ``violations`` lists fields."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid config: " + "; ".join(self.violations))


class MissingData(WindmapError):
    """A report was requested from a run directory lacking required files."""


class UnknownKind(WindmapError):
    """Unsupported plot kind."""
