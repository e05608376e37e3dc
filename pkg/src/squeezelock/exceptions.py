"""Exception types raised by squeezelock."""


class DomainError(ValueError):
    """An argument lies outside the range where the model is defined."""


class AboveThresholdError(DomainError):
    """The OPO pump parameter is at or above oscillation threshold."""


class SamplingError(ValueError):
    """A time series is sampled too slowly for the requested demodulation."""


class PlanningError(ValueError):
    """Not enough data (or duration) for the requested spectral estimate."""


class NonPhysicalSubtractionError(ValueError):
    """Dark-noise subtraction would leave zero or negative power."""


class ConfigSchemaError(ValueError):
    """A configuration file failed validation.

    ``fields`` lists every offending dotted key.
    """

    def __init__(self, fields, message=None):
        self.fields = list(fields)
        if message is None:
            message = "invalid configuration fields: " + ", ".join(self.fields)
        super().__init__(message)
