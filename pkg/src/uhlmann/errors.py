class ValidationError(ValueError):
    """Bad input: unknown model, invalid parameter, malformed config."""


class NumericalError(RuntimeError):
    """A computation could not reach its accuracy contract."""


class GapClosureError(NumericalError):
    """|h_k| vanished (or nearly so) where a gapped field is required."""
