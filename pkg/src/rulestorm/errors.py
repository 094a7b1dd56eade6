"""Error categories that map onto distinct CLI exit codes."""


class ConfigError(ValueError):
    """Bad configuration: unknown fields, invalid values, unusable flags."""


class DataError(ValueError):
    """Unusable input data: missing file, ragged rows, bad cells."""


class EvaluationError(RuntimeError):
    """An objective function failed while an optimizer was running."""
