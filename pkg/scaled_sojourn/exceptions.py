class ScaledSojournError(Exception):
    """Base class for errors raised by scaled_sojourn."""


class ConfigError(ScaledSojournError, ValueError):
    """
    A scenario file or override could not be turned into a Scenario.

    :param message: what went wrong
    :param key: the offending key, if any
    :param lineno: 1-based line number in the scenario text, if known
    """

    def __init__(self, message, key=None, lineno=None):
        self.key = key
        self.lineno = lineno
        where = []
        if lineno is not None:
            where.append(f"line {lineno}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class NoEstimate(ScaledSojournError):
    """The drain-rate estimator has not completed a measurement window yet."""


class NotCrossed(ScaledSojournError):
    """A delay series never reached the detection threshold within the run."""
