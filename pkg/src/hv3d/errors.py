"""Exception types raised by the toolkit."""


class Hv3dError(Exception):
    """Base class for all toolkit errors."""


class TruncatedFileError(Hv3dError, ValueError):
    """A raw video or depth file is shorter than the requested frame needs."""

    def __init__(self, path, expected, actual):
        self.path = str(path)
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"{self.path}: truncated file, need {expected} bytes but file has {actual}"
        )


class ManifestError(Hv3dError, ValueError):
    pass


class RatingsError(Hv3dError, ValueError):
    pass


class ConfigError(Hv3dError, ValueError):
    pass


class InsufficientDataError(Hv3dError, ValueError):
    pass
