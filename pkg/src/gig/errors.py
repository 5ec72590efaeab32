"""Exception taxonomy shared by all pipeline stages.

Exit-code mapping used by the CLI: data errors exit 1, usage errors exit 2,
environment errors (cache/network) exit 3.
"""


class GigError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1
    category = "data"


class DataError(GigError):
    """Invalid values or malformed input files."""

    exit_code = 1
    category = "data"


class UsageError(GigError):
    """Bad configuration or command-line arguments."""

    exit_code = 2
    category = "usage"


class EnvError(GigError):
    """Cache, filesystem, or network failures."""

    exit_code = 3
    category = "environment"


class GpmlParseError(DataError):
    """Malformed GPML XML. Carries the byte offset of the failure."""

    def __init__(self, message, byte_offset=None):
        super().__init__(message)
        self.byte_offset = byte_offset


class GpmlSchemaError(DataError):
    """Structurally valid XML that is not a GPML pathway document."""


class MissingPathwayError(EnvError):
    """Requested WPID is not cached and the store is offline."""

    def __init__(self, wpid):
        super().__init__(f"pathway {wpid} not in cache and offline mode is on")
        self.wpid = wpid


class PathwayDownloadError(EnvError):
    """Online GPML retrieval failed."""

    def __init__(self, wpid, reason):
        super().__init__(f"download failed for pathway {wpid}: {reason}")
        self.wpid = wpid


class CacheWriteError(EnvError):
    """Could not persist a cache entry."""

    def __init__(self, path, reason):
        super().__init__(f"cache write failed for {path}: {reason}")
        self.path = path


class CacheCorruptError(EnvError):
    """A cache file exists but cannot be decoded."""

    def __init__(self, path, reason):
        super().__init__(f"corrupt cache file {path}: {reason}")
        self.path = path


class OnlineResolveError(EnvError):
    """Identifier resolution against the annotation service failed."""

    def __init__(self, unresolved, reason):
        ids = ", ".join(sorted(unresolved))
        super().__init__(f"could not resolve ids [{ids}]: {reason}")
        self.unresolved = tuple(sorted(unresolved))
