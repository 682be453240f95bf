"""
Exception hierarchy shared by the pipeline stages and the CLI.
"""


class PathSrlError(Exception):
    """Base class for every error raised on purpose by path_srl"""


class ConfigError(PathSrlError):
    pass


class CorpusFormatError(PathSrlError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class NoPathError(PathSrlError):
    def __init__(self, source, target):
        self.source = source
        self.target = target
        super().__init__(f"no dependency path between token {source} and token {target}")


class AlignmentError(PathSrlError):
    pass


class BundleError(PathSrlError):
    pass


class TrainingDataError(PathSrlError):
    pass


class MissingCacheError(PathSrlError):
    pass
