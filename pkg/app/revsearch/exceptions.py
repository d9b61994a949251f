class RevSearchException(Exception):
    """Base exception for clone search errors."""
    exit_code = 1


class ConfigError(RevSearchException):
    """Invalid configuration file or parameter value."""
    exit_code = 2


class SchemaError(RevSearchException):
    """A record in an input file does not follow its schema."""
    exit_code = 2

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class UnparsableFile(RevSearchException):
    """Brace balancing failed; the file is skipped."""
    exit_code = 2


class TooSmall(RevSearchException):
    """Body is shorter than the minimum clone size."""
    exit_code = 2


class DuplicateDoc(RevSearchException):
    """The same document id was indexed twice."""
    exit_code = 2


class EmptyQuery(RevSearchException):
    """No query grams survived for any representation."""
    exit_code = 2


class FormatVersionMismatch(RevSearchException):
    """Index file was written by an incompatible format version."""
    exit_code = 3


class CorruptIndex(RevSearchException):
    """Index file cannot be decoded."""
    exit_code = 3


class OutputWriteError(RevSearchException):
    """An output file could not be written."""
    exit_code = 3


class TooFewProjects(RevSearchException):
    """Quartiles need at least four projects."""
    exit_code = 2


class EmptyQuerySet(RevSearchException):
    """No ground-truth queries left to evaluate."""
    exit_code = 2


class EmptyCorpus(RevSearchException):
    """No accepted revisions to analyse."""
    exit_code = 2
