"""Exception hierarchy. Each class carries the process exit code the CLI uses."""


class DrmmError(Exception):
    exit_code = 1


class ParseError(DrmmError, ValueError):
    """Malformed input file. Message names the file and line when known."""

    exit_code = 3

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


class ConfigError(DrmmError, ValueError):
    exit_code = 4


class EmptyQueryError(DrmmError, ValueError):
    exit_code = 5

    def __init__(self, message="empty query"):
        super().__init__(message)


class DataError(DrmmError, KeyError):
    """Referenced entity (document, query, term) is missing."""

    exit_code = 6

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class StageError(DrmmError):
    exit_code = 7

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
