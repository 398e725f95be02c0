"""Exception hierarchy; each class maps to a CLI exit code."""


class LhcnError(Exception):
    exit_code = 1


class ParseError(LhcnError):
    """Malformed input file (ragged line, duplicate id, bad manifest syntax)."""

    exit_code = 3

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class ValidationError(LhcnError, ValueError):
    """Inputs parse but violate a structural or configuration contract."""

    exit_code = 4


class NumericError(LhcnError, ArithmeticError):
    """Non-finite values appeared during training or inference."""

    exit_code = 5


class DataFileError(LhcnError, FileNotFoundError):
    exit_code = 6

    def __init__(self, path, message="file not found"):
        super().__init__(f"{path}: {message}")
        self.path = path
