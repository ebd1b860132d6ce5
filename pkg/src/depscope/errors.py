"""Exception types raised across the toolkit."""

from __future__ import annotations


class DepscopeError(Exception):
    """Base class for every error the toolkit raises on bad input."""


class MalformedCoordinate(DepscopeError):
    def __init__(self, text: str):
        super().__init__(f"malformed coordinate {text!r} (expected g:a:v or g:a:packaging:v:scope)")
        self.text = text


class MalformedTreeLine(DepscopeError):
    def __init__(self, line_no: int, reason: str = ""):
        detail = f": {reason}" if reason else ""
        super().__init__(f"malformed tree line {line_no}{detail}")
        self.line_no = line_no


class DuplicateGa(DepscopeError):
    def __init__(self, ga):
        super().__init__(f"library {ga} appears more than once in the tree")
        self.ga = ga


class EmptyInput(DepscopeError):
    def __init__(self):
        super().__init__("input contains no tree")


class SchemaViolation(DepscopeError):
    def __init__(self, pointer: str, reason: str):
        super().__init__(f"schema violation at {pointer or '<document>'}: {reason}")
        self.pointer = pointer
        self.reason = reason


class MalformedRow(DepscopeError):
    def __init__(self, line_no: int, reason: str = ""):
        detail = f": {reason}" if reason else ""
        super().__init__(f"malformed CSV row at line {line_no}{detail}")
        self.line_no = line_no


class DuplicateVersion(DepscopeError):
    def __init__(self, ga, version: str):
        super().__init__(f"duplicate release {ga}:{version} in history")
        self.ga = ga
        self.version = version


class EmptyAffectedSet(DepscopeError):
    def __init__(self, vuln_id: str):
        super().__init__(f"vulnerability {vuln_id} has an empty affected set")
        self.vuln_id = vuln_id


class UnknownVersion(DepscopeError):
    def __init__(self, gav):
        super().__init__(f"version of {gav} does not appear in its release history")
        self.gav = gav


class MissingHistory(DepscopeError):
    def __init__(self, ga):
        super().__init__(f"no release history for library {ga}")
        self.ga = ga


class EmptyPool(DepscopeError):
    def __init__(self):
        super().__init__("simulation pool contains no trees")


class InsufficientLibraries(DepscopeError):
    def __init__(self, requested: int, available: int):
        super().__init__(
            f"cannot draw {requested} distinct libraries from a pool of {available}"
        )
        self.requested = requested
        self.available = available


class InputFileError(DepscopeError):
    """Wraps a module error with the file it occurred in (CLI context)."""

    def __init__(self, path, cause: Exception):
        super().__init__(f"{path}: {cause}")
        self.path = path
        self.cause = cause
