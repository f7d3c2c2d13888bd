"""Exception hierarchy shared by all ctckit modules.

Every error raised on a user-facing path derives from :class:`CtcError`
and carries a stable ``exit_code`` so the CLI can map failures to the
documented process exit codes (see README).
"""

from __future__ import annotations


class CtcError(Exception):
    """Base class for all ctckit errors."""

    exit_code = 1
    label = "error"


class InvalidInputError(CtcError):
    """A precondition on an operation's inputs was violated."""

    exit_code = 5
    label = "invalid-input"


class FormatError(CtcError):
    """A file or stream does not conform to its documented format."""

    exit_code = 4
    label = "format-error"

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None, offset: int | None = None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        if where:
            message = f"{': '.join([', '.join(where)])}: {message}"
        super().__init__(message)


class ConfigError(CtcError):
    """Inconsistent or unsupported configuration for an operation."""

    exit_code = 6
    label = "config-error"


class CapacityError(CtcError):
    """An exact computation would exceed its enumeration cap."""

    exit_code = 7
    label = "capacity-error"


class UnsupportedOperationError(CtcError):
    """The requested operation is not available for these inputs."""

    exit_code = 5
    label = "unsupported-operation"


class ProtocolError(CtcError):
    """An external LM session violated the line protocol."""

    exit_code = 8
    label = "protocol-error"


class GraphError(CtcError):
    """A transducer could not be built or composed."""

    exit_code = 9
    label = "graph-error"
