"""Typed errors. Each class carries the process exit code of its family."""


class CMAError(Exception):
    exit_code = 3


# ---------------------------------------------------------------------------
# Input errors (exit 1)
# ---------------------------------------------------------------------------
class InputError(CMAError):
    exit_code = 1


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}, column {column or 1})"
        super().__init__(f"{message}{where}")


class HomogeneityError(InputError):
    def __init__(self, generator: str, detail: str = "not homogeneous"):
        self.generator = generator
        super().__init__(f"Generator '{generator}' is {detail}")


class JobReferenceError(InputError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Undefined module '{name}'")


# ---------------------------------------------------------------------------
# Mathematical precondition errors (exit 2)
# ---------------------------------------------------------------------------
class PreconditionError(CMAError):
    exit_code = 2


class NotCohenMacaulay(PreconditionError):
    pass


class NotCodepthPure(PreconditionError):
    pass


class NotGorenstein(PreconditionError):
    pass


class NotFID(PreconditionError):
    pass


class DimensionTooSmall(PreconditionError):
    pass


class NonOneDimensionalExt(PreconditionError):
    pass


class RingMismatch(PreconditionError):
    pass


class InhomogeneousInput(PreconditionError):
    pass


class NonMinimalComplex(PreconditionError):
    pass


class NonCommutingSquare(PreconditionError):
    pass


# ---------------------------------------------------------------------------
# Internal errors (exit 3)
# ---------------------------------------------------------------------------
class CertificationError(CMAError):
    exit_code = 3
