"""Exception hierarchy shared by the parser, machine and type checker."""
from __future__ import annotations

from typing import Optional, Sequence


class AmcostError(Exception):
    """Base class for every error raised by this package."""


class ParseError(AmcostError):
    def __init__(self, line: int, column: int, message: str,
                 expected: Sequence[str] = (), path: Optional[str] = None):
        self.line = line
        self.column = column
        self.message = message
        self.expected = tuple(expected)
        self.path = path
        super().__init__(self.render())

    def render(self) -> str:
        msg = self.message
        if self.expected:
            msg += f" (expected {', '.join(self.expected)})"
        return f"{self.path or '<input>'}:{self.line}:{self.column}: {msg}"


class UnresolvedFile(AmcostError):
    def __init__(self, file_id: str):
        self.file_id = file_id
        super().__init__(f"unresolved file {file_id}")


class ImportCycle(AmcostError):
    def __init__(self, file_id: str, chain: Sequence[str] = ()):
        self.file_id = file_id
        self.chain = tuple(chain)
        path = " -> ".join([*self.chain, file_id])
        super().__init__(f"import cycle: {path}")


# -- machine -----------------------------------------------------------------

class MachineError(AmcostError):
    """A run-time failure; ``partial`` holds the run so far when known."""

    partial = None


class Stuck(MachineError):
    def __init__(self, description: str):
        self.description = description
        super().__init__(f"stuck: {description}")


class IntegerOverflow(Stuck):
    """An arithmetic result left the signed 64-bit range."""


class FinalState(MachineError):
    def __init__(self):
        super().__init__("configuration is final (empty instruction stack)")


class FuelExhausted(MachineError):
    def __init__(self, fuel: int, partial=None):
        self.fuel = fuel
        self.partial = partial
        super().__init__(f"fuel exhausted after {fuel} steps")


# -- cost algebra ------------------------------------------------------------

class ShapeMismatch(AmcostError):
    pass


class UnboundVar(AmcostError):
    def __init__(self, names: Sequence[str]):
        self.names = tuple(sorted(names))
        super().__init__(f"unbound cost variables: {', '.join(self.names)}")


class CyclicBounds(AmcostError):
    pass


class CostSyntaxError(AmcostError):
    pass


# -- type checker ------------------------------------------------------------

TYPE_ERROR_KINDS = (
    "UnboundVariable", "NotAComponent", "ArityMismatch", "BinOpOnNonCost",
    "ProjectionError", "ExportUnbound", "ImportNameMissing",
    "ForBoundsInverted", "ShapeMismatch",
)


class TypeCheckError(AmcostError):
    def __init__(self, kind: str, message: str, file: Optional[str] = None,
                 pos=None):
        if kind not in TYPE_ERROR_KINDS:
            raise ValueError(f"unknown type error kind {kind!r}")
        self.kind = kind
        self.message = message
        self.file = file
        self.pos = pos
        super().__init__(self.render())

    @property
    def location(self) -> str:
        where = self.file or "<input>"
        if self.pos is not None:
            where += f":{self.pos[0]}:{self.pos[1]}"
        return where

    def render(self) -> str:
        return f"{self.location}: {self.kind}: {self.message}"
