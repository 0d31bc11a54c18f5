"""Exception types shared across the package."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class HexError(Exception):
    pass


class UnknownExternalPredicate(HexError):
    pass


class ArityMismatch(HexError):
    pass


class InfiniteOutputGuard(HexError):
    pass


class UniverseTooLarge(HexError):
    pass


class SignatureConflict(HexError):
    pass


class ParseError(HexError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics) or "parse error")


class GroundingDiverged(HexError):
    def __init__(self, max_iter: int, reason: str = ""):
        self.max_iter = max_iter
        msg = f"grounding did not reach a fixpoint within {max_iter} iterations"
        super().__init__(msg + (f" ({reason})" if reason else ""))


class UnsafeRule(HexError):
    pass


class JoinUndefined(HexError):
    pass


class DuplicateExpandedInterpretation(HexError):
    pass


class IncompleteGraph(HexError):
    pass


class SizeTooLarge(HexError):
    pass
