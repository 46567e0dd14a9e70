"""Three-valued truth lattice: true/false/unknown with truth and precision orders."""

from __future__ import annotations

import enum


class TruthValue(enum.Enum):
    TRUE = "t"
    FALSE = "f"
    UNKNOWN = "u"

    def inverse(self) -> "TruthValue":
        if self is TruthValue.TRUE:
            return TruthValue.FALSE
        if self is TruthValue.FALSE:
            return TruthValue.TRUE
        return TruthValue.UNKNOWN

    @property
    def rank(self) -> int:
        """Position in the truth order: false < unknown < true."""
        return _RANK[self]

    def __str__(self) -> str:
        return self.value


_RANK = {TruthValue.FALSE: 0, TruthValue.UNKNOWN: 1, TruthValue.TRUE: 2}

TRUE = TruthValue.TRUE
FALSE = TruthValue.FALSE
UNKNOWN = TruthValue.UNKNOWN


def from_bool(b: bool) -> TruthValue:
    return TRUE if b else FALSE


def tv_and(a: TruthValue, b: TruthValue) -> TruthValue:
    return a if a.rank <= b.rank else b


def tv_or(a: TruthValue, b: TruthValue) -> TruthValue:
    return a if a.rank >= b.rank else b


def tv_all(values) -> TruthValue:
    """Minimum over the truth order; TRUE on an empty iterable."""
    out = TRUE
    for v in values:
        if v is FALSE:
            return FALSE
        out = tv_and(out, v)
    return out


def tv_any(values) -> TruthValue:
    """Maximum over the truth order; FALSE on an empty iterable."""
    out = FALSE
    for v in values:
        if v is TRUE:
            return TRUE
        out = tv_or(out, v)
    return out


def truth_le(a: TruthValue, b: TruthValue) -> bool:
    return a.rank <= b.rank


def precision_le(a: TruthValue, b: TruthValue) -> bool:
    """a is at most as precise as b: unknown below everything, t/f incomparable."""
    return a is UNKNOWN or a is b
