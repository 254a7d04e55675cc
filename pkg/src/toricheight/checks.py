from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one inequality check; ``margin`` is positive when it holds."""

    name: str
    holds: bool
    lhs: float
    rhs: float
    margin: float
    n: int | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def le_check(name: str, lhs: float, rhs: float, *, n: int | None = None, slack: float = 0.0,
             detail: str = "") -> CheckResult:
    """Check ``lhs <= rhs + slack``."""
    return CheckResult(name, bool(lhs <= rhs + slack), float(lhs), float(rhs), float(rhs - lhs), n, detail)
