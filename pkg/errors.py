"""
errors.py - Exception hierarchy for Bregman TDA

Every error carries a context dict so the CLI can report it as a single
machine-readable JSON line.
"""

from typing import Any, Dict


class BregmanTDAError(Exception):
    """Base class for all library errors"""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'error': type(self).__name__,
            'message': self.message,
        }
        for key, value in self.context.items():
            data[key] = _jsonable(value)
        return data


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if isinstance(value, float):
        return value if value == value and abs(value) != float('inf') else str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


class DomainViolation(BregmanTDAError, ValueError):
    """A point lies outside (or within the margin of) a generator's domain"""


class ParseError(BregmanTDAError, ValueError):
    """Malformed point-cloud input"""


class Degenerate(BregmanTDAError, ValueError):
    """Simplex vertices are affinely dependent"""


class NoConvergence(BregmanTDAError, RuntimeError):
    """The circumball solver hit its iteration cap"""


class DomainEscape(BregmanTDAError, RuntimeError):
    """Backtracking could not keep the iterate inside the domain"""


class GeneralPositionViolation(BregmanTDAError, ValueError):
    """A point sits on a smallest circumball boundary or a feasibility test is marginal"""


class PartitionFailure(BregmanTDAError, RuntimeError):
    """Interval extraction or radius inheritance left a simplex unassigned"""


class MonotonicityViolation(BregmanTDAError, ValueError):
    """A face has a strictly larger radius than one of its cofaces"""


class InfinityMismatch(BregmanTDAError, ValueError):
    """Diagrams disagree on the number of essential classes in some dimension"""
