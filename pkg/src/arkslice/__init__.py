"""arkslice: a self-hostable ARK-style resolver for time-series data slices."""

from .pid_grammar import (
    PidQuery,
    RangeSelector,
    RangeTerm,
    effective_key_set,
    parse_pid,
    serialize_pid,
)

__all__ = [
    "PidQuery",
    "RangeSelector",
    "RangeTerm",
    "effective_key_set",
    "parse_pid",
    "serialize_pid",
]

__version__ = "0.1.0"
