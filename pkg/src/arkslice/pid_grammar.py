"""Parse, validate, canonicalize and serialize semantic PID strings.

Surface syntax::

    ark:/NAAN/DATASET.S1+S2.M1+M2@SELECTOR

where SELECTOR is ``*`` or ``+``-joined terms of the form ``[_]start~end``.
A leading underscore marks the term as an exclusion. The single-timestamp
shorthand ``@t`` is accepted on input and canonicalized to ``t~t``.

Pure functions, no I/O.
"""

from __future__ import annotations

import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

from .errors import (
    BadNaan,
    DuplicateName,
    InvalidRange,
    InvariantViolation,
    MalformedPid,
)

NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")
_DIGITS_RE = re.compile(r"^[0-9]+$")


@dataclass(frozen=True)
class RangeTerm:
    """One inclusive interval of timestamp keys, optionally excluding."""

    start: int
    end: int
    exclude: bool = False


@dataclass(frozen=True)
class RangeSelector:
    """Either the wildcard (all rows) or an ordered list of range terms."""

    terms: tuple[RangeTerm, ...] = ()
    wildcard: bool = False

    @classmethod
    def all_rows(cls) -> "RangeSelector":
        return cls(wildcard=True)

    @classmethod
    def of(cls, *terms: RangeTerm) -> "RangeSelector":
        return cls(terms=tuple(terms))


@dataclass(frozen=True)
class PidQuery:
    """Parsed form of a semantic PID."""

    naan: str
    dataset: str
    sensors: tuple[str, ...]
    measurements: tuple[str, ...]
    selector: RangeSelector = field(default_factory=RangeSelector.all_rows)


def _check_name(name: str, what: str) -> str:
    if not name:
        raise MalformedPid(f"empty {what}")
    if not NAME_RE.match(name):
        raise MalformedPid(f"illegal character in {what} {name!r}")
    return name


def _parse_namelist(text: str, what: str) -> tuple[str, ...]:
    names = tuple(_check_name(part, what) for part in text.split("+"))
    if len(set(names)) != len(names):
        raise DuplicateName(f"repeated {what} in {text!r}")
    return names


def _parse_bound(text: str) -> int:
    if not _DIGITS_RE.match(text):
        raise InvalidRange(f"non-integer bound {text!r}")
    return int(text)


def _parse_term(text: str) -> RangeTerm:
    if not text:
        raise MalformedPid("empty range term")
    exclude = text.startswith("_")
    body = text[1:] if exclude else text
    if not body:
        raise MalformedPid("empty range term")
    parts = body.split("~")
    if len(parts) == 1:
        start = end = _parse_bound(parts[0])
    elif len(parts) == 2:
        start = _parse_bound(parts[0])
        end = _parse_bound(parts[1])
    else:
        raise InvalidRange(f"too many '~' in term {text!r}")
    if start > end:
        raise InvalidRange(f"reversed bounds {start}~{end}")
    return RangeTerm(start, end, exclude)


def _parse_selector(text: str) -> RangeSelector:
    if not text:
        raise MalformedPid("empty selector")
    if text == "*":
        return RangeSelector.all_rows()
    return RangeSelector(terms=tuple(_parse_term(t) for t in text.split("+")))


def parse_pid(text: str) -> PidQuery:
    """Parse a full ``ark:/...`` PID string into a PidQuery.

    The caller must already have stripped any scheme/host prefix; the
    string must begin with ``ark:/``.
    """
    if not isinstance(text, str) or not text.startswith("ark:/"):
        raise MalformedPid("PID must start with 'ark:/'")
    rest = text[len("ark:/"):]
    naan, sep, body = rest.partition("/")
    if not sep:
        raise MalformedPid("missing '/' after NAAN")
    if not naan or not _DIGITS_RE.match(naan):
        raise BadNaan(f"NAAN must be decimal digits, got {naan!r}")
    return PidQuery(naan=naan, **parse_pid_body(body))


def parse_pid_body(body: str) -> dict:
    """Parse the part after ``ark:/NAAN/`` into PidQuery fields (sans naan)."""
    left, at, sel_text = body.partition("@")
    if not at:
        raise MalformedPid("missing '@' selector separator")
    parts = left.split(".")
    if len(parts) != 3:
        raise MalformedPid(
            f"expected DATASET.SENSORS.MEASUREMENTS, got {len(parts)} parts"
        )
    dataset = _check_name(parts[0], "dataset name")
    sensors = _parse_namelist(parts[1], "sensor")
    measurements = _parse_namelist(parts[2], "measurement")
    selector = _parse_selector(sel_text)
    return {
        "dataset": dataset,
        "sensors": sensors,
        "measurements": measurements,
        "selector": selector,
    }


def _validate_query(q: PidQuery) -> None:
    if not q.naan or not _DIGITS_RE.match(q.naan):
        raise InvariantViolation(f"bad NAAN {q.naan!r}")
    for name in (q.dataset, *q.sensors, *q.measurements):
        if not name or not NAME_RE.match(name):
            raise InvariantViolation(f"bad name {name!r}")
    if not q.sensors or not q.measurements:
        raise InvariantViolation("sensors and measurements must be nonempty")
    if len(set(q.sensors)) != len(q.sensors):
        raise InvariantViolation("duplicate sensor")
    if len(set(q.measurements)) != len(q.measurements):
        raise InvariantViolation("duplicate measurement")
    if q.selector.wildcard:
        if q.selector.terms:
            raise InvariantViolation("wildcard selector carries terms")
    else:
        if not q.selector.terms:
            raise InvariantViolation("non-wildcard selector with no terms")
        for t in q.selector.terms:
            if t.start > t.end or t.start < 0:
                raise InvariantViolation(f"bad term {t.start}~{t.end}")


def serialize_pid(q: PidQuery) -> str:
    """Render a PidQuery back to its canonical PID string.

    ``parse_pid(serialize_pid(q)) == q`` exactly; the single-timestamp
    shorthand is always expanded to the full ``t~t`` form.
    """
    _validate_query(q)
    if q.selector.wildcard:
        sel = "*"
    else:
        sel = "+".join(
            f"{'_' if t.exclude else ''}{t.start}~{t.end}"
            for t in q.selector.terms
        )
    return (
        f"ark:/{q.naan}/{q.dataset}"
        f".{'+'.join(q.sensors)}.{'+'.join(q.measurements)}@{sel}"
    )


def effective_key_set(sel: RangeSelector, domain: list[int]) -> list[int]:
    """Apply a selector to a strictly increasing timestamp domain.

    The result is the union of the inclusive terms intersected with the
    domain (all of it when there are none, or for the wildcard), minus the
    union of the exclusive terms. Both interval bounds are inclusive.
    """
    if sel.wildcard:
        return list(domain)
    inclusive = [t for t in sel.terms if not t.exclude]
    exclusive = [t for t in sel.terms if t.exclude]
    if inclusive:
        keep: set[int] = set()
        for t in inclusive:
            lo = bisect_left(domain, t.start)
            hi = bisect_right(domain, t.end)
            keep.update(domain[lo:hi])
    else:
        keep = set(domain)
    for t in exclusive:
        lo = bisect_left(domain, t.start)
        hi = bisect_right(domain, t.end)
        keep.difference_update(domain[lo:hi])
    return sorted(keep)
