"""NOID minting, identifier resolution, and cross-validation fold PIDs.

NOIDs are a monotone counter rendered in the betanumeric alphabet (no
vowels, so no accidental words), left-padded to width 4, and never reused:
the mint log is replayed at startup to restore the counter and bindings.
Minted NOIDs contain no '.', semantic PID bodies always do, so the two
namespaces cannot collide.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

from . import timeseries_store
from .catalog import Catalog
from .errors import (
    InvalidTarget,
    NotFound,
    PersistenceError,
    TooFewRows,
    UnknownNaan,
)
from .pid_grammar import (
    PidQuery,
    RangeSelector,
    RangeTerm,
    parse_pid,
    parse_pid_body,
    serialize_pid,
)
from .timeseries_store import ResultSlice

BETANUMERIC = "0123456789bcdfghjkmnpqrstvwxz"
NOID_MIN_WIDTH = 4
_NOID_RE = re.compile(f"^[{BETANUMERIC}]+$")
_URL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*://\S+$")


def encode_noid(counter: int) -> str:
    digits = []
    n = counter
    while True:
        n, rem = divmod(n, len(BETANUMERIC))
        digits.append(BETANUMERIC[rem])
        if n == 0:
            break
    return "".join(reversed(digits)).rjust(NOID_MIN_WIDTH, BETANUMERIC[0])


def decode_noid(noid: str) -> int:
    value = 0
    for ch in noid:
        value = value * len(BETANUMERIC) + BETANUMERIC.index(ch)
    return value


@dataclass(frozen=True)
class MintBinding:
    noid: str
    target: str
    created_at: str


@dataclass(frozen=True)
class Redirect:
    location: str
    status: int = 302


@dataclass(frozen=True)
class Data:
    slice: ResultSlice


@dataclass(frozen=True)
class Info:
    document: dict


Resolution = Union[Redirect, Data, Info]


class Minter:
    """Issues unique NOIDs backed by an append-only JSONL log."""

    def __init__(self, log_path):
        self.log_path = Path(log_path)
        self.bindings: dict[str, MintBinding] = {}
        self._counter = 0
        if self.log_path.exists():
            for line in self.log_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                binding = MintBinding(rec["noid"], rec["target"], rec["created_at"])
                self.bindings[binding.noid] = binding  # latest entry wins
                self._counter = max(self._counter, decode_noid(binding.noid) + 1)

    def _validate_target(self, target: str) -> None:
        if not target or not isinstance(target, str):
            raise InvalidTarget("target must be a nonempty string")
        if target.startswith("ark:"):
            parse_pid(target)  # raises on malformed semantic PIDs
        elif not _URL_RE.match(target):
            raise InvalidTarget(f"target {target!r} is neither a URL nor a PID")

    def _append(self, binding: MintBinding) -> None:
        try:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "noid": binding.noid,
                            "target": binding.target,
                            "created_at": binding.created_at,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
                fh.flush()
        except OSError as exc:
            raise PersistenceError(f"cannot append to mint log: {exc}") from exc

    def mint(self, target: str) -> MintBinding:
        """Bind a fresh NOID to a target URL or semantic PID."""
        self._validate_target(target)
        binding = MintBinding(
            noid=encode_noid(self._counter),
            target=target,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        self._append(binding)
        self._counter += 1
        self.bindings[binding.noid] = binding
        return binding

    def rebind(self, noid: str, target: str) -> MintBinding:
        """Point an existing NOID at a new location; latest entry wins."""
        if noid not in self.bindings:
            raise NotFound(f"NOID {noid!r} was never minted")
        self._validate_target(target)
        binding = MintBinding(
            noid=noid,
            target=target,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        self._append(binding)
        self.bindings[noid] = binding
        return binding

    def binding(self, noid: str) -> Optional[MintBinding]:
        return self.bindings.get(noid)


class Resolver:
    """Maps incoming identifiers to data slices, redirects, or metadata."""

    def __init__(self, catalog: Catalog, minter: Minter, naans: list[str],
                 base_url: str = "http://localhost:8057"):
        self.catalog = catalog
        self.minter = minter
        self.naans = set(naans)
        self.base_url = base_url.rstrip("/")

    @property
    def primary_naan(self) -> str:
        return sorted(self.naans)[0]

    def resolve(self, naan: str, path_remainder: str, info: bool = False) -> Resolution:
        """Resolve the part after ``ark:/NAAN/``.

        A remainder whose head (before any '/') is a minted NOID becomes a
        redirect, with everything after the head appended to the target
        verbatim (suffix pass-through). Anything containing '.' is parsed
        as a semantic PID body and executed against the catalog.
        """
        if naan not in self.naans:
            raise UnknownNaan(f"this resolver does not serve NAAN {naan!r}")
        head, slash, suffix = path_remainder.partition("/")
        if "." not in head and _NOID_RE.match(head or " "):
            binding = self.minter.binding(head)
            if binding is None:
                raise NotFound(f"no binding for NOID {head!r}")
            target = binding.target
            if target.startswith("ark:"):
                target = f"{self.base_url}/{target}"
            return Redirect(location=target + slash + suffix)

        q = PidQuery(naan=naan, **parse_pid_body(path_remainder))
        if info:
            return Info(self._info_document(q))
        dataset = self.catalog.dataset(q.dataset)
        return Data(timeseries_store.select(dataset, q))

    def resolve_pid(self, q: PidQuery) -> Data:
        """Execute a parsed semantic PID directly."""
        if q.naan not in self.naans:
            raise UnknownNaan(f"this resolver does not serve NAAN {q.naan!r}")
        dataset = self.catalog.dataset(q.dataset)
        return Data(timeseries_store.select(dataset, q))

    def _info_document(self, q: PidQuery) -> dict:
        entry = self.catalog.lookup(q.dataset)
        dataset = self.catalog.dataset(q.dataset)
        doc = entry.document()
        sensors = []
        for name in q.sensors:
            table = dataset.sensor(name)
            for m in q.measurements:
                table.column(m)  # UnknownMeasurement beats partial output
            schema = next(s for s in doc["sensors"] if s["name"] == name)
            wanted = {"timestamp", table.key_column_name, *q.measurements}
            sensors.append(
                {
                    "name": name,
                    "file": schema["file"],
                    "columns": [
                        c for c in schema["columns"] if c["name"] in wanted
                    ],
                }
            )
        doc["sensors"] = sensors
        doc["pid"] = serialize_pid(q)
        return doc

    def crossfold_pids(
        self,
        dataset_name: str,
        sensors: list[str],
        measurements: list[str],
        k: int,
    ) -> list[tuple[str, str]]:
        """Train/test PID pairs for k-fold cross-validation.

        The sorted union of the selected sensors' timestamps is split into
        k contiguous blocks whose sizes differ by at most one (earlier
        folds absorb the remainder). Fold i's test PID selects its block
        inclusively; its train PID excludes the same block.
        """
        if k < 2:
            raise TooFewRows("k must be at least 2")
        dataset = self.catalog.dataset(dataset_name)
        keys: set[int] = set()
        for s in sensors:
            table = dataset.sensor(s)
            for m in measurements:
                table.column(m)
            keys.update(table.key)
        domain = sorted(keys)
        n = len(domain)
        if n < k:
            raise TooFewRows(f"{n} timestamps cannot make {k} folds")

        base, extra = divmod(n, k)
        pairs = []
        pos = 0
        naan = self.primary_naan
        for i in range(k):
            size = base + (1 if i < extra else 0)
            block = domain[pos:pos + size]
            pos += size
            first, last = block[0], block[-1]
            test_q = PidQuery(
                naan=naan,
                dataset=dataset_name,
                sensors=tuple(sensors),
                measurements=tuple(measurements),
                selector=RangeSelector.of(RangeTerm(first, last, exclude=False)),
            )
            train_q = PidQuery(
                naan=naan,
                dataset=dataset_name,
                sensors=tuple(sensors),
                measurements=tuple(measurements),
                selector=RangeSelector.of(RangeTerm(first, last, exclude=True)),
            )
            pairs.append((serialize_pid(train_q), serialize_pid(test_q)))
        return pairs
