"""JSONL candidate ledgers and single-line JSON checkpoints.

Every big integer is written as a decimal string.  A raw ledger is an append
log and may repeat a k; merge() and compact() reduce it to one record per k,
keeping the record with the largest rank_lb, then the largest selmer_bound,
then the newest (later in the input).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

STATUSES = ("candidate", "searched", "certified")


class LedgerError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.path = path


@dataclass
class CandidateRecord:
    k: str
    factors: list = field(default_factory=list)     # [[p, e], ...] with p as a string
    selmer_bound: int | None = None
    mestre: dict | None = None                      # {"x_cut": int, "log_score": float}
    points: list = field(default_factory=list)      # serialized CurvePoint dicts
    rank_lb: int = 0
    status: str = "candidate"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.k = str(self.k)
        if not self.k.isdigit() or int(self.k) < 1:
            raise LedgerError(f"k must be a positive decimal string, got {self.k!r}")
        if self.status not in STATUSES:
            raise LedgerError(f"unknown status {self.status!r}")
        if self.rank_lb < 0:
            raise LedgerError("rank_lb must be nonnegative")
        if self.selmer_bound is not None and self.rank_lb > self.selmer_bound:
            raise LedgerError(f"k={self.k}: rank_lb {self.rank_lb} exceeds selmer_bound {self.selmer_bound}")
        self.factors = [[str(p), int(e)] for p, e in self.factors]

    @property
    def k_int(self) -> int:
        return int(self.k)

    def to_json(self) -> dict:
        return asdict(self)

    def to_line(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict) -> "CandidateRecord":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise LedgerError(f"unknown fields {sorted(extra)}")
        if "k" not in data:
            raise LedgerError("record has no k")
        return cls(**data)


def parse_lines(lines: Iterable[str], path: str | None = None) -> list[CandidateRecord]:
    out = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            if not isinstance(data, dict):
                raise LedgerError("not a JSON object")
            out.append(CandidateRecord.from_json(data))
        except (json.JSONDecodeError, TypeError, LedgerError) as exc:
            msg = exc.args[0] if isinstance(exc, LedgerError) else f"malformed line ({exc})"
            raise LedgerError(f"malformed ledger line: {msg}", line=n, path=path) from None
    return out


def read_ledger(path: str | os.PathLike) -> list[CandidateRecord]:
    p = Path(path)
    if not p.exists():
        return []
    with p.open() as fh:
        return parse_lines(fh, str(p))


def append(path: str | os.PathLike, record: CandidateRecord) -> None:
    """Append one record; the file is only ever extended."""
    with open(path, "a") as fh:
        fh.write(record.to_line() + "\n")
        fh.flush()


def write_ledger(path: str | os.PathLike, records: Iterable[CandidateRecord]) -> None:
    _atomic_write(Path(path), "".join(r.to_line() + "\n" for r in records))


def _preference(rec: CandidateRecord, order: int) -> tuple:
    sb = rec.selmer_bound if rec.selmer_bound is not None else -1
    return (rec.rank_lb, sb, order)


def merge(*ledgers: Sequence[CandidateRecord]) -> list[CandidateRecord]:
    """One record per k; later ledgers and later lines count as newer."""
    best: dict[str, tuple[tuple, CandidateRecord]] = {}
    order = 0
    for ledger in ledgers:
        for rec in ledger:
            key = _preference(rec, order)
            order += 1
            cur = best.get(rec.k)
            if cur is None or key > cur[0]:
                best[rec.k] = (key, rec)
    return [rec for _, rec in sorted(best.values(), key=lambda item: item[1].k_int)]


def compact(path: str | os.PathLike) -> list[CandidateRecord]:
    records = merge(read_ledger(path))
    write_ledger(path, records)
    return records


def query(records: Iterable[CandidateRecord], min_rank_lb: int | None = None,
          min_selmer_bound: int | None = None, k_min: int | None = None,
          k_max: int | None = None) -> list[CandidateRecord]:
    out = []
    for r in records:
        if min_rank_lb is not None and r.rank_lb < min_rank_lb:
            continue
        if min_selmer_bound is not None and (r.selmer_bound is None or r.selmer_bound < min_selmer_bound):
            continue
        if k_min is not None and r.k_int < k_min:
            continue
        if k_max is not None and r.k_int > k_max:
            continue
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# checkpoints


@dataclass
class Checkpoint:
    fingerprint: str
    cursor: Any
    timestamp: float = field(default_factory=time.time)

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


def fingerprint(command: str, params: dict) -> str:
    """Stable digest of a command and its output-affecting parameters."""
    blob = json.dumps({"command": command, "params": params}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_checkpoint(path: str | os.PathLike, cp: Checkpoint) -> None:
    _atomic_write(Path(path), cp.to_line() + "\n")


def load_checkpoint(path: str | os.PathLike, expected_fingerprint: str | None = None) -> Checkpoint | None:
    p = Path(path)
    if not p.exists():
        return None
    lines = [ln for ln in p.read_text().splitlines() if ln.strip()]
    if len(lines) != 1:
        raise LedgerError("checkpoint must be a single JSON line", path=str(p))
    try:
        data = json.loads(lines[0])
        cp = Checkpoint(data["fingerprint"], data["cursor"], float(data["timestamp"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise LedgerError(f"malformed checkpoint ({exc})", line=1, path=str(p)) from None
    if expected_fingerprint is not None and cp.fingerprint != expected_fingerprint:
        raise LedgerError("checkpoint belongs to a different command or parameters", path=str(p))
    return cp


__all__ = [
    "CandidateRecord", "Checkpoint", "LedgerError", "append", "compact", "fingerprint",
    "load_checkpoint", "merge", "parse_lines", "query", "read_ledger", "save_checkpoint",
    "write_ledger",
]
