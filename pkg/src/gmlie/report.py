"""Verification reports: ordered PASS/FAIL/FLAGGED records with text and JSON rendering."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .qmrings import CheckResult

SCHEMA_VERSION = 1
STATUSES = ("PASS", "FAIL", "FLAGGED")


class DuplicateCheck(ValueError):
    pass


@dataclass
class Record:
    check_id: str
    statement: str
    status: str
    witness: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}")

    @classmethod
    def from_check(cls, c: CheckResult) -> "Record":
        status = "FLAGGED" if c.flagged else ("PASS" if c.ok else "FAIL")
        return cls(c.check_id, c.statement, status, c.witness)

    def as_dict(self):
        return {"id": self.check_id, "statement": self.statement, "status": self.status, "witness": self.witness}


@dataclass
class VerificationReport:
    geometry: str
    environment: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    def add(self, c) -> None:
        rec = c if isinstance(c, Record) else Record.from_check(c)
        if any(r.check_id == rec.check_id for r in self.records):
            raise DuplicateCheck(f"check {rec.check_id!r} already recorded")
        self.records.append(rec)

    def extend(self, checks) -> None:
        for c in checks:
            self.add(c)

    def counts(self) -> dict:
        out = {s: 0 for s in STATUSES}
        for r in self.records:
            out[r.status] += 1
        return out

    @property
    def exit_code(self) -> int:
        return 1 if any(r.status == "FAIL" for r in self.records) else 0

    def to_text(self) -> str:
        lines = [f"geometry: {self.geometry}"]
        for k in sorted(self.environment):
            lines.append(f"{k}: {self.environment[k]}")
        for r in self.records:
            lines.append(f"{r.status:<7} {r.check_id}: {r.statement}")
            if r.witness:
                lines.append(f"        witness: {r.witness}")
        c = self.counts()
        lines.append(f"summary: {c['PASS']} PASS, {c['FAIL']} FAIL, {c['FLAGGED']} FLAGGED")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "geometry": self.geometry,
                "environment": dict(sorted(self.environment.items())),
                "records": [r.as_dict() for r in self.records], "summary": self.counts()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {d.get('schema_version')!r}")
        rep = cls(d["geometry"], dict(d.get("environment", {})))
        for r in d["records"]:
            rep.add(Record(r["id"], r["statement"], r["status"], r.get("witness", "")))
        return rep
