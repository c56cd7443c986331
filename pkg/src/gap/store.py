"""File-backed nanopublication store.

Layout: one TriG file per nanopublication under
``store_dir/{level}/{key}.trig`` plus an ``index.json`` mapping GUPIs to
files. The files are the source of truth; the index is a maintained cache
whose integrity is checked on read (content hash) and which ``verify()``
can rebuild from scratch for comparison.

Writes are atomic (temp file + rename) and idempotent: storing the same
nanopublication twice is a no-op, while storing a different one under an
existing GUPI is a conflict.
"""

from __future__ import annotations

import enum
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional

from .nanopub import (Nanopub, Violation, check_wellformed, classify_gupi,
                      from_dataset)
from .rdf import Dataset, Iri, Quad, Term, match_quads, parse_trig, serialize_trig

INDEX_VERSION = 1


class StoreError(Exception):
    pass


class NotFound(StoreError):
    pass


class ConflictError(StoreError):
    pass


class IndexCorrupt(StoreError):
    pass


class MalformedNanopub(StoreError):
    def __init__(self, violations: list[Violation]):
        lines = "; ".join(f"{v.rule}: {v.message}" for v in violations)
        super().__init__(f"nanopub failed structural checks: {lines}")
        self.violations = violations


class PutResult(enum.Enum):
    STORED = "stored"
    ALREADY_PRESENT = "already_present"


@dataclass(frozen=True)
class IndexEntry:
    gupi: str
    path: str  # relative to the store directory
    level: str
    key: str
    quads: int
    stored_at: str
    sha256: str

    def to_json_dict(self) -> dict:
        return {
            "gupi": self.gupi,
            "path": self.path,
            "level": self.level,
            "key": self.key,
            "quads": self.quads,
            "stored_at": self.stored_at,
            "sha256": self.sha256,
        }


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class NanopubStore:
    def __init__(self, directory, create: bool = True):
        self.directory = Path(directory)
        if create:
            self.directory.mkdir(parents=True, exist_ok=True)
        elif not self.directory.is_dir():
            raise StoreError(f"store directory does not exist: {self.directory}")
        self._index_path = self.directory / "index.json"
        self._entries: dict[str, IndexEntry] = {}
        self._load_index()

    # -- index -------------------------------------------------------------

    def _load_index(self) -> None:
        if not self._index_path.exists():
            self._entries = {}
            return
        try:
            doc = json.loads(self._index_path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise IndexCorrupt(f"cannot read index: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("version") != INDEX_VERSION:
            raise IndexCorrupt(
                f"unsupported index version: {doc.get('version')!r}")
        entries = {}
        for raw in doc.get("entries", []):
            try:
                entry = IndexEntry(**raw)
            except TypeError as exc:
                raise IndexCorrupt(f"malformed index entry: {raw!r}") from exc
            entries[entry.gupi] = entry
        self._entries = entries

    def _write_index(self) -> None:
        doc = {
            "version": INDEX_VERSION,
            "entries": [self._entries[g].to_json_dict()
                        for g in sorted(self._entries)],
        }
        data = (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")
        _atomic_write(self._index_path, data)

    # -- core operations ----------------------------------------------------

    def put(self, np: Nanopub) -> PutResult:
        violations = check_wellformed(np)
        if violations:
            raise MalformedNanopub(violations)
        classified = classify_gupi(np.uri)
        if classified is None:
            raise StoreError(f"cannot derive level/key from {np.uri}")
        level, key = classified

        text = serialize_trig(np.quads)
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()

        existing = self._entries.get(np.uri.value)
        if existing is not None:
            if existing.sha256 == digest:
                return PutResult.ALREADY_PRESENT
            stored = self._read_nanopub(existing)
            if stored.quads.quad_set() == np.quads.quad_set():
                return PutResult.ALREADY_PRESENT
            raise ConflictError(
                f"{np.uri} already stored with different content")

        rel_path = Path(level.value) / f"{key}.trig"
        full_path = self.directory / rel_path
        full_path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(full_path, text.encode("utf-8"))

        self._entries[np.uri.value] = IndexEntry(
            gupi=np.uri.value,
            path=str(rel_path),
            level=level.value,
            key=key,
            quads=len(np.quads),
            stored_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            sha256=digest,
        )
        self._write_index()
        return PutResult.STORED

    def exists(self, gupi: Iri) -> bool:
        return gupi.value in self._entries

    def _read_nanopub(self, entry: IndexEntry) -> Nanopub:
        path = self.directory / entry.path
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise IndexCorrupt(f"indexed file missing: {entry.path}") from exc
        if hashlib.sha256(data).hexdigest() != entry.sha256:
            raise IndexCorrupt(
                f"stored file was modified outside the store: {entry.path}")
        np = from_dataset(parse_trig(data.decode("utf-8")))
        if np.uri.value != entry.gupi:
            raise IndexCorrupt(
                f"file {entry.path} holds {np.uri}, index says {entry.gupi}")
        return np

    def get(self, gupi: Iri) -> Nanopub:
        entry = self._entries.get(gupi.value)
        if entry is None:
            raise NotFound(f"no nanopub stored under {gupi}")
        return self._read_nanopub(entry)

    def list(self, level=None) -> list[IndexEntry]:
        entries = sorted(self._entries.values(), key=lambda e: e.gupi)
        if level is None:
            return entries
        wanted = level.value if hasattr(level, "value") else str(level)
        return [e for e in entries if e.level == wanted]

    def load_all(self) -> list[Nanopub]:
        return [self._read_nanopub(e) for e in self.list()]

    def query(self, subject: Optional[Iri] = None, predicate: Optional[Iri] = None,
              obj: Optional[Term] = None, graph: Optional[Iri] = None
              ) -> Iterator[tuple[Iri, Quad]]:
        """Linear scan over every stored nanopub, yielding (gupi, quad)."""
        for entry in self.list():
            np = self._read_nanopub(entry)
            for quad in match_quads(np.quads, subject, predicate, obj, graph):
                yield (np.uri, quad)

    # -- maintenance ---------------------------------------------------------

    def _scan_files(self) -> dict[str, IndexEntry]:
        found: dict[str, IndexEntry] = {}
        for level_dir in ("organism", "assembly", "article"):
            directory = self.directory / level_dir
            if not directory.is_dir():
                continue
            for path in sorted(directory.glob("*.trig")):
                data = path.read_bytes()
                np = from_dataset(parse_trig(data.decode("utf-8")))
                classified = classify_gupi(np.uri)
                if classified is None:
                    raise StoreError(f"unclassifiable nanopub in {path}")
                level, key = classified
                found[np.uri.value] = IndexEntry(
                    gupi=np.uri.value,
                    path=str(path.relative_to(self.directory)),
                    level=level.value,
                    key=key,
                    quads=len(np.quads),
                    stored_at="",  # not recoverable from the file
                    sha256=hashlib.sha256(data).hexdigest(),
                )
        return found

    def verify(self) -> list[str]:
        """Rebuild the index from the files and diff it against the cache.

        Returns discrepancy descriptions; an empty list means the store is
        coherent. ``stored_at`` is not derivable from files and is excluded.
        """
        problems = []
        try:
            rebuilt = self._scan_files()
        except Exception as exc:  # surface parse errors as findings
            return [f"cannot rebuild index: {exc}"]

        for gupi in sorted(set(self._entries) | set(rebuilt)):
            have = self._entries.get(gupi)
            disk = rebuilt.get(gupi)
            if have is None:
                problems.append(f"file not in index: {disk.path}")
                continue
            if disk is None:
                problems.append(f"indexed but missing on disk: {gupi}")
                continue
            for field_name in ("path", "level", "key", "quads", "sha256"):
                a, b = getattr(have, field_name), getattr(disk, field_name)
                if a != b:
                    problems.append(
                        f"{gupi}: index {field_name}={a!r}, files say {b!r}")
        return problems
