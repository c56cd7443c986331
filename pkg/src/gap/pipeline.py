"""Pipeline orchestration: discover, fetch, back up, build, store.

A run starts from one assembly accession (or a URL containing one). The
seed assembly document names its organism; the organism's other
assemblies are then gathered, and finally every article citing any of
the gathered assemblies. Wire documents are mirrored to a backup
directory as three JSON arrays (organism.json, assemblies.json,
articles.json) so a later offline `build` can reconstruct the same
nanopubs, provided the build timestamp is pinned in the configuration.

Instances whose identifier already exists in the store are not fetched
or rebuilt; they count as "skipped_existing". "fetched" counts every
instance enumerated this run, so fetched = built + skipped_existing
holds per level on a completed run, and an immediate rerun reports
built = 0.

A fetch failure that survives the retry policy aborts the run, but the
backups of whatever was fetched first are written before the error
propagates, so a later run can resume against a warm mirror.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .builders import (
    ArticleRecord,
    AssemblyRecord,
    BuildContext,
    OrganismRecord,
    build_article_nanopub,
    build_assembly_nanopub,
    build_organism_nanopub,
)
from .gateway import (
    GatewayError,
    MetadataGateway,
    article_to_wire,
    assembly_to_wire,
    parse_article,
    parse_assembly,
    parse_taxon,
    taxon_to_wire,
)
from .nanopub import GupiKey, Level, Nanopub, Violation, classify_gupi, mint_gupi
from .quality import lint
from .rdf import Iri
from .store import NanopubStore, PutResult
from .vocab import SIO_000497

log = logging.getLogger("gap.pipeline")

LOCK_NAME = ".gap.lock"

ORGANISM_BACKUP = "organism.json"
ASSEMBLIES_BACKUP = "assemblies.json"
ARTICLES_BACKUP = "articles.json"

_ACCESSION_RE = re.compile(r"GC[AF]_\d+(?:[.-]\d+)?")


class PipelineError(Exception):
    pass


class NoAccessionFound(PipelineError):
    def __init__(self, text: str):
        super().__init__(f"no assembly accession found in {text!r}")
        self.text = text


class LockHeld(PipelineError):
    def __init__(self, path: Path, owner: str):
        super().__init__(f"lock file {path} is held by {owner}")
        self.path = path
        self.owner = owner


def extract_accession(text: str) -> str:
    """Pull an assembly accession out of free text or an assembly-page URL.

    Identifier leaves spell the version separator as a dash; the wire
    form uses a dot. Both are accepted and the dot form is returned.
    """
    m = _ACCESSION_RE.search(text)
    if not m:
        raise NoAccessionFound(text)
    return m.group(0).replace("-", ".")


class StoreLock:
    """Advisory lock file guarding a store against concurrent runs."""

    def __init__(self, directory):
        self.path = Path(directory) / LOCK_NAME
        self._held = False

    def acquire(self) -> "StoreLock":
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            try:
                owner = self.path.read_text(encoding="utf-8").strip() or "unknown"
            except OSError:
                owner = "unknown"
            raise LockHeld(self.path, owner) from None
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(f"pid {os.getpid()}\n")
        self._held = True
        return self

    def release(self) -> None:
        if self._held:
            try:
                self.path.unlink()
            except FileNotFoundError:
                pass
            self._held = False

    def __enter__(self) -> "StoreLock":
        return self.acquire()

    def __exit__(self, *exc_info) -> None:
        self.release()


@dataclass
class LevelCounts:
    fetched: int = 0
    built: int = 0
    skipped_existing: int = 0

    def to_json_dict(self) -> dict:
        return {"fetched": self.fetched, "built": self.built,
                "skipped_existing": self.skipped_existing}


@dataclass
class RunReport:
    accession: str = ""
    taxid: str = ""
    dry_run: bool = False
    levels: dict[str, LevelCounts] = field(default_factory=dict)
    backup_paths: list[str] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)
    wall_time: float = 0.0

    def counts(self, level: Level) -> LevelCounts:
        return self.levels.setdefault(level.value, LevelCounts())

    @property
    def fetched(self) -> int:
        return sum(c.fetched for c in self.levels.values())

    @property
    def built(self) -> int:
        return sum(c.built for c in self.levels.values())

    @property
    def skipped_existing(self) -> int:
        return sum(c.skipped_existing for c in self.levels.values())

    def to_json_dict(self) -> dict:
        return {
            "accession": self.accession,
            "taxid": self.taxid,
            "dry_run": self.dry_run,
            "fetched": self.fetched,
            "built": self.built,
            "skipped_existing": self.skipped_existing,
            "levels": {name: c.to_json_dict()
                       for name, c in sorted(self.levels.items())},
            "backup_paths": list(self.backup_paths),
            "violations": [v.to_json_dict() for v in self.violations],
            "wall_time": round(self.wall_time, 3),
        }


# -- backups ------------------------------------------------------------------


def _atomic_json(path: Path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_backups(backup_dir, organisms: list[OrganismRecord],
                  assemblies: list[AssemblyRecord],
                  articles: list[ArticleRecord]) -> list[Path]:
    """Mirror wire documents to three sorted JSON arrays, atomically."""
    directory = Path(backup_dir)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / ORGANISM_BACKUP, directory / ASSEMBLIES_BACKUP,
             directory / ARTICLES_BACKUP]
    _atomic_json(paths[0], [taxon_to_wire(rec) for rec in
                            sorted(organisms, key=lambda r: r.taxid)])
    _atomic_json(paths[1], [assembly_to_wire(rec) for rec in
                            sorted(assemblies, key=lambda r: r.accession)])
    _atomic_json(paths[2], [article_to_wire(rec) for rec in
                            sorted(articles, key=lambda r: r.pmid)])
    return paths


def _read_array(path: Path, label: str) -> list[dict]:
    if not path.exists():
        return []
    with open(path, encoding="utf-8") as fh:
        docs = json.load(fh)
    if not isinstance(docs, list):
        raise PipelineError(f"{path}: expected a JSON array of {label} documents")
    return docs


def read_backups(backup_dir, registry) -> tuple[
        list[OrganismRecord], list[AssemblyRecord], list[ArticleRecord]]:
    directory = Path(backup_dir)
    organisms = [parse_taxon(doc) for doc in
                 _read_array(directory / ORGANISM_BACKUP, "taxon")]
    assemblies = [parse_assembly(doc, registry) for doc in
                  _read_array(directory / ASSEMBLIES_BACKUP, "assembly")]
    articles = [parse_article(doc) for doc in
                _read_array(directory / ARTICLES_BACKUP, "article")]
    return organisms, assemblies, articles


def _merge_backups(backup_dir, registry, organisms, assemblies, articles):
    """Overlay freshly fetched records onto any existing mirror.

    A rerun that fetched nothing new leaves the files byte-identical;
    a partial run keeps earlier records it did not re-fetch.
    """
    try:
        old_org, old_asm, old_art = read_backups(backup_dir, registry)
    except (PipelineError, GatewayError, ValueError):
        log.warning("existing backups unreadable; rewriting from this run only")
        old_org, old_asm, old_art = [], [], []
    merged_org = {rec.taxid: rec for rec in old_org}
    merged_org.update({rec.taxid: rec for rec in organisms})
    merged_asm = {rec.accession: rec for rec in old_asm}
    merged_asm.update({rec.accession: rec for rec in assemblies})
    merged_art = {rec.pmid: rec for rec in old_art}
    merged_art.update({rec.pmid: rec for rec in articles})
    return (list(merged_org.values()), list(merged_asm.values()),
            list(merged_art.values()))


# -- store interactions ---------------------------------------------------------


def _taxid_from_stored_assembly(store: NanopubStore, gupi: Iri) -> Optional[str]:
    """Recover the organism id from a stored assembly's strain reference."""
    np = store.get(gupi)
    for quad in np.quads.graph_quads(np.assertion):
        if quad.predicate == SIO_000497 and isinstance(quad.object, Iri):
            classified = classify_gupi(quad.object)
            if classified and classified[0] is Level.ORGANISM:
                return classified[1]
    return None


def _store_or_count(store: NanopubStore, gupi: Iri, factory,
                    counts: LevelCounts, dry_run: bool,
                    built_sink: Optional[list[Nanopub]] = None) -> None:
    nanopub = factory()
    if built_sink is not None:
        built_sink.append(nanopub)
    if dry_run:
        counts.built += 1
        return
    result = store.put(nanopub)
    if result is PutResult.STORED:
        counts.built += 1
    else:
        counts.skipped_existing += 1


def build_corpus(store: NanopubStore, ctx: BuildContext,
                 organisms: list[OrganismRecord],
                 assemblies: list[AssemblyRecord],
                 articles: list[ArticleRecord],
                 report: RunReport, dry_run: bool = False,
                 built_sink: Optional[list[Nanopub]] = None) -> None:
    """Build nanopubs in level order and store them, deduplicating by id.

    Level order (organisms, then assemblies, then articles) guarantees a
    cross-reference target is stored before anything that points at it.
    """
    for rec in sorted(organisms, key=lambda r: r.taxid):
        counts = report.counts(Level.ORGANISM)
        counts.fetched += 1
        gupi = mint_gupi(GupiKey(Level.ORGANISM, rec.taxid), ctx.base)
        if store.exists(gupi):
            counts.skipped_existing += 1
            continue
        _store_or_count(store, gupi, lambda rec=rec: build_organism_nanopub(rec, ctx),
                        counts, dry_run, built_sink)

    for rec in sorted(assemblies, key=lambda r: r.accession):
        counts = report.counts(Level.ASSEMBLY)
        counts.fetched += 1
        gupi = mint_gupi(GupiKey(Level.ASSEMBLY, rec.accession), ctx.base)
        if store.exists(gupi):
            counts.skipped_existing += 1
            continue
        org_gupi = mint_gupi(GupiKey(Level.ORGANISM, rec.taxid), ctx.base)
        _store_or_count(store, gupi,
                        lambda rec=rec, org=org_gupi:
                            build_assembly_nanopub(rec, org, ctx),
                        counts, dry_run, built_sink)

    for rec in sorted(articles, key=lambda r: r.pmid):
        counts = report.counts(Level.ARTICLE)
        counts.fetched += 1
        gupi = mint_gupi(GupiKey(Level.ARTICLE, rec.pmid), ctx.base)
        if store.exists(gupi):
            counts.skipped_existing += 1
            continue
        targets = [mint_gupi(GupiKey(Level.ASSEMBLY, acc), ctx.base)
                   for acc in sorted(rec.cited_accessions)]
        _store_or_count(store, gupi,
                        lambda rec=rec, targets=targets:
                            build_article_nanopub(rec, targets, ctx),
                        counts, dry_run, built_sink)


# -- fetch stage ------------------------------------------------------------------


@dataclass
class _FetchResult:
    taxid: str = ""
    organisms: list = field(default_factory=list)
    assemblies: list = field(default_factory=list)
    articles: list = field(default_factory=list)
    # Enumerated identifiers, including instances skipped by dedup.
    organism_ids: set = field(default_factory=set)
    accessions: set = field(default_factory=set)
    pmids: set = field(default_factory=set)


def _fetch_stage(gateway: MetadataGateway, store: Optional[NanopubStore],
                 ctx: BuildContext, accession: str,
                 workers: int) -> _FetchResult:
    """Discovery stage: seed assembly, its organism, siblings, articles.

    When `store` is given, instances already present are enumerated but
    not fetched. Raises the first GatewayError after the concurrent
    stage that produced it completes; partial results live on the raised
    error's `partial` attribute so callers can back them up.
    """
    result = _FetchResult()
    workers = max(1, workers)

    def exists(level: Level, key: str) -> bool:
        if store is None:
            return False
        return store.exists(mint_gupi(GupiKey(level, key), ctx.base))

    try:
        seed_rec = None
        if exists(Level.ASSEMBLY, accession):
            seed_gupi = mint_gupi(GupiKey(Level.ASSEMBLY, accession), ctx.base)
            taxid = _taxid_from_stored_assembly(store, seed_gupi)
            if taxid is None:
                seed_rec = gateway.fetch_assembly(accession)
                taxid = seed_rec.taxid
        else:
            seed_rec = gateway.fetch_assembly(accession)
            taxid = seed_rec.taxid
        result.taxid = taxid

        result.organism_ids.add(taxid)
        if not exists(Level.ORGANISM, taxid):
            result.organisms.append(gateway.fetch_taxon(taxid))

        siblings = gateway.list_assemblies_for_taxon(taxid)
        result.accessions = set(siblings) | {accession}
        if seed_rec is not None:
            result.assemblies.append(seed_rec)
        to_fetch = [acc for acc in sorted(result.accessions)
                    if acc != accession and not exists(Level.ASSEMBLY, acc)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(acc, pool.submit(gateway.fetch_assembly, acc))
                       for acc in to_fetch]
            errors = []
            for acc, future in futures:
                try:
                    result.assemblies.append(future.result())
                except GatewayError as exc:
                    errors.append(exc)
            if errors:
                raise errors[0]

        cited_by_pmid: dict[str, set[str]] = {}
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(acc, pool.submit(gateway.search_articles, acc))
                       for acc in sorted(result.accessions)]
            errors = []
            for acc, future in futures:
                try:
                    for pmid in future.result():
                        cited_by_pmid.setdefault(pmid, set()).add(acc)
                except GatewayError as exc:
                    errors.append(exc)
            if errors:
                raise errors[0]
        result.pmids = set(cited_by_pmid)

        to_fetch = [pmid for pmid in sorted(cited_by_pmid)
                    if not exists(Level.ARTICLE, pmid)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(pmid, pool.submit(gateway.fetch_article, pmid,
                                          sorted(cited_by_pmid[pmid])))
                       for pmid in to_fetch]
            errors = []
            for pmid, future in futures:
                try:
                    result.articles.append(future.result())
                except GatewayError as exc:
                    errors.append(exc)
            if errors:
                raise errors[0]
        return result
    except GatewayError as exc:
        exc.partial = result
        raise


def _backup_fetched(backup_dir, registry, fetched: _FetchResult) -> list[Path]:
    organisms, assemblies, articles = _merge_backups(
        backup_dir, registry, fetched.organisms, fetched.assemblies,
        fetched.articles)
    return write_backups(backup_dir, organisms, assemblies, articles)


def _count_enumerated(report: RunReport, fetched: _FetchResult) -> None:
    """Fold instances skipped before fetch into the per-level counts.

    build_corpus only sees records that were actually fetched; anything
    enumerated but already stored never became a record, so the gap
    between the two is exactly the fetch-stage dedup skips.
    """
    for level, ids, records in (
            (Level.ORGANISM, fetched.organism_ids, fetched.organisms),
            (Level.ASSEMBLY, fetched.accessions, fetched.assemblies),
            (Level.ARTICLE, fetched.pmids, fetched.articles)):
        counts = report.counts(level)
        counts.skipped_existing += len(ids) - len(records)
        counts.fetched = len(ids)


def run(gateway: MetadataGateway, store: NanopubStore, ctx: BuildContext,
        accession_or_url: str, backup_dir, workers: int = 4,
        dry_run: bool = False) -> RunReport:
    """Full pipeline: discover, fetch, mirror, build, store, lint."""
    started = time.monotonic()
    accession = extract_accession(accession_or_url)
    report = RunReport(accession=accession, dry_run=dry_run)
    lock = StoreLock(store.directory) if not dry_run else None
    if lock:
        lock.acquire()
    try:
        try:
            fetched = _fetch_stage(gateway, store, ctx, accession, workers)
        except GatewayError as exc:
            partial = getattr(exc, "partial", None)
            if partial is not None:
                paths = _backup_fetched(backup_dir, ctx.registry, partial)
                log.error("run aborted (%s); partial backups kept at %s",
                          exc, ", ".join(str(p) for p in paths))
            raise
        report.taxid = fetched.taxid
        report.backup_paths = [str(p) for p in
                               _backup_fetched(backup_dir, ctx.registry, fetched)]
        built: list[Nanopub] = []
        build_corpus(store, ctx, fetched.organisms, fetched.assemblies,
                     fetched.articles, report, dry_run=dry_run, built_sink=built)
        # Enumerated counts override the record-level tally so instances
        # skipped before fetch still appear in "fetched".
        _count_enumerated(report, fetched)
        if dry_run:
            corpus = store.load_all() + built
        else:
            corpus = store.load_all()
        report.violations = lint(corpus, ctx.registry, store=store)
    finally:
        if lock:
            lock.release()
    report.wall_time = time.monotonic() - started
    return report


def fetch(gateway: MetadataGateway, ctx: BuildContext, accession_or_url: str,
          backup_dir, workers: int = 4) -> RunReport:
    """Fetch and mirror only; the store is never touched."""
    started = time.monotonic()
    accession = extract_accession(accession_or_url)
    report = RunReport(accession=accession)
    try:
        fetched = _fetch_stage(gateway, None, ctx, accession, workers)
    except GatewayError as exc:
        partial = getattr(exc, "partial", None)
        if partial is not None:
            _backup_fetched(backup_dir, ctx.registry, partial)
        raise
    report.taxid = fetched.taxid
    report.backup_paths = [str(p) for p in
                           _backup_fetched(backup_dir, ctx.registry, fetched)]
    _count_enumerated(report, fetched)
    report.wall_time = time.monotonic() - started
    return report


def build_from_backups(store: NanopubStore, ctx: BuildContext,
                       backup_dir, dry_run: bool = False) -> RunReport:
    """Rebuild the corpus offline from mirrored wire documents."""
    started = time.monotonic()
    organisms, assemblies, articles = read_backups(backup_dir, ctx.registry)
    report = RunReport(dry_run=dry_run)
    if organisms:
        report.taxid = organisms[0].taxid
    directory = Path(backup_dir)
    report.backup_paths = [str(directory / ORGANISM_BACKUP),
                           str(directory / ASSEMBLIES_BACKUP),
                           str(directory / ARTICLES_BACKUP)]
    lock = StoreLock(store.directory) if not dry_run else None
    if lock:
        lock.acquire()
    try:
        built: list[Nanopub] = []
        build_corpus(store, ctx, organisms, assemblies, articles, report,
                     dry_run=dry_run, built_sink=built)
        corpus = store.load_all() + built if dry_run else store.load_all()
        report.violations = lint(corpus, ctx.registry, store=store)
    finally:
        if lock:
            lock.release()
    report.wall_time = time.monotonic() - started
    return report
