"""HTTP ingestion gateway for the three metadata sources.

The gateway fetches JSON documents describing assemblies, taxa, and
articles, validates them against the wire schemas, and returns typed
records. Transient failures (5xx, transport errors) are retried with
exponential backoff; 404 and 400 are never retried. A per-endpoint
minimum interval throttles request rates against live services; set it to
zero when talking to a local fixture server.

Wire formats (JSON objects):

  assembly   {accession, taxid, level, method{name,version}, coverage,
              tech, submitter{name,kind}, submitted, ftp, page, latest,
              strain?, biosample?, bioproject?, wgs{master, version?}?}
  taxon      {taxid, name, rank, lineage[{taxid,name}...], page}
  article    {pmid, title, journal, date, authors[{name,orcid?}...],
              keywords[...], doi?, abstract?}
  searches   {accessions: [...]} and {pmids: [...]}
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Optional
from urllib.parse import quote

import requests

from .builders import Author, AssemblyRecord, ArticleRecord, BuildError, OrganismRecord
from .nanopub import GupiKey, InvalidKey, Level
from .rdf import Iri, make_iri
from .vocab import VocabularyRegistry

log = logging.getLogger("gap.gateway")


class GatewayError(Exception):
    pass


class NotFound(GatewayError):
    def __init__(self, url: str):
        super().__init__(f"resource not found: {url}")
        self.url = url


class TransportError(GatewayError):
    pass


class SchemaError(GatewayError):
    def __init__(self, kind: str, detail: str):
        super().__init__(f"bad {kind} document: {detail}")
        self.kind = kind
        self.detail = detail


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff: float = 0.25
    multiplier: float = 2.0

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.backoff < 0 or self.multiplier <= 0:
            raise ValueError("backoff must be >= 0 and multiplier > 0")

    def delay(self, attempt: int) -> float:
        """Seconds to wait after the given 1-based failed attempt."""
        return self.backoff * (self.multiplier ** (attempt - 1))


@dataclass(frozen=True)
class SourceEndpoint:
    base_url: str
    timeout: float = 10.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    # Public-source etiquette: space requests 350 ms apart by default.
    # Set to 0 against the local fixture server.
    min_interval: float = 0.35

    def __post_init__(self):
        if not self.base_url.startswith(("http://", "https://")):
            raise ValueError(f"endpoint must be an http(s) URL: {self.base_url!r}")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        object.__setattr__(self, "base_url", self.base_url.rstrip("/"))


@dataclass(frozen=True)
class WirePayload:
    kind: str
    source_url: str
    fetched_at: datetime
    body: dict


# -- wire parsing -----------------------------------------------------------


def _need(doc: dict, key: str, kind: str, types) -> object:
    if key not in doc:
        raise SchemaError(kind, f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, types):
        raise SchemaError(kind, f"field {key!r} has the wrong type")
    if isinstance(value, str) and not value.strip():
        raise SchemaError(kind, f"field {key!r} is empty")
    return value


def _optional(doc: dict, key: str, kind: str, types) -> object:
    if key not in doc or doc[key] is None:
        return None
    return _need(doc, key, kind, types)


def _parse_date(raw: str, kind: str, key: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError as exc:
        raise SchemaError(kind, f"field {key!r} is not a YYYY-MM-DD date: {raw!r}") from exc


def _parse_iri_field(raw: str, kind: str, key: str) -> Iri:
    try:
        return make_iri(raw)
    except Exception as exc:
        raise SchemaError(kind, f"field {key!r} is not an IRI: {raw!r}") from exc


def parse_assembly(doc: dict, registry: VocabularyRegistry) -> AssemblyRecord:
    kind = "assembly"
    if not isinstance(doc, dict):
        raise SchemaError(kind, "document is not a JSON object")
    method = _need(doc, "method", kind, dict)
    submitter = _need(doc, "submitter", kind, dict)
    level_raw = _need(doc, "level", kind, str)
    try:
        level_term = registry.expand(level_raw)
    except Exception as exc:
        raise SchemaError(kind, f"unknown level term: {level_raw!r}") from exc
    if not registry.is_term(level_term):
        raise SchemaError(kind, f"level term not in the vocabulary registry: {level_raw!r}")

    wgs = _optional(doc, "wgs", kind, dict)
    wgs_master = None
    wgs_version = None
    if wgs is not None:
        wgs_master = _parse_iri_field(_need(wgs, "master", kind, str), kind, "wgs.master")
        raw_version = _optional(wgs, "version", kind, str)
        wgs_version = raw_version

    strain = _optional(doc, "strain", kind, str)
    biosample = _optional(doc, "biosample", kind, str)
    bioproject = _optional(doc, "bioproject", kind, str)

    try:
        return AssemblyRecord(
            accession=_need(doc, "accession", kind, str),
            taxid=str(_need(doc, "taxid", kind, (str, int))),
            assembly_level_term=level_term,
            assembly_method_name=_need(method, "name", kind, str),
            assembly_method_version=_need(method, "version", kind, str),
            coverage=_need(doc, "coverage", kind, str),
            sequencing_tech=_need(doc, "tech", kind, str),
            submitter_name=_need(submitter, "name", kind, str),
            submitter_kind=_need(submitter, "kind", kind, str),
            submission_date=_parse_date(_need(doc, "submitted", kind, str), kind, "submitted"),
            ftp_iri=_parse_iri_field(_need(doc, "ftp", kind, str), kind, "ftp"),
            source_page_iri=_parse_iri_field(_need(doc, "page", kind, str), kind, "page"),
            is_latest=bool(_need(doc, "latest", kind, bool)),
            strain_name=strain,
            biosample_iri=_parse_iri_field(biosample, kind, "biosample") if biosample else None,
            bioproject_iri=_parse_iri_field(bioproject, kind, "bioproject") if bioproject else None,
            wgs_master_iri=wgs_master,
            wgs_version=wgs_version,
        )
    except (InvalidKey, BuildError, ValueError) as exc:
        raise SchemaError(kind, str(exc)) from exc


def assembly_to_wire(rec: AssemblyRecord) -> dict:
    doc = {
        "accession": rec.accession,
        "taxid": rec.taxid,
        "level": rec.assembly_level_term.value,
        "method": {"name": rec.assembly_method_name,
                   "version": rec.assembly_method_version},
        "coverage": rec.coverage,
        "tech": rec.sequencing_tech,
        "submitter": {"name": rec.submitter_name, "kind": rec.submitter_kind},
        "submitted": rec.submission_date.isoformat(),
        "ftp": rec.ftp_iri.value,
        "page": rec.source_page_iri.value,
        "latest": rec.is_latest,
    }
    if rec.strain_name is not None:
        doc["strain"] = rec.strain_name
    if rec.biosample_iri is not None:
        doc["biosample"] = rec.biosample_iri.value
    if rec.bioproject_iri is not None:
        doc["bioproject"] = rec.bioproject_iri.value
    if rec.wgs_master_iri is not None:
        wgs = {"master": rec.wgs_master_iri.value}
        if rec.wgs_version is not None:
            wgs["version"] = rec.wgs_version
        doc["wgs"] = wgs
    return doc


def parse_taxon(doc: dict) -> OrganismRecord:
    kind = "taxon"
    if not isinstance(doc, dict):
        raise SchemaError(kind, "document is not a JSON object")
    lineage_raw = _need(doc, "lineage", kind, list)
    lineage = []
    for i, item in enumerate(lineage_raw):
        if not isinstance(item, dict):
            raise SchemaError(kind, f"lineage[{i}] is not an object")
        lineage.append((str(_need(item, "taxid", kind, (str, int))),
                        _need(item, "name", kind, str)))
    try:
        return OrganismRecord(
            taxid=str(_need(doc, "taxid", kind, (str, int))),
            scientific_name=_need(doc, "name", kind, str),
            rank=_need(doc, "rank", kind, str),
            lineage=tuple(lineage),
            taxonomy_page_iri=_parse_iri_field(_need(doc, "page", kind, str), kind, "page"),
        )
    except (InvalidKey, BuildError, ValueError) as exc:
        raise SchemaError(kind, str(exc)) from exc


def taxon_to_wire(rec: OrganismRecord) -> dict:
    return {
        "taxid": rec.taxid,
        "name": rec.scientific_name,
        "rank": rec.rank,
        "lineage": [{"taxid": t, "name": n} for t, n in rec.lineage],
        "page": rec.taxonomy_page_iri.value,
    }


def parse_article(doc: dict, cited_accessions=()) -> ArticleRecord:
    kind = "article"
    if not isinstance(doc, dict):
        raise SchemaError(kind, "document is not a JSON object")
    authors_raw = _need(doc, "authors", kind, list)
    authors = []
    for i, item in enumerate(authors_raw):
        if not isinstance(item, dict):
            raise SchemaError(kind, f"authors[{i}] is not an object")
        orcid_raw = _optional(item, "orcid", kind, str)
        authors.append(Author(
            name=_need(item, "name", kind, str),
            orcid=_parse_iri_field(orcid_raw, kind, "orcid") if orcid_raw else None,
        ))
    keywords = _need(doc, "keywords", kind, list)
    for i, kw in enumerate(keywords):
        if not isinstance(kw, str):
            raise SchemaError(kind, f"keywords[{i}] is not a string")
    doi_raw = _optional(doc, "doi", kind, str)
    cites = tuple(cited_accessions) if cited_accessions else \
        tuple(_optional(doc, "cites", kind, list) or ())
    try:
        return ArticleRecord(
            pmid=str(_need(doc, "pmid", kind, (str, int))),
            title=_need(doc, "title", kind, str),
            journal=_need(doc, "journal", kind, str),
            publication_date=_parse_date(_need(doc, "date", kind, str), kind, "date"),
            authors=tuple(authors),
            keywords=tuple(keywords),
            cited_accessions=cites,
            doi_iri=_parse_iri_field(doi_raw, kind, "doi") if doi_raw else None,
            abstract=_optional(doc, "abstract", kind, str),
        )
    except (InvalidKey, BuildError, ValueError) as exc:
        raise SchemaError(kind, str(exc)) from exc


def article_to_wire(rec: ArticleRecord) -> dict:
    doc = {
        "pmid": rec.pmid,
        "title": rec.title,
        "journal": rec.journal,
        "date": rec.publication_date.isoformat(),
        "authors": [
            {"name": a.name, **({"orcid": a.orcid.value} if a.orcid else {})}
            for a in rec.authors
        ],
        "keywords": list(rec.keywords),
        # The search linkage rides along so offline builds know the targets.
        "cites": sorted(rec.cited_accessions),
    }
    if rec.doi_iri is not None:
        doc["doi"] = rec.doi_iri.value
    if rec.abstract is not None:
        doc["abstract"] = rec.abstract
    return doc


# -- the gateway itself -------------------------------------------------------


class MetadataGateway:
    """Typed fetch operations over the three source endpoints."""

    def __init__(self, assembly: SourceEndpoint, taxonomy: SourceEndpoint,
                 pubmed: SourceEndpoint, registry: Optional[VocabularyRegistry] = None,
                 session: Optional[requests.Session] = None):
        self.assembly_endpoint = assembly
        self.taxonomy_endpoint = taxonomy
        self.pubmed_endpoint = pubmed
        self.registry = registry or VocabularyRegistry()
        self._session = session or requests.Session()
        self._lock = threading.Lock()
        self._last_request: dict[str, float] = {}
        self.payloads: list[WirePayload] = []

    def _throttle(self, endpoint: SourceEndpoint) -> None:
        if endpoint.min_interval <= 0:
            return
        while True:
            with self._lock:
                last = self._last_request.get(endpoint.base_url)
                now = time.monotonic()
                if last is None or now - last >= endpoint.min_interval:
                    self._last_request[endpoint.base_url] = now
                    return
                wait = endpoint.min_interval - (now - last)
            time.sleep(wait)

    def _get_json(self, endpoint: SourceEndpoint, path: str, kind: str) -> dict:
        url = endpoint.base_url + path
        policy = endpoint.retry
        attempt = 0
        while True:
            attempt += 1
            self._throttle(endpoint)
            try:
                response = self._session.get(url, timeout=endpoint.timeout)
                status = response.status_code
            except requests.RequestException as exc:
                if attempt >= policy.max_attempts:
                    raise TransportError(f"GET {url} failed: {exc}") from exc
                delay = policy.delay(attempt)
                log.warning("GET %s failed (%s), retrying in %.2fs", url, exc, delay)
                time.sleep(delay)
                continue

            if status == 404:
                raise NotFound(url)
            if 400 <= status < 500:
                raise TransportError(f"GET {url} returned {status}")
            if status >= 500:
                if attempt >= policy.max_attempts:
                    raise TransportError(
                        f"GET {url} returned {status} after {attempt} attempts")
                delay = policy.delay(attempt)
                log.warning("GET %s returned %d, retrying in %.2fs", url, status, delay)
                time.sleep(delay)
                continue

            try:
                text = response.content.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise TransportError(f"GET {url} returned non-UTF-8 bytes") from exc
            try:
                body = json.loads(text)
            except ValueError as exc:
                raise SchemaError(kind, f"response from {url} is not JSON") from exc
            with self._lock:
                self.payloads.append(WirePayload(
                    kind=kind, source_url=url,
                    fetched_at=datetime.now(timezone.utc), body=body))
            return body

    # -- typed operations ---------------------------------------------------

    def fetch_assembly(self, accession: str) -> AssemblyRecord:
        GupiKey(Level.ASSEMBLY, accession)  # validate before any network call
        body = self._get_json(self.assembly_endpoint,
                              f"/assembly/{quote(accession)}", "assembly")
        record = parse_assembly(body, self.registry)
        if record.accession != accession:
            raise SchemaError("assembly",
                              f"requested {accession}, document says {record.accession}")
        return record

    def fetch_taxon(self, taxid: str) -> OrganismRecord:
        GupiKey(Level.ORGANISM, str(taxid))
        body = self._get_json(self.taxonomy_endpoint,
                              f"/taxonomy/{quote(str(taxid))}", "taxon")
        record = parse_taxon(body)
        if record.taxid != str(taxid):
            raise SchemaError("taxon",
                              f"requested {taxid}, document says {record.taxid}")
        return record

    def list_assemblies_for_taxon(self, taxid: str) -> list[str]:
        """All sibling assembly accessions for a taxon, deduplicated, sorted."""
        GupiKey(Level.ORGANISM, str(taxid))
        body = self._get_json(self.assembly_endpoint,
                              f"/assemblies?taxid={quote(str(taxid))}", "assembly-list")
        if not isinstance(body, dict) or not isinstance(body.get("accessions"), list):
            raise SchemaError("assembly-list", "missing 'accessions' array")
        accessions = set()
        for raw in body["accessions"]:
            if not isinstance(raw, str):
                raise SchemaError("assembly-list", "non-string accession")
            GupiKey(Level.ASSEMBLY, raw)
            accessions.add(raw)
        return sorted(accessions)

    def search_articles(self, accession: str) -> list[str]:
        """PMIDs of articles citing the given assembly accession."""
        GupiKey(Level.ASSEMBLY, accession)
        body = self._get_json(self.pubmed_endpoint,
                              f"/articles?accession={quote(accession)}", "article-search")
        if not isinstance(body, dict) or not isinstance(body.get("pmids"), list):
            raise SchemaError("article-search", "missing 'pmids' array")
        pmids = set()
        for raw in body["pmids"]:
            pmid = str(raw)
            GupiKey(Level.ARTICLE, pmid)
            pmids.add(pmid)
        return sorted(pmids)

    def fetch_article(self, pmid: str, cited_accessions=()) -> ArticleRecord:
        GupiKey(Level.ARTICLE, str(pmid))
        body = self._get_json(self.pubmed_endpoint,
                              f"/article/{quote(str(pmid))}", "article")
        body.pop("cites", None)  # linkage comes from the search step
        record = parse_article(body, cited_accessions=tuple(cited_accessions))
        if record.pmid != str(pmid):
            raise SchemaError("article",
                              f"requested {pmid}, document says {record.pmid}")
        return record
