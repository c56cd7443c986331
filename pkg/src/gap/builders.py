"""Builders that turn fetched metadata records into nanopublications.

There is one builder per level (organism, assembly, article). All three
share one provenance template and one publication-info template so that
the PROV structure, the agent blocks and the date handling stay uniform.

Graph shape notes, all deliberately mirroring the upstream data convention:

* Ontology-class typing uses the rdfs-namespaced "type" property
  (vocab.RDFS_TYPE); PROV typing uses rdf:type (serialized as `a`).
* Generic references between entities, including references to other
  nanopublications, use sio:SIO_000628.
* The organism entity is typed inside every assembly assertion as well,
  not only in the organism nanopublication's own assertion.
* Every date is emitted twice: as a datetime literal and as three date
  IRIs (day/month/year) under the deployment's date namespace.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Optional, Sequence

from . import vocab
from .nanopub import (GupiKey, Level, Nanopub, assemble, assertion_graph,
                      mint_gupi)
from .rdf import Iri, Literal
from .vocab import VocabularyRegistry, normalize_base


class BuildError(Exception):
    pass


class MissingRequiredField(BuildError):
    def __init__(self, record: str, field_name: str):
        super().__init__(f"{record}.{field_name} is required")
        self.field_name = field_name


class InvalidOrganismReference(BuildError):
    pass


class EmptyCitationTargets(BuildError):
    pass


def _require(record: str, name: str, value) -> None:
    if value is None or (isinstance(value, str) and not value.strip()):
        raise MissingRequiredField(record, name)


@dataclass(frozen=True)
class Author:
    name: str
    orcid: Optional[Iri] = None

    def __post_init__(self):
        _require("Author", "name", self.name)


@dataclass(frozen=True)
class OrganismRecord:
    taxid: str
    scientific_name: str
    rank: str
    lineage: tuple[tuple[str, str], ...]  # (taxid, name) pairs, root first
    taxonomy_page_iri: Iri

    def __post_init__(self):
        _require("OrganismRecord", "taxid", self.taxid)
        _require("OrganismRecord", "scientific_name", self.scientific_name)
        _require("OrganismRecord", "rank", self.rank)
        GupiKey(Level.ORGANISM, self.taxid)
        for anc_taxid, _name in self.lineage:
            GupiKey(Level.ORGANISM, anc_taxid)
            if anc_taxid == self.taxid:
                raise BuildError("lineage must not include the organism itself")


@dataclass(frozen=True)
class AssemblyRecord:
    accession: str
    taxid: str
    assembly_level_term: Iri
    assembly_method_name: str
    assembly_method_version: str
    coverage: str
    sequencing_tech: str
    submitter_name: str
    submitter_kind: str  # "organization" or "person"
    submission_date: date
    ftp_iri: Iri
    source_page_iri: Iri
    is_latest: bool
    strain_name: Optional[str] = None
    biosample_iri: Optional[Iri] = None
    bioproject_iri: Optional[Iri] = None
    wgs_master_iri: Optional[Iri] = None
    wgs_version: Optional[str] = None

    def __post_init__(self):
        for name in ("accession", "taxid", "assembly_method_name",
                     "assembly_method_version", "coverage", "sequencing_tech",
                     "submitter_name", "submitter_kind"):
            _require("AssemblyRecord", name, getattr(self, name))
        _require("AssemblyRecord", "submission_date", self.submission_date)
        GupiKey(Level.ASSEMBLY, self.accession)
        GupiKey(Level.ORGANISM, self.taxid)
        if self.submitter_kind not in ("organization", "person"):
            raise BuildError(f"submitter_kind must be organization or person, "
                             f"got {self.submitter_kind!r}")
        if self.wgs_version is not None and self.wgs_master_iri is None:
            raise BuildError("wgs_version given without wgs_master_iri")


@dataclass(frozen=True)
class ArticleRecord:
    pmid: str
    title: str
    journal: str
    publication_date: date
    authors: tuple[Author, ...]
    keywords: tuple[str, ...]
    cited_accessions: tuple[str, ...]
    doi_iri: Optional[Iri] = None
    abstract: Optional[str] = None

    def __post_init__(self):
        _require("ArticleRecord", "pmid", self.pmid)
        _require("ArticleRecord", "title", self.title)
        _require("ArticleRecord", "journal", self.journal)
        _require("ArticleRecord", "publication_date", self.publication_date)
        GupiKey(Level.ARTICLE, self.pmid)
        for accession in self.cited_accessions:
            GupiKey(Level.ASSEMBLY, accession)


@dataclass(frozen=True)
class BuildContext:
    """Deployment-wide inputs shared by every build call."""

    base: Iri
    curator_orcids: tuple[Iri, ...]
    software_name: str
    software_version: str
    software_source_iri: Iri
    software_doi_iri: Iri
    build_timestamp: datetime
    source_org_term: Iri = vocab.NCIT_C45799
    source_org_name: str = vocab.NCBI_NAME
    source_access_rights: Iri = Iri("https://www.ncbi.nlm.nih.gov/home/about/policies/")
    nanopub_access_rights: Iri = Iri("http://opendatacommons.org/licenses/odbl/1.0/")
    assembly_source: Iri = Iri("https://www.ncbi.nlm.nih.gov/assembly/")
    taxonomy_source: Iri = Iri("https://www.ncbi.nlm.nih.gov/taxonomy/")
    article_source: Iri = Iri("https://pubmed.ncbi.nlm.nih.gov/")

    def __post_init__(self):
        object.__setattr__(self, "base", normalize_base(self.base))
        if not self.curator_orcids:
            raise MissingRequiredField("BuildContext", "curator_orcids")
        _require("BuildContext", "software_name", self.software_name)
        _require("BuildContext", "software_version", self.software_version)
        if self.build_timestamp.tzinfo is None:
            raise BuildError("build_timestamp must be timezone-aware")
        object.__setattr__(self, "_registry", VocabularyRegistry(self.base))

    @property
    def registry(self) -> VocabularyRegistry:
        return self._registry


@dataclass(frozen=True)
class DateRefs:
    day: Iri
    month: Iri
    year: Iri
    literal: Literal


def date_uris(when, base) -> DateRefs:
    """Derive the three date IRIs plus the datetime literal for `when`.

    Accepts a date or a timezone-aware datetime. The day IRI always ends in
    the eight-digit YYYYMMDD form, the month IRI in YYYYMM, the year IRI in
    YYYY.
    """
    if isinstance(base, VocabularyRegistry):
        ns = base.npubdate_ns.value
    else:
        ns = normalize_base(base).value + "date/"
    if isinstance(when, datetime):
        moment = when.astimezone(timezone.utc)
        d = moment.date()
        lexical = moment.strftime("%Y-%m-%dT%H:%M:%SZ")
    elif isinstance(when, date):
        d = when
        lexical = f"{d.isoformat()}T00:00:00Z"
    else:
        raise TypeError(f"expected date or datetime, got {type(when).__name__}")
    return DateRefs(
        day=Iri(f"{ns}{d.year:04d}{d.month:02d}{d.day:02d}"),
        month=Iri(f"{ns}{d.year:04d}{d.month:02d}"),
        year=Iri(f"{ns}{d.year:04d}"),
        literal=Literal(lexical, datatype=vocab.XSD_DATETIME),
    )


def _frag(gupi: Iri, name: str) -> Iri:
    return Iri(f"{gupi.value}#{name}")


def _en(text: str) -> Literal:
    return Literal(text, language="en")


def _activity_triples(activity: Iri, associates: Sequence[Iri], when,
                      ctx: BuildContext, date_predicates=None) -> list:
    """The automatic-assertion activity block shared by both PROV graphs."""
    registry = ctx.registry
    if date_predicates is None:
        date_predicates = (registry.CREATION_DAY, registry.CREATION_MONTH,
                           registry.CREATION_YEAR)
    refs = date_uris(when, registry)
    triples = [
        (activity, vocab.RDF_TYPE, vocab.PROV_ACTIVITY),
        (activity, vocab.RDFS_TYPE, vocab.ECO_000203),
        (activity, vocab.DCTERMS_DATE_SUBMITTED, refs.literal),
        (activity, date_predicates[0], refs.day),
        (activity, date_predicates[1], refs.month),
        (activity, date_predicates[2], refs.year),
    ]
    triples += [(activity, vocab.PROV_WAS_ASSOCIATED_WITH, who) for who in associates]
    return triples


def _provenance_triples(gupi: Iri, agent: Iri, agent_name: str, agent_class: Iri,
                        primary_source: Iri, evidence_iri: Iri, when,
                        ctx: BuildContext, ftp_iri: Optional[Iri] = None) -> list:
    """Provenance graph: how the assertion came to be and from where."""
    a_graph = assertion_graph(gupi)
    activity = _frag(gupi, "automaticAssertion")
    triples = [
        (a_graph, vocab.RDF_TYPE, vocab.PROV_ENTITY),
        (a_graph, vocab.PROV_WAS_GENERATED_BY, activity),
        (a_graph, vocab.PROV_WAS_ATTRIBUTED_TO, agent),
        (a_graph, vocab.PAV_CURATED_BY, agent),
        (a_graph, vocab.PROV_HAD_PRIMARY_SOURCE, primary_source),
        (a_graph, vocab.DCTERMS_ACCESS_RIGHTS, ctx.source_access_rights),
        (a_graph, vocab.ECO_000901, evidence_iri),
    ]
    if ftp_iri is not None:
        ftp = _frag(gupi, "ftp")
        triples += [
            (a_graph, vocab.PROV_WAS_DERIVED_FROM, ftp),
            (ftp, vocab.RDF_TYPE, vocab.PROV_ENTITY),
            (ftp, vocab.RDFS_TYPE, vocab.DCTERMS_DATASET),
            (ftp, vocab.PAV_CURATED_BY, agent),
            (ftp, vocab.PROV_HAD_PRIMARY_SOURCE, ftp_iri),
        ]
    triples += [
        (agent, vocab.RDF_TYPE, agent_class),
        (agent, vocab.RDF_TYPE, vocab.PROV_AGENT),
        (agent, vocab.FOAF_NAME, _en(agent_name)),
    ]
    triples += _activity_triples(activity, [ctx.source_org_term, agent], when, ctx)
    return triples


def _pubinfo_triples(gupi: Iri, subjects: Sequence[Iri], primary_source: Iri,
                     ctx: BuildContext) -> list:
    """Publication-info graph: who and what produced this nanopublication."""
    activity = _frag(gupi, "automaticAssertion")
    software = _frag(gupi, "software")
    creators = _frag(gupi, "npubCreators")
    triples = [
        (gupi, vocab.RDF_TYPE, vocab.PROV_ENTITY),
        (gupi, vocab.PROV_WAS_GENERATED_BY, activity),
        (gupi, vocab.PROV_WAS_ATTRIBUTED_TO, software),
        (gupi, vocab.PROV_WAS_ATTRIBUTED_TO, creators),
        (gupi, vocab.PROV_WAS_DERIVED_FROM, ctx.source_org_term),
        (gupi, vocab.PROV_HAD_PRIMARY_SOURCE, primary_source),
        (gupi, vocab.DCTERMS_ACCESS_RIGHTS, ctx.nanopub_access_rights),
    ]
    triples += [(gupi, vocab.DCTERMS_SUBJECT, s) for s in subjects]
    triples += _activity_triples(
        activity,
        [ctx.source_org_term, vocab.PROV_SOFTWARE_AGENT, vocab.NCIT_C122473],
        ctx.build_timestamp, ctx)
    triples += [
        (ctx.source_org_term, vocab.RDF_TYPE, vocab.FOAF_ORGANIZATION),
        (ctx.source_org_term, vocab.RDF_TYPE, vocab.PROV_AGENT),
        (ctx.source_org_term, vocab.FOAF_NAME, _en(ctx.source_org_name)),
        (software, vocab.RDF_TYPE, vocab.PROV_AGENT),
        (software, vocab.RDFS_TYPE, vocab.PROV_SOFTWARE_AGENT),
        (software, vocab.FOAF_NAME, _en(ctx.software_name)),
        (software, vocab.PAV_VERSION, Literal(ctx.software_version)),
        (software, vocab.PAV_CREATED_BY, ctx.curator_orcids[0]),
        (software, vocab.DCTERMS_SOURCE, ctx.software_source_iri),
        (software, vocab.EDAM_DATA_1188, ctx.software_doi_iri),
        (creators, vocab.RDF_TYPE, vocab.PROV_AGENT),
        (creators, vocab.RDFS_TYPE, vocab.NCIT_C122473),
    ]
    triples += [(creators, vocab.PAV_CREATED_BY, orcid) for orcid in ctx.curator_orcids]
    return triples


def build_organism_nanopub(rec: OrganismRecord, ctx: BuildContext) -> Nanopub:
    """Level 1: one nanopublication per organism (NCBI taxon)."""
    gupi = mint_gupi(GupiKey(Level.ORGANISM, rec.taxid), ctx.base)
    registry = ctx.registry

    assertion = [
        (gupi, vocab.SIO_000628, vocab.SIO_010000),
        (gupi, vocab.DCTERMS_TITLE, _en(rec.scientific_name)),
        (gupi, registry.TAXON_RANK, Literal(rec.rank)),
        (gupi, vocab.DCTERMS_IDENTIFIER, rec.taxonomy_page_iri),
    ]
    for anc_taxid, _name in rec.lineage:
        ancestor = mint_gupi(GupiKey(Level.ORGANISM, anc_taxid), ctx.base)
        assertion.append((gupi, vocab.SIO_000628, ancestor))

    provenance = _provenance_triples(
        gupi, agent=ctx.source_org_term, agent_name=ctx.source_org_name,
        agent_class=vocab.FOAF_ORGANIZATION, primary_source=ctx.taxonomy_source,
        evidence_iri=rec.taxonomy_page_iri, when=ctx.build_timestamp, ctx=ctx)

    pubinfo = _pubinfo_triples(gupi, [vocab.SIO_010000], ctx.taxonomy_source, ctx)
    return assemble(gupi, assertion, provenance, pubinfo, registry.prefixes)


def build_assembly_nanopub(rec: AssemblyRecord, organism_gupi: Iri,
                           ctx: BuildContext) -> Nanopub:
    """Level 2: one nanopublication per genome assembly."""
    expected_org = mint_gupi(GupiKey(Level.ORGANISM, rec.taxid), ctx.base)
    if organism_gupi != expected_org:
        raise InvalidOrganismReference(
            f"organism GUPI {organism_gupi} does not match taxid {rec.taxid}")

    gupi = mint_gupi(GupiKey(Level.ASSEMBLY, rec.accession), ctx.base)
    registry = ctx.registry
    accession_entity = Iri(vocab.NCBI_ASSEMBLY_NS + rec.accession.split(".")[0])
    strain = _frag(gupi, "strain")
    gb_assembly = _frag(gupi, "gbAssembly")

    assertion = [
        (accession_entity, vocab.RDFS_TYPE, vocab.EDAM_DATA_2292),
        (accession_entity, vocab.RDFS_TYPE, vocab.EDAM_DATA_0925),
        (accession_entity, vocab.SIO_000628, strain),
        (accession_entity, vocab.PROV_WAS_GENERATED_BY, gb_assembly),
        (strain, vocab.SIO_000628, vocab.SIO_010055),
        (strain, vocab.SIO_000497, organism_gupi),
        (organism_gupi, vocab.SIO_000628, vocab.SIO_010000),
        (gb_assembly, vocab.SIO_000628, vocab.SO_0001248),
        (gb_assembly, vocab.RDFS_TYPE, vocab.FBCV_0003237),
        (gb_assembly, vocab.NCIT_C25554, rec.assembly_level_term),
        (gb_assembly, vocab.NCIT_C71460,
         _en(f"{rec.assembly_method_name} {rec.assembly_method_version}")),
        (gb_assembly, vocab.OBI_0001939, _en(rec.coverage)),
        (gb_assembly, vocab.EFO_0003739, _en(rec.sequencing_tech)),
    ]
    if rec.strain_name is not None:
        assertion.append((strain, vocab.EDAM_DATA_1046, _en(rec.strain_name)))
    if rec.biosample_iri is not None:
        assertion.append((accession_entity, vocab.EDAM_DATA_3273, rec.biosample_iri))
    if rec.bioproject_iri is not None:
        assertion.append((accession_entity, vocab.NCIT_C475890, rec.bioproject_iri))
    if rec.is_latest:
        assertion.append((gb_assembly, vocab.RDFS_TYPE, vocab.PAV_LATEST_VERSION))
    if rec.wgs_master_iri is not None:
        wgs = _frag(gupi, "wgs")
        assertion += [
            (accession_entity, vocab.PROV_WAS_GENERATED_BY, wgs),
            (wgs, vocab.SIO_000628, vocab.NCIT_C101294),
            (wgs, vocab.DCTERMS_IDENTIFIER, rec.wgs_master_iri),
        ]
        if rec.wgs_version is not None:
            assertion.append((wgs, vocab.PAV_VERSION, _en(rec.wgs_version)))

    agent_class = vocab.FOAF_ORGANIZATION if rec.submitter_kind == "organization" \
        else vocab.FOAF_PERSON
    provenance = _provenance_triples(
        gupi, agent=_frag(gupi, "submitter"), agent_name=rec.submitter_name,
        agent_class=agent_class, primary_source=ctx.assembly_source,
        evidence_iri=rec.source_page_iri, when=rec.submission_date, ctx=ctx,
        ftp_iri=rec.ftp_iri)

    pubinfo = _pubinfo_triples(
        gupi, [vocab.SO_0001248, vocab.SIO_010055], ctx.assembly_source, ctx)
    return assemble(gupi, assertion, provenance, pubinfo, registry.prefixes)


def build_article_nanopub(rec: ArticleRecord, assembly_gupis: Sequence[Iri],
                          ctx: BuildContext) -> Nanopub:
    """Level 3: one nanopublication per article citing tracked assemblies."""
    if not assembly_gupis:
        raise EmptyCitationTargets(
            f"article {rec.pmid} has no assembly citation targets")
    expected = {mint_gupi(GupiKey(Level.ASSEMBLY, a), ctx.base)
                for a in rec.cited_accessions}
    if set(assembly_gupis) != expected:
        raise BuildError("assembly_gupis must be minted from rec.cited_accessions")

    gupi = mint_gupi(GupiKey(Level.ARTICLE, rec.pmid), ctx.base)
    registry = ctx.registry
    pubmed_page = Iri(f"{normalize_base(ctx.article_source).value}{rec.pmid}/")
    pub_refs = date_uris(rec.publication_date, registry)

    assertion = [
        (gupi, vocab.RDFS_TYPE, vocab.FABIO_JOURNAL_ARTICLE),
        (gupi, vocab.DCTERMS_TITLE, _en(rec.title)),
        (gupi, vocab.PRISM_PUBLICATION_NAME, _en(rec.journal)),
        (gupi, vocab.PRISM_PUBLICATION_DATE, pub_refs.literal),
        (gupi, registry.PUBLICATION_DAY, pub_refs.day),
        (gupi, registry.PUBLICATION_MONTH, pub_refs.month),
        (gupi, registry.PUBLICATION_YEAR, pub_refs.year),
        (gupi, vocab.DATACITE_PMID, pubmed_page),
    ]
    if rec.doi_iri is not None:
        assertion.append((gupi, vocab.DATACITE_DOI, rec.doi_iri))
    if rec.abstract is not None:
        assertion.append((gupi, vocab.DCTERMS_ABSTRACT, _en(rec.abstract)))
    for target in sorted(set(assembly_gupis)):
        assertion.append((gupi, vocab.CITO_CITES_AS_DATA_SOURCE, target))
    for keyword in rec.keywords:
        assertion.append((gupi, vocab.PRISM_KEYWORD, _en(keyword)))
    for author in rec.authors:
        if author.orcid is not None:
            assertion.append((gupi, vocab.PAV_AUTHORED_BY, author.orcid))
        else:
            assertion.append((gupi, vocab.PAV_AUTHORED_BY, _en(author.name)))

    provenance = _provenance_triples(
        gupi, agent=ctx.source_org_term, agent_name=ctx.source_org_name,
        agent_class=vocab.FOAF_ORGANIZATION, primary_source=ctx.article_source,
        evidence_iri=pubmed_page, when=rec.publication_date, ctx=ctx)

    pubinfo = _pubinfo_triples(
        gupi, [vocab.FABIO_JOURNAL_ARTICLE], ctx.article_source, ctx)
    return assemble(gupi, assertion, provenance, pubinfo, registry.prefixes)
