"""Closed vocabulary registry for the nanopublication builders.

Every term IRI the builders may emit is declared here as a named constant,
either at module level (terms from published ontologies) or on the registry
instance (terms minted under the deployment's own base IRI, such as the
date-URI predicates). Builders never spell out a term IRI inline; that is
what keeps the emitted vocabulary auditable.

A handful of term identifiers below do not match the current releases of
their ontologies (for example eco:000901 and the six-digit NCIT-style
codes). They are registered exactly as the upstream data uses them so the
output stays faithful to the source convention; each lives behind a single
constant, so correcting one later is a one-line change.
"""

from __future__ import annotations

from .rdf import Iri, PrefixMap, UnknownPrefix, compact, make_iri

DEFAULT_BASE = "https://nanopubs.example.org/gap/"

# Namespace IRIs (canonical published bases).
SIO_NS = "http://semanticscience.org/resource/"
NCIT_NS = "http://purl.obolibrary.org/obo/NCIT_"
EDAM_NS = "http://edamontology.org/"
PATO_NS = "http://purl.obolibrary.org/obo/PATO_"
SO_NS = "http://purl.obolibrary.org/obo/SO_"
FBCV_NS = "http://purl.obolibrary.org/obo/FBcv_"
ECO_NS = "http://purl.obolibrary.org/obo/ECO_"
OBI_NS = "http://purl.obolibrary.org/obo/OBI_"
EFO_NS = "http://www.ebi.ac.uk/efo/"
NP_NS = "http://www.nanopub.org/nschema#"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
PROV_NS = "http://www.w3.org/ns/prov#"
PAV_NS = "http://purl.org/pav/"
DCTERMS_NS = "http://purl.org/dc/terms/"
PRISM_NS = "http://prismstandard.org/namespaces/basic/2.0/"
CITO_NS = "http://purl.org/spar/cito/"
FABIO_NS = "http://purl.org/spar/fabio/"
DATACITE_NS = "http://purl.org/spar/datacite/"
FOAF_NS = "http://xmlns.com/foaf/0.1/"
ORCID_NS = "https://orcid.org/"
NCBI_ASSEMBLY_NS = "https://www.ncbi.nlm.nih.gov/assembly/"

# Nanopublication structure.
NP_NANOPUBLICATION = Iri(NP_NS + "Nanopublication")
NP_HAS_ASSERTION = Iri(NP_NS + "hasAssertion")
NP_HAS_PROVENANCE = Iri(NP_NS + "hasProvenance")
NP_HAS_PUBLICATION_INFO = Iri(NP_NS + "hasPublicationInfo")

RDF_TYPE = Iri(RDF_NS + "type")
# The source convention types secondary entities with an rdfs-namespaced
# "type" property rather than rdf:type; kept as its own constant.
RDFS_TYPE = Iri(RDFS_NS + "type")

XSD_STRING = Iri(XSD_NS + "string")
# Lowercase "datetime" follows the source data; xsd:dateTime is the W3C name.
XSD_DATETIME = Iri(XSD_NS + "datetime")

# PROV-O / PAV provenance terms.
PROV_ENTITY = Iri(PROV_NS + "Entity")
PROV_ACTIVITY = Iri(PROV_NS + "Activity")
PROV_AGENT = Iri(PROV_NS + "Agent")
PROV_SOFTWARE_AGENT = Iri(PROV_NS + "softwareAgent")
PROV_WAS_GENERATED_BY = Iri(PROV_NS + "wasGeneratedBy")
PROV_WAS_ATTRIBUTED_TO = Iri(PROV_NS + "wasAttributedTo")
PROV_WAS_DERIVED_FROM = Iri(PROV_NS + "wasDerivedFrom")
PROV_WAS_ASSOCIATED_WITH = Iri(PROV_NS + "wasAssociatedWith")
PROV_HAD_PRIMARY_SOURCE = Iri(PROV_NS + "hadPrimarySource")

PAV_CURATED_BY = Iri(PAV_NS + "curatedBy")
PAV_CREATED_BY = Iri(PAV_NS + "createdBy")
PAV_AUTHORED_BY = Iri(PAV_NS + "authoredBy")
PAV_VERSION = Iri(PAV_NS + "version")
PAV_LATEST_VERSION = Iri(PAV_NS + "latest_version")

# Dublin Core terms.
DCTERMS_IDENTIFIER = Iri(DCTERMS_NS + "identifier")
DCTERMS_SUBJECT = Iri(DCTERMS_NS + "subject")
DCTERMS_SOURCE = Iri(DCTERMS_NS + "source")
DCTERMS_DATASET = Iri(DCTERMS_NS + "dataset")
DCTERMS_ACCESS_RIGHTS = Iri(DCTERMS_NS + "accessRights")
DCTERMS_DATE_SUBMITTED = Iri(DCTERMS_NS + "dateSubmitted")
DCTERMS_CREATED = Iri(DCTERMS_NS + "created")
DCTERMS_TITLE = Iri(DCTERMS_NS + "title")
DCTERMS_ABSTRACT = Iri(DCTERMS_NS + "abstract")

# Bibliographic terms.
PRISM_KEYWORD = Iri(PRISM_NS + "keyword")
PRISM_PUBLICATION_DATE = Iri(PRISM_NS + "publicationDate")
PRISM_PUBLICATION_NAME = Iri(PRISM_NS + "publicationName")
CITO_CITES_AS_DATA_SOURCE = Iri(CITO_NS + "citesAsDataSource")
FABIO_JOURNAL_ARTICLE = Iri(FABIO_NS + "JournalArticle")
DATACITE_PMID = Iri(DATACITE_NS + "pmid")
DATACITE_DOI = Iri(DATACITE_NS + "doi")

# FOAF agents; lowercase "organization" follows the source convention.
FOAF_NAME = Iri(FOAF_NS + "name")
FOAF_ORGANIZATION = Iri(FOAF_NS + "organization")
FOAF_PERSON = Iri(FOAF_NS + "Person")

# Biology / genomics terms.
SIO_000628 = Iri(SIO_NS + "SIO_000628")  # refers to (typing and cross-nanopub links)
SIO_000497 = Iri(SIO_NS + "SIO_000497")  # strain -> organism nanopub reference
SIO_010055 = Iri(SIO_NS + "SIO_010055")  # strain
SIO_010000 = Iri(SIO_NS + "SIO_010000")  # organism

EDAM_DATA_2292 = Iri(EDAM_NS + "data_2292")  # GenBank accession
EDAM_DATA_0925 = Iri(EDAM_NS + "data_0925")  # sequence assembly record
EDAM_DATA_3273 = Iri(EDAM_NS + "data_3273")  # biosample link
EDAM_DATA_1046 = Iri(EDAM_NS + "data_1046")  # strain name
EDAM_DATA_1188 = Iri(EDAM_NS + "data_1188")  # DOI link

NCIT_C45799 = Iri(NCIT_NS + "C45799")    # NCBI (organization)
NCIT_C475890 = Iri(NCIT_NS + "C475890")  # bioproject link
NCIT_C25554 = Iri(NCIT_NS + "C25554")    # assembly level
NCIT_C71460 = Iri(NCIT_NS + "C71460")    # assembly method
NCIT_C101294 = Iri(NCIT_NS + "C101294")  # whole genome sequencing
NCIT_C122473 = Iri(NCIT_NS + "C122473")  # data curator group

SO_0001248 = Iri(SO_NS + "0001248")  # assembly
SO_0000940 = Iri(SO_NS + "0000940")  # assembly level value
FBCV_0003237 = Iri(FBCV_NS + "0003237")  # genome assembly activity
OBI_0001939 = Iri(OBI_NS + "0001939")    # sequencing coverage
EFO_0003739 = Iri(EFO_NS + "EFO_0003739")  # sequencing technology
ECO_000203 = Iri(ECO_NS + "000203")  # automatic assertion
ECO_000901 = Iri(ECO_NS + "000901")  # evidence page link

NCBI_NAME = "NCBI - National Center for Biotechnology Information"

_FIXED_MODULE_TERMS = {
    "NP_NANOPUBLICATION": NP_NANOPUBLICATION,
    "NP_HAS_ASSERTION": NP_HAS_ASSERTION,
    "NP_HAS_PROVENANCE": NP_HAS_PROVENANCE,
    "NP_HAS_PUBLICATION_INFO": NP_HAS_PUBLICATION_INFO,
    "RDF_TYPE": RDF_TYPE,
    "RDFS_TYPE": RDFS_TYPE,
    "XSD_STRING": XSD_STRING,
    "XSD_DATETIME": XSD_DATETIME,
    "PROV_ENTITY": PROV_ENTITY,
    "PROV_ACTIVITY": PROV_ACTIVITY,
    "PROV_AGENT": PROV_AGENT,
    "PROV_SOFTWARE_AGENT": PROV_SOFTWARE_AGENT,
    "PROV_WAS_GENERATED_BY": PROV_WAS_GENERATED_BY,
    "PROV_WAS_ATTRIBUTED_TO": PROV_WAS_ATTRIBUTED_TO,
    "PROV_WAS_DERIVED_FROM": PROV_WAS_DERIVED_FROM,
    "PROV_WAS_ASSOCIATED_WITH": PROV_WAS_ASSOCIATED_WITH,
    "PROV_HAD_PRIMARY_SOURCE": PROV_HAD_PRIMARY_SOURCE,
    "PAV_CURATED_BY": PAV_CURATED_BY,
    "PAV_CREATED_BY": PAV_CREATED_BY,
    "PAV_AUTHORED_BY": PAV_AUTHORED_BY,
    "PAV_VERSION": PAV_VERSION,
    "PAV_LATEST_VERSION": PAV_LATEST_VERSION,
    "DCTERMS_IDENTIFIER": DCTERMS_IDENTIFIER,
    "DCTERMS_SUBJECT": DCTERMS_SUBJECT,
    "DCTERMS_SOURCE": DCTERMS_SOURCE,
    "DCTERMS_DATASET": DCTERMS_DATASET,
    "DCTERMS_ACCESS_RIGHTS": DCTERMS_ACCESS_RIGHTS,
    "DCTERMS_DATE_SUBMITTED": DCTERMS_DATE_SUBMITTED,
    "DCTERMS_CREATED": DCTERMS_CREATED,
    "DCTERMS_TITLE": DCTERMS_TITLE,
    "DCTERMS_ABSTRACT": DCTERMS_ABSTRACT,
    "PRISM_KEYWORD": PRISM_KEYWORD,
    "PRISM_PUBLICATION_DATE": PRISM_PUBLICATION_DATE,
    "PRISM_PUBLICATION_NAME": PRISM_PUBLICATION_NAME,
    "CITO_CITES_AS_DATA_SOURCE": CITO_CITES_AS_DATA_SOURCE,
    "FABIO_JOURNAL_ARTICLE": FABIO_JOURNAL_ARTICLE,
    "DATACITE_PMID": DATACITE_PMID,
    "DATACITE_DOI": DATACITE_DOI,
    "FOAF_NAME": FOAF_NAME,
    "FOAF_ORGANIZATION": FOAF_ORGANIZATION,
    "FOAF_PERSON": FOAF_PERSON,
    "SIO_000628": SIO_000628,
    "SIO_000497": SIO_000497,
    "SIO_010055": SIO_010055,
    "SIO_010000": SIO_010000,
    "EDAM_DATA_2292": EDAM_DATA_2292,
    "EDAM_DATA_0925": EDAM_DATA_0925,
    "EDAM_DATA_3273": EDAM_DATA_3273,
    "EDAM_DATA_1046": EDAM_DATA_1046,
    "EDAM_DATA_1188": EDAM_DATA_1188,
    "NCIT_C45799": NCIT_C45799,
    "NCIT_C475890": NCIT_C475890,
    "NCIT_C25554": NCIT_C25554,
    "NCIT_C71460": NCIT_C71460,
    "NCIT_C101294": NCIT_C101294,
    "NCIT_C122473": NCIT_C122473,
    "SO_0001248": SO_0001248,
    "SO_0000940": SO_0000940,
    "FBCV_0003237": FBCV_0003237,
    "OBI_0001939": OBI_0001939,
    "EFO_0003739": EFO_0003739,
    "ECO_000203": ECO_000203,
    "ECO_000901": ECO_000901,
}


def normalize_base(base) -> Iri:
    """Coerce `base` to an Iri ending in '/' so minted IRIs join cleanly."""
    iri = base if isinstance(base, Iri) else make_iri(base)
    if not iri.value.endswith("/"):
        iri = Iri(iri.value + "/")
    return iri


class VocabularyRegistry:
    """All namespaces and term IRIs available to the builders.

    The registry is parameterized by the deployment's base IRI: the date-URI
    namespace, the local vocabulary namespace and the per-level
    nanopublication namespaces all live under it.
    """

    def __init__(self, base=DEFAULT_BASE):
        self.base = normalize_base(base)
        b = self.base.value
        self.npubdate_ns = Iri(b + "date/")
        self.local_vocab_ns = Iri(b + "vocab/")

        self.prefixes = PrefixMap()
        for label, namespace in [
            ("gap", b),
            ("org_npub", b + "organism/"),
            ("asb_npub", b + "assembly/"),
            ("art_npub", b + "article/"),
            ("npubDate", self.npubdate_ns.value),
            ("gapv", self.local_vocab_ns.value),
            ("np", NP_NS),
            ("rdf", RDF_NS),
            ("rdfs", RDFS_NS),
            ("xsd", XSD_NS),
            ("prov", PROV_NS),
            ("pav", PAV_NS),
            ("dcterms", DCTERMS_NS),
            ("foaf", FOAF_NS),
            ("sio", SIO_NS),
            ("ncit", NCIT_NS),
            ("edam", EDAM_NS),
            ("pato", PATO_NS),
            ("so", SO_NS),
            ("fbcv", FBCV_NS),
            ("eco", ECO_NS),
            ("obi", OBI_NS),
            ("efo", EFO_NS),
            ("prism", PRISM_NS),
            ("cito", CITO_NS),
            ("fabio", FABIO_NS),
            ("data", DATACITE_NS),
            ("orcid", ORCID_NS),
            ("ncbi_asbID", NCBI_ASSEMBLY_NS),
        ]:
            self.prefixes.add(label, Iri(namespace))

        # Date predicates are deployment-local, like the date instance IRIs
        # they accompany.
        self.CREATION_DAY = Iri(self.npubdate_ns.value + "creationDay")
        self.CREATION_MONTH = Iri(self.npubdate_ns.value + "creationMonth")
        self.CREATION_YEAR = Iri(self.npubdate_ns.value + "creationYear")
        self.PUBLICATION_DAY = Iri(self.npubdate_ns.value + "publicationDay")
        self.PUBLICATION_MONTH = Iri(self.npubdate_ns.value + "publicationMonth")
        self.PUBLICATION_YEAR = Iri(self.npubdate_ns.value + "publicationYear")
        # No published vocabulary in the registry offers a taxon-rank
        # property, so it is minted locally.
        self.TAXON_RANK = Iri(self.local_vocab_ns.value + "taxonRank")

        self._terms = dict(_FIXED_MODULE_TERMS)
        self._terms.update({
            "CREATION_DAY": self.CREATION_DAY,
            "CREATION_MONTH": self.CREATION_MONTH,
            "CREATION_YEAR": self.CREATION_YEAR,
            "PUBLICATION_DAY": self.PUBLICATION_DAY,
            "PUBLICATION_MONTH": self.PUBLICATION_MONTH,
            "PUBLICATION_YEAR": self.PUBLICATION_YEAR,
            "TAXON_RANK": self.TAXON_RANK,
        })
        self._term_iris = frozenset(self._terms.values())

    def lookup(self, label: str, local: str) -> Iri:
        """Expand a prefixed name; raises UnknownPrefix for unknown labels."""
        namespace = self.prefixes.get(label)
        if namespace is None:
            raise UnknownPrefix(label)
        return Iri(namespace.value + local)

    def expand(self, text: str) -> Iri:
        """Resolve `<iri>`, an absolute IRI, or a prefixed name to an Iri."""
        text = text.strip()
        if text.startswith("<") and text.endswith(">"):
            return make_iri(text[1:-1])
        if "://" in text or text.startswith("urn:"):
            return make_iri(text)
        if ":" in text:
            label, local = text.split(":", 1)
            return self.lookup(label, local)
        raise UnknownPrefix(text)

    def compact(self, iri: Iri) -> str:
        return compact(iri, self.prefixes)

    def terms(self) -> dict[str, Iri]:
        return dict(self._terms)

    def is_term(self, iri: Iri) -> bool:
        return iri in self._term_iris

    def ontology_namespaces(self) -> list[str]:
        """Namespaces whose IRIs are vocabulary terms (not data instances)."""
        return [
            SIO_NS, NCIT_NS, EDAM_NS, PATO_NS, SO_NS, FBCV_NS, ECO_NS, OBI_NS,
            EFO_NS, NP_NS, RDF_NS, RDFS_NS, XSD_NS, PROV_NS, PAV_NS,
            DCTERMS_NS, PRISM_NS, CITO_NS, FABIO_NS, DATACITE_NS, FOAF_NS,
            self.npubdate_ns.value + "creation", self.npubdate_ns.value + "publication",
            self.local_vocab_ns.value,
        ]

    def to_json(self) -> dict[str, str]:
        """Label -> namespace map, for documentation exports."""
        return {label: ns.value for label, ns in self.prefixes.items()}
