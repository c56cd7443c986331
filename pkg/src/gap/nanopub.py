"""Nanopublication model: minting, assembly, and structural checks.

A nanopublication is one IRI plus four named graphs (head, assertion,
provenance, publication info). The graph names are derived from the
nanopublication IRI by fragment suffixing, so a file holding the four
graphs is self-describing.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from . import vocab
from .rdf import Dataset, Iri, Literal, PrefixMap, Quad, Term
from .vocab import normalize_base


class NanopubError(Exception):
    pass


class InvalidKey(NanopubError):
    pass


class AssemblyError(NanopubError):
    pass


class EmptyAssertion(AssemblyError):
    pass


class ProvenanceDoesNotReferenceAssertion(AssemblyError):
    pass


class PubinfoDoesNotReferenceNanopub(AssemblyError):
    pass


class Level(enum.Enum):
    ORGANISM = "organism"
    ASSEMBLY = "assembly"
    ARTICLE = "article"


_KEY_PATTERNS = {
    Level.ORGANISM: re.compile(r"^\d+$"),
    Level.ASSEMBLY: re.compile(r"^GC[AF]_\d+(\.\d+)?$"),
    Level.ARTICLE: re.compile(r"^\d+$"),
}

HEAD_SUFFIX = "#Head"
ASSERTION_SUFFIX = "#assertion"
PROVENANCE_SUFFIX = "#provenance"
PUBINFO_SUFFIX = "#pubinfo"

_GUPI_RE = re.compile(r"/(organism|assembly|article)/([^/#?]+)$")


@dataclass(frozen=True)
class GupiKey:
    """A (level, key) pair identifying one instance at one level."""

    level: Level
    key: str

    def __post_init__(self):
        pattern = _KEY_PATTERNS[self.level]
        if not pattern.match(self.key):
            raise InvalidKey(f"bad {self.level.value} key: {self.key!r}")


def sanitize_key(key: str) -> str:
    """Dots are not allowed in the IRI leaf; they become dashes."""
    return key.replace(".", "-")


def mint_gupi(key: GupiKey, base) -> Iri:
    """Mint the globally unique persistent identifier for `key` under `base`."""
    base_iri = normalize_base(base)
    return Iri(f"{base_iri.value}{key.level.value}/{sanitize_key(key.key)}")


def classify_gupi(iri: Iri) -> Optional[tuple[Level, str]]:
    """Recover (level, key) from a minted IRI, or None if it is not one."""
    m = _GUPI_RE.search(iri.value)
    if not m:
        return None
    level = Level(m.group(1))
    return (level, m.group(2))


def head_graph(uri: Iri) -> Iri:
    return Iri(uri.value + HEAD_SUFFIX)


def assertion_graph(uri: Iri) -> Iri:
    return Iri(uri.value + ASSERTION_SUFFIX)


def provenance_graph(uri: Iri) -> Iri:
    return Iri(uri.value + PROVENANCE_SUFFIX)


def pubinfo_graph(uri: Iri) -> Iri:
    return Iri(uri.value + PUBINFO_SUFFIX)


@dataclass(frozen=True)
class Nanopub:
    uri: Iri
    quads: Dataset

    @property
    def head(self) -> Iri:
        return head_graph(self.uri)

    @property
    def assertion(self) -> Iri:
        return assertion_graph(self.uri)

    @property
    def provenance(self) -> Iri:
        return provenance_graph(self.uri)

    @property
    def pubinfo(self) -> Iri:
        return pubinfo_graph(self.uri)


@dataclass(frozen=True)
class Violation:
    """One failed check, tied to a rule id and the nanopub it concerns."""

    rule: str
    nanopub: Iri
    message: str
    quads: tuple[Quad, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "rule": self.rule,
            "nanopub": self.nanopub.value,
            "message": self.message,
            "quads": [quad_to_json(q) for q in self.quads],
        }


def term_to_json(term: Term) -> dict:
    if isinstance(term, Iri):
        return {"type": "iri", "value": term.value}
    doc = {"type": "literal", "value": term.lexical}
    if term.language is not None:
        doc["language"] = term.language
    elif term.datatype is not None:
        doc["datatype"] = term.datatype.value
    return doc


def quad_to_json(quad: Quad) -> dict:
    return {
        "subject": quad.subject.value,
        "predicate": quad.predicate.value,
        "object": term_to_json(quad.object),
        "graph": quad.graph.value,
    }


TripleLike = Union[Quad, Sequence]


def _coerce_triples(items: Iterable[TripleLike]) -> list[tuple[Iri, Iri, Term]]:
    out = []
    for item in items:
        if isinstance(item, Quad):
            out.append((item.subject, item.predicate, item.object))
            continue
        s, p, o = item
        out.append((s, p, o))
    return out


def assemble(uri: Iri, assertion: Iterable[TripleLike],
             provenance: Iterable[TripleLike], pubinfo: Iterable[TripleLike],
             prefixes: Optional[PrefixMap] = None) -> Nanopub:
    """Build a nanopublication from its three content graphs.

    The head graph is generated, and all input triples are re-homed to the
    canonical graph names derived from `uri`. Raises when the assertion is
    empty, when the provenance never mentions the assertion graph, or when
    the publication info never mentions the nanopublication itself.
    """
    a_graph = assertion_graph(uri)
    p_graph = provenance_graph(uri)
    i_graph = pubinfo_graph(uri)
    h_graph = head_graph(uri)

    assertion_triples = _coerce_triples(assertion)
    provenance_triples = _coerce_triples(provenance)
    pubinfo_triples = _coerce_triples(pubinfo)

    if not assertion_triples:
        raise EmptyAssertion(f"assertion graph of {uri} is empty")
    if not any(s == a_graph for s, _, _ in provenance_triples):
        raise ProvenanceDoesNotReferenceAssertion(
            f"provenance of {uri} never mentions its assertion graph")
    if not any(s == uri for s, _, _ in pubinfo_triples):
        raise PubinfoDoesNotReferenceNanopub(
            f"publication info of {uri} never mentions the nanopublication")

    quads = [
        Quad(uri, vocab.NP_HAS_ASSERTION, a_graph, h_graph),
        Quad(uri, vocab.NP_HAS_PROVENANCE, p_graph, h_graph),
        Quad(uri, vocab.NP_HAS_PUBLICATION_INFO, i_graph, h_graph),
        Quad(uri, vocab.RDF_TYPE, vocab.NP_NANOPUBLICATION, h_graph),
    ]
    quads += [Quad(s, p, o, a_graph) for s, p, o in assertion_triples]
    quads += [Quad(s, p, o, p_graph) for s, p, o in provenance_triples]
    quads += [Quad(s, p, o, i_graph) for s, p, o in pubinfo_triples]

    return Nanopub(uri=uri, quads=Dataset(quads, prefixes))


def from_dataset(dataset: Dataset) -> Nanopub:
    """Reconstruct a single nanopublication from a parsed dataset.

    The nanopublication IRI is the subject of the head graph's
    np:hasAssertion quad.
    """
    candidates = [q for q in dataset if q.predicate == vocab.NP_HAS_ASSERTION
                  and q.graph.value.endswith(HEAD_SUFFIX)]
    if len(candidates) != 1:
        raise NanopubError(
            f"expected exactly one head assertion link, found {len(candidates)}")
    return Nanopub(uri=candidates[0].subject, quads=dataset)


def expected_head(np: Nanopub) -> frozenset:
    h = np.head
    return frozenset({
        Quad(np.uri, vocab.NP_HAS_ASSERTION, np.assertion, h),
        Quad(np.uri, vocab.NP_HAS_PROVENANCE, np.provenance, h),
        Quad(np.uri, vocab.NP_HAS_PUBLICATION_INFO, np.pubinfo, h),
        Quad(np.uri, vocab.RDF_TYPE, vocab.NP_NANOPUBLICATION, h),
    })


def check_wellformed(np: Nanopub) -> list[Violation]:
    """Structural checks; returns a list of violations, empty when clean.

    NP-WF-1  head holds exactly the four linking triples
    NP-WF-2  provenance says something about the assertion graph
    NP-WF-3  publication info says something about the nanopublication
    NP-WF-4  assertion graph is non-empty
    """
    violations = []
    known_graphs = {np.head, np.assertion, np.provenance, np.pubinfo}

    head_quads = frozenset(np.quads.graph_quads(np.head))
    expected = expected_head(np)
    if head_quads != expected:
        unexpected = sorted(head_quads - expected, key=lambda q: q.predicate.value)
        missing = sorted(expected - head_quads, key=lambda q: q.predicate.value)
        parts = []
        if missing:
            parts.append(f"{len(missing)} required head triple(s) missing")
        if unexpected:
            parts.append(f"{len(unexpected)} unexpected head triple(s)")
        violations.append(Violation(
            "NP-WF-1", np.uri, "head must hold exactly the four linking triples: "
            + ", ".join(parts), tuple(unexpected + missing)))

    stray = [q for q in np.quads if q.graph not in known_graphs]
    if stray:
        violations.append(Violation(
            "NP-WF-1", np.uri,
            f"{len(stray)} quad(s) outside the four nanopublication graphs",
            tuple(stray)))

    if not np.quads.graph_quads(np.assertion):
        violations.append(Violation(
            "NP-WF-4", np.uri, "assertion graph is empty"))

    prov = np.quads.graph_quads(np.provenance)
    if not any(q.subject == np.assertion for q in prov):
        violations.append(Violation(
            "NP-WF-2", np.uri, "provenance never references the assertion graph"))

    pub = np.quads.graph_quads(np.pubinfo)
    if not any(q.subject == np.uri for q in pub):
        violations.append(Violation(
            "NP-WF-3", np.uri, "publication info never references the nanopublication"))

    return violations


def triple_count(np: Nanopub) -> int:
    """Total quads across all four graphs, head included."""
    return len(np.quads)
