"""Corpus statistics and the nanopublication quality linter.

Rules come in two groups with stable identifiers:

* NP-WF-1..4 are the structural well-formedness checks (delegated to
  nanopub.check_wellformed).
* GAP-1..5 are content rules for the three-level corpus. They only run on
  nanopublications that pass the structural checks; a broken head or empty
  graph would otherwise cascade into misleading content findings.

The literal metric counts every quad in all four graphs, head included, in
its denominator. The alternative (content graphs only) gives a noticeably
different fraction, so the choice is fixed here and documented in the
README.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import vocab
from .nanopub import Nanopub, Violation, check_wellformed
from .rdf import Iri, Literal, match_quads
from .vocab import VocabularyRegistry

STRUCTURAL_RULES = ("NP-WF-1", "NP-WF-2", "NP-WF-3", "NP-WF-4")
CONTENT_RULES = ("GAP-1", "GAP-2", "GAP-3", "GAP-4", "GAP-5")
ALL_RULES = STRUCTURAL_RULES + CONTENT_RULES

# dcterms:subject values in the publication info classify a nanopub's level.
_LEVEL_SUBJECTS = {
    vocab.SIO_010000: "organism",
    vocab.SO_0001248: "assembly",
    vocab.SIO_010055: "assembly",
    vocab.FABIO_JOURNAL_ARTICLE: "article",
}

_ATTRIBUTION_PREDICATES = (vocab.PROV_WAS_ATTRIBUTED_TO, vocab.PAV_AUTHORED_BY)
_REFERENCE_PREDICATES = (vocab.SIO_000497, vocab.CITO_CITES_AS_DATA_SOURCE)


def default_literal_allowlist(registry: VocabularyRegistry) -> frozenset[Iri]:
    """Predicates that may carry literal objects: names, free-text fields,
    version/coverage/technology strings, and dates."""
    return frozenset({
        vocab.FOAF_NAME,
        vocab.EDAM_DATA_1046,
        vocab.NCIT_C71460,
        vocab.OBI_0001939,
        vocab.EFO_0003739,
        vocab.PAV_VERSION,
        vocab.PAV_AUTHORED_BY,
        vocab.DCTERMS_DATE_SUBMITTED,
        vocab.DCTERMS_TITLE,
        vocab.DCTERMS_ABSTRACT,
        vocab.PRISM_KEYWORD,
        vocab.PRISM_PUBLICATION_DATE,
        vocab.PRISM_PUBLICATION_NAME,
        registry.TAXON_RANK,
    })


@dataclass
class QualityReport:
    nanopubs_per_level: dict[str, int] = field(default_factory=dict)
    total_nanopubs: int = 0
    total_quads: int = 0
    literal_quads: int = 0
    literal_fraction: float = 0.0
    allowlisted_literals: dict[str, int] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "stats": {
                "nanopubs_per_level": dict(sorted(self.nanopubs_per_level.items())),
                "total_nanopubs": self.total_nanopubs,
                "total_quads": self.total_quads,
                "literal_quads": self.literal_quads,
                "literal_fraction": self.literal_fraction,
                "allowlisted_literals": dict(sorted(self.allowlisted_literals.items())),
            },
            "violations": [v.to_json_dict() for v in self.violations],
        }


def classify_level(np: Nanopub) -> Optional[str]:
    subjects = [q.object for q in np.quads.graph_quads(np.pubinfo)
                if q.subject == np.uri and q.predicate == vocab.DCTERMS_SUBJECT]
    for subject in subjects:
        level = _LEVEL_SUBJECTS.get(subject)
        if level:
            return level
    return None


def corpus_stats(corpus: Iterable[Nanopub],
                 registry: Optional[VocabularyRegistry] = None) -> QualityReport:
    """Count nanopubs per level and measure the literal-object quad share."""
    registry = registry or VocabularyRegistry()
    allowlist = default_literal_allowlist(registry)
    report = QualityReport()
    per_level: dict[str, int] = {}
    allow_counts: dict[str, int] = {}

    for np in corpus:
        report.total_nanopubs += 1
        level = classify_level(np) or "unclassified"
        per_level[level] = per_level.get(level, 0) + 1
        for quad in np.quads:
            report.total_quads += 1
            if isinstance(quad.object, Literal):
                report.literal_quads += 1
                if quad.predicate in allowlist:
                    label = registry.compact(quad.predicate)
                    allow_counts[label] = allow_counts.get(label, 0) + 1

    report.nanopubs_per_level = per_level
    report.allowlisted_literals = allow_counts
    if report.total_quads:
        report.literal_fraction = report.literal_quads / report.total_quads
    return report


def _check_attribution(np: Nanopub) -> list[Violation]:
    """GAP-1: the assertion is attributed, and not to the nanopub creators."""
    prov = np.quads.graph_quads(np.provenance)
    attributed = {q.object for q in prov
                  if q.subject == np.assertion
                  and q.predicate in _ATTRIBUTION_PREDICATES}
    if not attributed:
        return [Violation("GAP-1", np.uri,
                          "assertion has no attribution in the provenance graph")]
    pub = np.quads.graph_quads(np.pubinfo)
    creators = {q.object for q in pub
                if q.subject == np.uri
                and q.predicate == vocab.PROV_WAS_ATTRIBUTED_TO}
    overlap = attributed & creators
    if overlap:
        names = ", ".join(sorted(str(t) for t in overlap))
        return [Violation("GAP-1", np.uri,
                          f"assertion attribution coincides with nanopub creators: {names}")]
    return []


def _check_subject_tag(np: Nanopub) -> list[Violation]:
    """GAP-2: publication info carries at least one dcterms:subject."""
    pub = np.quads.graph_quads(np.pubinfo)
    if any(q.subject == np.uri and q.predicate == vocab.DCTERMS_SUBJECT
           for q in pub):
        return []
    return [Violation("GAP-2", np.uri,
                      "publication info lacks a dcterms:subject tag")]


def _check_date_uris(np: Nanopub, registry: VocabularyRegistry) -> list[Violation]:
    """GAP-3: every dateSubmitted literal travels with the three date IRIs."""
    violations = []
    day, month, year = (registry.CREATION_DAY, registry.CREATION_MONTH,
                        registry.CREATION_YEAR)
    for quad in np.quads:
        if quad.predicate != vocab.DCTERMS_DATE_SUBMITTED:
            continue
        siblings = {q.predicate for q in np.quads
                    if q.graph == quad.graph and q.subject == quad.subject}
        missing = [p for p in (day, month, year) if p not in siblings]
        if missing:
            names = ", ".join(registry.compact(p) for p in missing)
            violations.append(Violation(
                "GAP-3", np.uri,
                f"dateSubmitted on {quad.subject} lacks date IRI(s): {names}",
                (quad,)))
    return violations


def _check_literal_allowlist(np: Nanopub, allowlist: frozenset,
                             registry: VocabularyRegistry) -> list[Violation]:
    """GAP-4: literal objects appear only under allowlisted predicates."""
    violations = []
    for quad in np.quads:
        if isinstance(quad.object, Literal) and quad.predicate not in allowlist:
            violations.append(Violation(
                "GAP-4", np.uri,
                f"literal under non-allowlisted predicate "
                f"{registry.compact(quad.predicate)}", (quad,)))
    return violations


def _check_references(np: Nanopub, resolvable) -> list[Violation]:
    """GAP-5: organism links and citation targets resolve in the corpus."""
    violations = []
    for quad in np.quads:
        if quad.predicate in _REFERENCE_PREDICATES and isinstance(quad.object, Iri):
            if not resolvable(quad.object):
                violations.append(Violation(
                    "GAP-5", np.uri,
                    f"cross-level reference does not resolve: {quad.object}",
                    (quad,)))
    return violations


def lint(corpus: Sequence[Nanopub], registry: Optional[VocabularyRegistry] = None,
         rules: Optional[Iterable[str]] = None,
         allowlist: Optional[frozenset] = None,
         store=None) -> list[Violation]:
    """Run the selected rules over a corpus and return sorted violations.

    `store` (anything with an ``exists(Iri) -> bool``) widens GAP-5
    resolution beyond the in-memory corpus.
    """
    registry = registry or VocabularyRegistry()
    if allowlist is None:
        allowlist = default_literal_allowlist(registry)
    enabled = set(ALL_RULES if rules is None else rules)
    unknown = enabled - set(ALL_RULES)
    if unknown:
        raise ValueError(f"unknown rule id(s): {', '.join(sorted(unknown))}")

    corpus = list(corpus)
    gupis = {np.uri for np in corpus}

    def resolvable(target: Iri) -> bool:
        if target in gupis:
            return True
        return store.exists(target) if store is not None else False

    violations: list[Violation] = []
    for np in corpus:
        structural = check_wellformed(np)
        violations.extend(v for v in structural if v.rule in enabled)
        if structural:
            continue  # content rules assume a sound structure
        if "GAP-1" in enabled:
            violations.extend(_check_attribution(np))
        if "GAP-2" in enabled:
            violations.extend(_check_subject_tag(np))
        if "GAP-3" in enabled:
            violations.extend(_check_date_uris(np, registry))
        if "GAP-4" in enabled:
            violations.extend(_check_literal_allowlist(np, allowlist, registry))
        if "GAP-5" in enabled:
            violations.extend(_check_references(np, resolvable))

    violations.sort(key=lambda v: (v.rule, v.nanopub.value, v.message))
    return violations


def evaluate(corpus: Sequence[Nanopub],
             registry: Optional[VocabularyRegistry] = None,
             rules: Optional[Iterable[str]] = None,
             allowlist: Optional[frozenset] = None,
             store=None) -> QualityReport:
    """Stats plus lint findings in one report."""
    corpus = list(corpus)
    report = corpus_stats(corpus, registry)
    report.violations = lint(corpus, registry, rules, allowlist, store)
    return report


def render_text(report: QualityReport) -> str:
    """Human-readable rendering of a quality report."""
    lines = ["corpus:"]
    for level in ("organism", "assembly", "article"):
        count = report.nanopubs_per_level.get(level, 0)
        lines.append(f"  {level:<9} {count}")
    extra = {k: v for k, v in report.nanopubs_per_level.items()
             if k not in ("organism", "assembly", "article")}
    for level, count in sorted(extra.items()):
        lines.append(f"  {level:<9} {count}")
    lines.append(f"  quads     {report.total_quads}")
    lines.append(f"  literals  {report.literal_quads} "
                 f"({report.literal_fraction:.2%} of quads)")
    if report.violations:
        lines.append(f"violations ({len(report.violations)}):")
        for v in report.violations:
            lines.append(f"  [{v.rule}] {v.nanopub} {v.message}")
    else:
        lines.append("violations: none")
    return "\n".join(lines) + "\n"
