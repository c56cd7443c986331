"""Genome assembly nanopublications: model, builders, store, and checks.

The package builds linked nanopublications for organisms, their genome
assemblies, and the articles citing those assemblies, serializes them as
deterministic TriG, and keeps them in a file-backed store with an
integrity-checked index.
"""

from .builders import (
    ArticleRecord,
    AssemblyRecord,
    Author,
    BuildContext,
    BuildError,
    OrganismRecord,
    build_article_nanopub,
    build_assembly_nanopub,
    build_organism_nanopub,
)
from .nanopub import (
    GupiKey,
    InvalidKey,
    Level,
    Nanopub,
    NanopubError,
    Violation,
    assemble,
    check_wellformed,
    classify_gupi,
    from_dataset,
    mint_gupi,
)
from .quality import (
    ALL_RULES,
    QualityReport,
    corpus_stats,
    evaluate,
    lint,
)
from .rdf import (
    BlankNodeUnsupported,
    Dataset,
    Iri,
    Literal,
    ParseError,
    PrefixMap,
    Quad,
    RdfError,
    compact,
    make_iri,
    match_quads,
    parse_trig,
    serialize_trig,
)
from .store import NanopubStore, PutResult, StoreError
from .vocab import DEFAULT_BASE, VocabularyRegistry

__version__ = "0.1.0"

__all__ = [
    "ALL_RULES",
    "ArticleRecord",
    "AssemblyRecord",
    "Author",
    "BlankNodeUnsupported",
    "BuildContext",
    "BuildError",
    "Dataset",
    "DEFAULT_BASE",
    "GupiKey",
    "InvalidKey",
    "Iri",
    "Level",
    "Literal",
    "Nanopub",
    "NanopubError",
    "NanopubStore",
    "OrganismRecord",
    "ParseError",
    "PrefixMap",
    "PutResult",
    "Quad",
    "QualityReport",
    "RdfError",
    "StoreError",
    "Violation",
    "VocabularyRegistry",
    "assemble",
    "build_article_nanopub",
    "build_assembly_nanopub",
    "build_organism_nanopub",
    "check_wellformed",
    "classify_gupi",
    "compact",
    "corpus_stats",
    "evaluate",
    "from_dataset",
    "lint",
    "make_iri",
    "match_quads",
    "mint_gupi",
    "parse_trig",
    "serialize_trig",
    "__version__",
]
