"""Shared builders for the test suite.

The reference assembly record and build context below are frozen: the
serialized nanopublication they produce is checked against the
hand-written TriG file in tests/data/, so any change here must be a
deliberate contract change.
"""

from __future__ import annotations

import json
import random
from datetime import date, datetime, timezone
from pathlib import Path

from gap.builders import (
    ArticleRecord,
    AssemblyRecord,
    BuildContext,
    OrganismRecord,
    build_article_nanopub,
    build_assembly_nanopub,
    build_organism_nanopub,
)
from gap.gateway import parse_article, parse_assembly, parse_taxon
from gap.nanopub import GupiKey, Level, Nanopub, mint_gupi
from gap.rdf import Dataset, Iri, Literal, PrefixMap, Quad
from gap.vocab import SO_0000940, VocabularyRegistry

TESTS_DIR = Path(__file__).parent
DATA_DIR = TESTS_DIR / "data"
FIXTURES_DIR = TESTS_DIR / "fixtures"
GOLDEN_TRIG = DATA_DIR / "reference_assembly.trig"

BASE = "https://nanopubs.example.org/gap/"
CURATOR = "https://orcid.org/0000-0002-1825-0097"


def reference_context() -> BuildContext:
    """The build context the frozen reference file was produced with."""
    return BuildContext(
        base=Iri(BASE),
        curator_orcids=(Iri(CURATOR),),
        software_name="genscraper",
        software_version="v1",
        software_source_iri=Iri("https://example.org/genscraper"),
        software_doi_iri=Iri("https://doi.org/10.5281/zenodo.1234567"),
        build_timestamp=datetime(2020, 5, 15, tzinfo=timezone.utc),
    )


def reference_assembly_record() -> AssemblyRecord:
    """The assembly record behind the frozen reference file."""
    return AssemblyRecord(
        accession="GCA_015033655.1",
        taxid="5693",
        assembly_level_term=SO_0000940,
        assembly_method_name="SMRT Link",
        assembly_method_version="v. 5.0.1",
        coverage="130.ox",
        sequencing_tech="PacBio Sequel; Illumina NextSeq",
        submitter_name="University of Georgia",
        submitter_kind="organization",
        submission_date=date(2020, 11, 3),
        ftp_iri=Iri("https://ftp.ncbi.nlm.nih.gov/genomes/all/GCA/015/033/655/"
                    "GCA_015033655.1_ASM1503365v1"),
        source_page_iri=Iri("https://www.ncbi.nlm.nih.gov/assembly/GCA_015033655-1"),
        is_latest=True,
        strain_name="Y done C6",
        biosample_iri=Iri("https://www.ncbi.nlm.nih.gov/biosample/SAMN12275290/"),
        bioproject_iri=Iri("https://www.ncbi.nlm.nih.gov/bioproject/PRJNA554625/"),
        wgs_master_iri=Iri("https://www.ncbi.nlm.nih.gov/nuccore/WNYY0000000.1/"),
        wgs_version="WNYY01",
    )


def reference_assembly_nanopub() -> Nanopub:
    rec = reference_assembly_record()
    ctx = reference_context()
    organism = mint_gupi(GupiKey(Level.ORGANISM, rec.taxid), ctx.base)
    return build_assembly_nanopub(rec, organism, ctx)


# -- fixture corpus -----------------------------------------------------------


def _read_json(path: Path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def load_organism_record() -> OrganismRecord:
    return parse_taxon(_read_json(FIXTURES_DIR / "taxa" / "5693.json"))


def load_assembly_record(accession: str) -> AssemblyRecord:
    doc = _read_json(FIXTURES_DIR / "assemblies" / f"{accession}.json")
    return parse_assembly(doc, registry_for_tests())


def load_article_record(pmid: str) -> ArticleRecord:
    return parse_article(_read_json(FIXTURES_DIR / "articles" / f"{pmid}.json"))


def fixture_corpus(ctx: BuildContext) -> list[Nanopub]:
    """Build the bundled desk corpus straight from the fixture documents.

    This bypasses HTTP and the pipeline on purpose, so corpus-level tests
    have a second, independent construction path to compare against."""
    registry = ctx.registry
    corpus: list[Nanopub] = []

    for path in sorted((FIXTURES_DIR / "taxa").glob("*.json")):
        rec = parse_taxon(_read_json(path))
        corpus.append(build_organism_nanopub(rec, ctx))

    for path in sorted((FIXTURES_DIR / "assemblies").glob("*.json")):
        rec = parse_assembly(_read_json(path), registry)
        organism = mint_gupi(GupiKey(Level.ORGANISM, rec.taxid), ctx.base)
        corpus.append(build_assembly_nanopub(rec, organism, ctx))

    for path in sorted((FIXTURES_DIR / "articles").glob("*.json")):
        rec = parse_article(_read_json(path))
        targets = [mint_gupi(GupiKey(Level.ASSEMBLY, acc), ctx.base)
                   for acc in rec.cited_accessions]
        corpus.append(build_article_nanopub(rec, targets, ctx))

    return corpus


# -- randomized dataset generation -------------------------------------------

PREFIX_POOL = [
    ("ex", "https://example.org/"),
    ("exv", "https://example.org/vocab/"),
    ("data", "http://data.test/items#"),
    ("geo", "https://geo.example.net/x/"),
    ("uni", "https://example.org/%C3%BC/"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
]

_WORDS = ["alpha", "beta", "gamma", "delta", "omega", "kappa", "sigma",
          "query", "strain", "contig", "sample", "page_1", "r2-d2", "x.y.z"]

NASTY_LEXICALS = [
    "",
    " ",
    "  leading and trailing  ",
    'He said "hello" twice',
    "backslash \\ and the two characters \\n",
    "line one\nline two",
    "tab\tseparated\tfields",
    "carriage\rreturn",
    "a . b ; c , d",
    "curly { braces } and <angles>",
    "@prefix inside a literal .",
    "hash # not a comment",
    "unicode: ü ñ Ω 中文 \U0001f9ec",
    "^^xsd:string lookalike",
    "ends with backslash \\",
    'closing quote " inside',
    "}",
    "GCA_015033655.1",
]

_LANGS = ["en", "en-US", "de", "pt-BR"]

_DATATYPES = [
    "http://www.w3.org/2001/XMLSchema#date",
    "http://www.w3.org/2001/XMLSchema#datetime",
    "http://www.w3.org/2001/XMLSchema#string",
    "https://types.test/custom/T",
]

_GRAPH_SUFFIXES = ["", "#Head", "#assertion", "#provenance", "#pubinfo", "#extra"]


def random_iri(rng: random.Random) -> Iri:
    style = rng.randrange(4)
    if style == 0:
        # compactable under one of the pooled namespaces
        _, ns = rng.choice(PREFIX_POOL)
        return Iri(ns + rng.choice(_WORDS))
    if style == 1:
        # never compactable: slashes in the tail
        return Iri(f"https://{rng.choice(_WORDS)}.test/{rng.choice(_WORDS)}/"
                   f"{rng.choice(_WORDS)}")
    if style == 2:
        # fragment form
        return Iri(f"https://frag.test/{rng.choice(_WORDS)}#{rng.choice(_WORDS)}")
    # unicode path segment
    return Iri(f"https://intl.test/ü/{rng.choice(_WORDS)}")


def random_literal(rng: random.Random) -> Literal:
    if rng.random() < 0.6:
        lexical = rng.choice(NASTY_LEXICALS)
    else:
        lexical = " ".join(rng.choices(_WORDS, k=rng.randint(1, 4)))
    style = rng.randrange(4)
    if style == 0:
        return Literal(lexical, language=rng.choice(_LANGS))
    if style == 1:
        return Literal(lexical, datatype=Iri(rng.choice(_DATATYPES)))
    return Literal(lexical)


def random_graph_iri(rng: random.Random) -> Iri:
    return Iri(f"https://graphs.test/{rng.choice(_WORDS)}"
               f"{rng.choice(_GRAPH_SUFFIXES)}")


def random_dataset(rng: random.Random) -> Dataset:
    prefixes = PrefixMap(
        [(label, Iri(ns))
         for label, ns in rng.sample(PREFIX_POOL, rng.randint(0, len(PREFIX_POOL)))])
    graphs = [random_graph_iri(rng) for _ in range(rng.randint(1, 4))]
    quads = []
    for _ in range(rng.randint(0, 30)):
        obj = random_literal(rng) if rng.random() < 0.5 else random_iri(rng)
        quads.append(Quad(
            subject=random_iri(rng),
            predicate=random_iri(rng),
            object=obj,
            graph=rng.choice(graphs),
        ))
    return Dataset(quads, prefixes)


def registry_for_tests() -> VocabularyRegistry:
    return VocabularyRegistry(Iri(BASE))
