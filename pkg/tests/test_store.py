import json

import pytest

import helpers
from gap.nanopub import GupiKey, Level, Nanopub, assemble, assertion_graph, mint_gupi
from gap.rdf import Dataset, Iri, Literal, Quad, serialize_trig
from gap.store import (
    ConflictError,
    IndexCorrupt,
    MalformedNanopub,
    NanopubStore,
    NotFound,
    PutResult,
    StoreError,
)
from gap.vocab import DCTERMS_TITLE


def ex(local: str) -> Iri:
    return Iri("https://example.org/" + local)


def small_nanopub(key: str = "5693", level: Level = Level.ORGANISM,
                  marker: str = "x") -> Nanopub:
    uri = mint_gupi(GupiKey(level, key), helpers.BASE)
    return assemble(
        uri,
        [(uri, DCTERMS_TITLE, Literal(marker))],
        [(assertion_graph(uri), ex("attributedTo"), ex("agent"))],
        [(uri, ex("createdBy"), ex("someone"))],
    )


class TestPut:
    def test_stores_one_trig_file_per_nanopub(self, store):
        np = helpers.reference_assembly_nanopub()
        assert store.put(np) is PutResult.STORED
        path = store.directory / "assembly" / "GCA_015033655-1.trig"
        assert path.is_file()
        assert path.read_text(encoding="utf-8") == serialize_trig(np.quads)

    def test_put_is_idempotent(self, store):
        np = small_nanopub()
        assert store.put(np) is PutResult.STORED
        assert store.put(np) is PutResult.ALREADY_PRESENT
        assert len(store.list()) == 1

    def test_same_gupi_different_content_conflicts(self, store):
        store.put(small_nanopub(marker="first"))
        with pytest.raises(ConflictError):
            store.put(small_nanopub(marker="second"))

    def test_malformed_nanopub_rejected(self, store):
        np = small_nanopub()
        # strip the head to break NP-WF-1
        gutted = Nanopub(uri=np.uri, quads=Dataset(
            [q for q in np.quads.quad_set() if q.graph != np.head],
            np.quads.prefixes))
        with pytest.raises(MalformedNanopub) as err:
            store.put(gutted)
        assert any(v.rule == "NP-WF-1" for v in err.value.violations)

    def test_unmintable_uri_rejected(self, store):
        uri = ex("not-a-gupi")
        np = assemble(
            uri,
            [(uri, ex("p"), Literal("x"))],
            [(assertion_graph(uri), ex("p"), ex("o"))],
            [(uri, ex("p"), ex("o"))],
        )
        with pytest.raises(StoreError):
            store.put(np)


class TestGet:
    def test_round_trips_content(self, store):
        np = helpers.reference_assembly_nanopub()
        store.put(np)
        loaded = store.get(np.uri)
        assert loaded.uri == np.uri
        assert loaded.quads.quad_set() == np.quads.quad_set()

    def test_missing_gupi(self, store):
        with pytest.raises(NotFound):
            store.get(ex("nothing"))

    def test_exists(self, store):
        np = small_nanopub()
        assert not store.exists(np.uri)
        store.put(np)
        assert store.exists(np.uri)


class TestListing:
    def test_list_filters_by_level(self, store):
        store.put(small_nanopub("5693", Level.ORGANISM))
        store.put(small_nanopub("31234567", Level.ARTICLE))
        assert len(store.list()) == 2
        assert [e.level for e in store.list(Level.ORGANISM)] == ["organism"]
        assert [e.key for e in store.list(Level.ARTICLE)] == ["31234567"]

    def test_load_all(self, store):
        store.put(small_nanopub("1"))
        store.put(small_nanopub("2"))
        assert {np.uri.value for np in store.load_all()} == {
            helpers.BASE + "organism/1", helpers.BASE + "organism/2"}

    def test_query_yields_gupi_and_quad(self, store):
        np = small_nanopub(marker="needle")
        store.put(np)
        store.put(small_nanopub("77", marker="hay"))
        hits = list(store.query(obj=Literal("needle")))
        assert len(hits) == 1
        gupi, quad = hits[0]
        assert gupi == np.uri and quad.object == Literal("needle")


class TestReopen:
    def test_index_survives_reopen(self, store):
        np = small_nanopub()
        store.put(np)
        reopened = NanopubStore(store.directory, create=False)
        assert reopened.exists(np.uri)
        assert reopened.get(np.uri).quads.quad_set() == np.quads.quad_set()

    def test_missing_directory_without_create(self, tmp_path):
        with pytest.raises(StoreError):
            NanopubStore(tmp_path / "nope", create=False)

    def test_unsupported_index_version(self, store):
        (store.directory / "index.json").write_text(
            json.dumps({"version": 99, "entries": []}), encoding="utf-8")
        with pytest.raises(IndexCorrupt):
            NanopubStore(store.directory, create=False)


class TestTampering:
    def test_modified_file_detected_on_read(self, store):
        np = small_nanopub()
        store.put(np)
        path = store.directory / "organism" / "5693.trig"
        path.write_text(path.read_text(encoding="utf-8") + "# tampered\n",
                        encoding="utf-8")
        with pytest.raises(IndexCorrupt):
            store.get(np.uri)

    def test_verify_clean_store(self, store):
        store.put(small_nanopub("5693", Level.ORGANISM))
        store.put(helpers.reference_assembly_nanopub())
        assert store.verify() == []

    def test_verify_reports_content_drift(self, store):
        np = small_nanopub()
        store.put(np)
        replacement = small_nanopub(marker="changed")
        (store.directory / "organism" / "5693.trig").write_text(
            serialize_trig(replacement.quads), encoding="utf-8")
        problems = store.verify()
        assert len(problems) == 1 and "sha256" in problems[0]

    def test_verify_reports_missing_file(self, store):
        np = small_nanopub()
        store.put(np)
        (store.directory / "organism" / "5693.trig").unlink()
        problems = store.verify()
        assert problems == [f"indexed but missing on disk: {np.uri.value}"]

    def test_verify_reports_unindexed_file(self, store):
        store.put(small_nanopub("1"))
        stray = small_nanopub("2")
        (store.directory / "organism" / "2.trig").write_text(
            serialize_trig(stray.quads), encoding="utf-8")
        problems = store.verify()
        assert problems == ["file not in index: organism/2.trig"]

    def test_verify_surfaces_unparseable_files(self, store):
        store.put(small_nanopub())
        (store.directory / "organism" / "5693.trig").write_text(
            "not trig at all {", encoding="utf-8")
        problems = store.verify()
        assert len(problems) == 1 and problems[0].startswith("cannot rebuild index")
