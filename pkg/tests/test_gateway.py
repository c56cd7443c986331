"""Gateway tests: wire parsing, typed fetch operations, retries, throttling."""

import copy
import json
import socket
from datetime import date

import pytest

import helpers
from conftest import make_gateway
from gap.gateway import (
    MetadataGateway,
    NotFound,
    RetryPolicy,
    SchemaError,
    SourceEndpoint,
    TransportError,
    article_to_wire,
    assembly_to_wire,
    parse_article,
    parse_assembly,
    parse_taxon,
    taxon_to_wire,
)
from gap.nanopub import InvalidKey


def load_fixture(rel: str) -> dict:
    with open(helpers.FIXTURES_DIR / rel, encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def registry():
    return helpers.registry_for_tests()


# -- retry policy and endpoints ----------------------------------------------


class TestRetryPolicy:
    def test_delays_grow_geometrically(self):
        policy = RetryPolicy(max_attempts=4, backoff=0.25, multiplier=2.0)
        assert [policy.delay(n) for n in (1, 2, 3)] == [0.25, 0.5, 1.0]

    @pytest.mark.parametrize("kwargs", [
        {"max_attempts": 0},
        {"backoff": -0.1},
        {"multiplier": 0.0},
    ])
    def test_rejects_bad_parameters(self, kwargs):
        with pytest.raises(ValueError):
            RetryPolicy(**kwargs)


class TestSourceEndpoint:
    def test_strips_trailing_slash(self):
        assert SourceEndpoint("http://x.test/api/").base_url == "http://x.test/api"

    def test_rejects_non_http(self):
        with pytest.raises(ValueError):
            SourceEndpoint("ftp://x.test")

    def test_rejects_bad_timeout(self):
        with pytest.raises(ValueError):
            SourceEndpoint("http://x.test", timeout=0)


# -- wire parsing -------------------------------------------------------------


class TestParseTaxon:
    def test_parses_fixture(self):
        record = parse_taxon(load_fixture("taxa/5693.json"))
        assert record.taxid == "5693"
        assert record.scientific_name == "Trypanosoma cruzi"
        assert record.rank == "species"
        assert len(record.lineage) == 4
        assert record.lineage[0] == ("131567", "cellular organisms")

    def test_roundtrip_through_wire(self):
        record = parse_taxon(load_fixture("taxa/5693.json"))
        assert parse_taxon(taxon_to_wire(record)) == record

    def test_integer_taxid_is_coerced(self):
        doc = load_fixture("taxa/5693.json")
        doc["taxid"] = 5693
        doc["lineage"][0]["taxid"] = 131567
        record = parse_taxon(doc)
        assert record.taxid == "5693"
        assert record.lineage[0][0] == "131567"

    @pytest.mark.parametrize("mangle,detail", [
        (lambda d: d.pop("name"), "missing field 'name'"),
        (lambda d: d.update(rank=7), "wrong type"),
        (lambda d: d.update(name="   "), "is empty"),
        (lambda d: d.update(lineage="nope"), "wrong type"),
        (lambda d: d["lineage"].append("loose string"), "lineage[4] is not an object"),
        (lambda d: d.update(page="not an iri"), "not an IRI"),
    ])
    def test_bad_documents(self, mangle, detail):
        doc = load_fixture("taxa/5693.json")
        mangle(doc)
        with pytest.raises(SchemaError) as err:
            parse_taxon(doc)
        assert detail in str(err.value)

    def test_non_object(self):
        with pytest.raises(SchemaError):
            parse_taxon(["not", "an", "object"])


class TestParseAssembly:
    def test_parses_fixture_to_reference_record(self, registry):
        doc = load_fixture("assemblies/GCA_015033655.1.json")
        assert parse_assembly(doc, registry) == helpers.reference_assembly_record()

    def test_roundtrip_through_wire(self, registry):
        record = helpers.reference_assembly_record()
        assert parse_assembly(assembly_to_wire(record), registry) == record

    def test_roundtrip_without_optional_fields(self, registry):
        doc = load_fixture("assemblies/GCF_000209065.1.json")
        record = parse_assembly(doc, registry)
        assert record.strain_name is None
        assert record.biosample_iri is None
        assert record.wgs_master_iri is None
        wire = assembly_to_wire(record)
        assert "strain" not in wire and "wgs" not in wire
        assert parse_assembly(wire, registry) == record

    def test_level_accepts_curie_and_full_iri(self, registry):
        compact = load_fixture("assemblies/GCA_015033655.1.json")
        full = load_fixture("assemblies/GCA_003719455.1.json")
        assert compact["level"].startswith("so:")
        assert full["level"].startswith("http")
        a = parse_assembly(compact, registry)
        b = parse_assembly(full, registry)
        assert a.assembly_level_term == b.assembly_level_term

    @pytest.mark.parametrize("mangle,detail", [
        (lambda d: d.pop("coverage"), "missing field 'coverage'"),
        (lambda d: d.update(level="zz:123"), "unknown level term"),
        (lambda d: d.update(level="so:9999999"), "not in the vocabulary registry"),
        (lambda d: d.update(submitted="2020-13-40"), "not a YYYY-MM-DD date"),
        (lambda d: d.update(ftp="no scheme here"), "not an IRI"),
        (lambda d: d["submitter"].update(kind="org"), "submitter_kind"),
        (lambda d: d.update(wgs={"version": "WNYY01"}), "missing field 'master'"),
        (lambda d: d.update(accession="NOPE_123"), "NOPE_123"),
    ])
    def test_bad_documents(self, registry, mangle, detail):
        doc = load_fixture("assemblies/GCA_015033655.1.json")
        mangle(doc)
        with pytest.raises(SchemaError) as err:
            parse_assembly(doc, registry)
        assert detail in str(err.value)


class TestParseArticle:
    def test_parses_fixture(self):
        record = parse_article(load_fixture("articles/31234567.json"))
        assert record.pmid == "31234567"
        assert record.publication_date == date(2021, 2, 18)
        assert [a.name for a in record.authors] == \
            ["Wei Wang", "Duo Peng", "Rick L. Tarleton"]
        assert record.authors[1].orcid is None
        assert record.cited_accessions == ("GCA_003719455.1", "GCA_015033655.1")

    def test_roundtrip_through_wire(self):
        record = parse_article(load_fixture("articles/31234567.json"))
        assert parse_article(article_to_wire(record)) == record

    def test_roundtrip_without_optional_fields(self):
        record = parse_article(load_fixture("articles/33000001.json"))
        assert record.doi_iri is None and record.abstract is None
        wire = article_to_wire(record)
        assert "doi" not in wire and "abstract" not in wire
        assert parse_article(wire) == record

    def test_explicit_citations_override_document(self):
        doc = load_fixture("articles/31234567.json")
        record = parse_article(doc, cited_accessions=("GCA_015033655.1",))
        assert record.cited_accessions == ("GCA_015033655.1",)

    @pytest.mark.parametrize("mangle,detail", [
        (lambda d: d.pop("journal"), "missing field 'journal'"),
        (lambda d: d.update(date="February 2021"), "not a YYYY-MM-DD date"),
        (lambda d: d["authors"].append("loose string"), "authors[3] is not an object"),
        (lambda d: d["authors"][0].update(orcid="not an iri"), "not an IRI"),
        (lambda d: d["keywords"].append(42), "keywords[3] is not a string"),
        (lambda d: d.update(cites=["banana"]), "banana"),
    ])
    def test_bad_documents(self, mangle, detail):
        doc = load_fixture("articles/31234567.json")
        mangle(doc)
        with pytest.raises(SchemaError) as err:
            parse_article(doc)
        assert detail in str(err.value)


# -- typed operations against the fixture server ------------------------------


class TestTypedFetches:
    def test_fetch_taxon(self, gateway):
        record = gateway.fetch_taxon("5693")
        assert record.scientific_name == "Trypanosoma cruzi"

    def test_fetch_assembly_equals_reference(self, gateway):
        assert gateway.fetch_assembly("GCA_015033655.1") == \
            helpers.reference_assembly_record()

    def test_fetch_article_strips_inline_citations(self, gateway):
        record = gateway.fetch_article("31234567")
        assert record.cited_accessions == ()

    def test_fetch_article_applies_search_linkage(self, gateway):
        record = gateway.fetch_article(
            "31234567", cited_accessions=("GCA_015033655.1",))
        assert record.cited_accessions == ("GCA_015033655.1",)

    def test_list_assemblies_for_taxon(self, gateway):
        assert gateway.list_assemblies_for_taxon("5693") == [
            "GCA_003719455.1", "GCA_015033655.1", "GCF_000209065.1"]

    def test_search_articles(self, gateway):
        assert gateway.search_articles("GCA_015033655.1") == \
            ["31234567", "33000001"]
        assert gateway.search_articles("GCA_003719455.1") == ["31234567"]

    def test_invalid_keys_fail_before_any_request(self, gateway, fixture_server):
        with pytest.raises(InvalidKey):
            gateway.fetch_assembly("gca_015033655.1")
        with pytest.raises(InvalidKey):
            gateway.fetch_taxon("5693x")
        with pytest.raises(InvalidKey):
            gateway.fetch_article("PMID-1")
        with pytest.raises(InvalidKey):
            gateway.search_articles("banana")
        assert fixture_server.attempts == []

    def test_payload_log(self, gateway):
        gateway.fetch_taxon("5693")
        gateway.fetch_assembly("GCA_015033655.1")
        kinds = [p.kind for p in gateway.payloads]
        assert kinds == ["taxon", "assembly"]
        assert gateway.payloads[0].source_url.endswith("/taxonomy/5693")
        assert gateway.payloads[0].fetched_at.tzinfo is not None


# -- failure handling ----------------------------------------------------------


class TestRetries:
    def test_recovers_after_two_server_errors(self, fixture_server):
        gateway = make_gateway(fixture_server.base_url, retries=3, backoff=0.01)
        fixture_server.set_fault_script("/assembly/GCA_015033655.1", "503,503")
        record = gateway.fetch_assembly("GCA_015033655.1")
        assert record.accession == "GCA_015033655.1"
        attempts = fixture_server.attempts_for("/assembly/GCA_015033655.1")
        assert [a.status for a in attempts] == [503, 503, 200]

    def test_gives_up_after_max_attempts(self, fixture_server):
        gateway = make_gateway(fixture_server.base_url, retries=3, backoff=0.01)
        fixture_server.set_fault_script("/taxonomy/5693", "503,503,503")
        with pytest.raises(TransportError) as err:
            gateway.fetch_taxon("5693")
        assert "after 3 attempts" in str(err.value)
        assert len(fixture_server.attempts_for("/taxonomy/5693")) == 3

    def test_not_found_is_never_retried(self, gateway, fixture_server):
        with pytest.raises(NotFound):
            gateway.fetch_assembly("GCA_999999999.9")
        assert len(fixture_server.attempts_for("/assembly/GCA_999999999.9")) == 1

    def test_client_errors_are_never_retried(self, fixture_server):
        gateway = make_gateway(fixture_server.base_url, retries=3)
        fixture_server.set_fault_script("/taxonomy/5693", "400")
        with pytest.raises(TransportError) as err:
            gateway.fetch_taxon("5693")
        assert "400" in str(err.value)
        assert len(fixture_server.attempts_for("/taxonomy/5693")) == 1

    def test_retry_spacing_follows_backoff(self, fixture_server):
        gateway = make_gateway(fixture_server.base_url, retries=3, backoff=0.05)
        fixture_server.set_fault_script("/taxonomy/5693", "503,503")
        gateway.fetch_taxon("5693")
        at = [a.at for a in fixture_server.attempts_for("/taxonomy/5693")]
        first_gap, second_gap = at[1] - at[0], at[2] - at[1]
        assert first_gap >= 0.045
        assert second_gap >= 0.09
        assert second_gap > first_gap

    def test_connection_failure_raises_transport_error(self):
        # Bind a port, then close it so connections are refused.
        probe = socket.socket()
        probe.bind(("127.0.0.1", 0))
        dead_port = probe.getsockname()[1]
        probe.close()
        gateway = make_gateway(f"http://127.0.0.1:{dead_port}",
                               retries=2, backoff=0.01)
        with pytest.raises(TransportError) as err:
            gateway.fetch_taxon("5693")
        assert "failed" in str(err.value)


class FakeResponse:
    def __init__(self, status_code: int, content: bytes):
        self.status_code = status_code
        self.content = content


class FakeSession:
    """Maps URL suffixes to canned responses, recording every request."""

    def __init__(self, replies: dict):
        self.replies = replies
        self.calls = []

    def get(self, url, timeout=None):
        self.calls.append(url)
        for suffix, reply in self.replies.items():
            if url.endswith(suffix):
                return reply
        return FakeResponse(404, b"{}")


def fake_gateway(replies: dict) -> MetadataGateway:
    endpoint = SourceEndpoint("http://fake.test", min_interval=0.0,
                              retry=RetryPolicy(max_attempts=1))
    return MetadataGateway(endpoint, endpoint, endpoint,
                           registry=helpers.registry_for_tests(),
                           session=FakeSession(replies))


class TestResponseValidation:
    def test_non_utf8_body(self):
        gateway = fake_gateway({"/taxonomy/5693": FakeResponse(200, b"\xff\xfe\x00")})
        with pytest.raises(TransportError) as err:
            gateway.fetch_taxon("5693")
        assert "non-UTF-8" in str(err.value)

    def test_non_json_body(self):
        gateway = fake_gateway({"/taxonomy/5693": FakeResponse(200, b"not json")})
        with pytest.raises(SchemaError) as err:
            gateway.fetch_taxon("5693")
        assert "not JSON" in str(err.value)

    def test_assembly_identity_echo(self):
        body = json.dumps(load_fixture("assemblies/GCA_015033655.1.json"))
        gateway = fake_gateway(
            {"/assembly/GCA_999999999.9": FakeResponse(200, body.encode())})
        with pytest.raises(SchemaError) as err:
            gateway.fetch_assembly("GCA_999999999.9")
        assert "requested GCA_999999999.9" in str(err.value)

    def test_taxon_identity_echo(self):
        body = json.dumps(load_fixture("taxa/5693.json"))
        gateway = fake_gateway({"/taxonomy/42": FakeResponse(200, body.encode())})
        with pytest.raises(SchemaError) as err:
            gateway.fetch_taxon("42")
        assert "requested 42" in str(err.value)

    def test_article_identity_echo(self):
        body = json.dumps(load_fixture("articles/31234567.json"))
        gateway = fake_gateway({"/article/99": FakeResponse(200, body.encode())})
        with pytest.raises(SchemaError) as err:
            gateway.fetch_article("99")
        assert "requested 99" in str(err.value)

    def test_search_payload_must_be_a_pmid_array(self):
        gateway = fake_gateway({"/articles?accession=GCA_015033655.1":
                                FakeResponse(200, b'{"hits": []}')})
        with pytest.raises(SchemaError) as err:
            gateway.search_articles("GCA_015033655.1")
        assert "pmids" in str(err.value)

    def test_listing_rejects_malformed_accessions(self):
        gateway = fake_gateway({"/assemblies?taxid=5693":
                                FakeResponse(200, b'{"accessions": ["banana"]}')})
        with pytest.raises(InvalidKey):
            gateway.list_assemblies_for_taxon("5693")


class TestThrottle:
    def test_requests_are_spaced_by_min_interval(self, fixture_server):
        gateway = make_gateway(fixture_server.base_url, min_interval=0.12)
        gateway.fetch_taxon("5693")
        gateway.fetch_taxon("5693")
        at = [a.at for a in fixture_server.attempts_for("/taxonomy/5693")]
        assert len(at) == 2
        assert at[1] - at[0] >= 0.1

    def test_zero_interval_does_not_delay(self, fixture_server):
        gateway = make_gateway(fixture_server.base_url, min_interval=0.0)
        gateway.fetch_taxon("5693")
        gateway.fetch_taxon("5693")
        at = [a.at for a in fixture_server.attempts_for("/taxonomy/5693")]
        assert at[1] - at[0] < 0.1
