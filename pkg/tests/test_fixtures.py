"""Tests for the local fixture HTTP server and its fault scripting."""

import json

import pytest
import requests

import helpers
from gap.fixtures import (
    BadFixture,
    FixtureError,
    FixtureServer,
    PortInUse,
    parse_fault_script,
    serve_fixtures,
)


def get_json(server, path):
    response = requests.get(server.base_url + path, timeout=5)
    return response.status_code, response.json()


def write_fixture(root, sub, name, doc):
    directory = root / sub
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{name}.json").write_text(json.dumps(doc), encoding="utf-8")


class TestFaultScriptParsing:
    def test_statuses_and_delays(self):
        faults = parse_fault_script("503,503:0.1,200")
        assert [(f.status, f.delay) for f in faults] == [
            (503, 0.0), (503, 0.1), (200, 0.0)]

    def test_blank_chunks_are_skipped(self):
        assert [f.status for f in parse_fault_script("503,,200,")] == [503, 200]

    @pytest.mark.parametrize("spec", ["abc", "503:slow", ":0.1"])
    def test_bad_entries(self, spec):
        with pytest.raises(FixtureError):
            parse_fault_script(spec)


class TestFixtureValidation:
    def test_missing_directory(self, tmp_path):
        with pytest.raises(BadFixture):
            FixtureServer(tmp_path / "nowhere")

    def test_accession_field_must_match_filename(self, tmp_path):
        write_fixture(tmp_path, "assemblies", "GCA_1.1", {"accession": "GCA_2.2"})
        with pytest.raises(BadFixture) as err:
            FixtureServer(tmp_path)
        assert "accession field mismatch" in str(err.value)

    def test_cites_must_be_an_array(self, tmp_path):
        write_fixture(tmp_path, "articles", "1",
                      {"pmid": "1", "cites": "GCA_1.1"})
        with pytest.raises(BadFixture) as err:
            FixtureServer(tmp_path)
        assert "'cites' is not an array" in str(err.value)

    def test_unparseable_json(self, tmp_path):
        (tmp_path / "taxa").mkdir()
        (tmp_path / "taxa" / "5.json").write_text("{nope", encoding="utf-8")
        with pytest.raises(BadFixture):
            FixtureServer(tmp_path)

    def test_non_object_document(self, tmp_path):
        write_fixture(tmp_path, "taxa", "5", {"taxid": "5"})
        (tmp_path / "taxa" / "6.json").write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(BadFixture) as err:
            FixtureServer(tmp_path)
        assert "not an object" in str(err.value)

    def test_empty_directory_serves_nothing(self, tmp_path):
        (tmp_path / "taxa").mkdir()
        with FixtureServer(tmp_path) as server:
            status, _ = get_json(server, "/taxonomy/5693")
        assert status == 404


class TestRoutes:
    def test_taxonomy(self, fixture_server):
        status, body = get_json(fixture_server, "/taxonomy/5693")
        assert status == 200
        assert body["name"] == "Trypanosoma cruzi"

    def test_taxonomy_unknown(self, fixture_server):
        status, body = get_json(fixture_server, "/taxonomy/999999")
        assert status == 404
        assert "error" in body

    def test_assembly(self, fixture_server):
        status, body = get_json(fixture_server, "/assembly/GCA_015033655.1")
        assert status == 200
        assert body["submitter"]["name"] == "University of Georgia"

    def test_assembly_listing_matches_taxid(self, fixture_server):
        status, body = get_json(fixture_server, "/assemblies?taxid=5693")
        assert status == 200
        assert body == {"accessions": [
            "GCA_003719455.1", "GCA_015033655.1", "GCF_000209065.1"]}

    def test_assembly_listing_requires_taxid(self, fixture_server):
        status, body = get_json(fixture_server, "/assemblies")
        assert status == 400
        assert "taxid" in body["error"]

    def test_article_search_matches_cites(self, fixture_server):
        status, body = get_json(
            fixture_server, "/articles?accession=GCA_015033655.1")
        assert status == 200
        assert body == {"pmids": ["31234567", "33000001"]}

    def test_article_search_requires_accession(self, fixture_server):
        status, body = get_json(fixture_server, "/articles")
        assert status == 400
        assert "accession" in body["error"]

    def test_article_strips_cites(self, fixture_server):
        status, body = get_json(fixture_server, "/article/31234567")
        assert status == 200
        assert "cites" not in body
        assert body["title"].startswith("Chromosome-level genome assembly")

    def test_unknown_route(self, fixture_server):
        status, body = get_json(fixture_server, "/frobnicate/42")
        assert status == 404
        assert body["error"] == "no such route"


class TestFaultInjection:
    def test_scripted_faults_then_normal_service(self, fixture_server):
        fixture_server.set_fault_script("/taxonomy/5693", "503,500")
        codes = [get_json(fixture_server, "/taxonomy/5693")[0] for _ in range(3)]
        assert codes == [503, 500, 200]
        recorded = [a.status for a in fixture_server.attempts_for("/taxonomy/5693")]
        assert recorded == [503, 500, 200]

    def test_200_entry_only_delays(self, fixture_server):
        fixture_server.set_fault_script("/taxonomy/5693", "200:0.05")
        status, body = get_json(fixture_server, "/taxonomy/5693")
        assert status == 200
        assert body["taxid"] == "5693"
        attempts = fixture_server.attempts_for("/taxonomy/5693")
        assert [a.status for a in attempts] == [200]

    def test_faults_can_target_query_routes(self, fixture_server):
        route = "/articles?accession=GCA_015033655.1"
        fixture_server.set_fault_script(route, "503")
        assert get_json(fixture_server, route)[0] == 503
        assert get_json(fixture_server, route)[0] == 200

    def test_constructor_accepts_fault_scripts(self):
        server = FixtureServer(helpers.FIXTURES_DIR, port=0,
                               fault_scripts={"/taxonomy/5693": "503"})
        with server:
            assert get_json(server, "/taxonomy/5693")[0] == 503
            assert get_json(server, "/taxonomy/5693")[0] == 200

    def test_bad_script_in_constructor(self):
        with pytest.raises(FixtureError):
            FixtureServer(helpers.FIXTURES_DIR, port=0,
                          fault_scripts={"/taxonomy/5693": "oops"})

    def test_attempt_timestamps_are_monotonic(self, fixture_server):
        for _ in range(3):
            get_json(fixture_server, "/taxonomy/5693")
        at = [a.at for a in fixture_server.attempts_for("/taxonomy/5693")]
        assert at == sorted(at)


class TestLifecycle:
    def test_context_manager_starts_and_stops(self):
        with FixtureServer(helpers.FIXTURES_DIR, port=0) as server:
            port = server.port
            assert port != 0
            assert server.base_url == f"http://127.0.0.1:{port}"
            assert get_json(server, "/taxonomy/5693")[0] == 200
        with pytest.raises(requests.ConnectionError):
            requests.get(f"http://127.0.0.1:{port}/taxonomy/5693", timeout=2)

    def test_port_in_use(self, fixture_server):
        with pytest.raises(PortInUse):
            FixtureServer(helpers.FIXTURES_DIR, port=fixture_server.port)

    def test_serve_fixtures_helper(self):
        server = serve_fixtures(helpers.FIXTURES_DIR, port=0)
        try:
            assert get_json(server, "/assembly/GCF_000209065.1")[0] == 200
        finally:
            server.stop()
