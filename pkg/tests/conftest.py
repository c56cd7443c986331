from __future__ import annotations

import pytest

import helpers
from gap.fixtures import FixtureServer
from gap.gateway import MetadataGateway, RetryPolicy, SourceEndpoint
from gap.store import NanopubStore


@pytest.fixture
def reference_record():
    return helpers.reference_assembly_record()


@pytest.fixture
def reference_context():
    return helpers.reference_context()


@pytest.fixture
def reference_nanopub():
    return helpers.reference_assembly_nanopub()


@pytest.fixture
def fixture_server():
    server = FixtureServer(helpers.FIXTURES_DIR, port=0)
    server.start()
    try:
        yield server
    finally:
        server.stop()


def make_gateway(base_url: str, retries: int = 3, backoff: float = 0.01,
                 min_interval: float = 0.0) -> MetadataGateway:
    """A gateway pointed at one base URL for all three sources, tuned for
    fast tests: no throttle delay, short backoff."""
    policy = RetryPolicy(max_attempts=retries, backoff=backoff, multiplier=2.0)

    def endpoint() -> SourceEndpoint:
        return SourceEndpoint(base_url, timeout=5.0, retry=policy,
                              min_interval=min_interval)

    return MetadataGateway(endpoint(), endpoint(), endpoint(),
                           registry=helpers.registry_for_tests())


@pytest.fixture
def gateway(fixture_server):
    return make_gateway(fixture_server.base_url)


@pytest.fixture
def store(tmp_path):
    return NanopubStore(tmp_path / "store", create=True)
