"""Local HTTP test double serving canned metadata documents.

The server reads a fixture directory shaped like:

    fixtures/
      taxa/5693.json
      assemblies/GCA_015033655.1.json
      articles/31234567.json

and exposes the same routes the real sources would:

    GET /taxonomy/{taxid}
    GET /assembly/{accession}
    GET /assemblies?taxid={taxid}
    GET /articles?accession={accession}
    GET /article/{pmid}

Search routes are derived from the fixture contents: an assembly matches
a taxid search when its "taxid" field matches, and an article matches an
accession search when its "cites" array contains the accession. The
/article/{pmid} route strips "cites" before responding, the way the real
article source omits data linkage from the article document itself.

Fault scripts let tests rehearse failure handling. A script maps a route
path to a list of status codes consumed one per request; once exhausted,
the route serves normally. An entry may be "503" or "503:0.05" (status
plus an artificial delay in seconds). Every request is appended to
`server.attempts` with a monotonic timestamp so tests can check retry
spacing.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, unquote, urlparse

log = logging.getLogger("gap.fixtures")


class FixtureError(Exception):
    pass


class BadFixture(FixtureError):
    pass


class PortInUse(FixtureError):
    pass


@dataclass(frozen=True)
class Attempt:
    path: str
    status: int
    at: float  # time.monotonic() timestamp


@dataclass
class _Fault:
    status: int
    delay: float = 0.0


def parse_fault_script(spec: str) -> list[_Fault]:
    """Parse "503,503:0.1,200" into fault entries. 200 means serve normally."""
    faults = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" in chunk:
            status_part, delay_part = chunk.split(":", 1)
            try:
                faults.append(_Fault(int(status_part), float(delay_part)))
            except ValueError as exc:
                raise FixtureError(f"bad fault entry: {chunk!r}") from exc
        else:
            try:
                faults.append(_Fault(int(chunk)))
            except ValueError as exc:
                raise FixtureError(f"bad fault entry: {chunk!r}") from exc
    return faults


def _load_dir(root: Path, sub: str) -> dict[str, dict]:
    out = {}
    directory = root / sub
    if not directory.is_dir():
        return out
    for path in sorted(directory.glob("*.json")):
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise BadFixture(f"{path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise BadFixture(f"{path}: top level is not an object")
        out[path.stem] = doc
    return out


class FixtureServer:
    """Context-managed HTTP server over a fixture directory."""

    def __init__(self, fixtures_dir, port: int = 0,
                 fault_scripts: Optional[dict[str, str]] = None):
        self.fixtures_dir = Path(fixtures_dir)
        if not self.fixtures_dir.is_dir():
            raise BadFixture(f"fixture directory does not exist: {self.fixtures_dir}")
        self.taxa = _load_dir(self.fixtures_dir, "taxa")
        self.assemblies = _load_dir(self.fixtures_dir, "assemblies")
        self.articles = _load_dir(self.fixtures_dir, "articles")
        self._validate()

        self.attempts: list[Attempt] = []
        self._faults: dict[str, list[_Fault]] = {}
        for route, spec in (fault_scripts or {}).items():
            self._faults[route] = parse_fault_script(spec)
        self._lock = threading.Lock()

        handler = self._make_handler()
        try:
            self._httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
        except OSError as exc:
            raise PortInUse(f"cannot bind port {port}: {exc}") from exc
        self._thread: Optional[threading.Thread] = None

    def _validate(self):
        for taxid, doc in self.taxa.items():
            if str(doc.get("taxid")) != taxid:
                raise BadFixture(f"taxa/{taxid}.json: taxid field mismatch")
        for accession, doc in self.assemblies.items():
            if doc.get("accession") != accession:
                raise BadFixture(f"assemblies/{accession}.json: accession field mismatch")
        for pmid, doc in self.articles.items():
            if str(doc.get("pmid")) != pmid:
                raise BadFixture(f"articles/{pmid}.json: pmid field mismatch")
            cites = doc.get("cites", [])
            if not isinstance(cites, list):
                raise BadFixture(f"articles/{pmid}.json: 'cites' is not an array")

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def set_fault_script(self, route: str, spec: str) -> None:
        with self._lock:
            self._faults[route] = parse_fault_script(spec)

    def attempts_for(self, route: str) -> list[Attempt]:
        with self._lock:
            return [a for a in self.attempts if a.path == route]

    def start(self) -> "FixtureServer":
        if self._thread is not None:
            return self
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        name="gap-fixture-server", daemon=True)
        self._thread.start()
        log.info("fixture server listening on %s", self.base_url)
        return self

    def stop(self) -> None:
        if self._thread is None:
            return
        self._httpd.shutdown()
        self._thread.join(timeout=5)
        self._httpd.server_close()
        self._thread = None

    def __enter__(self) -> "FixtureServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()

    # -- request handling ---------------------------------------------------

    def _next_fault(self, route: str) -> Optional[_Fault]:
        with self._lock:
            queue = self._faults.get(route)
            if queue:
                return queue.pop(0)
        return None

    def _record(self, route: str, status: int) -> None:
        with self._lock:
            self.attempts.append(Attempt(route, status, time.monotonic()))

    def _lookup(self, path: str, query: dict) -> tuple[int, dict]:
        parts = [unquote(p) for p in path.strip("/").split("/") if p]
        if parts and parts[0] == "taxonomy" and len(parts) == 2:
            doc = self.taxa.get(parts[1])
            return (200, doc) if doc else (404, {"error": "unknown taxid"})
        if parts and parts[0] == "assembly" and len(parts) == 2:
            doc = self.assemblies.get(parts[1])
            return (200, doc) if doc else (404, {"error": "unknown accession"})
        if parts == ["assemblies"]:
            taxid = (query.get("taxid") or [None])[0]
            if not taxid:
                return (400, {"error": "missing taxid parameter"})
            hits = sorted(acc for acc, doc in self.assemblies.items()
                          if str(doc.get("taxid")) == taxid)
            return (200, {"accessions": hits})
        if parts == ["articles"]:
            accession = (query.get("accession") or [None])[0]
            if not accession:
                return (400, {"error": "missing accession parameter"})
            hits = sorted(pmid for pmid, doc in self.articles.items()
                          if accession in doc.get("cites", []))
            return (200, {"pmids": hits})
        if parts and parts[0] == "article" and len(parts) == 2:
            doc = self.articles.get(parts[1])
            if not doc:
                return (404, {"error": "unknown pmid"})
            doc = {k: v for k, v in doc.items() if k != "cites"}
            return (200, doc)
        return (404, {"error": "no such route"})

    def _make_handler(self):
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                parsed = urlparse(self.path)
                route = parsed.path
                if parsed.query:
                    route = f"{parsed.path}?{parsed.query}"
                fault = server._next_fault(route) or server._next_fault(parsed.path)
                if fault is not None and fault.delay > 0:
                    time.sleep(fault.delay)
                if fault is not None and fault.status != 200:
                    server._record(route, fault.status)
                    self._reply(fault.status, {"error": "scripted fault"})
                    return
                status, body = server._lookup(parsed.path, parse_qs(parsed.query))
                server._record(route, status)
                self._reply(status, body)

            def _reply(self, status: int, body: dict):
                payload = json.dumps(body).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json; charset=utf-8")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, fmt, *args):
                log.debug("fixture server: " + fmt, *args)

        return Handler


def serve_fixtures(fixtures_dir, port: int = 0,
                   fault_scripts: Optional[dict[str, str]] = None) -> FixtureServer:
    """Start a fixture server and return it; caller is responsible for stop()."""
    return FixtureServer(fixtures_dir, port=port, fault_scripts=fault_scripts).start()
