"""Configuration loading for the command line tool.

Settings are resolved in precedence order: command line flags, then
GAP_* environment variables, then a JSON configuration file, then the
built-in defaults. The file is plain JSON with the same keys as the
environment variables, lowercased and without the GAP_ prefix, e.g.

    {
      "base": "https://nanopubs.example.org/gap/",
      "store_dir": "./store",
      "curator_orcids": ["https://orcid.org/0000-0002-1825-0097"],
      "build_timestamp": "2020-11-03T00:00:00Z"
    }

Pinning build_timestamp makes builds reproducible: a fetch-then-build
produces byte-identical nanopubs to a single run.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .builders import BuildContext
from .gateway import MetadataGateway, RetryPolicy, SourceEndpoint
from .rdf import InvalidIri, Iri, make_iri
from .vocab import DEFAULT_BASE

ENV_PREFIX = "GAP_"


class ConfigError(Exception):
    pass


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp; a trailing Z means UTC.

    datetime.fromisoformat on Python 3.10 rejects the Z suffix, so it is
    translated by hand. Naive timestamps are assumed to be UTC.
    """
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        value = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ConfigError(f"bad timestamp {raw!r}: {exc}") from exc
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value


@dataclass
class CliConfig:
    base: str = DEFAULT_BASE
    store_dir: str = "./store"
    backup_dir: str = "./backups"
    assembly_url: str = "http://127.0.0.1:8645"
    taxonomy_url: str = "http://127.0.0.1:8645"
    pubmed_url: str = "http://127.0.0.1:8645"
    timeout: float = 10.0
    retries: int = 3
    backoff: float = 0.25
    backoff_multiplier: float = 2.0
    min_interval: float = 0.35
    workers: int = 4
    curator_orcids: list = field(
        default_factory=lambda: ["https://orcid.org/0000-0002-1825-0097"])
    software_name: str = "gap"
    software_version: str = "0.1.0"
    software_source: str = "https://example.org/gap"
    software_doi: str = "https://doi.org/10.5281/zenodo.1234567"
    build_timestamp: Optional[str] = None

    _FLOATS = ("timeout", "backoff", "backoff_multiplier", "min_interval")
    _INTS = ("retries", "workers")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def load(cls, config_path=None, env: Optional[dict] = None,
             overrides: Optional[dict] = None) -> "CliConfig":
        cfg = cls()
        if config_path is not None:
            cfg._apply(cls._read_file(config_path), f"config file {config_path}")
        cfg._apply(cls._read_env(env if env is not None else os.environ),
                   "environment")
        if overrides:
            cfg._apply({k: v for k, v in overrides.items() if v is not None},
                       "command line")
        cfg._validate()
        return cfg

    @staticmethod
    def _read_file(path) -> dict:
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {path}: top level must be an object")
        return doc

    @classmethod
    def _read_env(cls, env: dict) -> dict:
        out = {}
        for name in cls.field_names():
            raw = env.get(ENV_PREFIX + name.upper())
            if raw is None:
                continue
            if name == "curator_orcids":
                out[name] = [p.strip() for p in raw.split(",") if p.strip()]
            else:
                out[name] = raw
        return out

    def _apply(self, values: dict, origin: str) -> None:
        known = set(self.field_names())
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"{origin}: unknown setting {key!r}")
            if key in self._FLOATS:
                try:
                    value = float(value)
                except (TypeError, ValueError):
                    raise ConfigError(f"{origin}: {key} must be a number") from None
            elif key in self._INTS:
                try:
                    value = int(value)
                except (TypeError, ValueError):
                    raise ConfigError(f"{origin}: {key} must be an integer") from None
            elif key == "curator_orcids":
                if isinstance(value, str):
                    value = [p.strip() for p in value.split(",") if p.strip()]
                if not isinstance(value, list) or \
                        not all(isinstance(v, str) for v in value):
                    raise ConfigError(f"{origin}: curator_orcids must be a list of IRIs")
            elif not isinstance(value, str) and value is not None:
                raise ConfigError(f"{origin}: {key} must be a string")
            setattr(self, key, value)

    def _validate(self) -> None:
        if self.retries < 1:
            raise ConfigError("retries must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        if self.backoff < 0 or self.backoff_multiplier <= 0:
            raise ConfigError("backoff must be >= 0 and backoff_multiplier > 0")
        if not self.curator_orcids:
            raise ConfigError("curator_orcids must not be empty")
        for name in ("base", "assembly_url", "taxonomy_url", "pubmed_url",
                     "software_source", "software_doi"):
            try:
                make_iri(getattr(self, name))
            except InvalidIri as exc:
                raise ConfigError(f"{name}: {exc}") from exc
        for orcid in self.curator_orcids:
            try:
                make_iri(orcid)
            except InvalidIri as exc:
                raise ConfigError(f"curator_orcids: {exc}") from exc
        if self.build_timestamp is not None:
            parse_timestamp(self.build_timestamp)

    # -- derived objects ------------------------------------------------------

    def resolved_timestamp(self) -> datetime:
        if self.build_timestamp is None:
            return datetime.now(timezone.utc).replace(microsecond=0)
        return parse_timestamp(self.build_timestamp)

    def build_context(self) -> BuildContext:
        return BuildContext(
            base=make_iri(self.base),
            curator_orcids=tuple(make_iri(o) for o in self.curator_orcids),
            software_name=self.software_name,
            software_version=self.software_version,
            software_source_iri=make_iri(self.software_source),
            software_doi_iri=make_iri(self.software_doi),
            build_timestamp=self.resolved_timestamp(),
        )

    def _endpoint(self, url: str) -> SourceEndpoint:
        return SourceEndpoint(
            base_url=url,
            timeout=self.timeout,
            retry=RetryPolicy(max_attempts=self.retries, backoff=self.backoff,
                              multiplier=self.backoff_multiplier),
            min_interval=self.min_interval,
        )

    def gateway(self, registry=None) -> MetadataGateway:
        return MetadataGateway(
            assembly=self._endpoint(self.assembly_url),
            taxonomy=self._endpoint(self.taxonomy_url),
            pubmed=self._endpoint(self.pubmed_url),
            registry=registry,
        )
