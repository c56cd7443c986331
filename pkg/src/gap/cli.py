"""Command line interface.

    gap run --accession GCA_...   full pipeline into the store
    gap fetch --url https://...   mirror wire documents only
    gap build                     rebuild nanopubs from mirrored documents
    gap validate                  lint the store, optionally render a report
    gap stats                     corpus statistics, optionally with figures
    gap query --s ... --p ...     match quads across the store
    gap store verify              check files against the store index
    gap serve-fixtures            run the local fixture server

Exit codes: 0 success, 1 operational failure (including lint findings),
2 usage or configuration errors. Structured output goes to stdout as
JSON or aligned text; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
import time

from . import pipeline, report as report_mod
from . import __version__
from .config import CliConfig, ConfigError
from .fixtures import FixtureError, FixtureServer, parse_fault_script
from .gateway import GatewayError
from .nanopub import NanopubError, quad_to_json
from .quality import ALL_RULES, corpus_stats, evaluate, render_text
from .rdf import Literal, RdfError, format_term
from .store import NanopubStore, StoreError
from .vocab import VocabularyRegistry

log = logging.getLogger("gap.cli")

_CONFIG_FLAGS = [
    ("--store-dir", "store_dir", str, "nanopub store directory"),
    ("--backup-dir", "backup_dir", str, "wire document mirror directory"),
    ("--base", "base", str, "base IRI for minted identifiers"),
    ("--assembly-url", "assembly_url", str, "assembly source endpoint"),
    ("--taxonomy-url", "taxonomy_url", str, "taxonomy source endpoint"),
    ("--pubmed-url", "pubmed_url", str, "article source endpoint"),
    ("--timeout", "timeout", float, "per-request timeout in seconds"),
    ("--retries", "retries", int, "attempts per request"),
    ("--backoff", "backoff", float, "initial retry delay in seconds"),
    ("--backoff-multiplier", "backoff_multiplier", float, "retry delay growth factor"),
    ("--min-interval", "min_interval", float, "seconds between requests per endpoint"),
    ("--workers", "workers", int, "parallel fetch workers"),
    ("--build-timestamp", "build_timestamp", str,
     "pin the build timestamp (ISO-8601) for reproducible output"),
]


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="JSON configuration file")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="increase log detail (repeatable)")
    common.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    for flag, dest, typ, help_text in _CONFIG_FLAGS:
        common.add_argument(flag, dest=dest, type=typ, default=None,
                            help=help_text)
    return common


def _load_config(args: argparse.Namespace) -> CliConfig:
    overrides = {dest: getattr(args, dest, None) for _, dest, _, _ in _CONFIG_FLAGS}
    if getattr(args, "orcid", None):
        overrides["curator_orcids"] = list(args.orcid)
    return CliConfig.load(config_path=args.config, overrides=overrides)


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _run_summary(run_report) -> str:
    return (f"fetched={run_report.fetched} built={run_report.built} "
            f"skipped_existing={run_report.skipped_existing}")


# -- commands -----------------------------------------------------------------


def _seed_argument(args) -> str:
    # --accession "" must stay an accession (and fail accession parsing),
    # not fall through to the absent --url.
    return args.url if args.accession is None else args.accession


def cmd_run(args) -> int:
    cfg = _load_config(args)
    ctx = cfg.build_context()
    store = NanopubStore(cfg.store_dir)
    gateway = cfg.gateway(registry=ctx.registry)
    result = pipeline.run(gateway, store, ctx, _seed_argument(args),
                          cfg.backup_dir, workers=cfg.workers,
                          dry_run=args.dry_run)
    _print_json(result.to_json_dict())
    log.info("run complete: %s", _run_summary(result))
    return 1 if result.violations else 0


def cmd_fetch(args) -> int:
    cfg = _load_config(args)
    ctx = cfg.build_context()
    gateway = cfg.gateway(registry=ctx.registry)
    result = pipeline.fetch(gateway, ctx, _seed_argument(args),
                            cfg.backup_dir, workers=cfg.workers)
    _print_json(result.to_json_dict())
    return 0


def cmd_build(args) -> int:
    cfg = _load_config(args)
    ctx = cfg.build_context()
    store = NanopubStore(cfg.store_dir)
    result = pipeline.build_from_backups(store, ctx, cfg.backup_dir,
                                         dry_run=args.dry_run)
    _print_json(result.to_json_dict())
    return 1 if result.violations else 0


def _parse_rules(raw) -> list[str]:
    if raw is None:
        return list(ALL_RULES)
    rules = [r.strip() for r in raw.split(",") if r.strip()]
    unknown = [r for r in rules if r not in ALL_RULES]
    if unknown:
        raise ConfigError(
            f"unknown rule id(s): {', '.join(unknown)}; "
            f"known rules: {', '.join(ALL_RULES)}")
    return rules


def cmd_validate(args) -> int:
    cfg = _load_config(args)
    rules = _parse_rules(args.rules)
    store = NanopubStore(cfg.store_dir, create=False)
    registry = VocabularyRegistry(cfg.base)
    corpus = store.load_all()
    quality = evaluate(corpus, registry, rules=rules, store=store)
    if args.report_dir:
        created = report_mod.write_report(quality, args.report_dir)
        log.info("report written: %s", ", ".join(str(p) for p in created))
    if args.format == "json":
        _print_json(quality.to_json_dict())
    else:
        sys.stdout.write(render_text(quality))
    return 1 if quality.violations else 0


def cmd_stats(args) -> int:
    cfg = _load_config(args)
    store = NanopubStore(cfg.store_dir, create=False)
    registry = VocabularyRegistry(cfg.base)
    quality = corpus_stats(store.load_all(), registry)
    if args.report_dir:
        created = report_mod.write_report(quality, args.report_dir)
        log.info("report written: %s", ", ".join(str(p) for p in created))
    if args.format == "json":
        _print_json(quality.to_json_dict())
    else:
        sys.stdout.write(render_text(quality))
    return 0


def _parse_term(registry: VocabularyRegistry, raw, allow_literal: bool):
    if raw is None:
        return None
    try:
        return registry.expand(raw)
    except RdfError:
        if allow_literal:
            return Literal(raw)
        raise ConfigError(f"not an IRI or prefixed name: {raw!r}") from None


def cmd_query(args) -> int:
    cfg = _load_config(args)
    store = NanopubStore(cfg.store_dir, create=False)
    registry = VocabularyRegistry(cfg.base)
    subject = _parse_term(registry, args.s, allow_literal=False)
    predicate = _parse_term(registry, args.p, allow_literal=False)
    obj = _parse_term(registry, args.o, allow_literal=True)
    graph = _parse_term(registry, args.g, allow_literal=False)
    matches = list(store.query(subject=subject, predicate=predicate,
                               obj=obj, graph=graph))
    if args.format == "json":
        _print_json([{"nanopub": gupi.value, **quad_to_json(quad)}
                     for gupi, quad in matches])
    else:
        prefixes = registry.prefixes
        for gupi, quad in matches:
            fields = [format_term(t, prefixes)
                      for t in (quad.subject, quad.predicate, quad.object, quad.graph)]
            print("\t".join(fields))
        log.info("%d quad(s) matched", len(matches))
    return 0


def cmd_store_verify(args) -> int:
    cfg = _load_config(args)
    store = NanopubStore(cfg.store_dir, create=False)
    problems = store.verify()
    if problems:
        for problem in problems:
            print(problem)
        return 1
    print(f"store ok: {len(store.list())} nanopub(s) verified")
    return 0


def cmd_serve_fixtures(args) -> int:
    faults = None
    if args.faults:
        try:
            raw = json.loads(args.faults)
        except ValueError as exc:
            raise ConfigError(f"--faults is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict) or \
                not all(isinstance(v, str) for v in raw.values()):
            raise ConfigError("--faults must map route paths to script strings")
        for spec in raw.values():
            parse_fault_script(spec)
        faults = raw
    server = FixtureServer(args.fixtures, port=args.port, fault_scripts=faults)
    with server:
        print(f"serving fixtures from {args.fixtures} on {server.base_url}",
              file=sys.stderr)
        stop = {"flag": False}

        def handle(_signum, _frame):
            stop["flag"] = True

        signal.signal(signal.SIGINT, handle)
        signal.signal(signal.SIGTERM, handle)
        while not stop["flag"]:
            time.sleep(0.2)
    return 0


# -- wiring -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="gap",
        description="Build, store, and check genome assembly nanopublications.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add_seed_flags(sp):
        group = sp.add_mutually_exclusive_group(required=True)
        group.add_argument("--accession", default=None,
                           help="assembly accession to start from")
        group.add_argument("--url", default=None,
                           help="assembly page URL containing the accession")
        sp.add_argument("--orcid", action="append", default=None, metavar="IRI",
                        help="curator ORCID (repeatable; overrides configuration)")

    p = sub.add_parser("run", parents=[common],
                       help="fetch, mirror, build, and store a corpus "
                            "seeded from one assembly")
    add_seed_flags(p)
    p.add_argument("--dry-run", action="store_true",
                   help="fetch and build but leave the store untouched")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fetch", parents=[common],
                       help="fetch and mirror wire documents without building")
    add_seed_flags(p)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("build", parents=[common],
                       help="build and store nanopubs from mirrored documents")
    p.add_argument("--orcid", action="append", default=None, metavar="IRI",
                   help="curator ORCID (repeatable; overrides configuration)")
    p.add_argument("--dry-run", action="store_true",
                   help="build but leave the store untouched")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", parents=[common],
                       help="lint the stored corpus")
    p.add_argument("--rules", default=None,
                   help="comma-separated rule ids (default: all)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--report-dir", default=None,
                   help="also write CSV files and figures here")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", parents=[common],
                       help="corpus statistics")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--report-dir", default=None,
                   help="also write CSV files and figures here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("query", parents=[common],
                       help="match quads across the stored corpus")
    p.add_argument("--s", default=None, help="subject IRI or prefixed name")
    p.add_argument("--p", default=None, help="predicate IRI or prefixed name")
    p.add_argument("--o", default=None,
                   help="object IRI, prefixed name, or literal text")
    p.add_argument("--g", default=None, help="graph IRI or prefixed name")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("store", parents=[],
                       help="store maintenance")
    store_sub = p.add_subparsers(dest="store_command", metavar="ACTION")
    store_sub.required = True
    sp = store_sub.add_parser("verify", parents=[common],
                              help="check files against the index")
    sp.set_defaults(func=cmd_store_verify)

    p = sub.add_parser("serve-fixtures", parents=[],
                       help="serve canned metadata documents over HTTP")
    p.add_argument("--fixtures", required=True, help="fixture directory")
    p.add_argument("--port", type=int, default=8645)
    p.add_argument("--faults", default=None,
                   help='JSON mapping of route to fault script, e.g. '
                        '\'{"/assembly/X": "503,503,200"}\'')
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__}")
    p.set_defaults(func=cmd_serve_fixtures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING
    if getattr(args, "verbose", 0) == 1:
        level = logging.INFO
    elif getattr(args, "verbose", 0) >= 2:
        level = logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, pipeline.NoAccessionFound) as exc:
        print(f"gap: {exc}", file=sys.stderr)
        return 2
    except (StoreError, GatewayError, NanopubError, RdfError,
            pipeline.PipelineError, FixtureError) as exc:
        print(f"gap: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
