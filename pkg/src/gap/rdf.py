"""RDF terms, quads, datasets, and a TriG serializer/parser for named-graph data.

The model is deliberately small. Terms are IRIs and literals only; blank
nodes are rejected everywhere, which keeps graph comparison a plain set
comparison. Every triple lives in a named graph, so the unit of data is the
quad and the container is the Dataset.

Serialization is deterministic: the same dataset always produces the same
bytes, which makes stored files diffable and lets callers compare corpora by
hashing. The parser accepts the serializer's output plus the usual TriG
conveniences (`a`, predicate/object lists with `;` and `,`, comments).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"
RDF_LANGSTRING = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

# Graph names ending in these suffixes are presented in this order; any
# other graph sorts lexicographically after them.
_GRAPH_SUFFIX_RANK = {"#Head": 0, "#assertion": 1, "#provenance": 2, "#pubinfo": 3}

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_FORBIDDEN_RE = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_PREFIX_LABEL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_\-]*$")
# Conservative subset of the TriG PN_LOCAL production: ASCII letters, digits
# and underscore anywhere; dots allowed inside but not at either end; dashes
# allowed after the first character.
_LOCAL_NAME_RE = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?$")
_LANGTAG_RE = re.compile(r"^[A-Za-z]{1,8}(?:-[A-Za-z0-9]{1,8})*$")


class RdfError(Exception):
    """Base class for errors raised by this module."""


class InvalidIri(RdfError):
    pass


class UnknownPrefix(RdfError):
    def __init__(self, label: str, line: int = 0, column: int = 0):
        super().__init__(f"unknown prefix '{label}:'" + (f" at {line}:{column}" if line else ""))
        self.label = label
        self.line = line
        self.column = column


class ParseError(RdfError):
    def __init__(self, message: str, line: int, column: int, token: str = ""):
        detail = f"{message} at {line}:{column}"
        if token:
            detail += f" near {token!r}"
        super().__init__(detail)
        self.line = line
        self.column = column
        self.token = token


class BlankNodeUnsupported(ParseError):
    def __init__(self, line: int, column: int, token: str = ""):
        super().__init__("blank nodes are not supported", line, column, token)


@dataclass(frozen=True, order=True)
class Iri:
    """An absolute IRI. Requires a scheme and rejects whitespace and <>\"."""

    value: str

    def __post_init__(self):
        if not isinstance(self.value, str) or not self.value:
            raise InvalidIri("IRI must be a non-empty string")
        if not _SCHEME_RE.match(self.value):
            raise InvalidIri(f"IRI has no scheme: {self.value!r}")
        bad = _FORBIDDEN_RE.search(self.value)
        if bad:
            raise InvalidIri(f"IRI contains forbidden character {bad.group()!r}: {self.value!r}")

    def __str__(self) -> str:
        return self.value


def make_iri(text: str) -> Iri:
    """Validate `text` as an IRI, trimming surrounding whitespace only."""
    if not isinstance(text, str):
        raise InvalidIri(f"expected string, got {type(text).__name__}")
    return Iri(text.strip())


@dataclass(frozen=True)
class Literal:
    """An RDF literal: a lexical form plus either a datatype or a language tag.

    A plain literal has datatype xsd:string; a language-tagged literal has
    the implicit datatype rdf:langString. Explicitly passing those datatypes
    normalizes to the implicit representation so equality stays structural.
    """

    lexical: str
    datatype: Optional[Iri] = None
    language: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.lexical, str):
            raise TypeError(f"lexical form must be str, got {type(self.lexical).__name__}")
        if self.language is not None and self.datatype is not None:
            if self.datatype.value == RDF_LANGSTRING:
                object.__setattr__(self, "datatype", None)
            else:
                raise ValueError("datatype and language are mutually exclusive")
        if self.language is not None and not _LANGTAG_RE.match(self.language):
            raise ValueError(f"malformed language tag: {self.language!r}")
        if self.datatype is not None and self.datatype.value == XSD_STRING:
            object.__setattr__(self, "datatype", None)

    def effective_datatype(self) -> Iri:
        if self.language is not None:
            return Iri(RDF_LANGSTRING)
        if self.datatype is not None:
            return self.datatype
        return Iri(XSD_STRING)

    def sort_key(self) -> tuple:
        return (self.lexical, self.language or "", self.datatype.value if self.datatype else "")


Term = Union[Iri, Literal]


def term_key(term: Term) -> tuple:
    """Total order over terms: IRIs before literals, then by content."""
    if isinstance(term, Iri):
        return (0, term.value, "", "")
    return (1,) + term.sort_key()


@dataclass(frozen=True)
class Quad:
    subject: Iri
    predicate: Iri
    object: Term
    graph: Iri

    def __post_init__(self):
        for name in ("subject", "predicate", "graph"):
            if not isinstance(getattr(self, name), Iri):
                raise TypeError(f"{name} must be an Iri")
        if not isinstance(self.object, (Iri, Literal)):
            raise TypeError("object must be an Iri or Literal")


class PrefixMap:
    """Ordered label -> namespace map; labels and namespaces are both unique."""

    def __init__(self, entries: Optional[Iterable[tuple[str, Iri]]] = None):
        self._by_label: dict[str, Iri] = {}
        self._by_namespace: dict[str, str] = {}
        if entries:
            for label, namespace in entries:
                self.add(label, namespace)

    def add(self, label: str, namespace: Iri) -> None:
        if not _PREFIX_LABEL_RE.match(label):
            raise ValueError(f"malformed prefix label: {label!r}")
        if not isinstance(namespace, Iri):
            namespace = make_iri(namespace)
        existing = self._by_label.get(label)
        if existing is not None:
            if existing == namespace:
                return
            raise ValueError(f"prefix {label!r} already bound to {existing.value}")
        owner = self._by_namespace.get(namespace.value)
        if owner is not None:
            raise ValueError(f"namespace {namespace.value} already bound to prefix {owner!r}")
        self._by_label[label] = namespace
        self._by_namespace[namespace.value] = label

    def get(self, label: str) -> Optional[Iri]:
        return self._by_label.get(label)

    def items(self) -> list[tuple[str, Iri]]:
        return list(self._by_label.items())

    def copy(self) -> "PrefixMap":
        return PrefixMap(self.items())

    def __contains__(self, label: str) -> bool:
        return label in self._by_label

    def __len__(self) -> int:
        return len(self._by_label)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrefixMap):
            return NotImplemented
        return self.items() == other.items()

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self):
        return f"PrefixMap({self.items()!r})"


def is_local_name(text: str) -> bool:
    """True when `text` can stand after a prefix label in TriG output."""
    return bool(_LOCAL_NAME_RE.match(text))


def compact(iri: Iri, prefixes: PrefixMap) -> str:
    """Compact an IRI to `label:local` under the longest matching namespace.

    Falls back to the angle-bracket form when no registered namespace
    matches or when the remainder is not a valid local name.
    """
    best: Optional[tuple[int, str]] = None
    for label, namespace in prefixes.items():
        ns = namespace.value
        if not iri.value.startswith(ns):
            continue
        local = iri.value[len(ns):]
        if not local or not is_local_name(local):
            continue
        if best is None or len(ns) > best[0]:
            best = (len(ns), f"{label}:{local}")
    if best is not None:
        return best[1]
    return f"<{iri.value}>"


class Dataset:
    """An immutable set of quads plus the prefix map used to render them.

    Two datasets are equal when they hold the same quads and the same
    prefix bindings in the same order; equal datasets serialize to
    identical bytes.
    """

    def __init__(self, quads: Iterable[Quad] = (), prefixes: Optional[PrefixMap] = None):
        qs = set()
        for q in quads:
            if not isinstance(q, Quad):
                raise TypeError(f"expected Quad, got {type(q).__name__}")
            qs.add(q)
        self._quads = frozenset(qs)
        self.prefixes = prefixes.copy() if prefixes is not None else PrefixMap()

    def quad_set(self) -> frozenset:
        return self._quads

    def graphs(self) -> list[Iri]:
        return sorted({q.graph for q in self._quads}, key=_graph_sort_key)

    def graph_quads(self, graph: Iri) -> list[Quad]:
        found = [q for q in self._quads if q.graph == graph]
        found.sort(key=lambda q: (term_key(q.subject), term_key(q.predicate), term_key(q.object)))
        return found

    def __len__(self) -> int:
        return len(self._quads)

    def __iter__(self) -> Iterator[Quad]:
        ordered = sorted(
            self._quads,
            key=lambda q: (_graph_sort_key(q.graph), term_key(q.subject),
                           term_key(q.predicate), term_key(q.object)),
        )
        return iter(ordered)

    def __contains__(self, quad: Quad) -> bool:
        return quad in self._quads

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._quads == other._quads and self.prefixes == other.prefixes

    def __hash__(self):
        return hash((self._quads, self.prefixes))

    def __repr__(self):
        return f"<Dataset quads={len(self._quads)} graphs={len(self.graphs())}>"


def match_quads(dataset: Dataset, subject: Optional[Iri] = None,
                predicate: Optional[Iri] = None, obj: Optional[Term] = None,
                graph: Optional[Iri] = None) -> list[Quad]:
    """Return all quads matching the pattern; None positions are wildcards."""
    return [
        q for q in dataset
        if (subject is None or q.subject == subject)
        and (predicate is None or q.predicate == predicate)
        and (obj is None or q.object == obj)
        and (graph is None or q.graph == graph)
    ]


# ---------------------------------------------------------------------------
# serialization


def _graph_sort_key(graph: Iri) -> tuple:
    for suffix, rank in _GRAPH_SUFFIX_RANK.items():
        if graph.value.endswith(suffix):
            return (0, graph.value[: -len(suffix)], rank)
    return (1, graph.value, 0)


_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
}


def _escape(text: str) -> str:
    out = []
    for ch in text:
        out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def _term_text(term: Term, prefixes: PrefixMap) -> str:
    if isinstance(term, Iri):
        return compact(term, prefixes)
    rendered = f'"{_escape(term.lexical)}"'
    if term.language is not None:
        return f"{rendered}@{term.language}"
    if term.datatype is not None:
        return f"{rendered}^^{compact(term.datatype, prefixes)}"
    return rendered


def format_term(term: Term, prefixes: PrefixMap) -> str:
    """Render one term the way the serializer would inside a graph block."""
    return _term_text(term, prefixes)


def _predicate_text(term: Iri, prefixes: PrefixMap) -> str:
    if term.value == RDF_TYPE:
        return "a"
    return compact(term, prefixes)


def serialize_trig(dataset: Dataset) -> str:
    """Render a dataset as TriG text; deterministic for equal datasets.

    Prefix directives come first in map order, then one block per graph in
    canonical graph order. Within a graph, triples are sorted by subject,
    predicate, object and same-subject runs are joined with semicolons.
    """
    prefixes = dataset.prefixes
    lines = [f"@prefix {label}: <{ns.value}> ." for label, ns in prefixes.items()]

    blocks = []
    for graph in dataset.graphs():
        triples = dataset.graph_quads(graph)
        block = [f"{compact(graph, prefixes)} {{"]
        i = 0
        while i < len(triples):
            j = i
            while j < len(triples) and triples[j].subject == triples[i].subject:
                j += 1
            run = triples[i:j]
            stext = compact(run[0].subject, prefixes)
            for k, quad in enumerate(run):
                ptext = _predicate_text(quad.predicate, prefixes)
                otext = _term_text(quad.object, prefixes)
                terminator = " ;" if k < len(run) - 1 else " ."
                if k == 0:
                    block.append(f"  {stext} {ptext} {otext}{terminator}")
                else:
                    block.append(f"    {ptext} {otext}{terminator}")
            i = j
        block.append("}")
        blocks.append("\n".join(block))

    parts = []
    if lines:
        parts.append("\n".join(lines))
    if blocks:
        parts.append("\n\n".join(blocks))
    if not parts:
        return ""
    return "\n\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# parsing


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def peek2(self) -> str:
        return self.text[self.pos:self.pos + 2]

    def advance(self, n: int = 1) -> str:
        taken = self.text[self.pos:self.pos + n]
        for ch in taken:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return taken

    def skip_ws(self) -> None:
        while not self.eof():
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "#":
                while not self.eof() and self.peek() != "\n":
                    self.advance()
            else:
                return

    def error(self, message: str, token: str = "") -> ParseError:
        return ParseError(message, self.line, self.col, token)


_PNAME_LABEL_CHARS = re.compile(r"[A-Za-z0-9_\-]")
_LOCAL_CHARS = re.compile(r"[A-Za-z0-9_.\-]")

_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def parse_trig(text: str) -> Dataset:
    """Parse TriG text into a Dataset.

    Supported: @prefix directives, named graph blocks, `a`, `;`/`,` lists,
    comments, IRI refs, prefixed names and string literals with language
    tags or datatypes. Blank nodes raise BlankNodeUnsupported; anything
    outside the subset raises ParseError with position information.
    """
    sc = _Scanner(text)
    prefixes = PrefixMap()
    quads: list[Quad] = []

    while True:
        sc.skip_ws()
        if sc.eof():
            break
        if sc.peek() == "@":
            _parse_prefix_directive(sc, prefixes)
            continue
        graph = _parse_iri(sc, prefixes)
        sc.skip_ws()
        if sc.peek() != "{":
            raise sc.error("expected '{' after graph name", sc.peek())
        sc.advance()
        _parse_graph_body(sc, prefixes, graph, quads)

    return Dataset(quads, prefixes)


def _parse_prefix_directive(sc: _Scanner, prefixes: PrefixMap) -> None:
    word = sc.text[sc.pos:sc.pos + 7]
    if word != "@prefix":
        raise sc.error("unsupported directive", word)
    sc.advance(7)
    sc.skip_ws()
    label = _read_prefix_label(sc)
    sc.skip_ws()
    if sc.peek() != "<":
        raise sc.error("expected namespace IRI in prefix directive", sc.peek())
    namespace = _read_iriref(sc)
    sc.skip_ws()
    if sc.peek() != ".":
        raise sc.error("expected '.' after prefix directive", sc.peek())
    sc.advance()
    existing = prefixes.get(label)
    if existing is not None and existing != namespace:
        raise ParseError(f"prefix {label!r} redeclared with a different namespace",
                         sc.line, sc.col, label)
    if existing is None:
        try:
            prefixes.add(label, namespace)
        except ValueError as exc:
            raise ParseError(str(exc), sc.line, sc.col, label) from exc


def _read_prefix_label(sc: _Scanner) -> str:
    start = sc.pos
    while not sc.eof() and _PNAME_LABEL_CHARS.match(sc.peek()):
        sc.advance()
    label = sc.text[start:sc.pos]
    if sc.peek() != ":":
        raise sc.error("expected ':' after prefix label", label)
    sc.advance()
    return label


def _read_iriref(sc: _Scanner) -> Iri:
    line, col = sc.line, sc.col
    sc.advance()  # consume '<'
    start = sc.pos
    while not sc.eof() and sc.peek() != ">":
        if sc.peek() in "\n\r":
            raise sc.error("newline inside IRI")
        sc.advance()
    if sc.eof():
        raise ParseError("unterminated IRI", line, col)
    raw = sc.text[start:sc.pos]
    sc.advance()  # consume '>'
    try:
        return Iri(raw)
    except InvalidIri as exc:
        raise ParseError(str(exc), line, col, raw) from exc


def _parse_iri(sc: _Scanner, prefixes: PrefixMap) -> Iri:
    ch = sc.peek()
    if ch == "<":
        return _read_iriref(sc)
    if ch == "_" and sc.peek2() == "_:":
        raise BlankNodeUnsupported(sc.line, sc.col, "_:")
    if ch == "[":
        raise BlankNodeUnsupported(sc.line, sc.col, "[")
    return _read_pname(sc, prefixes)


def _read_pname(sc: _Scanner, prefixes: PrefixMap) -> Iri:
    line, col = sc.line, sc.col
    start = sc.pos
    while not sc.eof() and _PNAME_LABEL_CHARS.match(sc.peek()):
        sc.advance()
    label = sc.text[start:sc.pos]
    if sc.peek() != ":":
        raise ParseError("expected a term", line, col, label or sc.peek())
    sc.advance()
    lstart = sc.pos
    while not sc.eof() and _LOCAL_CHARS.match(sc.peek()):
        sc.advance()
    local = sc.text[lstart:sc.pos]
    # A trailing dot is statement punctuation, not part of the local name.
    while local.endswith("."):
        local = local[:-1]
        sc.pos -= 1
        sc.col -= 1
    namespace = prefixes.get(label)
    if namespace is None:
        raise UnknownPrefix(label, line, col)
    try:
        return Iri(namespace.value + local)
    except InvalidIri as exc:
        raise ParseError(str(exc), line, col, f"{label}:{local}") from exc


def _read_string(sc: _Scanner) -> str:
    line, col = sc.line, sc.col
    sc.advance()  # consume opening quote
    out: list[str] = []
    while True:
        if sc.eof():
            raise ParseError("unterminated string literal", line, col)
        ch = sc.peek()
        if ch == '"':
            sc.advance()
            return "".join(out)
        if ch in "\n\r":
            raise sc.error("unescaped newline in string literal")
        if ch == "\\":
            sc.advance()
            esc = sc.peek()
            if esc not in _UNESCAPES:
                raise sc.error(f"unsupported escape '\\{esc}'")
            out.append(_UNESCAPES[esc])
            sc.advance()
            continue
        out.append(sc.advance())


def _read_langtag(sc: _Scanner) -> str:
    sc.advance()  # consume '@'
    start = sc.pos
    while not sc.eof() and (sc.peek().isalnum() or sc.peek() == "-"):
        sc.advance()
    tag = sc.text[start:sc.pos]
    if not _LANGTAG_RE.match(tag):
        raise sc.error(f"malformed language tag '@{tag}'")
    return tag


def _parse_object(sc: _Scanner, prefixes: PrefixMap) -> Term:
    ch = sc.peek()
    if ch == '"':
        lexical = _read_string(sc)
        if sc.peek() == "@":
            return Literal(lexical, language=_read_langtag(sc))
        if sc.peek2() == "^^":
            sc.advance(2)
            return Literal(lexical, datatype=_parse_iri(sc, prefixes))
        return Literal(lexical)
    return _parse_iri(sc, prefixes)


def _parse_predicate(sc: _Scanner, prefixes: PrefixMap) -> Iri:
    # Bare `a` is rdf:type when followed by whitespace or a term opener.
    if sc.peek() == "a":
        after = sc.text[sc.pos + 1:sc.pos + 2]
        if after == "" or after in " \t\r\n<\"":
            sc.advance()
            return Iri(RDF_TYPE)
    return _parse_iri(sc, prefixes)


def _parse_graph_body(sc: _Scanner, prefixes: PrefixMap, graph: Iri,
                      quads: list[Quad]) -> None:
    while True:
        sc.skip_ws()
        if sc.eof():
            raise sc.error("unterminated graph block")
        if sc.peek() == "}":
            sc.advance()
            return
        subject = _parse_iri(sc, prefixes)
        _parse_predicate_object_list(sc, prefixes, graph, subject, quads)


def _parse_predicate_object_list(sc: _Scanner, prefixes: PrefixMap, graph: Iri,
                                 subject: Iri, quads: list[Quad]) -> None:
    while True:
        sc.skip_ws()
        predicate = _parse_predicate(sc, prefixes)
        while True:
            sc.skip_ws()
            obj = _parse_object(sc, prefixes)
            quads.append(Quad(subject, predicate, obj, graph))
            sc.skip_ws()
            if sc.peek() == ",":
                sc.advance()
                continue
            break
        if sc.peek() == ";":
            sc.advance()
            sc.skip_ws()
            # A dangling semicolon may close the statement or the block.
            if sc.peek() == ".":
                sc.advance()
                return
            if sc.peek() == "}":
                return
            continue
        if sc.peek() == ".":
            sc.advance()
            return
        if sc.peek() == "}":
            # Last statement in a block may omit the final dot.
            return
        raise sc.error("expected '.', ';' or ',' after object", sc.peek())
