"""Reader and canonical writer of the line-based scenario format.

See docs/scenario-format.md for the grammar.
"""
import re
from typing import Any

from ..errors import ScenarioError
from .diagnostics import Diagnostic, errors, sort_diagnostics, with_suggestion
from .schema import (
    ANALYSIS_KEYS,
    BLOCK_KEYS,
    STATEMENTS,
    STIMULUS_KEYS,
    VERSION,
    AnalysisDecl,
    BlockDecl,
    KeySpec,
    NetDecl,
    ScenarioDoc,
    StimulusDecl,
)
from .units import Quantity, UnitError, format_number, parse_count, parse_plain, parse_quantity

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]{0,63}$")
_TOKEN = re.compile(r"\S+")

QUANTITY_KINDS = ("current", "time", "steepness", "temperature", "drift")


class _Token:
    __slots__ = ("text", "col")

    def __init__(self, text: str, col: int):
        self.text = text
        self.col = col


def _tokens(line: str) -> list[_Token]:
    line = line.split("#", 1)[0]
    return [_Token(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]


def _parse_value(spec: KeySpec, text: str) -> Any:
    if spec.kind in QUANTITY_KINDS:
        return parse_quantity(text, spec.kind)
    if spec.kind == "count":
        return parse_count(text)
    if spec.kind == "number":
        return parse_plain(text)
    if spec.kind == "word":
        if text not in spec.choices:
            raise UnitError(with_suggestion(f"expected one of {', '.join(spec.choices)}, got {text!r}",
                                            text, spec.choices), code="E100")
        return text
    if spec.kind == "id":
        if not _IDENT.match(text):
            raise UnitError(f"invalid identifier {text!r}", code="E100")
        return text
    if spec.kind == "points":
        pairs = []
        for item in text.split(","):
            t, sep, i = item.partition(":")
            if not sep:
                raise UnitError(f"point {item!r} is not time:current", code="E100")
            pairs.append((parse_quantity(t, "time"), parse_quantity(i, "current")))
        return tuple(pairs)
    if spec.kind == "events":
        if not text:
            return ()
        events = []
        for item in text.split(","):
            t, sep, p = item.partition(":")
            if not sep or p not in ("+", "-"):
                raise UnitError(f"spike {item!r} is not time:+ or time:-", code="E100")
            events.append((parse_quantity(t, "time"), p))
        return tuple(events)
    raise AssertionError(spec.kind)


def format_value(value: Any) -> str:
    if isinstance(value, Quantity):
        return str(value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, tuple):
        return ",".join(f"{a}:{b}" for a, b in value)
    return str(value)


class _Reader:
    def __init__(self):
        self.doc = ScenarioDoc()
        self.diags: list[Diagnostic] = []
        self.version_seen = False
        self.ids: set[str] = set()

    def error(self, code: str, line: int, col: int, message: str, ident: str | None = None):
        self.diags.append(Diagnostic.error(code, line, col, message, ident))

    def ident(self, tok: _Token | None, line: int, what: str, fallback_col: int) -> str | None:
        if tok is None:
            self.error("E100", line, fallback_col, f"missing {what}")
            return None
        if not _IDENT.match(tok.text):
            self.error("E100", line, tok.col, f"invalid {what} {tok.text!r}", tok.text)
            return None
        return tok.text

    def params(self, toks: list[_Token], keys: dict[str, KeySpec], line: int, col: int, what: str) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for tok in toks:
            key, sep, raw = tok.text.partition("=")
            if not sep or not key:
                self.error("E100", line, tok.col, f"expected key=value, got {tok.text!r}", tok.text)
                continue
            if key not in keys:
                msg = with_suggestion(f"unknown key {key!r} for {what}", key, keys)
                self.error("E101", line, tok.col, msg, key)
                continue
            if key in out:
                self.error("E103", line, tok.col, f"key {key!r} given twice", key)
                continue
            try:
                out[key] = _parse_value(keys[key], raw)
            except UnitError as e:
                self.error(e.code, line, tok.col + len(key) + 1, f"{key}: {e}", key)
        for key, spec in keys.items():
            if spec.required and key not in out and not any(t.text.startswith(key + "=") for t in toks):
                self.error("E104", line, col, f"{what} needs {key}=", key)
        return out

    def kind(self, tok: _Token | None, table: dict, line: int, fallback_col: int, what: str) -> str | None:
        if tok is None:
            self.error("E100", line, fallback_col, f"missing {what} kind")
            return None
        if tok.text not in table:
            msg = with_suggestion(f"unknown {what} kind {tok.text!r}", tok.text, table)
            self.error("E100", line, tok.col, msg, tok.text)
            return None
        return tok.text

    # -------------------------
    # Statements
    # -------------------------
    def version(self, toks: list[_Token], line: int):
        if self.version_seen:
            self.error("E103", line, toks[0].col, "version given twice")
            return
        self.version_seen = True
        if len(toks) != 2:
            self.error("E100", line, toks[0].col, "expected: version <n>")
            return
        try:
            v = parse_count(toks[1].text)
        except UnitError as e:
            self.error("E100", line, toks[1].col, str(e))
            return
        if v != VERSION:
            self.error("E105", line, toks[1].col, f"unsupported version {v}, expected {VERSION}")
        self.doc.version = v

    def block(self, toks: list[_Token], line: int):
        head = toks[0]
        bid = self.ident(toks[1] if len(toks) > 1 else None, line, "block id", head.col)
        kind = self.kind(toks[2] if len(toks) > 2 else None, BLOCK_KEYS, line, head.col, "block")
        if bid is not None and bid in self.ids:
            self.error("E103", line, toks[1].col, f"duplicate block id {bid!r}", bid)
            bid = None
        if kind is None:
            return
        params = self.params(toks[3:], BLOCK_KEYS[kind], line, head.col, f"{kind} block")
        if bid is not None:
            self.ids.add(bid)
            self.doc.blocks.append(BlockDecl(bid, kind, params, line))

    def net(self, toks: list[_Token], line: int):
        head = toks[0]
        target = self.ident(toks[1] if len(toks) > 1 else None, line, "net target", head.col)
        if len(toks) < 3 or toks[2].text != "<-":
            col = toks[2].col if len(toks) > 2 else head.col
            self.error("E100", line, col, "expected: net <target> <- <driver> ...")
            return
        if len(toks) < 4:
            self.error("E100", line, toks[2].col, f"net into {target} has no drivers", target)
            return
        drivers = [self.ident(t, line, "driver", t.col) for t in toks[3:]]
        if target is None or None in drivers:
            return
        self.doc.nets.append(NetDecl(target, tuple(drivers), line))

    def stimulus(self, toks: list[_Token], line: int):
        head = toks[0]
        source = self.ident(toks[1] if len(toks) > 1 else None, line, "stimulus source", head.col)
        kind = self.kind(toks[2] if len(toks) > 2 else None, STIMULUS_KEYS, line, head.col, "stimulus")
        if kind is None:
            return
        params = self.params(toks[3:], STIMULUS_KEYS[kind], line, head.col, f"{kind} stimulus")
        if source is not None:
            self.doc.stimuli.append(StimulusDecl(source, kind, params, line))

    def analysis(self, toks: list[_Token], line: int):
        head = toks[0]
        kind = self.kind(toks[1] if len(toks) > 1 else None, ANALYSIS_KEYS, line, head.col, "analysis")
        if self.doc.analyses:
            self.error("E103", line, head.col, "only one analysis per scenario")
        if kind is None:
            return
        params = self.params(toks[2:], ANALYSIS_KEYS[kind], line, head.col, f"{kind} analysis")
        self.doc.analyses.append(AnalysisDecl(kind, params, line))

    def seed(self, toks: list[_Token], line: int):
        if len(toks) != 2:
            self.error("E100", line, toks[0].col, "expected: seed <n>")
            return
        if self.doc.seed is not None:
            self.error("E103", line, toks[0].col, "seed given twice")
        try:
            self.doc.seed = parse_count(toks[1].text)
        except UnitError as e:
            self.error("E100", line, toks[1].col, str(e))


def read_scenario(text: str | bytes) -> tuple[ScenarioDoc, list[Diagnostic]]:
    """Parse without raising: the document as far as it could be read, and
    every syntax-level diagnostic."""
    reader = _Reader()
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            reader.error("E100", 1, 1, f"scenario is not valid UTF-8 ({e.reason})")
            return reader.doc, reader.diags

    handlers = {
        "version": reader.version,
        "block": reader.block,
        "net": reader.net,
        "stimulus": reader.stimulus,
        "analysis": reader.analysis,
        "seed": reader.seed,
    }

    statements = 0
    for n, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw)
        if not toks:
            continue
        head = toks[0].text
        if head not in handlers:
            reader.error("E100", n, toks[0].col, with_suggestion(f"unknown statement {head!r}", head, STATEMENTS), head)
            statements += 1
            continue
        if head == "version" and statements:
            reader.error("E100", n, toks[0].col, "version must be the first statement")
        statements += 1
        handlers[head](toks, n)

    if not reader.version_seen:
        reader.error("E104", 1, 1, "missing version line")
    return reader.doc, sort_diagnostics(reader.diags)


def parse_scenario(text: str | bytes) -> ScenarioDoc:
    doc, diags = read_scenario(text)
    if errors(diags):
        raise ScenarioError(diags)
    return doc


# -------------------------
# Canonical form
# -------------------------
def _kv(params: dict[str, Any], keys: dict[str, KeySpec]) -> str:
    parts = [f"{k}={format_value(params[k])}" for k in keys if k in params]
    return (" " + " ".join(parts)) if parts else ""


def format_scenario(doc: ScenarioDoc) -> str:
    lines = [f"version {doc.version}"]
    for b in doc.blocks:
        lines.append(f"block {b.id} {b.kind}{_kv(b.params, BLOCK_KEYS[b.kind])}")
    for n in doc.nets:
        lines.append(f"net {n.target} <- {' '.join(n.drivers)}")
    for s in doc.stimuli:
        lines.append(f"stimulus {s.source} {s.kind}{_kv(s.params, STIMULUS_KEYS[s.kind])}")
    for a in doc.analyses:
        lines.append(f"analysis {a.kind}{_kv(a.params, ANALYSIS_KEYS[a.kind])}")
    if doc.seed is not None:
        lines.append(f"seed {doc.seed}")
    return "\n".join(lines) + "\n"
