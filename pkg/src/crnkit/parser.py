"""Read and write the ``.crn`` reaction-network text format.

One construct per line::

    # comment runs to end of line
    species: A B C          # optional header; fixes species order and names
    A + 2 B -> C @ 1.5      # one transition
    C <-> A + 2 B @ 2, 0.5  # reversible: exactly two rates, expands to two
    0 -> A @ 1e-3           # '0' is the empty complex

Species names match ``[A-Za-z_][A-Za-z0-9_]*``.  Coefficients are positive
integers and default to 1.  Rates are positive decimals; scientific
notation is allowed.  Without a ``species:`` header the species order is
first appearance; with one, any undeclared name is an error.  Repeated
species inside a complex accumulate (``A + A`` equals ``2 A``), and
duplicate reaction lines are kept as distinct transitions.

:func:`parse_network` raises :class:`ParseError` on the first pass over
the whole file, collecting one diagnostic per offending line;
:func:`parse_network_report` returns the diagnostics without raising.
:func:`format_network` writes the canonical form, which parses back to an
equal network (labels excepted, since the format does not carry them).
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

from .errors import CrnError
from .network import CountVector, Network, SelfLoopWarning, Transition

__all__ = [
    "Diagnostic",
    "ParseError",
    "ParseWarning",
    "parse_network",
    "parse_network_report",
    "format_network",
    "format_complex",
]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<arrow><->|->)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>[@,:+\-])"
)


class ParseWarning(UserWarning):
    """Non-fatal parse diagnostic (empty file, self-loop reaction)."""


@dataclass(frozen=True)
class Diagnostic:
    """A positioned parser message; ``line`` and ``column`` are 1-based."""

    line: int
    column: int
    code: str
    message: str
    severity: str  # "error" | "warning"

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message} [{self.code}]"


class ParseError(CrnError):
    """Raised when the text contains at least one error-level diagnostic."""

    def __init__(self, diagnostics):
        self.diagnostics = tuple(diagnostics)
        errors = [d for d in self.diagnostics if d.severity == "error"]
        self.code = errors[0].code if errors else "E_SYNTAX"
        super().__init__("; ".join(str(d) for d in errors))


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int


class _LineError(Exception):
    """Internal: abort parsing of the current line after recording a diagnostic."""


class _Cursor:
    def __init__(self, tokens, lineno, line_length, diagnostics):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.end_column = line_length + 1
        self.diagnostics = diagnostics

    def peek(self, ahead=0):
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def at_end(self):
        return self.pos >= len(self.tokens)

    def column(self):
        tok = self.peek()
        return tok.column if tok is not None else self.end_column

    def fail(self, message, code="E_SYNTAX", column=None):
        self.diagnostics.append(
            Diagnostic(self.lineno, column if column is not None else self.column(),
                       code, message, "error")
        )
        raise _LineError()


def _tokenize(line, lineno, diagnostics):
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            diagnostics.append(
                Diagnostic(lineno, pos + 1, "E_SYNTAX",
                           f"unexpected character {line[pos]!r}", "error")
            )
            return None
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), m.start() + 1))
        pos = m.end()
    return tokens


def _parse_complex(cur, env):
    """Parse COMPLEX; returns {name: count} ({} for the empty complex '0')."""
    tok = cur.peek()
    if tok is None:
        cur.fail("complex expected")
    if tok.kind == "number" and tok.text == "0":
        nxt = cur.peek(1)
        if nxt is not None and nxt.kind == "name":
            cur.fail("complex coefficient must be a positive integer", column=tok.column)
        if nxt is not None and nxt.text == "+":
            cur.fail("'0' denotes the empty complex and cannot be combined with terms",
                     column=nxt.column)
        cur.take()
        return {}
    counts: dict[str, int] = {}
    while True:
        coeff = 1
        tok = cur.peek()
        if tok is not None and tok.kind == "number":
            if not tok.text.isdigit() or int(tok.text) <= 0:
                cur.fail("complex coefficient must be a positive integer", column=tok.column)
            coeff = int(tok.text)
            cur.take()
            tok = cur.peek()
        if tok is None or tok.kind != "name":
            cur.fail("species name expected")
        env.use(cur, tok)
        counts[tok.text] = counts.get(tok.text, 0) + coeff
        cur.take()
        tok = cur.peek()
        if tok is not None and tok.text == "+" and tok.kind == "sym":
            cur.take()
            continue
        return counts


def _parse_rate(cur):
    start = cur.peek()
    sign = 1.0
    if start is not None and start.kind == "sym" and start.text in "+-":
        sign = -1.0 if start.text == "-" else 1.0
        cur.take()
    tok = cur.peek()
    if tok is None or tok.kind != "number":
        cur.fail("rate constant expected")
    cur.take()
    value = sign * float(tok.text)
    if not (math.isfinite(value) and value > 0):
        cur.fail("rate constant must be a positive finite number", code="E_RATE",
                 column=start.column)
    return value


class _SpeciesEnv:
    def __init__(self):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        self.fixed = False

    def declare(self, names):
        self.names = list(names)
        self.index = {n: i for i, n in enumerate(names)}
        self.fixed = True

    def use(self, cur, tok):
        if tok.text in self.index:
            return
        if self.fixed:
            cur.fail(f"species {tok.text!r} not declared in the species header",
                     code="E_UNKNOWN_SPECIES", column=tok.column)
        self.index[tok.text] = len(self.names)
        self.names.append(tok.text)


def _parse_header(cur, env, saw_reaction):
    cur.take()  # 'species'
    cur.take()  # ':'
    if env.fixed:
        cur.fail("duplicate species header")
    if saw_reaction:
        cur.fail("species header must precede all reactions")
    names = []
    while not cur.at_end():
        tok = cur.peek()
        if tok.kind != "name":
            cur.fail("species name expected in header")
        if tok.text in names:
            cur.fail(f"duplicate species {tok.text!r} in header", column=tok.column)
        names.append(tok.text)
        cur.take()
    if not names:
        cur.fail("at least one species name expected after 'species:'")
    env.declare(names)


def _parse_reaction(cur, env, lineno, diagnostics):
    lhs = _parse_complex(cur, env)
    arrow = cur.peek()
    if arrow is None or arrow.kind != "arrow":
        cur.fail("'->' or '<->' expected")
    cur.take()
    rhs = _parse_complex(cur, env)
    at = cur.peek()
    if at is None or at.text != "@":
        cur.fail("'@' and a rate constant expected")
    cur.take()
    first = _parse_rate(cur)
    second = None
    if not cur.at_end() and cur.peek().text == ",":
        cur.take()
        second = _parse_rate(cur)
    if not cur.at_end():
        cur.fail("unexpected trailing tokens")
    if arrow.text == "->" and second is not None:
        cur.fail("'->' takes exactly one rate", column=arrow.column)
    if arrow.text == "<->" and second is None:
        cur.fail("'<->' takes exactly two rates (forward, backward)", column=arrow.column)
    if lhs == rhs:
        diagnostics.append(
            Diagnostic(lineno, 1, "E_SELF_LOOP",
                       "self-loop reaction contributes nothing to the dynamics", "warning")
        )
    out = [(lhs, rhs, first)]
    if second is not None:
        out.append((rhs, lhs, second))
    return out


def parse_network_report(text: str) -> tuple[Network | None, tuple[Diagnostic, ...]]:
    """Parse ``text``; return ``(network, diagnostics)``.

    The network is ``None`` exactly when an error-level diagnostic was
    produced.  Parsing is total: every input yields either a network or at
    least one positioned error.
    """
    diagnostics: list[Diagnostic] = []
    env = _SpeciesEnv()
    reactions: list[tuple[dict, dict, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        tokens = _tokenize(line, lineno, diagnostics)
        if tokens is None:
            continue
        cur = _Cursor(tokens, lineno, len(line), diagnostics)
        try:
            if (len(tokens) >= 2 and tokens[0].kind == "name"
                    and tokens[0].text == "species" and tokens[1].text == ":"):
                _parse_header(cur, env, bool(reactions))
            else:
                reactions.extend(_parse_reaction(cur, env, lineno, diagnostics))
        except _LineError:
            continue
    if not reactions:
        diagnostics.append(Diagnostic(1, 1, "E_EMPTY", "no reactions found", "warning"))
    if any(d.severity == "error" for d in diagnostics):
        return None, tuple(diagnostics)
    species = tuple(env.names)
    transitions = []
    for lhs, rhs, rate in reactions:
        inp = CountVector(lhs.get(name, 0) for name in species)
        outp = CountVector(rhs.get(name, 0) for name in species)
        transitions.append((inp, outp, rate))
    with warnings.catch_warnings():
        # self-loops already reported as positioned diagnostics above
        warnings.simplefilter("ignore", SelfLoopWarning)
        net = Network(species, tuple(Transition(i, o, r) for i, o, r in transitions))
    return net, tuple(diagnostics)


def parse_network(text: str) -> Network:
    """Parse ``text`` into a :class:`Network`, raising :class:`ParseError` on errors.

    Warning-level diagnostics (empty file, self-loops) are forwarded through
    :mod:`warnings` as :class:`ParseWarning`.
    """
    net, diagnostics = parse_network_report(text)
    if net is None:
        raise ParseError(diagnostics)
    for diag in diagnostics:
        warnings.warn(str(diag), ParseWarning, stacklevel=2)
    return net


def _format_rate(rate: float) -> str:
    text = repr(float(rate))
    return text[:-2] if text.endswith(".0") else text


def format_complex(complex_: CountVector, species) -> str:
    """Canonical text of one complex: terms in species order, '0' if empty."""
    terms = []
    for count, name in zip(complex_, species):
        if count == 1:
            terms.append(name)
        elif count > 1:
            terms.append(f"{count} {name}")
    return " + ".join(terms) if terms else "0"


def format_network(net: Network) -> str:
    """Canonical ``.crn`` text; ``parse_network(format_network(n))`` equals ``n``."""
    for name in net.species:
        if not _NAME_RE.fullmatch(name):
            raise ValueError(f"species name {name!r} is not representable in the .crn format")
    lines = []
    if net.species:
        lines.append("species: " + " ".join(net.species))
    for tr in net.transitions:
        lines.append(
            f"{format_complex(tr.input, net.species)} -> "
            f"{format_complex(tr.output, net.species)} @ {_format_rate(tr.rate)}"
        )
    return "\n".join(lines)
