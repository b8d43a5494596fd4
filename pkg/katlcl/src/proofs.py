"""Derivation files: an s-expression syntax for proof trees.

A node is ``(RULE SIDE... PREMISE...)``. ``transfer`` takes its atom and precondition
positionally, ``(transfer u {++,--})``; every other rule takes keyword side data::

    (relax :pre {0,2} :post {0..11} D)
    (limit :chain [{0,2} {1,3} {11}] :back 2 D0 D1 D2)
    (choice :term "a + b" D)

Values are concrete literals of the analysis lattice; terms are quoted unless they are
a single atom. ``#`` starts a comment. Conclusions are never read from the file.
"""

import re
from dataclasses import dataclass
from typing import Any

from katlcl.src.errors import KatParseError
from katlcl.src.lattice import ConcreteLattice
from katlcl.src.models import Derivation
from katlcl.src.term import Alphabet, Atom, One, Term, Zero, parse_term, pretty_term

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<comment>\#[^\n]*)
      | (?P<literal>(?:top\s*)?\{[^}]*\})
      | (?P<string>"[^"]*")
      | (?P<open>[(\[])
      | (?P<close>[)\]])
      | (?P<word>[^\s()\[\]"{}\#]+)
    )""",
    re.VERBOSE,
)

# Keyword spellings accepted for side data
_KEYWORDS = {
    ":pre": "pre",
    ":pre'": "pre",
    ":post": "ok",
    ":post'": "ok",
    ":ok": "ok",
    ":err": "err",
    ":chain": "chain",
    ":back": "back",
    ":term": "term",
}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


@dataclass
class _List:
    bracket: str
    items: list["_List | _Token"]
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            if text[pos:].strip():
                msg = f"unexpected character {text[pos]!r}"
                raise KatParseError(msg, pos)
            break
        pos = match.end()
        kind = match.lastgroup
        if kind is None or kind == "comment":
            continue
        tokens.append(_Token(kind, match.group(kind), match.start(kind)))
    return tokens


def _read(tokens: list[_Token]) -> _List:
    """Group tokens into nested lists; exactly one top-level ``( ... )`` is allowed."""
    stack: list[_List] = [_List("", [], 0)]
    for token in tokens:
        if token.kind == "open":
            stack.append(_List(token.text, [], token.pos))
        elif token.kind == "close":
            if len(stack) == 1 or {"(": ")", "[": "]"}[stack[-1].bracket] != token.text:
                msg = f"unbalanced {token.text!r}"
                raise KatParseError(msg, token.pos)
            done = stack.pop()
            stack[-1].items.append(done)
        else:
            stack[-1].items.append(token)
    if len(stack) > 1:
        msg = f"unclosed {stack[-1].bracket!r}"
        raise KatParseError(msg, stack[-1].pos)
    (top,) = stack
    if len(top.items) != 1 or not isinstance(top.items[0], _List) or top.items[0].bracket != "(":
        msg = "expected a single derivation '( ... )'"
        raise KatParseError(msg, 0)
    return top.items[0]


class _Builder:
    def __init__(self, lattice: ConcreteLattice, alphabet: Alphabet) -> None:
        self.lattice = lattice
        self.alphabet = alphabet

    def value(self, item: "_List | _Token") -> object:
        if not isinstance(item, _Token):
            msg = "expected a literal"
            raise KatParseError(msg, item.pos)
        text = item.text[1:-1] if item.kind == "string" else item.text
        try:
            return self.lattice.parse(text)
        except KatParseError as exc:
            msg = f"bad literal {text!r}"
            raise KatParseError(msg, item.pos) from exc

    def term(self, item: "_List | _Token") -> Term:
        if not isinstance(item, _Token) or item.kind not in {"word", "string"}:
            msg = "expected a term"
            raise KatParseError(msg, item.pos)
        source = item.text[1:-1] if item.kind == "string" else item.text
        return parse_term(source, self.alphabet.sigma, self.alphabet.b)

    def atom(self, item: "_List | _Token") -> Atom | Zero | One:
        term = self.term(item)
        if not isinstance(term, Atom | Zero | One):
            msg = "transfer needs an atom, 0 or 1"
            raise KatParseError(msg, item.pos)
        return term

    def node(self, sexp: _List) -> Derivation:
        if sexp.bracket != "(" or not sexp.items:
            msg = "expected '(RULE ...)'"
            raise KatParseError(msg, sexp.pos)
        head, *rest = sexp.items
        if not isinstance(head, _Token) or head.kind != "word":
            msg = "expected a rule name"
            raise KatParseError(msg, sexp.pos)
        rule = head.text
        side: dict[str, Any] = {}
        children: list[Derivation] = []
        if rule == "transfer":
            if len(rest) != 2:
                msg = "transfer takes an atom and a precondition"
                raise KatParseError(msg, head.pos)
            side = {"atom": self.atom(rest[0]), "pre": self.value(rest[1])}
            return Derivation(rule=rule, side=side)
        items = iter(rest)
        for item in items:
            if isinstance(item, _List):
                children.append(self.node(item))
                continue
            if children:
                msg = "side data must come before premises"
                raise KatParseError(msg, item.pos)
            key = _KEYWORDS.get(item.text)
            if key is None:
                msg = f"unknown keyword {item.text!r}"
                raise KatParseError(msg, item.pos)
            argument = next(items, None)
            if argument is None:
                msg = f"{item.text} needs a value"
                raise KatParseError(msg, item.pos)
            side[key] = self._side(key, argument)
        return Derivation(rule=rule, children=children, side=side)

    def _side(self, key: str, argument: "_List | _Token") -> object:
        match key:
            case "term":
                return self.term(argument)
            case "back":
                if not isinstance(argument, _Token) or not argument.text.isdigit():
                    msg = ":back takes a chain index"
                    raise KatParseError(msg, argument.pos)
                return int(argument.text)
            case "chain":
                if not isinstance(argument, _List) or argument.bracket != "[":
                    msg = ":chain takes a list '[...]'"
                    raise KatParseError(msg, argument.pos)
                return [self.value(item) for item in argument.items]
        return self.value(argument)


def parse_derivation(text: str, lattice: ConcreteLattice, alphabet: Alphabet) -> Derivation:
    """Parse a derivation file.

    Raises:
        KatParseError: On malformed syntax.
        UnknownAtomError: For atoms outside the alphabet.
        LiteralError: For values outside the lattice.
    """
    return _Builder(lattice, alphabet).node(_read(_tokenize(text)))


def _show_term(term: Term) -> str:
    text = pretty_term(term)
    return text if isinstance(term, Atom | Zero | One) else f'"{text}"'


def _show_side(derivation: Derivation, lattice: ConcreteLattice) -> list[str]:
    side = derivation.side
    if derivation.rule == "transfer":
        return [pretty_term(side["atom"]), lattice.format(side["pre"])]
    parts: list[str] = []
    if "pre" in side:
        parts += [":pre", lattice.format(side["pre"])]
    if "ok" in side:
        parts += [":ok" if "err" in side else ":post", lattice.format(side["ok"])]
    if "err" in side:
        parts += [":err", lattice.format(side["err"])]
    if "term" in side:
        parts += [":term", _show_term(side["term"])]
    if "chain" in side:
        parts += [":chain", "[" + " ".join(lattice.format(value) for value in side["chain"]) + "]"]
    if "back" in side:
        parts += [":back", str(side["back"])]
    return parts


def format_derivation(derivation: Derivation, lattice: ConcreteLattice, indent: int = 0) -> str:
    """Print a derivation; leaves stay on one line, premises are indented."""
    head = " ".join([derivation.rule, *_show_side(derivation, lattice)])
    if not derivation.children:
        return f"{' ' * indent}({head})"
    children = "\n".join(format_derivation(child, lattice, indent + 2) for child in derivation.children)
    return f"{' ' * indent}({head}\n{children})"
