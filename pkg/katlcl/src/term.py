"""KAT terms: syntax tree, parser, printer and atom bookkeeping.

Concrete syntax::

    t := atom | 0 | 1 | t + t | t ; t | t* | ( t )

with precedence ``*`` over ``;`` over ``+``; binary operators associate to the left.
"""

import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property

import numpy as np

from katlcl.src.errors import KatParseError, KatSemanticError, UnknownAtomError

RESERVED = frozenset({"0", "1"})


class AtomKind(StrEnum):
    """Sort of a primitive symbol."""

    ACTION = "action"
    TEST = "test"


@dataclass(frozen=True, slots=True)
class Atom:
    """A primitive action or primitive test."""

    kind: AtomKind
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Zero:
    """The least test."""

    def __str__(self) -> str:
        return "0"


@dataclass(frozen=True, slots=True)
class One:
    """The multiplicative identity."""

    def __str__(self) -> str:
        return "1"


@dataclass(frozen=True, slots=True)
class Plus:
    """Nondeterministic choice."""

    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return pretty_term(self)


@dataclass(frozen=True, slots=True)
class Seq:
    """Sequential composition."""

    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return pretty_term(self)


@dataclass(frozen=True, slots=True)
class Star:
    """Kleene iteration."""

    body: "Term"

    def __str__(self) -> str:
        return pretty_term(self)


type Term = Atom | Zero | One | Plus | Seq | Star

ZERO = Zero()
ONE = One()


# Parsing

_TOKEN_RE = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<const>[01])(?![0-9])|(?P<op>[+;*()]))")


@dataclass(frozen=True)
class Alphabet:
    """Declared primitive actions (sigma) and primitive tests (b)."""

    sigma: frozenset[str]
    b: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.sigma & self.b
        if overlap:
            msg = f"actions and tests overlap: {sorted(overlap)}"
            raise KatSemanticError(msg)
        reserved = (self.sigma | self.b) & RESERVED
        if reserved:
            msg = f"'0' and '1' are reserved, cannot declare {sorted(reserved)}"
            raise KatSemanticError(msg)

    @cached_property
    def atoms(self) -> dict[str, Atom]:
        """Name to atom for every declared symbol."""
        found = {name: Atom(AtomKind.ACTION, name) for name in self.sigma}
        found.update({name: Atom(AtomKind.TEST, name) for name in self.b})
        return found

    def atom(self, name: str) -> Atom:
        """Look up a declared atom."""
        try:
            return self.atoms[name]
        except KeyError:
            raise UnknownAtomError(name) from None


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(src, pos)
        if not match:
            start = pos + len(src[pos:]) - len(src[pos:].lstrip())
            msg = f"unexpected character {src[start]!r}"
            raise KatParseError(msg, start)
        kind = match.lastgroup or "op"
        tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    """Recursive descent over the token list."""

    def __init__(self, src: str, alphabet: Alphabet) -> None:
        self.tokens = _tokenize(src)
        self.index = 0
        self.alphabet = alphabet

    @property
    def current(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def _accept(self, op: str) -> bool:
        kind, text, _ = self.current
        if kind == "op" and text == op:
            self.index += 1
            return True
        return False

    def parse(self) -> Term:
        term = self._plus()
        kind, text, pos = self.current
        if kind != "end":
            msg = f"unexpected {text!r}"
            raise KatParseError(msg, pos)
        return term

    def _plus(self) -> Term:
        term = self._seq()
        while self._accept("+"):
            term = Plus(term, self._seq())
        return term

    def _seq(self) -> Term:
        term = self._postfix()
        while self._accept(";"):
            term = Seq(term, self._postfix())
        return term

    def _postfix(self) -> Term:
        term = self._primary()
        while self._accept("*"):
            term = Star(term)
        return term

    def _primary(self) -> Term:
        kind, text, pos = self.current
        if kind == "const":
            self.index += 1
            return ZERO if text == "0" else ONE
        if kind == "name":
            self.index += 1
            return self.alphabet.atom(text)
        if self._accept("("):
            term = self._plus()
            if not self._accept(")"):
                _, found, where = self.current
                msg = f"expected ')' but found {found or 'end of input'!r}"
                raise KatParseError(msg, where)
            return term
        msg = f"expected a term but found {text or 'end of input'!r}"
        raise KatParseError(msg, pos)


def parse_term(src: str, sigma: Iterable[str], b: Iterable[str]) -> Term:
    """Parse a term over primitive actions ``sigma`` and primitive tests ``b``.

    Raises:
        KatParseError: On lexical or syntax errors, with the character position.
        UnknownAtomError: When an identifier is neither in ``sigma`` nor in ``b``.
    """
    return _Parser(src, Alphabet(frozenset(sigma), frozenset(b))).parse()


# Printing

_PRECEDENCE = {Plus: 0, Seq: 1, Star: 2}


def _prec(term: Term) -> int:
    return _PRECEDENCE.get(type(term), 3)


def _wrap(term: Term, min_prec: int) -> str:
    text = pretty_term(term)
    return f"({text})" if _prec(term) < min_prec else text


def pretty_term(term: Term) -> str:
    """Render a term with the fewest parentheses that parse back to the same tree."""
    match term:
        case Atom(name=name):
            return name
        case Zero():
            return "0"
        case One():
            return "1"
        case Plus(left, right):
            return f"{_wrap(left, 0)} + {_wrap(right, 1)}"
        case Seq(left, right):
            return f"{_wrap(left, 1)} ; {_wrap(right, 2)}"
        case Star(body):
            return f"{_wrap(body, 2)}*"
    msg = f"not a term: {term!r}"
    raise TypeError(msg)


# Bookkeeping


def atoms_of(term: Term) -> set[Atom]:
    """Atom leaves of a term; 0 and 1 are constructors, not atoms."""
    match term:
        case Atom():
            return {term}
        case Plus(left, right) | Seq(left, right):
            return atoms_of(left) | atoms_of(right)
        case Star(body):
            return atoms_of(body)
    return set()


def term_size(term: Term) -> int:
    """Number of nodes in the tree."""
    match term:
        case Plus(left, right) | Seq(left, right):
            return 1 + term_size(left) + term_size(right)
        case Star(body):
            return 1 + term_size(body)
    return 1


def enumerate_terms(leaves: Iterable[Term], max_size: int) -> Iterator[Term]:
    """Every term of at most ``max_size`` nodes built from ``leaves``, smallest first."""
    by_size: dict[int, list[Term]] = {1: list(leaves)}
    yield from by_size[1]
    for size in range(2, max_size + 1):
        layer: list[Term] = [Star(body) for body in by_size[size - 1]]
        for left_size in range(1, size - 1):
            right_size = size - 1 - left_size
            for left in by_size[left_size]:
                for right in by_size[right_size]:
                    layer.append(Plus(left, right))
                    layer.append(Seq(left, right))
        by_size[size] = layer
        yield from layer


def random_term(rng: np.random.Generator, leaves: list[Term], size: int) -> Term:
    """Draw a term of exactly ``size`` nodes (``size`` >= 1)."""
    if size <= 1:
        return leaves[int(rng.integers(len(leaves)))]
    if size == 2:
        return Star(random_term(rng, leaves, 1))
    choice = int(rng.integers(3))
    if choice == 0:
        return Star(random_term(rng, leaves, size - 1))
    left_size = int(rng.integers(1, size - 1))
    left = random_term(rng, leaves, left_size)
    right = random_term(rng, leaves, size - 1 - left_size)
    return Plus(left, right) if choice == 1 else Seq(left, right)
