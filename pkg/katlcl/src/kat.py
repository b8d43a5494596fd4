"""Finite KAT models with a backward diamond.

Three kinds of model:

- ``RelationalModel``: every binary relation over a finite integer carrier, with the
  full set of sub-identities as tests and ``X x X`` as top. Relations are tuples of
  row bitmasks (row ``x`` is the set of successors of ``x``).
- ``GuardedStringModel``: the language model over primitive tests ``b1..bk``. Only
  tests (sets of atoms) and the diamond steps of generators are represented.
- ``TableModel``: an explicit finite KAT given by its operation tables (e.g. A3).
"""

import logging
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from katlcl.src.config import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    EXHAUSTIVE_BUDGET,
    EXHAUSTIVE_CARRIER,
    EXTENSIONALITY_CARRIER,
    MAX_CARRIER,
    MAX_GS_PRIMITIVES,
    MAX_SAMPLED_CARRIER,
    MAX_TABLE_ELEMENTS,
)
from katlcl.src.errors import LiteralError, ModelError, UnknownAtomError
from katlcl.src.lattice import ConcreteKind, ConcreteLattice, PowersetLattice, TableLattice
from katlcl.src.models import LawReport, LawResult
from katlcl.src.term import Alphabet, Atom
from katlcl.src.utils import iter_bits, make_rng

logger = logging.getLogger(__name__)

type Relation = tuple[int, ...]


@dataclass(frozen=True, slots=True)
class GsElement:
    """A guarded-string generator: an action ``G(u)`` or a test given by its atom mask."""

    kind: str
    mask: int = 0


class KatModel[E](ABC):
    """A finite (or symbolic) KAT with tests and a backward diamond."""

    kind: str
    tests: PowersetLattice | TableLattice

    @property
    def topp(self) -> ConcreteLattice | None:
        """Codomain lattice ``{top a}``, or None for models without a top."""
        return None

    @property
    @abstractmethod
    def zero(self) -> E: ...

    @property
    @abstractmethod
    def one(self) -> E: ...

    @abstractmethod
    def plus(self, a: E, b: E) -> E: ...

    @abstractmethod
    def seq(self, a: E, b: E) -> E: ...

    @abstractmethod
    def star(self, a: E) -> E: ...

    @abstractmethod
    def test_element(self, p: object) -> E:
        """Embed a test of the lattice as a model element."""

    @abstractmethod
    def bdia(self, a: E, p: object) -> object:
        """Least test ``q`` with ``p a = p a q``."""

    def top_image(self, c: object, a: E) -> object:
        """Codomain of ``(top c) a``."""
        msg = f"{self.kind} model has no top"
        raise ModelError(msg)

    @property
    def enumerable(self) -> bool:
        """Whether ``elements()`` can list the carrier."""
        return False

    @property
    def element_count(self) -> int:
        msg = f"{self.kind} model elements are not enumerable"
        raise ModelError(msg)

    def elements(self) -> Iterator[E]:
        msg = f"{self.kind} model elements are not enumerable"
        raise ModelError(msg)

    @abstractmethod
    def random_element(self, rng: np.random.Generator) -> E: ...

    @abstractmethod
    def format_element(self, a: E) -> str: ...

    def le(self, a: E, b: E) -> bool:
        """Natural order ``a <= b`` iff ``a + b = b``."""
        return self.plus(a, b) == b

    def star_closure(self, a: E) -> E:
        """Least fixpoint of ``x -> 1 + a x``."""
        return self.star(a)


# Relational model


class RelationalModel(KatModel[Relation]):
    """All relations over the integer carrier ``lo..hi``."""

    kind = "relational"

    def __init__(self, lo: int, hi: int) -> None:
        """Build the model over ``lo..hi`` inclusive."""
        size = hi - lo + 1
        if size < 1:
            msg = f"empty carrier {lo}..{hi}"
            raise ModelError(msg)
        if size > MAX_CARRIER:
            msg = f"carrier {lo}..{hi} has {size} points, more than the bound {MAX_CARRIER}"
            raise ModelError(msg)
        self.lo = lo
        self.hi = hi
        self.n = size
        self.carrier = tuple(range(lo, hi + 1))
        self.tests = PowersetLattice(self.carrier, ConcreteKind.TESTS)
        self._topp = PowersetLattice(self.carrier, ConcreteKind.TOPP)

    @property
    def topp(self) -> PowersetLattice:
        return self._topp

    def index(self, value: int) -> int:
        """Bit index of a carrier value."""
        if not self.lo <= value <= self.hi:
            msg = f"{value} is outside the carrier {self.lo}..{self.hi}"
            raise LiteralError(msg)
        return value - self.lo

    # Builtin generators

    @property
    def empty(self) -> Relation:
        return (0,) * self.n

    @property
    def identity(self) -> Relation:
        return tuple(1 << x for x in range(self.n))

    @property
    def full(self) -> Relation:
        """The top element ``X x X``."""
        return (self.tests.top,) * self.n

    def succ(self) -> Relation:
        """Partial successor: ``{(z, z+1) | z < max}``."""
        return tuple(1 << (x + 1) if x + 1 < self.n else 0 for x in range(self.n))

    def succ_sat(self) -> Relation:
        """Saturating successor: ``{(z, min(z+1, max))}``."""
        return tuple(1 << min(x + 1, self.n - 1) for x in range(self.n))

    def guard(self, predicate: Callable[[int], bool]) -> Relation:
        """Sub-identity on the carrier values satisfying ``predicate``."""
        return tuple(1 << x if predicate(self.carrier[x]) else 0 for x in range(self.n))

    def ge(self, k: int) -> Relation:
        return self.guard(lambda z: z >= k)

    def lt(self, k: int) -> Relation:
        return self.guard(lambda z: z < k)

    def pairs(self, pairs: Sequence[tuple[int, int]]) -> Relation:
        """Relation from explicit carrier-value pairs."""
        rows = [0] * self.n
        for x, y in pairs:
            rows[self.index(x)] |= 1 << self.index(y)
        return tuple(rows)

    # KAT structure

    @property
    def zero(self) -> Relation:
        return self.empty

    @property
    def one(self) -> Relation:
        return self.identity

    def plus(self, a: Relation, b: Relation) -> Relation:
        return tuple(x | y for x, y in zip(a, b))

    def image(self, mask: int, a: Relation) -> int:
        """Points reachable in one ``a``-step from ``mask``."""
        result = 0
        while mask:
            low = mask & -mask
            result |= a[low.bit_length() - 1]
            mask ^= low
        return result

    def seq(self, a: Relation, b: Relation) -> Relation:
        return tuple(self.image(row, b) for row in a)

    def star(self, a: Relation) -> Relation:
        rows = []
        for x in range(self.n):
            reach = 1 << x
            while True:
                grown = reach | self.image(reach, a)
                if grown == reach:
                    break
                reach = grown
            rows.append(reach)
        return tuple(rows)

    def test_element(self, p: int) -> Relation:
        return tuple((1 << x) & p for x in range(self.n))

    def support(self, a: Relation) -> int:
        """Support of a sub-identity."""
        if not self.is_test(a):
            msg = f"{self.format_element(a)} is not a sub-identity"
            raise ModelError(msg)
        return sum(a)

    def is_test(self, a: Relation) -> bool:
        return all(row & ~(1 << x) == 0 for x, row in enumerate(a))

    def bdia(self, a: Relation, p: int) -> int:
        return self.image(p, a)

    def top_image(self, c: int, a: Relation) -> int:
        return self.image(c, a)

    @property
    def enumerable(self) -> bool:
        return self.n <= EXHAUSTIVE_CARRIER

    @property
    def element_count(self) -> int:
        return 1 << (self.n * self.n)

    def decode(self, code: int) -> Relation:
        """Relation whose rows are the consecutive ``n``-bit chunks of ``code``."""
        row_mask = (1 << self.n) - 1
        return tuple((code >> (self.n * x)) & row_mask for x in range(self.n))

    def elements(self) -> Iterator[Relation]:
        return (self.decode(code) for code in range(self.element_count))

    def random_element(self, rng: np.random.Generator) -> Relation:
        bits = rng.integers(0, 2, size=(self.n, self.n))
        return tuple(sum(1 << int(y) for y in np.flatnonzero(row)) for row in bits)

    def format_element(self, a: Relation) -> str:
        pairs = [
            f"({self.carrier[x]},{self.carrier[y]})" for x, row in enumerate(a) for y in iter_bits(row)
        ]
        return "{" + ",".join(pairs) + "}"


def rel_model(lo: int, hi: int) -> RelationalModel:
    """Relational model over the carrier ``lo..hi`` with all sub-identities as tests."""
    return RelationalModel(lo, hi)


# Guarded-string model


class GuardedStringModel(KatModel[GsElement]):
    """Guarded strings over primitive tests ``b1..bk``; only tests are materialized.

    Atoms are truth assignments written as ``+``/``-`` strings, position ``i`` giving
    primitive ``i+1``; they are ordered ``++, +-, -+, --`` (all-positive first).
    """

    kind = "guarded-strings"

    def __init__(self, primitives: Sequence[str]) -> None:
        """Build the model for the given primitive test names."""
        if not primitives:
            msg = "a guarded-string model needs at least one primitive test"
            raise ModelError(msg)
        if len(primitives) > MAX_GS_PRIMITIVES:
            msg = f"{len(primitives)} primitive tests exceed the bound {MAX_GS_PRIMITIVES}"
            raise ModelError(msg)
        self.primitives = tuple(primitives)
        k = len(self.primitives)
        self.atoms = tuple(
            "".join("-" if (j >> (k - 1 - i)) & 1 else "+" for i in range(k)) for j in range(1 << k)
        )
        self.tests = PowersetLattice(self.atoms, ConcreteKind.TESTS)

    def primitive(self, name: str) -> GsElement:
        """``G(b)``: the atoms in which ``b`` appears positively."""
        try:
            position = self.primitives.index(name)
        except ValueError:
            raise UnknownAtomError(name) from None
        mask = sum(1 << j for j, atom in enumerate(self.atoms) if atom[position] == "+")
        return GsElement("test", mask)

    @staticmethod
    def action() -> GsElement:
        """``G(u)`` for a primitive action ``u``."""
        return GsElement("action")

    @property
    def zero(self) -> GsElement:
        return GsElement("test", 0)

    @property
    def one(self) -> GsElement:
        return GsElement("test", self.tests.top)

    def _require_tests(self, *elements: GsElement) -> None:
        if any(element.kind != "test" for element in elements):
            msg = "guarded-string actions are not materialized; only tests combine"
            raise ModelError(msg)

    def plus(self, a: GsElement, b: GsElement) -> GsElement:
        self._require_tests(a, b)
        return GsElement("test", a.mask | b.mask)

    def seq(self, a: GsElement, b: GsElement) -> GsElement:
        self._require_tests(a, b)
        return GsElement("test", a.mask & b.mask)

    def star(self, a: GsElement) -> GsElement:
        self._require_tests(a)
        return self.one

    def star_closure(self, a: GsElement) -> GsElement:
        msg = "guarded-string elements cannot be materialized"
        raise ModelError(msg)

    def test_element(self, p: int) -> GsElement:
        return GsElement("test", p)

    def bdia(self, a: GsElement, p: int) -> int:
        if a.kind == "action":
            return self.tests.top if p else 0
        return p & a.mask

    def random_element(self, rng: np.random.Generator) -> GsElement:
        if rng.integers(2):
            return self.action()
        return GsElement("test", int(rng.integers(self.tests.size)))

    def format_element(self, a: GsElement) -> str:
        return "G(action)" if a.kind == "action" else self.tests.format(a.mask)


def gs_model(b: Sequence[str]) -> GuardedStringModel:
    """Guarded-string model over the primitive tests ``b``."""
    return GuardedStringModel(b)


# Explicit-table model


class TableModel(KatModel[str]):
    """A finite KAT given by its ``+``, ``;`` and ``*`` tables over named elements.

    Tables are taken as given; ``check_kat_axioms`` reports whether they form a KAT.
    """

    kind = "table"

    def __init__(
        self,
        elements: Sequence[str],
        tests: Sequence[str],
        plus: Mapping[tuple[str, str], str],
        seq: Mapping[tuple[str, str], str],
        star: Mapping[str, str],
        *,
        zero: str = "0",
        one: str = "1",
        top: str | None = None,
    ) -> None:
        """Build the model; every table entry must name a declared element."""
        self.names = tuple(elements)
        if len(self.names) > MAX_TABLE_ELEMENTS:
            msg = f"{len(self.names)} elements exceed the bound {MAX_TABLE_ELEMENTS}"
            raise ModelError(msg)
        self._plus = dict(plus)
        self._seq = dict(seq)
        self._star = dict(star)
        self._zero = zero
        self._one = one
        self._top = top
        self._check_tables(tests)
        self.tests = TableLattice(tests, self.plus, self.seq, ConcreteKind.TESTS)

    def _check_tables(self, tests: Sequence[str]) -> None:
        known = set(self.names)
        for name in [self._zero, self._one, *tests, *([self._top] if self._top else [])]:
            if name not in known:
                msg = f"{name!r} is not a declared element"
                raise ModelError(msg)
        for x, y in product(self.names, repeat=2):
            for label, table in (("+", self._plus), (";", self._seq)):
                if table.get((x, y)) not in known:
                    msg = f"table '{label}' has no valid entry for ({x}, {y})"
                    raise ModelError(msg)
        for x in self.names:
            if self._star.get(x) not in known:
                msg = f"table '*' has no valid entry for {x}"
                raise ModelError(msg)

    @cached_property
    def topp(self) -> TableLattice | None:
        if self._top is None:
            return None
        names = sorted({self.seq(self._top, x) for x in self.names}, key=self.names.index)
        return TableLattice(names, self.plus, self._topp_meet, ConcreteKind.TOPP)

    def _topp_meet(self, a: str, b: str) -> str:
        topp = self.topp
        assert topp is not None
        lower = [c for c in topp.names if topp.le(c, a) and topp.le(c, b)]
        for c in lower:
            if all(topp.le(d, c) for d in lower):
                return c
        msg = f"{a} and {b} have no meet in topp"
        raise ModelError(msg)

    @property
    def top(self) -> str | None:
        return self._top

    @property
    def zero(self) -> str:
        return self._zero

    @property
    def one(self) -> str:
        return self._one

    def plus(self, a: str, b: str) -> str:
        return self._plus[(a, b)]

    def seq(self, a: str, b: str) -> str:
        return self._seq[(a, b)]

    def star(self, a: str) -> str:
        return self._star[a]

    def test_element(self, p: str) -> str:
        return p

    def bdia(self, a: str, p: str) -> str:
        pa = self.seq(p, a)
        candidates = [q for q in self.tests.names if self.seq(pa, q) == pa]
        for q in candidates:
            if all(self.tests.le(q, other) for other in candidates):
                return q
        msg = f"no least test q with {p}·{a} = {p}·{a}·q"
        raise ModelError(msg)

    def top_image(self, c: str, a: str) -> str:
        if self._top is None:
            return super().top_image(c, a)
        return self.seq(c, a)

    @property
    def enumerable(self) -> bool:
        return True

    @property
    def element_count(self) -> int:
        return len(self.names)

    def elements(self) -> Iterator[str]:
        return iter(self.names)

    def random_element(self, rng: np.random.Generator) -> str:
        return self.names[int(rng.integers(len(self.names)))]

    def format_element(self, a: str) -> str:
        return a


def a3_model() -> TableModel:
    """The three-element KAT ``{0, 1, a}`` with ``a a = 0`` and ``a* = 1``; top is 1."""
    names = ("0", "1", "a")
    plus: dict[tuple[str, str], str] = {}
    seq: dict[tuple[str, str], str] = {}
    for x, y in product(names, repeat=2):
        plus[(x, y)] = "1" if "1" in (x, y) else ("a" if "a" in (x, y) else "0")
        if "0" in (x, y) or (x, y) == ("a", "a"):
            seq[(x, y)] = "0"
        else:
            seq[(x, y)] = y if x == "1" else x
    star = dict.fromkeys(names, "1")
    return TableModel(names, ("0", "1"), plus, seq, star, top="1")


# Evaluations


@dataclass(frozen=True)
class Evaluation:
    """Interpretation of atoms as ``(ok, err)`` pairs of model elements."""

    alphabet: Alphabet
    entries: Mapping[str, tuple[object, object]] = field(default_factory=dict)

    def ok(self, atom: Atom) -> object:
        return self._entry(atom)[0]

    def err(self, atom: Atom) -> object:
        return self._entry(atom)[1]

    def _entry(self, atom: Atom) -> tuple[object, object]:
        try:
            return self.entries[atom.name]
        except KeyError:
            raise UnknownAtomError(atom.name) from None

    @property
    def sigma(self) -> frozenset[str]:
        return self.alphabet.sigma

    @property
    def b(self) -> frozenset[str]:
        return self.alphabet.b


def evaluation(
    model: KatModel,
    actions: Mapping[str, tuple[object, object | None]],
    tests: Mapping[str, object],
) -> Evaluation:
    """Build an evaluation; a missing err component defaults to 0.

    Primitive tests map to ``(test, 0)``: their ok component must be a test element.
    """
    entries: dict[str, tuple[object, object]] = {}
    for name, (ok, err) in actions.items():
        entries[name] = (ok, model.zero if err is None else err)
    for name, ok in tests.items():
        if isinstance(model, RelationalModel) and not model.is_test(ok):
            msg = f"primitive test {name} must denote a sub-identity"
            raise ModelError(msg)
        if isinstance(model, TableModel) and ok not in model.tests.names:
            msg = f"primitive test {name} must denote a test"
            raise ModelError(msg)
        entries[name] = (ok, model.zero)
    return Evaluation(Alphabet(frozenset(actions), frozenset(tests)), entries)


def gs_evaluation(model: GuardedStringModel, actions: Sequence[str]) -> Evaluation:
    """The canonical evaluation ``G``: actions generic, tests by their atoms."""
    return evaluation(
        model,
        {name: (model.action(), None) for name in actions},
        {name: model.primitive(name) for name in model.primitives},
    )


# Law suites


@dataclass(frozen=True)
class _Law:
    """A law quantified over ``n_elements`` elements then ``n_tests`` tests."""

    name: str
    n_elements: int
    n_tests: int
    variables: str
    holds: Callable[..., bool]


class _LawRunner:
    """Runs quantified laws exhaustively when small enough, otherwise on seeded samples."""

    def __init__(self, model: KatModel, seed: int, samples: int) -> None:
        self.model = model
        self.rng = make_rng(seed)
        self.samples = samples
        self.tests = list(model.tests.elements())
        self.any_sampled = False

    def _exhaustive(self, law: _Law) -> bool:
        if not self.model.enumerable:
            return False
        total = self.model.element_count**law.n_elements * len(self.tests) ** law.n_tests
        return total <= EXHAUSTIVE_BUDGET

    def _draw(self, law: _Law) -> Iterator[tuple]:
        for _ in range(self.samples):
            elements = [self.model.random_element(self.rng) for _ in range(law.n_elements)]
            tests = [self.tests[int(self.rng.integers(len(self.tests)))] for _ in range(law.n_tests)]
            yield (*elements, *tests)

    def run(self, law: _Law) -> LawResult:
        sampled = not self._exhaustive(law)
        if sampled:
            self.any_sampled = True
            cases: Iterator[tuple] = self._draw(law)
        else:
            elements = list(self.model.elements())
            cases = product(*([elements] * law.n_elements + [self.tests] * law.n_tests))
        checked = 0
        for case in cases:
            checked += 1
            if not law.holds(*case):
                witness = {
                    name: self.model.format_element(value)
                    if i < law.n_elements
                    else self.model.tests.format(value)
                    for i, (name, value) in enumerate(zip(law.variables, case))
                }
                logger.debug("law %s fails at %s", law.name, witness)
                return LawResult(
                    law=law.name, passed=False, checked=checked, sampled=sampled, witness=witness
                )
        return LawResult(law=law.name, passed=True, checked=checked, sampled=sampled)


def _powers_diamond(model: KatModel, a: object, p: object) -> object:
    """Join of ``<a^n]p`` over all n, stopping once the powers of ``a`` repeat."""
    seen = set()
    power = model.one
    result = model.tests.bottom
    while power not in seen:
        seen.add(power)
        result = model.tests.join(result, model.bdia(power, p))
        power = model.seq(power, a)
    return result


def _kat_laws(m: KatModel, tests: Sequence[object]) -> list[_Law]:  # noqa: C901, PLR0915
    lat = m.tests
    te = m.test_element

    def plus_associative(a, b, c):
        return m.plus(m.plus(a, b), c) == m.plus(a, m.plus(b, c))

    def plus_commutative(a, b):
        return m.plus(a, b) == m.plus(b, a)

    def plus_idempotent(a):
        return m.plus(a, a) == a

    def plus_zero(a):
        return m.plus(a, m.zero) == a

    def seq_associative(a, b, c):
        return m.seq(m.seq(a, b), c) == m.seq(a, m.seq(b, c))

    def seq_one(a):
        return m.seq(m.one, a) == a and m.seq(a, m.one) == a

    def seq_annihilation(a):
        return m.seq(m.zero, a) == m.zero and m.seq(a, m.zero) == m.zero

    def distributivity(a, b, c):
        left = m.seq(a, m.plus(b, c)) == m.plus(m.seq(a, b), m.seq(a, c))
        return left and m.seq(m.plus(a, b), c) == m.plus(m.seq(a, c), m.seq(b, c))

    def star_unfold(a):
        s = m.star(a)
        return m.le(m.plus(m.one, m.seq(a, s)), s) and m.le(m.plus(m.one, m.seq(s, a)), s)

    def star_induction(a, b, x):
        left = not m.le(m.plus(b, m.seq(a, x)), x) or m.le(m.seq(m.star(a), b), x)
        right = not m.le(m.plus(b, m.seq(x, a)), x) or m.le(m.seq(b, m.star(a)), x)
        return left and right

    def tests_boolean(p, q):
        if m.seq(te(p), te(q)) != te(lat.meet(p, q)) or m.plus(te(p), te(q)) != te(lat.join(p, q)):
            return False
        not_p = lat.difference(lat.top, p)
        return lat.join(p, not_p) == lat.top and lat.meet(p, not_p) == lat.bottom

    def bd1_least_test(a, p):
        q = m.bdia(a, p)
        pa = m.seq(te(p), a)
        if m.seq(pa, te(q)) != pa:
            return False
        return all(lat.le(q, other) for other in tests if m.seq(pa, te(other)) == pa)

    def bd2_composition(a, b, p):
        return m.bdia(m.seq(a, b), p) == m.bdia(b, m.bdia(a, p))

    def additive_element(a, b, p):
        return m.bdia(m.plus(a, b), p) == lat.join(m.bdia(a, p), m.bdia(b, p))

    def additive_test(a, p, q):
        return m.bdia(a, lat.join(p, q)) == lat.join(m.bdia(a, p), m.bdia(a, q))

    def isotone_element(a, b, p):
        return lat.le(m.bdia(a, p), m.bdia(m.plus(a, b), p))

    def isotone_test(a, p, q):
        return lat.le(m.bdia(a, p), m.bdia(a, lat.join(p, q)))

    def diamond_of_test(s, p):
        return m.bdia(te(s), p) == lat.meet(p, s)

    def diamond_star_unfold(a, p):
        after = m.bdia(m.star(a), p)
        return lat.le(lat.join(p, m.bdia(a, after)), after)

    def diamond_star_powers(a, p):
        return m.bdia(m.star(a), p) == _powers_diamond(m, a, p)

    return [
        _Law("plus-associative", 3, 0, "abc", plus_associative),
        _Law("plus-commutative", 2, 0, "ab", plus_commutative),
        _Law("plus-idempotent", 1, 0, "a", plus_idempotent),
        _Law("plus-zero", 1, 0, "a", plus_zero),
        _Law("seq-associative", 3, 0, "abc", seq_associative),
        _Law("seq-one", 1, 0, "a", seq_one),
        _Law("seq-annihilation", 1, 0, "a", seq_annihilation),
        _Law("distributivity", 3, 0, "abc", distributivity),
        _Law("star-unfold", 1, 0, "a", star_unfold),
        _Law("star-induction", 3, 0, "abx", star_induction),
        _Law("tests-boolean", 0, 2, "pq", tests_boolean),
        _Law("bd1-least-test", 1, 1, "ap", bd1_least_test),
        _Law("bd2-composition", 2, 1, "abp", bd2_composition),
        _Law("diamond-additive-element", 2, 1, "abp", additive_element),
        _Law("diamond-additive-test", 1, 2, "apq", additive_test),
        _Law("diamond-isotone-element", 2, 1, "abp", isotone_element),
        _Law("diamond-isotone-test", 1, 2, "apq", isotone_test),
        _Law("diamond-of-test", 0, 2, "sp", diamond_of_test),
        _Law("diamond-star-unfold", 1, 1, "ap", diamond_star_unfold),
        _Law("diamond-star-powers", 1, 1, "ap", diamond_star_powers),
    ]


DIAMOND_LAWS = (
    "bd1-least-test",
    "bd2-composition",
    "diamond-additive-element",
    "diamond-additive-test",
    "diamond-isotone-element",
    "diamond-isotone-test",
    "diamond-of-test",
    "diamond-star-unfold",
    "diamond-star-powers",
)


def _subject(model: KatModel) -> str:
    if isinstance(model, RelationalModel):
        return f"relational model {model.lo}..{model.hi}"
    return f"{model.kind} model"


def check_kat_axioms(
    model: KatModel,
    seed: int | None = None,
    samples: int = DEFAULT_SAMPLES,
    only: Sequence[str] | None = None,
) -> LawReport:
    """Check the KAT axioms, the diamond axioms and the diamond laws on a model.

    Each law runs over every case when the case count fits the exhaustive budget and
    over ``samples`` seeded random cases otherwise; the report records which. ``only``
    restricts the run to the named law families.

    Raises:
        ModelError: For symbolic models or carriers beyond the law-suite bound.
    """
    if not isinstance(model, RelationalModel | TableModel):
        msg = f"{model.kind} models are symbolic; laws are checked on enumerable models"
        raise ModelError(msg)
    if isinstance(model, RelationalModel) and model.n > MAX_SAMPLED_CARRIER:
        msg = f"carrier of {model.n} points exceeds the law-suite bound {MAX_SAMPLED_CARRIER}"
        raise ModelError(msg)
    seed = DEFAULT_SEED if seed is None else seed
    runner = _LawRunner(model, seed, samples)
    laws = _kat_laws(model, runner.tests)
    if only is not None:
        laws = [law for law in laws if law.name in only]
    results = [runner.run(law) for law in laws]
    report = LawReport(
        subject=_subject(model), results=results, sampled=runner.any_sampled, seed=seed
    )
    logger.info("%s: %d of %d laws hold", report.subject, len(results) - len(report.failures), len(results))
    return report


def check_extensionality(model: KatModel) -> LawReport:
    """Check that distinct relations have distinct diamonds on singleton tests.

    Raises:
        ModelError: For non-relational models or carriers beyond the bound.
    """
    if not isinstance(model, RelationalModel):
        msg = "extensionality is checked on relational models only"
        raise ModelError(msg)
    if model.n > EXTENSIONALITY_CARRIER:
        msg = f"carrier of {model.n} points exceeds the bound {EXTENSIONALITY_CARRIER}"
        raise ModelError(msg)
    seen: dict[tuple[int, ...], Relation] = {}
    checked = 0
    result = LawResult(law="extensionality", passed=True, checked=0, sampled=False)
    for code in range(model.element_count):
        a = model.decode(code)
        checked += 1
        signature = tuple(model.bdia(a, 1 << x) for x in range(model.n))
        if signature in seen:
            result = LawResult(
                law="extensionality",
                passed=False,
                checked=checked,
                sampled=False,
                witness={"a": model.format_element(seen[signature]), "b": model.format_element(a)},
            )
            break
        seen[signature] = a
    else:
        result = LawResult(law="extensionality", passed=True, checked=checked, sampled=False)
    return LawReport(subject=_subject(model), results=[result], sampled=False, seed=None)


def top_representable(model: KatModel, c: object) -> list[object]:
    """Every test ``q`` with ``top q = c``.

    Table models are searched exhaustively; in a relational model the codomain ``c``
    is represented by exactly the test with the same support.
    """
    topp = model.topp
    if topp is None:
        msg = f"{model.kind} model has no top"
        raise ModelError(msg)
    if not topp.contains(c):
        msg = f"{c!r} is not a codomain of this model"
        raise LiteralError(msg)
    if isinstance(model, RelationalModel):
        return [c]
    assert isinstance(model, TableModel)
    top = model.top
    return [q for q in model.tests.elements() if model.seq(top, q) == c]
