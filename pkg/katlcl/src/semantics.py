"""Concrete and abstract semantics of terms, an independent relational oracle, and
local/global completeness checks.

The concrete semantics maps a precondition to the pair ``(ok, err)`` of normal and
erroneous postconditions. Over tests the step of an atom is the backward diamond of its
denotation; over topp codomains it is the image ``(top c) a``. Sequential composition
short-circuits: errors of the first component skip the second.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from katlcl.src.config import MAX_ENUMERATION
from katlcl.src.domain import GaloisInsertion, concrete_lattice
from katlcl.src.errors import LiteralError, ModelError
from katlcl.src.kat import Evaluation, KatModel, RelationalModel
from katlcl.src.lattice import ConcreteKind, ConcreteLattice, kleene_closure
from katlcl.src.term import Atom, One, Plus, Seq, Star, Term, Zero, atoms_of

logger = logging.getLogger(__name__)

type Eps = Literal["ok", "err"]


@dataclass(frozen=True)
class PostPair:
    """Normal and erroneous postconditions."""

    ok: object
    err: object


class Interpreter:
    """Concrete semantics over the test lattice or the topp codomain lattice."""

    def __init__(
        self, model: KatModel, evaluation: Evaluation, kind: ConcreteKind = ConcreteKind.TESTS
    ) -> None:
        """Bind the model, the evaluation of atoms and the concrete lattice."""
        self.model = model
        self.evaluation = evaluation
        self.kind = kind
        self.lattice: ConcreteLattice = concrete_lattice(model, kind)
        if kind is ConcreteKind.TESTS:
            self._step: Callable[[object, object], object] = model.bdia
        else:
            self._step = lambda a, c: model.top_image(c, a)
        self._ok_cache: dict[tuple[Term, object], object] = {}
        self._err_cache: dict[tuple[Term, object], object] = {}
        self.max_star_steps = 0

    def check(self, p: object) -> None:
        """Raise LiteralError unless ``p`` is in the concrete lattice."""
        if not self.lattice.contains(p):
            msg = f"{p!r} is not an element of the {self.kind} lattice"
            raise LiteralError(msg)

    def atom_step(self, atom: Atom, p: object, eps: Eps = "ok") -> object:
        """Post of a single atom."""
        element = self.evaluation.ok(atom) if eps == "ok" else self.evaluation.err(atom)
        return self._step(element, p)

    def ok(self, term: Term, p: object) -> object:
        """Normal-termination post."""
        key = (term, p)
        cached = self._ok_cache.get(key)
        if cached is not None:
            return cached
        lat = self.lattice
        match term:
            case Atom():
                result = self.atom_step(term, p, "ok")
            case Zero():
                result = lat.bottom
            case One():
                result = p
            case Plus(left, right):
                result = lat.join(self.ok(left, p), self.ok(right, p))
            case Seq(left, right):
                result = self.ok(right, self.ok(left, p))
            case Star(body):
                result, steps = kleene_closure(p, lambda x: self.ok(body, x), lat.join, lat.height)
                self.max_star_steps = max(self.max_star_steps, steps)
        self._ok_cache[key] = result
        return result

    def err(self, term: Term, p: object) -> object:
        """Erroneous-termination post."""
        key = (term, p)
        cached = self._err_cache.get(key)
        if cached is not None:
            return cached
        lat = self.lattice
        match term:
            case Atom():
                result = self.atom_step(term, p, "err")
            case Zero() | One():
                result = lat.bottom
            case Plus(left, right):
                result = lat.join(self.err(left, p), self.err(right, p))
            case Seq(left, right):
                result = lat.join(self.err(left, p), self.err(right, self.ok(left, p)))
            case Star(body):
                result = self.err(body, self.ok(term, p))
        self._err_cache[key] = result
        return result

    def post(self, term: Term, p: object) -> PostPair:
        """Both components."""
        return PostPair(self.ok(term, p), self.err(term, p))

    def component(self, term: Term, p: object, eps: Eps) -> object:
        return self.ok(term, p) if eps == "ok" else self.err(term, p)


class AbstractInterpreter:
    """Inductive abstract semantics: atoms are ``alpha . step . gamma``, stars are
    abstract fixpoints."""

    def __init__(self, domain: GaloisInsertion, interpreter: Interpreter) -> None:
        """Bind a domain to a concrete interpreter over the same lattice."""
        if domain.concrete != interpreter.lattice:
            msg = f"{domain.name} domain abstracts a different lattice than the semantics"
            raise ModelError(msg)
        self.domain = domain
        self.concrete = interpreter
        self._bound = max(len(domain.names), 1)
        self._ok_cache: dict[tuple[Term, str], str] = {}

    def ok(self, term: Term, a: str) -> str:
        key = (term, a)
        cached = self._ok_cache.get(key)
        if cached is not None:
            return cached
        d = self.domain
        match term:
            case Atom():
                result = d.alpha(self.concrete.atom_step(term, d.gamma(a), "ok"))
            case Zero():
                result = d.bottom
            case One():
                result = a
            case Plus(left, right):
                result = d.join(self.ok(left, a), self.ok(right, a))
            case Seq(left, right):
                result = self.ok(right, self.ok(left, a))
            case Star(body):
                result, _ = kleene_closure(a, lambda x: self.ok(body, x), d.join, self._bound)
        self._ok_cache[key] = result
        return result

    def err(self, term: Term, a: str) -> str:
        d = self.domain
        match term:
            case Atom():
                return d.alpha(self.concrete.atom_step(term, d.gamma(a), "err"))
            case Zero() | One():
                return d.bottom
            case Plus(left, right):
                return d.join(self.err(left, a), self.err(right, a))
            case Seq(left, right):
                return d.join(self.err(left, a), self.err(right, self.ok(left, a)))
            case Star(body):
                return self.err(body, self.ok(term, a))
        msg = f"not a term: {term!r}"
        raise TypeError(msg)

    def component(self, term: Term, a: str, eps: Eps) -> str:
        return self.ok(term, a) if eps == "ok" else self.err(term, a)


@dataclass
class Analysis:
    """A model, an evaluation and an abstract domain analysed together."""

    model: KatModel
    evaluation: Evaluation
    domain: GaloisInsertion

    @property
    def kind(self) -> ConcreteKind:
        return self.domain.kind

    @property
    def lattice(self) -> ConcreteLattice:
        return self.domain.concrete

    @cached_property
    def concrete(self) -> Interpreter:
        return Interpreter(self.model, self.evaluation, self.kind)

    @cached_property
    def abstract(self) -> AbstractInterpreter:
        return AbstractInterpreter(self.domain, self.concrete)

    def closure(self, c: object) -> object:
        return self.domain.closure(c)

    def fmt(self, c: object) -> str:
        return self.lattice.format(c)


# Module-level transformers


def post_ok(model: KatModel, evaluation: Evaluation, term: Term, p: object) -> object:
    """Strongest normal postcondition of ``term`` from test ``p``."""
    interpreter = Interpreter(model, evaluation)
    interpreter.check(p)
    return interpreter.ok(term, p)


def post_err(model: KatModel, evaluation: Evaluation, term: Term, p: object) -> object:
    """Strongest erroneous postcondition of ``term`` from test ``p``."""
    interpreter = Interpreter(model, evaluation)
    interpreter.check(p)
    return interpreter.err(term, p)


def top_post(
    model: KatModel, evaluation: Evaluation, term: Term, c: object, eps: Eps = "ok"
) -> object:
    """Codomain of ``(top c) [[term]]`` (its ok or err component)."""
    interpreter = Interpreter(model, evaluation, ConcreteKind.TOPP)
    interpreter.check(c)
    return interpreter.component(term, c, eps)


def _abstract(domain: GaloisInsertion, model: KatModel, evaluation: Evaluation, kind: ConcreteKind) -> AbstractInterpreter:
    if domain.kind is not kind:
        msg = f"{domain.name} domain is over {domain.kind}, expected {kind}"
        raise ModelError(msg)
    return AbstractInterpreter(domain, Interpreter(model, evaluation, kind))


def apost_ok(domain: GaloisInsertion, model: KatModel, evaluation: Evaluation, term: Term, a: str) -> str:
    """Abstract normal post over tests."""
    return _abstract(domain, model, evaluation, ConcreteKind.TESTS).ok(term, a)


def apost_err(domain: GaloisInsertion, model: KatModel, evaluation: Evaluation, term: Term, a: str) -> str:
    """Abstract erroneous post over tests."""
    return _abstract(domain, model, evaluation, ConcreteKind.TESTS).err(term, a)


def atop_post(
    domain: GaloisInsertion, model: KatModel, evaluation: Evaluation, term: Term, a: str, eps: Eps = "ok"
) -> str:
    """Abstract post over topp codomains."""
    return _abstract(domain, model, evaluation, ConcreteKind.TOPP).component(term, a, eps)


# Oracle


def _matrix(model: RelationalModel, relation: tuple[int, ...]) -> np.ndarray:
    return np.array([[(row >> y) & 1 for y in range(model.n)] for row in relation], dtype=bool)


def _product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


def _closure(a: np.ndarray) -> np.ndarray:
    result = np.eye(a.shape[0], dtype=bool) | a
    while True:
        grown = result | _product(result, result)
        if np.array_equal(grown, result):
            return result
        result = grown


def materialize(model: RelationalModel, evaluation: Evaluation, term: Term) -> tuple[np.ndarray, np.ndarray]:
    """Boolean matrices of ``[[term]]`` ok and err."""
    n = model.n
    match term:
        case Atom():
            return _matrix(model, evaluation.ok(term)), _matrix(model, evaluation.err(term))
        case Zero():
            return np.zeros((n, n), dtype=bool), np.zeros((n, n), dtype=bool)
        case One():
            return np.eye(n, dtype=bool), np.zeros((n, n), dtype=bool)
        case Plus(left, right):
            left_ok, left_err = materialize(model, evaluation, left)
            right_ok, right_err = materialize(model, evaluation, right)
            return left_ok | right_ok, left_err | right_err
        case Seq(left, right):
            left_ok, left_err = materialize(model, evaluation, left)
            right_ok, right_err = materialize(model, evaluation, right)
            return _product(left_ok, right_ok), left_err | _product(left_ok, right_err)
        case Star(body):
            body_ok, body_err = materialize(model, evaluation, body)
            closed = _closure(body_ok)
            return closed, _product(closed, body_err)
    msg = f"not a term: {term!r}"
    raise TypeError(msg)


def oracle_post(model: KatModel, evaluation: Evaluation, term: Term, p: int) -> PostPair:
    """Posts computed from materialized relations: ``{y | exists x in p, (x, y) in R}``."""
    if not isinstance(model, RelationalModel):
        msg = "the oracle needs a relational model"
        raise ModelError(msg)
    ok, err = materialize(model, evaluation, term)
    source = np.array([(p >> x) & 1 for x in range(model.n)], dtype=bool)

    def image(matrix: np.ndarray) -> int:
        reached = np.flatnonzero(_product(source[None, :], matrix)[0])
        return sum(1 << int(y) for y in reached)

    return PostPair(image(ok), image(err))


# Completeness


@dataclass(frozen=True)
class CompletenessCheck:
    """Outcome of a completeness check; ``lhs = A(f(p))`` and ``rhs = A(f(A(p)))``."""

    holds: bool
    p: object = None
    lhs: object = None
    rhs: object = None
    eps: Eps = "ok"

    def __bool__(self) -> bool:
        return self.holds


def local_complete(analysis: Analysis, term: Term, p: object, eps: Eps = "ok") -> CompletenessCheck:
    """Whether ``A(f(p)) = A(f(A(p)))`` for ``f`` the ``eps`` post of ``term``."""
    semantics = analysis.concrete
    lhs = analysis.closure(semantics.component(term, p, eps))
    rhs = analysis.closure(semantics.component(term, analysis.closure(p), eps))
    return CompletenessCheck(lhs == rhs, p, lhs, rhs, eps)


def global_complete(analysis: Analysis, atom: Atom, eps: tuple[Eps, ...] = ("ok", "err")) -> CompletenessCheck:
    """Local completeness of an atom at every concrete element; the first failure is the witness.

    Raises:
        ModelError: When the concrete lattice is too large to enumerate.
    """
    if analysis.lattice.size > MAX_ENUMERATION:
        msg = f"concrete lattice of {analysis.lattice.size} elements is too large to enumerate"
        raise ModelError(msg)
    if analysis.domain.trivial:
        return CompletenessCheck(True)
    for p in analysis.lattice.elements():
        for component in eps:
            check = local_complete(analysis, atom, p, component)
            if not check:
                logger.debug("%s not complete at %s (%s)", atom, analysis.fmt(p), component)
                return check
    return CompletenessCheck(True)


def incomplete_atoms(analysis: Analysis, term: Term, eps: tuple[Eps, ...] = ("ok",)) -> list[tuple[Atom, CompletenessCheck]]:
    """Atoms of ``term`` that are not globally complete, with witnesses, in name order."""
    failures = []
    for atom in sorted(atoms_of(term), key=lambda a: a.name):
        check = global_complete(analysis, atom, eps)
        if not check:
            failures.append((atom, check))
    return failures
