"""Model files, domain files, triple literals and the session bundling them.

Model files are line oriented with ``#`` comments::

    model relational
    carrier 0 11
    action inc ok succ
    action error ok empty err full
    test geq0 ok ge 0
    action f ok pairs (0,1)(0,2)

Other headers: ``model guarded-strings b1 b2`` (with ``action NAME`` lines), ``model a3``
and ``model table`` (with ``elements``/``tests``/``top``/``plus``/``seq``/``star`` lines).
"""

import logging
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from katlcl.src.domain import BUILTIN_DOMAINS, GaloisInsertion, builtin_domain, concrete_lattice, validate_domain
from katlcl.src.errors import DomainError, KatParseError, ModelError
from katlcl.src.kat import (
    Evaluation,
    GuardedStringModel,
    KatModel,
    Relation,
    RelationalModel,
    TableModel,
    a3_model,
    evaluation,
    gs_evaluation,
)
from katlcl.src.lattice import ConcreteKind
from katlcl.src.models import Derivation, System, Triple
from katlcl.src.proofs import parse_derivation
from katlcl.src.semantics import Analysis
from katlcl.src.term import Term, parse_term

logger = logging.getLogger(__name__)

_PAIR_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")
_TABLE_RE = re.compile(r"^(plus|seq)\s+(\S+)\s+(\S+)\s*=\s*(\S+)$|^star\s+(\S+)\s*=\s*(\S+)$")
_TRIPLE_RE = re.compile(r"^\s*\[(?P<pre>[^\]]*)\]\s*(?P<term>[^\[\]]+?)\s*(?P<posts>(?:\[[^\]]*\]\s*)+)$")
_POST_RE = re.compile(r"\[\s*(?:(?P<eps>ok|err)\s*:)?(?P<value>[^\]]*)\]")


def _lines(text: str) -> list[tuple[int, list[str], str]]:
    """Non-empty lines as ``(number, words, raw)`` with comments removed."""
    found = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            found.append((number, line.split(), line))
    return found


def _fail(number: int, msg: str) -> KatParseError:
    return KatParseError(f"line {number}: {msg}")


def _int(number: int, word: str) -> int:
    try:
        return int(word)
    except ValueError:
        raise _fail(number, f"expected an integer, got {word!r}") from None


# Relational models


def _relation(model: RelationalModel, number: int, words: list[str], raw: str) -> Relation:
    """A relation generator: succ, succ-sat, empty, full, all, ge K, lt K or pairs (x,y)..."""
    if not words:
        raise _fail(number, "missing relation")
    head, args = words[0], words[1:]
    match head:
        case "succ" | "succ-sat" | "empty" | "full" | "id" | "all" if args:
            raise _fail(number, f"{head} takes no arguments")
        case "succ":
            return model.succ()
        case "succ-sat":
            return model.succ_sat()
        case "empty":
            return model.empty
        case "full" | "id":
            return model.identity
        case "all":
            return model.full
        case "ge" | "lt":
            if len(args) != 1:
                raise _fail(number, f"{head} takes one bound")
            bound = _int(number, args[0])
            return model.ge(bound) if head == "ge" else model.lt(bound)
        case "pairs":
            body = raw[raw.index("pairs") + len("pairs") :]
            pairs = [(int(x), int(y)) for x, y in _PAIR_RE.findall(body)]
            if _PAIR_RE.sub("", body).strip():
                raise _fail(number, "pairs expects '(x,y)' items")
            return model.pairs(pairs)
    raise _fail(number, f"unknown relation generator {head!r}")


def _atom_parts(number: int, words: list[str]) -> tuple[str, list[str], list[str] | None]:
    """Split ``action NAME ok ... [err ...]`` into name, ok words and err words."""
    if len(words) < 4 or words[2] != "ok":
        raise _fail(number, f"expected '{words[0]} NAME ok ...'")
    rest = words[3:]
    if "err" in rest:
        cut = rest.index("err")
        return words[1], rest[:cut], rest[cut + 1 :]
    return words[1], rest, None


def _relational(body: list[tuple[int, list[str], str]]) -> tuple[KatModel, Evaluation]:
    model: RelationalModel | None = None
    actions: dict[str, tuple[object, object | None]] = {}
    tests: dict[str, object] = {}
    for number, words, raw in body:
        if words[0] == "carrier":
            if len(words) != 3:
                raise _fail(number, "expected 'carrier LO HI'")
            model = RelationalModel(_int(number, words[1]), _int(number, words[2]))
            continue
        if words[0] not in {"action", "test"}:
            raise _fail(number, f"unexpected {words[0]!r}")
        if model is None:
            raise _fail(number, "carrier must come before atoms")
        name, ok_words, err_words = _atom_parts(number, words)
        ok_raw, _sep, err_raw = raw.split(None, 3)[3].partition(" err ")
        ok = _relation(model, number, ok_words, ok_raw)
        if words[0] == "test":
            if err_words is not None:
                raise _fail(number, "tests have no err component")
            tests[name] = ok
        else:
            err = None if err_words is None else _relation(model, number, err_words, err_raw)
            actions[name] = (ok, err)
    if model is None:
        msg = "relational model without a carrier line"
        raise KatParseError(msg)
    return model, evaluation(model, actions, tests)


# Guarded strings and tables


def _guarded(header: list[str], body: list[tuple[int, list[str], str]]) -> tuple[KatModel, Evaluation]:
    model = GuardedStringModel(header[2:])
    actions = []
    for number, words, _raw in body:
        if words[0] != "action" or len(words) != 2:
            raise _fail(number, "guarded-string models take 'action NAME' lines only")
        actions.append(words[1])
    return model, gs_evaluation(model, actions)


def _table_atoms(model: TableModel, atoms: list[tuple[int, list[str]]]) -> Evaluation:
    actions: dict[str, tuple[object, object | None]] = {}
    tests: dict[str, object] = {}
    for number, words in atoms:
        name, ok_words, err_words = _atom_parts(number, words)
        for part in (ok_words, err_words or []):
            if len(part) > 1 or any(word not in model.names for word in part):
                raise _fail(number, f"expected an element of {list(model.names)}")
        if words[0] == "test":
            tests[name] = ok_words[0]
        else:
            actions[name] = (ok_words[0], err_words[0] if err_words else None)
    return evaluation(model, actions, tests)


def _table(header: list[str], body: list[tuple[int, list[str], str]]) -> tuple[KatModel, Evaluation]:
    atoms = [(number, words) for number, words, _raw in body if words[0] in {"action", "test"}]
    if header[1] == "a3":
        if len(atoms) != len(body):
            raise _fail(body[0][0], "model a3 takes atom lines only")
        model = a3_model()
        return model, _table_atoms(model, atoms)
    settings: dict[str, list[str]] = {}
    plus: dict[tuple[str, str], str] = {}
    seq: dict[tuple[str, str], str] = {}
    star: dict[str, str] = {}
    for number, words, raw in body:
        if words[0] in {"elements", "tests", "top", "zero", "one"}:
            settings[words[0]] = words[1:]
        elif match := _TABLE_RE.match(raw):
            if match.group(1) == "plus":
                plus[(match.group(2), match.group(3))] = match.group(4)
            elif match.group(1) == "seq":
                seq[(match.group(2), match.group(3))] = match.group(4)
            else:
                star[match.group(5)] = match.group(6)
        elif words[0] not in {"action", "test"}:
            raise _fail(number, f"unexpected {words[0]!r}")
    if "elements" not in settings or "tests" not in settings:
        msg = "table model needs 'elements' and 'tests' lines"
        raise KatParseError(msg)
    single = {key: value[0] for key, value in settings.items() if key in {"top", "zero", "one"} and value}
    model = TableModel(
        settings["elements"],
        settings["tests"],
        plus,
        seq,
        star,
        zero=single.get("zero", "0"),
        one=single.get("one", "1"),
        top=single.get("top"),
    )
    return model, _table_atoms(model, atoms)


def parse_model(text: str) -> tuple[KatModel, Evaluation]:
    """Parse a model file into a model and the evaluation of its atoms.

    Raises:
        KatParseError: On malformed lines.
        ModelError: On out-of-bound carriers or ill-formed tables.
    """
    lines = _lines(text)
    if not lines or lines[0][1][0] != "model" or len(lines[0][1]) < 2:
        msg = "a model file starts with 'model KIND'"
        raise KatParseError(msg)
    _number, header, _raw = lines[0]
    body = lines[1:]
    match header[1]:
        case "relational":
            model, ev = _relational(body)
        case "guarded-strings":
            model, ev = _guarded(header, body)
        case "a3" | "table":
            model, ev = _table(header, body)
        case kind:
            msg = f"unknown model kind {kind!r}"
            raise ModelError(msg)
    logger.debug("loaded %s model with atoms %s", model.kind, sorted(ev.entries))
    return model, ev


def load_model(path: str | Path) -> tuple[KatModel, Evaluation]:
    """Read and parse a model file."""
    return parse_model(Path(path).read_text())


# Domains


def parse_domain(text: str, model: KatModel, kind: ConcreteKind = ConcreteKind.TESTS) -> GaloisInsertion:
    """Parse a domain file: a built-in name or ``domain table`` with ``elem``/``order`` lines.

    Table domains are checked against the insertion laws here.
    """
    lines = _lines(text)
    if not lines or lines[0][1][0] != "domain" or len(lines[0][1]) != 2:
        msg = "a domain file starts with 'domain NAME'"
        raise KatParseError(msg)
    name = lines[0][1][1]
    gamma: dict[str, str] = {}
    order: list[tuple[str, str]] = []
    for number, words, raw in lines[1:]:
        match words:
            case ["concrete", "tests" | "topp" as declared]:
                if ConcreteKind(declared) is not kind:
                    msg = f"domain is declared over {declared}, but {kind} is needed"
                    raise DomainError(msg)
            case ["elem", element, "gamma", *_rest]:
                gamma[element] = raw.split("gamma", 1)[1].strip()
            case ["order", low, "<=", high]:
                order.append((low, high))
            case _:
                raise _fail(number, f"unexpected {words[0]!r}")
    if name != "table":
        if gamma or order:
            msg = f"built-in domain {name} takes no elem/order lines"
            raise DomainError(msg)
        return builtin_domain(name, model, kind)
    lattice = concrete_lattice(model, kind)
    values = {element: lattice.parse(literal) for element, literal in gamma.items()}
    return validate_domain(GaloisInsertion("table", lattice, values, order or None))


def load_domain(spec: str, model: KatModel, kind: ConcreteKind = ConcreteKind.TESTS) -> GaloisInsertion:
    """A built-in domain by name, or a domain file."""
    if spec in BUILTIN_DOMAINS and not Path(spec).exists():
        return builtin_domain(spec, model, kind)
    path = Path(spec)
    if not path.is_file():
        msg = f"{spec!r} is neither a built-in domain ({', '.join(BUILTIN_DOMAINS)}) nor a domain file"
        raise DomainError(msg)
    return parse_domain(path.read_text(), model, kind)


# Session


@dataclass
class Session:
    """A model, its evaluation and an abstract domain, read for one proof system."""

    model: KatModel
    evaluation: Evaluation
    domain: GaloisInsertion
    system: System = System.LCK

    @classmethod
    def open(
        cls, model: str | Path, domain: str = "trivial", system: System = System.LCK, *, top: bool = False
    ) -> "Session":
        """Load a model file and a domain; top systems (or ``top``) use topp codomains."""
        kat, ev = load_model(model)
        kind = ConcreteKind.TOPP if system.top or top else ConcreteKind.TESTS
        return cls(kat, ev, load_domain(domain, kat, kind), system)

    @cached_property
    def analysis(self) -> Analysis:
        return Analysis(self.model, self.evaluation, self.domain)

    def term(self, text: str) -> Term:
        return parse_term(text, self.evaluation.sigma, self.evaluation.b)

    def value(self, text: str) -> object:
        return self.domain.concrete.parse(text)

    def triple(self, text: str) -> Triple:
        """Parse ``[pre] term [ok: q][err: r]``; a bare ``[q]`` is the ok component."""
        match = _TRIPLE_RE.match(text)
        if match is None:
            msg = f"expected '[pre] term [ok: q][err: r]', got {text!r}"
            raise KatParseError(msg, 0)
        posts: dict[str, object] = {}
        for post in _POST_RE.finditer(match.group("posts")):
            eps = post.group("eps") or "ok"
            if eps in posts:
                msg = f"{eps} component given twice"
                raise KatParseError(msg, match.start("posts") + post.start())
            posts[eps] = self.value(post.group("value"))
        if "err" in posts and not self.system.pairs:
            msg = f"{self.system} judgments have no err component"
            raise ModelError(msg)
        return Triple(
            system=self.system,
            pre=self.value(match.group("pre")),
            term=self.term(match.group("term")),
            post_ok=posts.get("ok"),
            post_err=posts.get("err"),
        )

    def derivation(self, path: str | Path) -> Derivation:
        return parse_derivation(Path(path).read_text(), self.domain.concrete, self.evaluation.alphabet)
