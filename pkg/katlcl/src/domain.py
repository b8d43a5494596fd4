"""Galois insertions between a concrete lattice (tests or topp codomains) and a finite
abstract lattice of named elements, plus the built-in domains.

An abstract domain is given by its concretization ``gamma``; unless a closed form is
supplied, ``alpha(c)`` is derived as the least abstract element whose concretization
covers ``c``.
"""

import logging
from collections.abc import Callable, Iterable, Iterator, Mapping
from itertools import product

from katlcl.src.config import DEFAULT_SAMPLES, DEFAULT_SEED, EXHAUSTIVE_BUDGET, MAX_ENUMERATION
from katlcl.src.errors import DomainError, LiteralError
from katlcl.src.kat import GuardedStringModel, KatModel, RelationalModel
from katlcl.src.lattice import ConcreteKind, ConcreteLattice, PowersetLattice
from katlcl.src.models import LawReport, LawResult
from katlcl.src.utils import make_rng

logger = logging.getLogger(__name__)


class GaloisInsertion:
    """Abstraction ``alpha`` / concretization ``gamma`` over a finite abstract lattice."""

    def __init__(
        self,
        name: str,
        concrete: ConcreteLattice,
        gamma: Mapping[str, object],
        order: Iterable[tuple[str, str]] | None = None,
        alpha: Callable[[object], str] | None = None,
    ) -> None:
        """Build the insertion.

        Args:
            name: Domain name used in reports.
            concrete: Lattice being abstracted.
            gamma: Concretization of each abstract element, in display order.
            order: Explicit covering pairs ``(a, b)`` meaning ``a <= b``; defaults to
                inclusion of concretizations.
            alpha: Closed-form abstraction; defaults to the adjoint of ``gamma``.

        Raises:
            DomainError: When ``gamma`` is empty, not injective or leaves the lattice.
        """
        if not gamma:
            msg = f"domain {name} has no elements"
            raise DomainError(msg)
        self.name = name
        self.concrete = concrete
        self.gamma_map = dict(gamma)
        self.names = tuple(self.gamma_map)
        for element, value in self.gamma_map.items():
            if not concrete.contains(value):
                msg = f"gamma({element}) is not in the concrete lattice"
                raise DomainError(msg)
        inverse: dict[object, str] = {}
        for element, value in self.gamma_map.items():
            if value in inverse:
                msg = f"gamma is not injective: {inverse[value]} and {element}"
                raise DomainError(msg)
            inverse[value] = element
        self._le = self._order(order)
        self._alpha_override = alpha
        self._alpha_cache: dict[object, str] = {}

    def _order(self, order: Iterable[tuple[str, str]] | None) -> set[tuple[str, str]]:
        if order is None:
            return {
                (a, b)
                for a, b in product(self.names, repeat=2)
                if self.concrete.le(self.gamma_map[a], self.gamma_map[b])
            }
        pairs = {(a, a) for a in self.names}
        for a, b in order:
            if a not in self.gamma_map or b not in self.gamma_map:
                msg = f"order mentions unknown element in {a} <= {b}"
                raise DomainError(msg)
            pairs.add((a, b))
        # Transitive closure
        changed = True
        while changed:
            extra = {(a, d) for (a, b) in pairs for (c, d) in pairs if b == c} - pairs
            changed = bool(extra)
            pairs |= extra
        return pairs

    def __repr__(self) -> str:
        return f"GaloisInsertion({self.name!r}, {len(self.names)} elements over {self.kind})"

    @property
    def kind(self) -> ConcreteKind:
        return self.concrete.kind

    @property
    def trivial(self) -> bool:
        """The one-point abstraction."""
        return len(self.names) == 1

    # Abstract lattice

    def le(self, a: str, b: str) -> bool:
        return (a, b) in self._le

    def gamma(self, a: str) -> object:
        try:
            return self.gamma_map[a]
        except KeyError:
            msg = f"{a!r} is not an element of the {self.name} domain"
            raise LiteralError(msg) from None

    def alpha(self, c: object) -> str:
        """Least abstract element whose concretization covers ``c``."""
        cached = self._alpha_cache.get(c)
        if cached is not None:
            return cached
        if self._alpha_override is not None:
            result = self._alpha_override(c)
        else:
            result = self._derived_alpha(c)
        self._alpha_cache[c] = result
        return result

    def _derived_alpha(self, c: object) -> str:
        covering = [a for a in self.names if self.concrete.le(c, self.gamma_map[a])]
        for a in covering:
            if all(self.le(a, other) for other in covering):
                return a
        msg = f"no least abstraction of {self.concrete.format(c)} in the {self.name} domain"
        raise DomainError(msg)

    def closure(self, c: object) -> object:
        """``A(c) = gamma(alpha(c))``."""
        return self.gamma_map[self.alpha(c)]

    def join(self, a: str, b: str) -> str:
        return self.alpha(self.concrete.join(self.gamma_map[a], self.gamma_map[b]))

    @property
    def bottom(self) -> str:
        return self.alpha(self.concrete.bottom)

    @property
    def top(self) -> str:
        return self.alpha(self.concrete.top)

    def format(self, a: str) -> str:
        return a

    def parse(self, text: str) -> str:
        name = text.strip()
        if name not in self.gamma_map:
            name = name.replace(" ", "")
        if name not in self.gamma_map:
            msg = f"{text!r} is not an element of the {self.name} domain"
            raise LiteralError(msg)
        return name

    def elements(self) -> Iterator[str]:
        return iter(self.names)


# Built-in domains


def trivial_domain(model: KatModel, kind: ConcreteKind = ConcreteKind.TESTS) -> GaloisInsertion:
    """The one-point domain ``{top}``; every concrete element abstracts to ``top``."""
    concrete = concrete_lattice(model, kind)
    return GaloisInsertion("trivial", concrete, {"top": concrete.top}, alpha=lambda _c: "top")


def concrete_lattice(model: KatModel, kind: ConcreteKind) -> ConcreteLattice:
    """The model's test lattice or topp lattice."""
    if kind is ConcreteKind.TESTS:
        return model.tests
    if model.topp is None:
        msg = f"{model.kind} model has no top, so no codomain lattice"
        raise DomainError(msg)
    return model.topp


def parity_domain(model: KatModel) -> GaloisInsertion:
    """``{top, e, o, bot}`` over the guarded-string model with two primitive tests.

    ``e`` holds the atoms where both primitives agree, ``o`` those where they differ.
    """
    if not isinstance(model, GuardedStringModel) or len(model.primitives) != 2:
        msg = "the parity domain needs the guarded-string model over two primitive tests"
        raise DomainError(msg)
    tests = model.tests
    gamma = {
        "top": tests.top,
        "e": tests.from_labels(["++", "--"]),
        "o": tests.from_labels(["+-", "-+"]),
        "bot": tests.bottom,
    }
    return GaloisInsertion("parity", tests, gamma)


SIGNS: dict[str, tuple[bool, bool, bool]] = {
    # name: (negatives, zero, positives), most specific first
    "empty": (False, False, False),
    "Z<0": (True, False, False),
    "Z=0": (False, True, False),
    "Z>0": (False, False, True),
    "Z<=0": (True, True, False),
    "Z!=0": (True, False, True),
    "Z>=0": (False, True, True),
    "Z": (True, True, True),
}


def _carrier_lattice(model: KatModel, kind: ConcreteKind, name: str) -> tuple[RelationalModel, PowersetLattice]:
    if not isinstance(model, RelationalModel):
        msg = f"the {name} domain needs a relational model"
        raise DomainError(msg)
    lattice = concrete_lattice(model, kind)
    assert isinstance(lattice, PowersetLattice)
    return model, lattice


def sign_domain(model: KatModel, kind: ConcreteKind = ConcreteKind.TESTS) -> GaloisInsertion:
    """Signs of integers over a relational carrier containing 0.

    On carriers without negatives (or positives) several signs share a concretization;
    only the most specific name of each is kept so that gamma stays injective.
    """
    model, lattice = _carrier_lattice(model, kind, "sign")
    if not model.lo <= 0 <= model.hi:
        msg = f"the sign domain needs 0 in the carrier {model.lo}..{model.hi}"
        raise DomainError(msg)
    parts = (
        lattice.from_labels([z for z in model.carrier if z < 0]),
        lattice.from_labels([0]),
        lattice.from_labels([z for z in model.carrier if z > 0]),
    )
    gamma: dict[str, int] = {}
    seen: dict[int, str] = {}
    canonical: dict[tuple[bool, bool, bool], str] = {}
    for name, flags in SIGNS.items():
        value = sum(part for part, flag in zip(parts, flags) if flag)
        if value not in seen:
            seen[value] = name
            gamma[name] = value
        canonical[flags] = seen[value]

    def alpha(c: int) -> str:
        return canonical[tuple(bool(c & part) for part in parts)]

    return GaloisInsertion("sign", lattice, gamma, alpha=alpha)


def interval_domain(model: KatModel, kind: ConcreteKind = ConcreteKind.TESTS) -> GaloisInsertion:
    """Intervals ``[l,u]`` within the carrier, plus ``bot``; alpha is the convex hull."""
    model, lattice = _carrier_lattice(model, kind, "interval")
    gamma: dict[str, int] = {"bot": 0}
    for low in range(model.n):
        for high in range(low, model.n):
            gamma[f"[{model.carrier[low]},{model.carrier[high]}]"] = ((1 << (high + 1)) - 1) ^ (
                (1 << low) - 1
            )

    def alpha(c: int) -> str:
        if not c:
            return "bot"
        low = (c & -c).bit_length() - 1
        high = c.bit_length() - 1
        return f"[{model.carrier[low]},{model.carrier[high]}]"

    return GaloisInsertion("interval", lattice, gamma, alpha=alpha)


BUILTIN_DOMAINS = ("trivial", "parity", "sign", "interval")


def builtin_domain(name: str, model: KatModel, kind: ConcreteKind) -> GaloisInsertion:
    """Construct a built-in domain by name."""
    match name:
        case "trivial":
            return trivial_domain(model, kind)
        case "parity":
            if kind is not ConcreteKind.TESTS:
                msg = "the parity domain abstracts tests only"
                raise DomainError(msg)
            return parity_domain(model)
        case "sign":
            return sign_domain(model, kind)
        case "interval":
            return interval_domain(model, kind)
    msg = f"unknown domain {name!r}; built-ins are {', '.join(BUILTIN_DOMAINS)}"
    raise DomainError(msg)


# Law suite


def _concrete_cases(lattice: ConcreteLattice, arity: int, seed: int, samples: int) -> tuple[Iterator[tuple], bool]:
    """All ``arity``-tuples of concrete elements when small enough, else seeded samples."""
    if lattice.size <= MAX_ENUMERATION and lattice.size**arity <= EXHAUSTIVE_BUDGET:
        return product(lattice.elements(), repeat=arity), False
    rng = make_rng(seed)
    if isinstance(lattice, PowersetLattice):

        def draw() -> object:
            bits = rng.integers(0, 2, size=lattice.width)
            return sum(1 << i for i, bit in enumerate(bits) if bit)

    else:
        names = list(lattice.elements())

        def draw() -> object:
            return names[int(rng.integers(len(names)))]

    return (tuple(draw() for _ in range(arity)) for _ in range(samples)), True


def _covers(lattice: ConcreteLattice, c: object) -> Iterator[object]:
    """Elements immediately above ``c`` (one more point, for powersets)."""
    if isinstance(lattice, PowersetLattice):
        for i in range(lattice.width):
            if not c & (1 << i):
                yield c | (1 << i)
    else:
        yield from (d for d in lattice.elements() if lattice.le(c, d) and d != c)


def check_galois(  # noqa: C901
    domain: GaloisInsertion, seed: int | None = None, samples: int = DEFAULT_SAMPLES
) -> LawReport:
    """Check the insertion laws, reporting a witness for each failing law.

    Laws over abstract elements are exhaustive; laws over concrete elements are
    exhaustive while the lattice fits the enumeration budget and sampled otherwise.
    """
    seed = DEFAULT_SEED if seed is None else seed
    concrete = domain.concrete
    fmt = concrete.format
    results: list[LawResult] = []
    any_sampled = False

    def record(law: str, checked: int, sampled: bool, witness: dict[str, str] | None) -> None:
        results.append(
            LawResult(law=law, passed=witness is None, checked=checked, sampled=sampled, witness=witness)
        )

    # gamma monotone and alpha . gamma = id
    checked, witness = 0, None
    for a, b in product(domain.names, repeat=2):
        checked += 1
        if domain.le(a, b) and not concrete.le(domain.gamma(a), domain.gamma(b)):
            witness = {"a": a, "b": b}
            break
    record("gamma-monotone", checked, False, witness)

    checked, witness = 0, None
    for a in domain.names:
        checked += 1
        if domain.alpha(domain.gamma(a)) != a:
            witness = {"a": a, "alpha(gamma(a))": domain.alpha(domain.gamma(a))}
            break
    record("alpha-gamma-identity", checked, False, witness)

    # Unary concrete laws
    unary = {
        "extensive": lambda c: concrete.le(c, domain.closure(c)),
        "closure-idempotent": lambda c: domain.closure(domain.closure(c)) == domain.closure(c),
        "alpha-monotone": lambda c: all(domain.le(domain.alpha(c), domain.alpha(d)) for d in _covers(concrete, c)),
        "adjunction": lambda c: all(
            domain.le(domain.alpha(c), a) == concrete.le(c, domain.gamma(a)) for a in domain.names
        ),
    }
    for law, holds in unary.items():
        cases, sampled = _concrete_cases(concrete, 1, seed, samples)
        any_sampled |= sampled
        checked, witness = 0, None
        for (c,) in cases:
            checked += 1
            if not holds(c):
                witness = {"c": fmt(c), "alpha(c)": domain.alpha(c)}
                break
        record(law, checked, sampled, witness)

    cases, sampled = _concrete_cases(concrete, 2, seed, samples)
    any_sampled |= sampled
    checked, witness = 0, None
    for c, d in cases:
        checked += 1
        joined = domain.alpha(concrete.join(c, d))
        if joined != domain.join(domain.alpha(c), domain.alpha(d)):
            witness = {"c": fmt(c), "d": fmt(d), "alpha(c join d)": joined}
            break
    record("alpha-additive", checked, sampled, witness)

    report = LawReport(subject=f"{domain.name} domain", results=results, sampled=any_sampled, seed=seed)
    for failure in report.failures:
        logger.debug("%s: %s fails at %s", report.subject, failure.law, failure.witness)
    return report


def validate_domain(domain: GaloisInsertion, seed: int | None = None) -> GaloisInsertion:
    """Raise DomainError unless every insertion law holds."""
    report = check_galois(domain, seed=seed)
    if not report.passed:
        first = report.failures[0]
        msg = f"{domain.name} domain breaks {first.law}: {first.witness}"
        raise DomainError(msg)
    return domain
