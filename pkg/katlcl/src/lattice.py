"""Finite concrete lattices: test algebras and topp codomain lattices.

A relational or guarded-string test algebra is a powerset, stored as an ``int`` bitmask
over a labelled universe. Explicit-table models use ``TableLattice`` over element names.
"""

import logging
import re
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterator, Sequence
from enum import StrEnum
from functools import cached_property

from katlcl.src.errors import KatParseError, LiteralError, ModelError
from katlcl.src.utils import full_mask, iter_bits

logger = logging.getLogger(__name__)


class ConcreteKind(StrEnum):
    """Which concrete lattice an abstraction (or a judgment) lives over."""

    TESTS = "tests"
    TOPP = "topp"


class ConcreteLattice[T](ABC):
    """A finite lattice of concrete values with a literal syntax."""

    kind: ConcreteKind

    @property
    @abstractmethod
    def bottom(self) -> T: ...

    @property
    @abstractmethod
    def top(self) -> T: ...

    @abstractmethod
    def le(self, a: T, b: T) -> bool: ...

    @abstractmethod
    def join(self, a: T, b: T) -> T: ...

    @abstractmethod
    def meet(self, a: T, b: T) -> T: ...

    @abstractmethod
    def difference(self, a: T, b: T) -> T:
        """Part of ``a`` outside ``b`` (``a`` meet the complement of ``b``)."""

    @abstractmethod
    def elements(self) -> Iterator[T]:
        """Every element, in a fixed order starting from bottom."""

    @property
    @abstractmethod
    def size(self) -> int: ...

    @property
    @abstractmethod
    def height(self) -> int:
        """Length of the longest strict chain."""

    @abstractmethod
    def format(self, value: T) -> str: ...

    @abstractmethod
    def parse(self, text: str) -> T: ...

    def contains(self, value: object) -> bool:
        """Whether ``value`` is an element of this lattice."""
        return any(value == element for element in self.elements())

    def join_all(self, values: Sequence[T]) -> T:
        """Join of a finite family (bottom when empty)."""
        result = self.bottom
        for value in values:
            result = self.join(result, value)
        return result


_RANGE_RE = re.compile(r"^(-?\d+)\.\.(-?\d+)$")


class PowersetLattice(ConcreteLattice[int]):
    """Subsets of a finite labelled universe, as bitmasks.

    ``labels[i]`` names bit ``i``. Integer labels print sorted with runs of three or
    more compressed to ``a..b``; string labels (guarded-string atoms) print in label
    order. Topp lattices prefix literals with ``top``.
    """

    def __init__(self, labels: Sequence[int] | Sequence[str], kind: ConcreteKind) -> None:
        """Build the powerset of ``labels``."""
        self.labels = tuple(labels)
        self.kind = kind
        self.width = len(self.labels)
        self._index = {label: i for i, label in enumerate(self.labels)}
        self._numeric = all(isinstance(label, int) for label in self.labels)
        self._prefix = "top" if kind is ConcreteKind.TOPP else ""

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PowersetLattice)
            and self.labels == other.labels
            and self.kind == other.kind
        )

    def __hash__(self) -> int:
        return hash((self.labels, self.kind))

    @property
    def bottom(self) -> int:
        return 0

    @property
    def top(self) -> int:
        return full_mask(self.width)

    def le(self, a: int, b: int) -> bool:
        return a & ~b == 0

    def join(self, a: int, b: int) -> int:
        return a | b

    def meet(self, a: int, b: int) -> int:
        return a & b

    def difference(self, a: int, b: int) -> int:
        return a & ~b

    def complement(self, a: int) -> int:
        """Boolean complement."""
        return self.top & ~a

    def elements(self) -> Iterator[int]:
        return iter(range(1 << self.width))

    def contains(self, value: object) -> bool:
        return isinstance(value, int) and 0 <= value <= self.top

    @property
    def size(self) -> int:
        return 1 << self.width

    @property
    def height(self) -> int:
        return self.width

    def singleton(self, label: int | str) -> int:
        """Mask of a single labelled point."""
        try:
            return 1 << self._index[label]
        except KeyError:
            msg = f"{label!r} is not in {self.format(self.top)}"
            raise LiteralError(msg) from None

    def from_labels(self, labels: Sequence[int] | Sequence[str]) -> int:
        """Mask of a collection of labels."""
        mask = 0
        for label in labels:
            mask |= self.singleton(label)
        return mask

    def labels_of(self, mask: int) -> list[int | str]:
        """Labels of the set bits, in label order."""
        return [self.labels[i] for i in iter_bits(mask)]

    def format(self, value: int) -> str:
        items = self.labels_of(value)
        if not self._numeric:
            return f"{self._prefix}{{{','.join(str(item) for item in items)}}}"
        numbers = sorted(int(item) for item in items)
        parts: list[str] = []
        start = 0
        while start < len(numbers):
            end = start
            while end + 1 < len(numbers) and numbers[end + 1] == numbers[end] + 1:
                end += 1
            if end - start >= 2:
                parts.append(f"{numbers[start]}..{numbers[end]}")
            else:
                parts.extend(str(n) for n in numbers[start : end + 1])
            start = end + 1
        return f"{self._prefix}{{{','.join(parts)}}}"

    def parse(self, text: str) -> int:
        raw = text.strip()
        if self._prefix:
            if not raw.startswith(self._prefix):
                msg = f"codomain literal must start with 'top': {text!r}"
                raise KatParseError(msg, 0)
            raw = raw[len(self._prefix) :].strip()
        if not (raw.startswith("{") and raw.endswith("}")):
            msg = f"expected a set literal '{{...}}', got {text!r}"
            raise KatParseError(msg, 0)
        body = raw[1:-1].strip()
        if not body:
            return 0
        mask = 0
        for item in (part.strip() for part in body.split(",")):
            mask |= self._parse_item(item, text)
        return mask

    def _parse_item(self, item: str, text: str) -> int:
        if not self._numeric:
            if not item or set(item) - {"+", "-"}:
                msg = f"bad guarded-string atom {item!r} in {text!r}"
                raise KatParseError(msg, text.find(item))
            return self.singleton(item)
        if match := _RANGE_RE.match(item):
            low, high = int(match.group(1)), int(match.group(2))
            return self.from_labels(list(range(low, high + 1)))
        try:
            return self.singleton(int(item))
        except ValueError:
            msg = f"bad carrier value {item!r} in {text!r}"
            raise KatParseError(msg, text.find(item)) from None


class TableLattice(ConcreteLattice[str]):
    """A finite lattice of named elements of an explicit-table model.

    The order is the model's natural order ``a <= b`` iff ``a + b = b``.
    """

    def __init__(
        self,
        names: Sequence[str],
        join: Callable[[str, str], str],
        meet: Callable[[str, str], str],
        kind: ConcreteKind,
    ) -> None:
        """Build the lattice over ``names`` with the model's operations."""
        self.names = tuple(names)
        self.kind = kind
        self._join = join
        self._meet = meet
        if not self.names:
            msg = "empty lattice"
            raise ModelError(msg)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TableLattice)
            and self.names == other.names
            and self.kind == other.kind
        )

    def __hash__(self) -> int:
        return hash((self.names, self.kind))

    @cached_property
    def bottom(self) -> str:
        return self._extreme(lambda a, b: self.le(a, b), "least")

    @cached_property
    def top(self) -> str:
        return self._extreme(lambda a, b: self.le(b, a), "greatest")

    def _extreme(self, below: Callable[[str, str], bool], label: str) -> str:
        for name in self.names:
            if all(below(name, other) for other in self.names):
                return name
        msg = f"no {label} element among {list(self.names)}"
        raise ModelError(msg)

    def le(self, a: str, b: str) -> bool:
        return self._join(a, b) == b

    def join(self, a: str, b: str) -> str:
        return self._join(a, b)

    def meet(self, a: str, b: str) -> str:
        return self._meet(a, b)

    def complement(self, a: str) -> str:
        """The element ``c`` with ``a + c = top`` and ``a meet c = bottom``."""
        for name in self.names:
            if self.join(a, name) == self.top and self.meet(a, name) == self.bottom:
                return name
        msg = f"{a} has no complement"
        raise LiteralError(msg)

    def difference(self, a: str, b: str) -> str:
        return self.meet(a, self.complement(b))

    def elements(self) -> Iterator[str]:
        return iter(self.names)

    def contains(self, value: object) -> bool:
        return value in self.names

    @property
    def size(self) -> int:
        return len(self.names)

    @cached_property
    def height(self) -> int:
        # Longest chain by dynamic programming over elements sorted by down-set size
        below = {a: [b for b in self.names if b != a and self.le(b, a)] for a in self.names}
        longest: dict[str, int] = {}
        for name in sorted(self.names, key=lambda n: len(below[n])):
            longest[name] = max((longest[b] + 1 for b in below[name]), default=0)
        return max(longest.values())

    def format(self, value: str) -> str:
        return value

    def parse(self, text: str) -> str:
        name = text.strip()
        if not name or " " in name:
            msg = f"expected an element name, got {text!r}"
            raise KatParseError(msg, 0)
        if name not in self.names:
            msg = f"{name!r} is not one of {list(self.names)}"
            raise LiteralError(msg)
        return name


def kleene_closure[T](
    seed: T,
    step: Callable[[T], T],
    join: Callable[[T, T], T],
    bound: int,
) -> tuple[T, int]:
    """Least fixpoint of ``x -> seed join step(x)`` above ``seed``.

    Returns the fixpoint and the number of strict increases it took. ``step`` must be
    monotone; more than ``bound`` increases means it is not.
    """
    current = seed
    for index in range(bound + 1):
        following = join(seed, step(current))
        if following == current:
            logger.debug("star fixpoint stabilized after %d steps", index)
            return current, index
        current = following
    msg = f"fixpoint iteration did not stabilize within {bound} steps"
    raise ModelError(msg)
