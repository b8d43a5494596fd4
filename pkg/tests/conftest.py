"""Pytest fixtures for katlcl tests."""

from collections.abc import Callable
from pathlib import Path

import pytest

from katlcl.src.bundles import open_bundle
from katlcl.src.loaders import Session
from katlcl.src.models import System
from katlcl.src.term import ONE, ZERO, Atom, AtomKind

# A four-point relational model used across the unit tests
SMALL_MODEL = """\
model relational
carrier 0 3
action inc ok succ-sat
action dec ok pairs (1,0)(2,1)(3,2)
action error ok empty err full
test pos ok ge 1
"""

# Carrier {0,1}: a swap, an action that crashes from 1, and a test
TWO_POINT_MODEL = """\
model relational
carrier 0 1
action flip ok pairs (0,1)(1,0)
action crash ok pairs (0,0) err pairs (1,1)
test on ok ge 1
"""
TWO_POINT_LEAVES = [
    Atom(AtomKind.ACTION, "flip"),
    Atom(AtomKind.ACTION, "crash"),
    Atom(AtomKind.TEST, "on"),
    ZERO,
    ONE,
]


@pytest.fixture
def write_file(tmp_path: Path) -> Callable[[str, str], Path]:
    """Factory fixture writing text files under tmp_path."""

    def _write(text: str, name: str = "model.kat") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write


@pytest.fixture
def small_model(write_file: Callable[[str, str], Path]) -> Path:
    """Path of the small relational model file."""
    return write_file(SMALL_MODEL, "small.kat")


@pytest.fixture
def small_session(small_model: Path) -> Session:
    """UL session over the small model at the trivial domain."""
    return Session.open(small_model, system=System.UL)


@pytest.fixture
def open_small(small_model: Path) -> Callable[..., Session]:
    """Factory fixture opening the small model for any system and domain."""

    def _open(system: System = System.LCK, domain: str = "trivial", *, top: bool = False) -> Session:
        return Session.open(small_model, domain, system, top=top)

    return _open


@pytest.fixture
def open_two_point(write_file: Callable[[str, str], Path]) -> Callable[..., Session]:
    """Factory fixture opening the two-point model for any system and domain."""
    path = write_file(TWO_POINT_MODEL, "two.kat")

    def _open(system: System = System.LCK, domain: str = "trivial", *, top: bool = False) -> Session:
        return Session.open(path, domain, system, top=top)

    return _open


@pytest.fixture(scope="session")
def gs_session() -> Session:
    """Guarded strings over b1 b2 with the parity domain."""
    return open_bundle("gs-parity")[1]


@pytest.fixture(scope="session")
def interval_session() -> Session:
    """Relational 0..11 with the interval domain, ok/err judgments."""
    return open_bundle("interval-il")[1]


@pytest.fixture(scope="session")
def sign_session() -> Session:
    """Relational -8..8 with the sign domain over topp codomains."""
    return open_bundle("sign-topkat")[1]


@pytest.fixture(scope="session")
def a3_session() -> Session:
    """The three-element TopKAT at the trivial domain."""
    return open_bundle("a3")[1]
