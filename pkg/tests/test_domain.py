"""Tests for Galois insertions and the built-in domains."""

import pytest

from katlcl.src.domain import (
    builtin_domain,
    check_galois,
    interval_domain,
    parity_domain,
    sign_domain,
    trivial_domain,
)
from katlcl.src.errors import DomainError, LiteralError
from katlcl.src.kat import GuardedStringModel, RelationalModel, a3_model
from katlcl.src.lattice import ConcreteKind
from katlcl.src.loaders import parse_domain


@pytest.fixture
def gs() -> GuardedStringModel:
    """Guarded strings over two primitive tests."""
    return GuardedStringModel(["b1", "b2"])


class TestBuiltinDomains:
    """Tests for the built-in abstractions."""

    def test_parity(self, gs):
        """Even atoms agree on both primitives, odd atoms differ."""
        parity = parity_domain(gs)
        tests = gs.tests
        assert parity.alpha(tests.parse("{++}")) == "e"
        assert parity.alpha(tests.parse("{+-,-+}")) == "o"
        assert parity.alpha(tests.parse("{++,+-}")) == "top"
        assert parity.alpha(tests.bottom) == "bot"
        assert tests.format(parity.closure(tests.parse("{--}"))) == "{++,--}"

    def test_sign(self):
        """Signs abstract by which of negatives, zero and positives occur."""
        model = RelationalModel(-8, 8)
        sign = sign_domain(model)
        tests = model.tests
        assert sign.alpha(tests.parse("{0,8}")) == "Z>=0"
        assert sign.alpha(tests.parse("{-3,3}")) == "Z!=0"
        assert sign.alpha(tests.parse("{}")) == "empty"
        assert tests.format(sign.gamma("Z>0")) == "{1..8}"

    def test_sign_on_non_negative_carrier(self):
        """Signs with equal concretizations collapse to the most specific name."""
        sign = sign_domain(RelationalModel(0, 3))
        assert "Z<0" not in sign.names
        assert sign.alpha(RelationalModel(0, 3).tests.parse("{0,2}")) == "Z>=0"
        assert check_galois(sign).passed

    def test_sign_needs_zero(self):
        """The sign domain is defined around 0."""
        with pytest.raises(DomainError, match="needs 0"):
            sign_domain(RelationalModel(1, 4))

    def test_interval(self):
        """Alpha is the convex hull."""
        model = RelationalModel(0, 11)
        interval = interval_domain(model)
        assert interval.alpha(model.tests.parse("{0,2}")) == "[0,2]"
        assert interval.alpha(0) == "bot"
        assert model.tests.format(interval.closure(model.tests.parse("{3,7}"))) == "{3..7}"

    def test_interval_over_codomains(self):
        """Relational domains also abstract topp codomains."""
        model = RelationalModel(0, 3)
        interval = interval_domain(model, ConcreteKind.TOPP)
        assert interval.kind is ConcreteKind.TOPP
        assert interval.alpha(model.topp.parse("top{1,3}")) == "[1,3]"

    def test_trivial(self):
        """The trivial domain closes everything to top."""
        model = RelationalModel(0, 3)
        trivial = trivial_domain(model)
        assert trivial.trivial
        assert trivial.closure(0) == model.tests.top

    @pytest.mark.parametrize(
        ("name", "model", "kind"),
        [
            ("trivial", RelationalModel(0, 3), ConcreteKind.TESTS),
            ("sign", RelationalModel(-2, 2), ConcreteKind.TESTS),
            ("sign", RelationalModel(-2, 2), ConcreteKind.TOPP),
            ("interval", RelationalModel(0, 5), ConcreteKind.TESTS),
            ("parity", GuardedStringModel(["b1", "b2"]), ConcreteKind.TESTS),
            ("trivial", a3_model(), ConcreteKind.TOPP),
        ],
    )
    def test_insertion_laws_hold(self, name, model, kind):
        """Every built-in domain is a Galois insertion."""
        report = check_galois(builtin_domain(name, model, kind))
        assert report.passed, report.failures

    def test_large_lattice_is_sampled(self):
        """Beyond the enumeration budget the concrete laws are sampled with the seed."""
        report = check_galois(interval_domain(RelationalModel(0, 11)), seed=5, samples=300)
        assert report.passed
        assert report.sampled
        assert report.seed == 5
        assert report.get("alpha-additive").checked == 300

    def test_parity_needs_two_primitives(self):
        """Parity is defined for exactly two primitive tests."""
        with pytest.raises(DomainError):
            parity_domain(GuardedStringModel(["b1"]))

    def test_parity_over_codomains(self, gs):
        """Parity abstracts tests only."""
        with pytest.raises(DomainError):
            builtin_domain("parity", gs, ConcreteKind.TOPP)

    def test_unknown_domain(self):
        """Unknown names list the built-ins."""
        with pytest.raises(DomainError, match="built-ins"):
            builtin_domain("octagon", RelationalModel(0, 3), ConcreteKind.TESTS)

    def test_gamma_of_unknown_element(self):
        """Concretizing a name outside the domain is a literal error."""
        with pytest.raises(LiteralError):
            sign_domain(RelationalModel(-1, 1)).gamma("Z>1")


class TestTableDomains:
    """Tests for domains read from files."""

    def test_chain_domain(self):
        """A chain of sets closed under meets is an insertion."""
        model = RelationalModel(0, 3)
        text = "domain table\nelem bot gamma {}\nelem low gamma {0,1}\nelem all gamma {0..3}\n"
        domain = parse_domain(text, model)
        assert domain.alpha(model.tests.parse("{1}")) == "low"
        assert domain.alpha(model.tests.parse("{2}")) == "all"

    def test_missing_meet(self):
        """Without a least cover alpha is undefined."""
        model = RelationalModel(0, 3)
        text = "domain table\nelem a gamma {0,1}\nelem b gamma {1,2}\nelem top gamma {0..3}\n"
        with pytest.raises(DomainError):
            parse_domain(text, model)

    def test_order_breaking_gamma_monotonicity(self):
        """An explicit order must agree with the concretizations."""
        model = RelationalModel(0, 3)
        text = "domain table\nelem bot gamma {}\nelem top gamma {0..3}\norder top <= bot\n"
        with pytest.raises(DomainError, match="breaks"):
            parse_domain(text, model)

    def test_gamma_must_be_injective(self):
        """Two names cannot share a concretization."""
        model = RelationalModel(0, 3)
        text = "domain table\nelem x gamma {0..3}\nelem y gamma {0..3}\n"
        with pytest.raises(DomainError, match="injective"):
            parse_domain(text, model)

    def test_declared_kind_must_match(self):
        """A domain declared over codomains cannot serve a tests analysis."""
        model = RelationalModel(0, 3)
        with pytest.raises(DomainError, match="declared"):
            parse_domain("domain sign\nconcrete topp\n", model, ConcreteKind.TESTS)
