"""Tests for the KAT models and their law suites."""

from itertools import product

import pytest

from katlcl.src.errors import LiteralError, ModelError
from katlcl.src.kat import (
    DIAMOND_LAWS,
    GuardedStringModel,
    RelationalModel,
    TableModel,
    a3_model,
    check_extensionality,
    check_kat_axioms,
    gs_model,
    rel_model,
    top_representable,
)


def broken_star_model(top: str | None = "1") -> TableModel:
    """A3 with a* = a, which breaks star unfolding."""
    names = ("0", "1", "a")
    plus, seq = {}, {}
    for x, y in product(names, repeat=2):
        plus[(x, y)] = "1" if "1" in (x, y) else ("a" if "a" in (x, y) else "0")
        seq[(x, y)] = "0" if "0" in (x, y) or (x, y) == ("a", "a") else (y if x == "1" else x)
    return TableModel(names, ("0", "1"), plus, seq, {"0": "1", "1": "1", "a": "a"}, top=top)


class TestRelationalModel:
    """Tests for RelationalModel."""

    def test_successors(self):
        """succ is partial at the top of the carrier; succ-sat loops there."""
        model = RelationalModel(0, 3)
        assert model.succ()[3] == 0
        assert model.succ_sat()[3] == 1 << 3
        assert model.bdia(model.succ(), 0b0011) == 0b0110

    def test_star_reaches_everything_above(self):
        """The reflexive-transitive closure of succ from 0 is the whole carrier."""
        model = RelationalModel(0, 3)
        assert model.bdia(model.star(model.succ()), 0b0001) == 0b1111
        assert model.bdia(model.star(model.succ()), 0b1000) == 0b1000

    def test_negative_carrier(self):
        """Carrier values map to bit offsets from the low end."""
        model = RelationalModel(-2, 2)
        assert model.format_element(model.pairs([(-2, 0)])) == "{(-2,0)}"
        assert model.support(model.ge(0)) == 0b11100

    def test_bounds(self):
        """Empty and oversized carriers are rejected."""
        with pytest.raises(ModelError, match="empty carrier"):
            RelationalModel(3, 1)
        with pytest.raises(ModelError, match="bound"):
            RelationalModel(0, 100)

    def test_pairs_outside_carrier(self):
        """Explicit pairs must stay inside the carrier."""
        with pytest.raises(LiteralError):
            RelationalModel(0, 3).pairs([(0, 4)])

    def test_constructor(self):
        """rel_model builds the model over an inclusive carrier."""
        model = rel_model(-1, 1)
        assert model.n == 3
        assert model.tests.format(model.tests.top) == "{-1..1}"

    def test_star_closure_is_a_fixpoint(self):
        """a* solves x = 1 + a x."""
        model = RelationalModel(0, 3)
        a = model.pairs([(0, 1), (1, 2), (3, 0)])
        s = model.star_closure(a)
        assert model.plus(model.one, model.seq(a, s)) == s
        assert model.bdia(s, 0b1000) == 0b1111

    def test_support_of_non_test(self):
        """Only sub-identities have a support."""
        model = RelationalModel(0, 3)
        with pytest.raises(ModelError, match="sub-identity"):
            model.support(model.succ())


class TestGuardedStrings:
    """Tests for GuardedStringModel."""

    def test_atom_order(self):
        """Atoms run from all-positive to all-negative."""
        assert gs_model(["b1", "b2"]).atoms == ("++", "+-", "-+", "--")

    def test_actions_are_generic(self):
        """A generic action reaches every atom from any non-empty test."""
        model = GuardedStringModel(["b1", "b2"])
        assert model.bdia(model.action(), 0b0001) == model.tests.top
        assert model.bdia(model.action(), 0) == 0

    def test_primitive_tests(self):
        """G(b1) holds the atoms where b1 is positive."""
        model = GuardedStringModel(["b1", "b2"])
        assert model.tests.format(model.primitive("b1").mask) == "{++,+-}"

    def test_actions_do_not_combine(self):
        """Only tests are materialized."""
        model = GuardedStringModel(["b1"])
        with pytest.raises(ModelError):
            model.seq(model.action(), model.one)


class TestKatAxioms:
    """Tests for check_kat_axioms and check_extensionality."""

    def test_small_relational_model_is_exhaustive(self):
        """A two-point carrier checks every law over every case."""
        report = check_kat_axioms(RelationalModel(0, 1))
        assert report.passed
        assert not report.sampled
        assert {result.law for result in report.results} >= set(DIAMOND_LAWS)

    def test_diamond_laws_exhaustive_on_three_points(self):
        """Every relation and test on 0..2 satisfies the diamond laws, case by case."""
        report = check_kat_axioms(RelationalModel(0, 2), only=DIAMOND_LAWS)
        assert report.passed
        assert not report.sampled
        checked = {result.law: result.checked for result in report.results}
        assert checked["bd1-least-test"] == 2**9 * 2**3
        assert checked["bd2-composition"] == 2**9 * 2**9 * 2**3
        assert checked["diamond-additive-test"] == 2**9 * 2**3 * 2**3

    def test_ten_thousand_samples_on_six_points(self):
        """10^4 seeded cases per law over 0..5 find no violation."""
        report = check_kat_axioms(RelationalModel(0, 5), samples=10_000)
        assert report.passed
        assert report.sampled
        assert {result.law for result in report.results} >= set(DIAMOND_LAWS)
        assert all(result.checked == 10_000 for result in report.results if result.sampled)

    def test_larger_model_is_sampled_and_seeded(self):
        """Larger carriers are sampled; the seed is recorded and reproducible."""
        model = RelationalModel(0, 4)
        first = check_kat_axioms(model, seed=3, samples=200)
        second = check_kat_axioms(model, seed=3, samples=200)
        assert first.passed
        assert first.sampled
        assert first.seed == 3
        assert first == second

    def test_a3_is_a_kat(self):
        """The three-element table satisfies every axiom."""
        assert check_kat_axioms(a3_model()).passed

    def test_broken_table_has_witness(self):
        """A failing law names the element that breaks it."""
        report = check_kat_axioms(broken_star_model(), only=["star-unfold"])
        assert not report.passed
        failure = report.get("star-unfold")
        assert failure.witness == {"a": "a"}

    def test_symbolic_model_is_refused(self):
        """Guarded strings cannot be enumerated."""
        with pytest.raises(ModelError, match="symbolic"):
            check_kat_axioms(GuardedStringModel(["b1"]))

    def test_extensionality(self):
        """Distinct relations have distinct diamonds on singletons."""
        report = check_extensionality(RelationalModel(0, 2))
        assert report.passed
        assert report.get("extensionality").checked == 2**9

    def test_extensionality_needs_relations(self):
        """The extensionality check is relational only."""
        with pytest.raises(ModelError):
            check_extensionality(a3_model())


class TestTopRepresentable:
    """Tests for top_representable."""

    @pytest.mark.parametrize(("codomain", "tests"), [("a", []), ("1", ["1"]), ("0", ["0"])])
    def test_a3(self, codomain, tests):
        """Only 0 and 1 are codomains of a test in A3."""
        assert top_representable(a3_model(), codomain) == tests

    def test_relational_codomain_is_its_own_test(self):
        """In a relational model a codomain is represented by the test with its support."""
        model = RelationalModel(0, 3)
        assert top_representable(model, 0b0101) == [0b0101]

    def test_model_without_top(self):
        """Table models without a top have no codomains."""
        model = broken_star_model(top=None)
        with pytest.raises(ModelError, match="no top"):
            top_representable(model, "1")
