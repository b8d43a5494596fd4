"""Tests for validity, the rule engine and proof synthesis."""

from itertools import product

import pytest

from katlcl.src.errors import DerivationError, DomainError, ModelError, SynthesisError
from katlcl.src.loaders import Session
from katlcl.src.logic import (
    RULES,
    ProofChecker,
    analyse_spec,
    check_derivation,
    proves,
    synthesize,
    valid_il,
    valid_lck,
    valid_lctk,
    validity,
    verify,
)
from katlcl.src.models import Derivation, System, Triple
from katlcl.src.semantics import incomplete_atoms
from katlcl.src.term import Atom, AtomKind, enumerate_terms, pretty_term
from tests.conftest import TWO_POINT_LEAVES


def node(rule: str, *children: Derivation, **side) -> Derivation:
    return Derivation(rule=rule, children=list(children), side=side)


def transfer(session, atom: str, pre: str) -> Derivation:
    return node("transfer", atom=session.evaluation.alphabet.atom(atom), pre=session.value(pre))


class TestValidity:
    """Tests for triple validity."""

    def test_parity_loop_is_valid(self, gs_session):
        """The strongest post of (u;b1)* is a valid LCK post under parity."""
        verdict = validity(gs_session.analysis, gs_session.triple("[{++,--}] (u;b1)* [{++,+-,--}]"))
        assert verdict.ok
        assert verdict.status == "valid"

    def test_condition_i_reports_the_excess(self, gs_session):
        """A post above the strongest post fails (i) with the unreachable part."""
        verdict = validity(gs_session.analysis, gs_session.triple("[{++}] b1 [{++,-+}]"))
        assert verdict.status == "invalid"
        (failure,) = verdict.failures
        assert failure.condition == "(i)"
        assert failure.detail["excess"] == "{-+}"

    def test_condition_ii_needs_the_same_abstraction(self, gs_session):
        """An under-approximation with a coarser abstraction fails (ii)."""
        verdict = validity(gs_session.analysis, gs_session.triple("[{++,--}] (u;b1)* [{++}]"))
        assert verdict.status == "invalid"
        assert verdict.failures[0].condition == "(ii)"

    def test_ul_checks_under_approximation_only(self, open_small):
        """UL drops the abstract condition."""
        session = open_small(System.UL)
        assert validity(session.analysis, session.triple("[{0}] inc* [{2}]")).ok
        assert not validity(session.analysis, session.triple("[{3}] inc [{0}]")).ok

    def test_pairs_check_each_component(self, interval_session):
        """Each asserted component is checked on its own."""
        session = interval_session
        verdict = validity(session.analysis, session.triple("[{0,2}] inc [ok: {1,3}][err: {0}]"))
        assert [f.detail["component"] for f in verdict.failures] == ["err"]
        assert validity(session.analysis, session.triple("[{0,2}] (inc+error)* [err: {0..11}]")).ok

    def test_top_judgments(self, sign_session):
        """LCTK triples over topp codomains."""
        triple = sign_session.triple("[top{0,8}] (geq0;inc)*;lt0 [top{}]")
        assert valid_lctk(sign_session.analysis, triple).ok

    def test_system_wrappers_check_the_system(self, gs_session, interval_session, sign_session):
        """Each wrapper accepts its own systems only."""
        assert valid_lck(gs_session.analysis, gs_session.triple("[{++,--}] (u;b1)* [{++,+-,--}]")).ok
        assert valid_il(interval_session.analysis, interval_session.triple("[{0,2}] inc [ok: {1,3}]")).ok
        with pytest.raises(ModelError):
            valid_il(gs_session.analysis, gs_session.triple("[{++}] b1 [{++}]"))
        with pytest.raises(ModelError):
            valid_lctk(gs_session.analysis, gs_session.triple("[{++}] b1 [{++}]"))

    def test_ul_needs_trivial_domain(self, open_small):
        """UL and IL are not defined over a non-trivial abstraction."""
        session = open_small(System.UL, "interval")
        with pytest.raises(DomainError):
            validity(session.analysis, session.triple("[{0}] inc [{1}]"))

    def test_lctk_needs_codomains(self, open_small):
        """Top systems refuse an analysis over tests."""
        session = open_small(System.LCK, "interval")
        triple = session.triple("[{0}] inc [{1}]").model_copy(update={"system": System.LCTK})
        with pytest.raises(ModelError, match="topp"):
            validity(session.analysis, triple)


class TestSpecifications:
    """Tests for analyse_spec."""

    def test_true_alerts(self, gs_session):
        """When A(q) is above the spec the part of q outside it is a true alert."""
        analysis = gs_session.analysis
        report = analyse_spec(analysis, gs_session.value("{++,+-,--}"), gs_session.value("{++,--}"))
        assert not report.proved
        assert analysis.fmt(report.true_alerts) == "{+-}"

    def test_proved_spec(self, interval_session):
        """A(q) below the spec proves it; there are no alerts."""
        q = interval_session.value("{0..11}")
        report = analyse_spec(interval_session.analysis, q, q)
        assert report.proved
        assert report.true_alerts == 0

    def test_err_spec_has_every_state_as_alert(self, interval_session):
        """No error is allowed, so every reachable erroneous state is an alert."""
        session = interval_session
        report = analyse_spec(session.analysis, session.value("{0..11}"), session.value("{}"), "err")
        assert report.component == "err"
        assert not report.proved
        assert session.analysis.fmt(report.true_alerts) == "{0..11}"

    def test_false_alarm_free_when_proved(self, sign_session):
        """A proved spec has no true alerts."""
        report = analyse_spec(sign_session.analysis, sign_session.value("top{}"), sign_session.value("top{}"))
        assert report.proved
        assert report.true_alerts == 0


class TestDerivations:
    """Tests for the rule engine on hand-written trees."""

    def test_parity_loop(self, gs_session):
        """The rec/iterate derivation proves the parity loop."""
        step = node("seq", transfer(gs_session, "u", "{++,--}"), transfer(gs_session, "b1", "{++,+-,-+,--}"))
        rest = node(
            "iterate",
            node("seq", transfer(gs_session, "u", "{++,+-,--}"), transfer(gs_session, "b1", "{++,+-,-+,--}")),
        )
        verdict, annotated = check_derivation(System.LCK, gs_session.analysis, node("rec", step, rest))
        assert verdict.status == "accepted"
        assert proves(verdict.conclusion, gs_session.triple("[{++,--}] (u;b1)* [{++,+-,--}]"))
        assert annotated.children[0].conclusion.post_ok == gs_session.value("{++,+-}")

    def test_incomplete_transfer_is_rejected(self, gs_session):
        """b1 is not locally complete at {-+} under parity."""
        verdict = verify(System.LCK, gs_session.analysis, transfer(gs_session, "b1", "{-+}"))
        assert verdict.status == "rejected"
        (failure,) = verdict.failures
        assert failure.condition == "transfer:local-completeness(ok)"
        assert failure.path == "transfer"

    def test_failure_path_points_at_the_node(self, gs_session):
        """Paths name the rule chain down to the failing node."""
        tree = node("seq", transfer(gs_session, "u", "{++,--}"), transfer(gs_session, "b1", "{-+}"))
        verdict = verify(System.LCK, gs_session.analysis, tree)
        assert verdict.failures[0].path == "seq[1]/transfer"

    def test_seq_needs_matching_intermediate(self, gs_session):
        """The first post must be the second pre."""
        tree = node("seq", transfer(gs_session, "u", "{++,--}"), transfer(gs_session, "b1", "{++,--}"))
        verdict = verify(System.LCK, gs_session.analysis, tree)
        assert verdict.failures[0].condition == "seq:intermediate"

    def test_relax_is_bounded_by_the_closure(self, open_small):
        """relax may move the pre up to A(p) and the post down to what keeps A(q)."""
        session = open_small(System.LCK, "interval")
        base = transfer(session, "inc", "{0,2}")
        accepted = verify(System.LCK, session.analysis, node("relax", base, pre=session.value("{0..2}"), ok=session.value("{1,3}")))
        assert accepted.ok
        too_low = verify(System.LCK, session.analysis, node("relax", base, ok=session.value("{1}")))
        assert too_low.failures[0].condition == "relax:post(ok)"
        too_high = verify(System.LCK, session.analysis, node("relax", base, pre=session.value("{0..3}")))
        assert too_high.failures[0].condition == "relax:pre"

    def test_iterate_side_condition(self, open_small):
        """iterate needs the step post below A(pre)."""
        session = open_small(System.LCK, "interval")
        verdict = verify(System.LCK, session.analysis, node("iterate", transfer(session, "inc", "{0,1}")))
        assert verdict.failures[0].condition == "iterate:side"

    def test_limit_chain(self, interval_session):
        """limit joins the chain; each premise steps to the next element."""
        session = interval_session
        chain = ["{10,11}", "{11}"]
        premises = [
            node("choice", transfer(session, "inc", p), transfer(session, "error", p)) for p in chain
        ]
        tree = node("limit", *premises, chain=[session.value(p) for p in chain])
        verdict = verify(System.LCIL, session.analysis, tree)
        assert verdict.ok
        assert verdict.conclusion.post_ok == session.value("{10,11}")
        assert verdict.conclusion.post_err is None

    def test_limit_back_index(self, open_small):
        """A chain may loop back to an earlier element."""
        session = open_small(System.LCK)
        chain = [session.value("{3}")]
        tree = node("limit", transfer(session, "inc", "{3}"), chain=chain)
        assert verify(System.LCK, session.analysis, tree).ok
        broken = node("limit", transfer(session, "dec", "{3}"), chain=chain)
        assert verify(System.LCK, session.analysis, broken).failures[0].condition == "limit:chain-post"

    def test_limit_back_out_of_range(self, open_small):
        """:back must index the chain."""
        session = open_small(System.LCK)
        tree = node("limit", transfer(session, "inc", "{3}"), chain=[session.value("{3}")], back=4)
        with pytest.raises(DerivationError, match=":back"):
            verify(System.LCK, session.analysis, tree)

    def test_rule_outside_the_system(self, open_small):
        """UL rules are not LCK rules."""
        session = open_small(System.LCK)
        with pytest.raises(DerivationError, match="not part of lck"):
            verify(System.LCK, session.analysis, node("disj", transfer(session, "inc", "{0}"), transfer(session, "inc", "{1}")))

    def test_wrong_arity(self, open_small):
        """seq takes two premises."""
        session = open_small(System.LCK)
        with pytest.raises(DerivationError, match="takes 2 premises"):
            verify(System.LCK, session.analysis, node("seq", transfer(session, "inc", "{0}")))

    def test_unknown_side_key(self, open_small):
        """Side data is validated per rule."""
        session = open_small(System.LCK)
        with pytest.raises(DerivationError, match=":chain"):
            verify(System.LCK, session.analysis, node("iterate", transfer(session, "inc", "{3}"), chain=[1]))

    def test_il_short_circuit(self, open_small):
        """IL short-circuit keeps the errors of the first component."""
        session = open_small(System.IL)
        rest = session.term("inc")
        tree = node("short-circuit", transfer(session, "error", "{1}"), term=rest)
        verdict = verify(System.IL, session.analysis, tree)
        assert verdict.ok
        assert verdict.conclusion.post_err == session.value("{1}")
        assert verdict.conclusion.post_ok is None

    def test_ul_choice_and_disj(self, open_small):
        """UL proves a sum by a disjunction of unary choices."""
        session = open_small(System.UL)
        term = session.term("inc + dec")
        tree = node(
            "disj",
            node("choice", transfer(session, "inc", "{2}"), term=term),
            node("choice", transfer(session, "dec", "{2}"), term=term),
        )
        verdict = verify(System.UL, session.analysis, tree)
        assert verdict.ok
        assert verdict.conclusion.post_ok == session.value("{1,3}")

    def test_rule_tables(self):
        """Every system has its own rule set; binary choice belongs to the local ones."""
        assert "rec" in RULES[System.LCK]
        assert "rec-err" in RULES[System.LCIL]
        assert "short-circuit" in RULES[System.IL]
        assert "disj" not in RULES[System.LCTK]
        assert RULES[System.LCK] == RULES[System.LCTK]

    def test_checker_refuses_mismatched_analysis(self, gs_session):
        """A top system cannot check over tests."""
        with pytest.raises(ModelError):
            ProofChecker(System.LCTK, gs_session.analysis)


class TestSynthesis:
    """Tests for synthesize."""

    def test_interval_loop_with_errors(self, interval_session):
        """Both components of the interval loop are derivable."""
        session = interval_session
        triple = session.triple("[{0,2}] (inc+error)* [ok: {0..11}][err: {0..11}]")
        tree = synthesize(System.LCIL, session.analysis, triple)
        verdict = verify(System.LCIL, session.analysis, tree.bare())
        assert verdict.ok
        assert proves(verdict.conclusion, triple)
        assert {"pair", "limit", "rec-err"} <= tree.rules()

    def test_weakened_post_gets_relax(self, open_small):
        """An under-approximate post is reached by a final relax."""
        session = open_small(System.LCK, "interval")
        triple = session.triple("[{0,2}] inc [{1,3}]")
        assert synthesize(System.LCK, session.analysis, triple).rule == "transfer"
        triple = session.triple("[{0}] inc* [{0,3}]")
        tree = synthesize(System.LCK, session.analysis, triple)
        assert tree.rule == "relax"
        assert verify(System.LCK, session.analysis, tree.bare()).ok

    def test_star_chain_loops_back(self, write_file):
        """A star whose iterates cycle ends its chain with a back index."""
        model = write_file("model relational\ncarrier 0 1\naction swap ok pairs (0,1)(1,0)\n", "swap.kat")
        session = Session.open(model, system=System.UL)
        tree = synthesize(System.UL, session.analysis, session.triple("[{0}] swap* [{0,1}]"))
        assert tree.rule == "back-v"
        assert tree.side["back"] == 0
        assert len(tree.side["chain"]) == 2
        assert verify(System.UL, session.analysis, tree.bare()).ok

    def test_top_system(self, a3_session):
        """LCTK synthesis runs over codomains; the chain of act from 1 is 1, a, 0."""
        session = a3_session
        tree = synthesize(System.LCTK, session.analysis, session.triple("[1] act* [1]"))
        assert tree.rule == "limit"
        assert tree.side["chain"] == ["1", "a", "0"]
        assert verify(System.LCTK, session.analysis, tree.bare()).ok

    def test_invalid_triple(self, gs_session):
        """Invalid triples cannot be synthesized; the verdict comes along."""
        triple = gs_session.triple("[{++}] b1 [{++,-+}]")
        with pytest.raises(SynthesisError) as excinfo:
            synthesize(System.LCK, gs_session.analysis, triple)
        assert excinfo.value.reason == "invalid"
        assert excinfo.value.verdict.failures[0].condition == "(i)"

    def test_incomplete_atom(self, gs_session):
        """b1 is not globally complete under parity; the witness is the first failing test."""
        triple = gs_session.triple("[{++,--}] (u;b1)* [{++,+-,--}]")
        with pytest.raises(SynthesisError) as excinfo:
            synthesize(System.LCK, gs_session.analysis, triple)
        assert excinfo.value.reason == "incomplete-atom"
        assert excinfo.value.atom == "b1"
        assert excinfo.value.witness == "{-+}"

    def test_debug_log(self, open_small, caplog):
        """Synthesis logs the size of what it built."""
        session = open_small(System.UL)
        with caplog.at_level("DEBUG", logger="katlcl.src.logic"):
            synthesize(System.UL, session.analysis, session.triple("[{0}] inc;inc [{2}]"))
        assert "synthesized" in caplog.text

    def test_atoms_are_transfers(self, open_small):
        """A single atom is one transfer node."""
        session = open_small(System.UL)
        tree = synthesize(System.UL, session.analysis, session.triple("[{1}] pos [{1}]"))
        assert tree.rule == "transfer"
        assert tree.side["atom"] == Atom(AtomKind.TEST, "pos")


class TestSoundnessCompleteness:
    """Exhaustive grid on carrier {0,1}: terms up to four nodes, every test as pre and post."""

    @pytest.mark.parametrize(
        ("system", "domain"),
        [
            (System.LCK, "trivial"),
            (System.LCK, "sign"),
            (System.LCIL, "trivial"),
            (System.LCIL, "sign"),
            (System.UL, "trivial"),
            (System.IL, "trivial"),
        ],
    )
    def test_grid(self, open_two_point, system, domain):
        """Synthesized trees verify to valid conclusions; complete atoms always synthesize."""
        analysis = open_two_point(system, domain).analysis
        values = list(analysis.lattice.elements())
        needed = ("ok", "err") if system.pairs else ("ok",)
        synthesized = 0
        for term in enumerate_terms(TWO_POINT_LEAVES, 4):
            complete = not incomplete_atoms(analysis, term, needed)
            for pre in values:
                for posts in product(values, repeat=len(needed)):
                    triple = Triple(system=system, pre=pre, term=term, **dict(zip(("post_ok", "post_err"), posts)))
                    if not validity(analysis, triple).ok:
                        continue
                    try:
                        tree = synthesize(system, analysis, triple)
                    except SynthesisError as exc:
                        assert not complete, (pretty_term(term), exc)
                        continue
                    verdict = verify(system, analysis, tree.bare())
                    assert verdict.ok, (pretty_term(term), verdict.failures)
                    assert proves(verdict.conclusion, triple)
                    assert validity(analysis, verdict.conclusion).ok
                    synthesized += 1
        assert synthesized > 0

    def test_invalid_triples_never_synthesize(self, open_two_point):
        """Synthesis refuses every invalid triple of the grid."""
        analysis = open_two_point(System.LCK, "sign").analysis
        values = list(analysis.lattice.elements())
        for term in enumerate_terms(TWO_POINT_LEAVES, 3):
            for pre, q in product(values, repeat=2):
                triple = Triple(system=System.LCK, pre=pre, term=term, post_ok=q)
                if validity(analysis, triple).ok:
                    continue
                with pytest.raises(SynthesisError) as info:
                    synthesize(System.LCK, analysis, triple)
                assert info.value.reason == "invalid"
