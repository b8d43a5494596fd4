"""Triple validity, derivation checking and proof synthesis.

Six proof systems share one rule engine:

- ``lck`` / ``lctk``: local completeness logic over tests / over topp codomains;
- ``lcil`` / ``lctil``: the same with ok/err judgments;
- ``ul`` / ``il``: under-approximation and incorrectness logic (no abstract domain).

Judgments over topp represent a pre/post element ``a`` by its codomain ``top a``; every
rule condition depends only on that codomain, so the top systems run the same rules over
the topp lattice.

Derivations are checked bottom-up: each node's conclusion is recomputed from its
premises and side data, never read from input. ``limit``/``back-v`` nodes carry an
explicit chain ``p0 .. pN``; the last premise proves ``[pN] t [p_back]`` with
``back`` defaulting to ``N`` (a stabilized chain), which finitely represents the
infinite, eventually periodic sequence of step triples.
"""

import logging
from collections.abc import Sequence
from typing import Any

from katlcl.src.errors import DerivationError, DomainError, ModelError, SynthesisError
from katlcl.src.kat import TableModel
from katlcl.src.lattice import ConcreteKind
from katlcl.src.models import Derivation, Failure, SpecReport, System, Triple, Verdict
from katlcl.src.semantics import Analysis, Eps, incomplete_atoms, local_complete
from katlcl.src.term import Atom, One, Plus, Seq, Star, Term, Zero, pretty_term

logger = logging.getLogger(__name__)

EPS: tuple[Eps, Eps] = ("ok", "err")

_LC_RULES = frozenset({"transfer", "relax", "seq", "join", "choice", "rec", "iterate", "limit"})
_LCIL_RULES = frozenset(
    {"transfer", "relax", "seq-ok", "seq-err", "join", "choice", "rec-err", "limit", "pair"}
)
_UL_RULES = frozenset(
    {"transfer", "empty", "consequence", "disj", "seq", "iterate-zero", "iterate-non-zero", "back-v", "choice"}
)
_IL_RULES = frozenset(
    {
        "transfer",
        "empty",
        "consequence",
        "disj",
        "short-circuit",
        "seq-normal",
        "iterate-zero",
        "iterate-non-zero",
        "back-v",
        "choice",
        "pair",
    }
)

RULES: dict[System, frozenset[str]] = {
    System.LCK: _LC_RULES,
    System.LCTK: _LC_RULES,
    System.LCIL: _LCIL_RULES,
    System.LCTIL: _LCIL_RULES,
    System.UL: _UL_RULES,
    System.IL: _IL_RULES,
}

# Side data keys each rule takes
SIDE_KEYS: dict[str, frozenset[str]] = {
    "transfer": frozenset({"atom", "pre"}),
    "relax": frozenset({"pre", "ok", "err"}),
    "consequence": frozenset({"pre", "ok", "err"}),
    "limit": frozenset({"chain", "back"}),
    "back-v": frozenset({"chain", "back"}),
    "empty": frozenset({"pre", "term"}),
    "iterate-zero": frozenset({"pre", "term"}),
    "choice": frozenset({"term"}),
    "short-circuit": frozenset({"term"}),
}

_BINARY = frozenset({"seq", "seq-ok", "seq-err", "join", "rec", "rec-err", "disj", "seq-normal", "pair"})
_UNARY = frozenset({"relax", "consequence", "iterate", "iterate-non-zero", "short-circuit"})


class _Violation(Exception):
    """A side condition or premise match failed."""

    def __init__(self, failure: Failure) -> None:
        self.failure = failure
        super().__init__(failure.describe())


def components(triple: Triple) -> tuple[Eps, ...]:
    """Components a judgment asserts, ok first."""
    return tuple(eps for eps in EPS if triple.component(eps) is not None)


def check_system_kind(system: System, analysis: Analysis) -> None:
    """The analysis lattice must fit the system: topp for top systems, tests for the
    other local systems; UL and IL run over either.

    Raises:
        ModelError: On a lattice kind mismatch.
        DomainError: On a non-trivial domain for UL/IL.
    """
    if system.top and analysis.kind is not ConcreteKind.TOPP:
        msg = f"{system} needs a domain over topp codomains, got one over {analysis.kind}"
        raise ModelError(msg)
    if system in {System.LCK, System.LCIL} and analysis.kind is not ConcreteKind.TESTS:
        msg = f"{system} needs a domain over tests, got one over {analysis.kind}"
        raise ModelError(msg)
    if not system.local and not analysis.domain.trivial:
        msg = f"{system} is defined at the trivial abstraction only; got the {analysis.domain.name} domain"
        raise DomainError(msg)


# Validity


def validity(analysis: Analysis, triple: Triple) -> Verdict:
    """Check a triple against the semantics.

    Every asserted component must satisfy (i) ``q <= post``; for local systems also
    (ii) ``apost(alpha(p)) = alpha(q) = alpha(post)``.
    """
    check_system_kind(triple.system, analysis)
    semantics = analysis.concrete
    lat = analysis.lattice
    fmt = analysis.fmt
    semantics.check(triple.pre)
    failures: list[Failure] = []
    for eps in components(triple):
        q = triple.component(eps)
        semantics.check(q)
        post = semantics.component(triple.term, triple.pre, eps)
        if not lat.le(q, post):
            failures.append(
                Failure(
                    condition="(i)",
                    detail={
                        "component": eps,
                        "LHS": fmt(q),
                        "RHS": fmt(post),
                        "excess": fmt(lat.difference(q, post)),
                    },
                )
            )
            continue
        if not triple.system.local:
            continue
        d = analysis.domain
        alpha_q, alpha_post = d.alpha(q), d.alpha(post)
        if alpha_q != alpha_post:
            failures.append(
                Failure(condition="(ii)", detail={"component": eps, "LHS": f"alpha(q)={alpha_q}", "RHS": f"alpha(post)={alpha_post}"})
            )
            continue
        abstract = analysis.abstract.component(triple.term, d.alpha(triple.pre), eps)
        if abstract != alpha_post:
            failures.append(
                Failure(condition="(ii)", detail={"component": eps, "LHS": f"apost={abstract}", "RHS": f"alpha(post)={alpha_post}"})
            )
    if failures:
        return Verdict(status="invalid", failures=failures, conclusion=triple)
    return Verdict(status="valid", conclusion=triple)


def valid_lck(analysis: Analysis, triple: Triple) -> Verdict:
    """Validity of an LCK (or UL) triple over tests."""
    if triple.system not in {System.LCK, System.UL}:
        msg = f"valid_lck expects an lck or ul triple, got {triple.system}"
        raise ModelError(msg)
    return validity(analysis, triple)


def valid_il(analysis: Analysis, triple: Triple) -> Verdict:
    """Validity of an LCIL or IL triple; IL checks the under-approximation clauses only."""
    if triple.system not in {System.LCIL, System.IL}:
        msg = f"valid_il expects an lcil or il triple, got {triple.system}"
        raise ModelError(msg)
    return validity(analysis, triple)


def valid_lctk(analysis: Analysis, triple: Triple) -> Verdict:
    """Validity of an LCTK or LCTIL triple over topp codomains."""
    if not triple.system.top:
        msg = f"valid_lctk expects an lctk or lctil triple, got {triple.system}"
        raise ModelError(msg)
    return validity(analysis, triple)


def analyse_spec(analysis: Analysis, q: object, spec: object, component: Eps = "ok") -> SpecReport:
    """Check a proved postcondition against a specification.

    The specification is proved when ``A(q) <= spec``; otherwise ``q`` minus ``spec``
    are true alerts, states the program really reaches.
    """
    lat = analysis.lattice
    closure = analysis.closure(q)
    return SpecReport(
        component=component,
        post=q,
        spec=spec,
        closure=closure,
        proved=lat.le(closure, spec),
        true_alerts=lat.difference(q, spec),
    )


# Rule engine


class ProofChecker:
    """Computes node conclusions for one system and analysis, enforcing side conditions."""

    def __init__(self, system: System, analysis: Analysis) -> None:
        """Bind a system to an analysis."""
        check_system_kind(system, analysis)
        self.system = system
        self.analysis = analysis
        self.lat = analysis.lattice
        self.rules = RULES[system]

    # helpers

    def _fail(self, condition: str, path: str, **detail: object) -> _Violation:
        return _Violation(
            Failure(condition=condition, path=path, detail={k: self._show(v) for k, v in detail.items()})
        )

    def _show(self, value: object) -> str:
        if isinstance(value, Atom | Zero | One | Plus | Seq | Star):
            return pretty_term(value)
        if isinstance(value, str):
            return value
        return self.analysis.fmt(value)

    def _triple(self, pre: object, term: Term, ok: object = None, err: object = None) -> Triple:
        return Triple(system=self.system, pre=pre, term=term, post_ok=ok, post_err=err)

    def _need(self, premise: Triple, eps: Eps, rule: str, path: str) -> object:
        value = premise.component(eps)
        if value is None:
            raise self._fail(f"{rule}:premise-{eps}", path, term=premise.term)
        return value

    def _same(self, left: object, right: object, condition: str, path: str) -> None:
        if left != right:
            raise self._fail(condition, path, expected=left, found=right)

    def _value(self, value: object, rule: str, path: str) -> object:
        if not self.lat.contains(value):
            msg = f"{rule}: {value!r} is not in the {self.analysis.kind} lattice"
            raise DerivationError(msg, path)
        return value

    def _term(self, side: dict[str, Any], rule: str, path: str) -> Term:
        term = side.get("term")
        if not isinstance(term, Atom | Zero | One | Plus | Seq | Star):
            msg = f"{rule} needs a :term"
            raise DerivationError(msg, path)
        return term

    def _arity(self, rule: str, side: dict[str, Any], children: int, path: str) -> None:
        if rule == "choice":
            expected = 1 if self.system in {System.UL, System.IL} else 2
        elif rule in {"limit", "back-v"}:
            chain = side.get("chain")
            if not isinstance(chain, list) or not chain:
                msg = f"{rule} needs a non-empty :chain"
                raise DerivationError(msg, path)
            expected = len(chain)
        elif rule in _BINARY:
            expected = 2
        elif rule in _UNARY:
            expected = 1
        else:
            expected = 0
        if children != expected:
            msg = f"{rule} takes {expected} premises, got {children}"
            raise DerivationError(msg, path)

    def _common(self, left: Triple, right: Triple, rule: str, path: str) -> tuple[Eps, ...]:
        shared = tuple(eps for eps in components(left) if right.component(eps) is not None)
        if not shared:
            raise self._fail(f"{rule}:components", path, left=left.term, right=right.term)
        return shared

    # entry point

    def conclude(self, rule: str, side: dict[str, Any], premises: Sequence[Triple], path: str) -> Triple:
        """Conclusion of a node, or a violation of its side conditions.

        Raises:
            DerivationError: For rules outside the system, wrong arity or bad side data.
        """
        if rule not in self.rules:
            msg = f"rule {rule!r} is not part of {self.system}"
            raise DerivationError(msg, path)
        unknown = set(side) - SIDE_KEYS.get(rule, frozenset())
        if unknown:
            msg = f"{rule} does not take {', '.join(sorted(':' + k for k in unknown))}"
            raise DerivationError(msg, path)
        self._arity(rule, side, len(premises), path)
        if rule == "choice" and len(premises) == 2:
            rule = "join"
        handler = getattr(self, "_rule_" + rule.replace("-", "_"))
        return handler(side, list(premises), path)

    # leaves

    def _rule_transfer(self, side: dict[str, Any], _premises: list[Triple], path: str) -> Triple:
        atom = side.get("atom")
        if not isinstance(atom, Atom | Zero | One):
            msg = "transfer needs an atom"
            raise DerivationError(msg, path)
        if "pre" not in side:
            msg = "transfer needs a precondition"
            raise DerivationError(msg, path)
        p = self._value(side["pre"], "transfer", path)
        semantics = self.analysis.concrete
        wanted: tuple[Eps, ...] = EPS if self.system.pairs else ("ok",)
        posts: dict[Eps, object] = {}
        for eps in wanted:
            if self.system.local:
                check = local_complete(self.analysis, atom, p, eps)
                if not check:
                    raise self._fail(
                        f"transfer:local-completeness({eps})", path, atom=atom, p=p, LHS=check.lhs, RHS=check.rhs
                    )
            posts[eps] = semantics.component(atom, p, eps)
        return self._triple(p, atom, posts.get("ok"), posts.get("err"))

    def _rule_empty(self, side: dict[str, Any], _premises: list[Triple], path: str) -> Triple:
        term = self._term(side, "empty", path)
        p = self._value(side.get("pre"), "empty", path)
        bottom = self.lat.bottom
        return self._triple(p, term, bottom, bottom if self.system.pairs else None)

    def _rule_iterate_zero(self, side: dict[str, Any], _premises: list[Triple], path: str) -> Triple:
        term = self._term(side, "iterate-zero", path)
        if not isinstance(term, Star):
            raise self._fail("iterate-zero:term", path, term=term)
        p = self._value(side.get("pre"), "iterate-zero", path)
        return self._triple(p, term, p)

    # weakening

    def _rule_relax(self, side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        return self._weaken("relax", side, premises[0], path)

    def _rule_consequence(self, side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        return self._weaken("consequence", side, premises[0], path)

    def _weaken(self, rule: str, side: dict[str, Any], premise: Triple, path: str) -> Triple:
        lat, closure = self.lat, self.analysis.closure
        local = rule == "relax"
        p_old = premise.pre
        p_new = self._value(side.get("pre", p_old), rule, path)
        if not lat.le(p_old, p_new) or (local and not lat.le(p_new, closure(p_old))):
            raise self._fail(f"{rule}:pre", path, premise=p_old, pre=p_new, bound=closure(p_old) if local else p_new)
        posts: dict[Eps, object] = {}
        for eps in components(premise):
            q_old = premise.component(eps)
            q_new = self._value(side.get(eps, q_old), rule, path)
            if not lat.le(q_new, q_old) or (local and not lat.le(q_old, closure(q_new))):
                raise self._fail(
                    f"{rule}:post({eps})", path, premise=q_old, post=q_new, bound=closure(q_new) if local else q_new
                )
            posts[eps] = q_new
        for eps in EPS:
            if eps in side and eps not in posts:
                raise self._fail(f"{rule}:premise-{eps}", path, term=premise.term)
        return self._triple(p_new, premise.term, posts.get("ok"), posts.get("err"))

    # composition

    def _rule_seq(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        first, second = premises
        middle = self._need(first, "ok", "seq", path)
        self._same(middle, second.pre, "seq:intermediate", path)
        return self._triple(first.pre, Seq(first.term, second.term), self._need(second, "ok", "seq", path))

    def _rule_seq_ok(self, side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        return self._rule_seq(side, premises, path)

    def _rule_seq_err(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        first, second = premises
        middle = self._need(first, "ok", "seq-err", path)
        first_err = self._need(first, "err", "seq-err", path)
        self._same(middle, second.pre, "seq-err:intermediate", path)
        second_err = self._need(second, "err", "seq-err", path)
        return self._triple(first.pre, Seq(first.term, second.term), err=self.lat.join(first_err, second_err))

    def _rule_seq_normal(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        first, second = premises
        middle = self._need(first, "ok", "seq-normal", path)
        self._same(middle, second.pre, "seq-normal:intermediate", path)
        return self._triple(first.pre, Seq(first.term, second.term), second.post_ok, second.post_err)

    def _rule_short_circuit(self, side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        (premise,) = premises
        rest = self._term(side, "short-circuit", path)
        error = self._need(premise, "err", "short-circuit", path)
        return self._triple(premise.pre, Seq(premise.term, rest), err=error)

    # choice

    def _rule_join(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        left, right = premises
        self._same(left.pre, right.pre, "join:pre", path)
        posts = {eps: self.lat.join(left.component(eps), right.component(eps)) for eps in self._common(left, right, "join", path)}
        return self._triple(left.pre, Plus(left.term, right.term), posts.get("ok"), posts.get("err"))

    def _rule_disj(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        left, right = premises
        self._same(left.term, right.term, "disj:term", path)
        posts = {eps: self.lat.join(left.component(eps), right.component(eps)) for eps in self._common(left, right, "disj", path)}
        return self._triple(self.lat.join(left.pre, right.pre), left.term, posts.get("ok"), posts.get("err"))

    def _rule_choice(self, side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        (premise,) = premises
        term = self._term(side, "choice", path)
        if not isinstance(term, Plus) or premise.term not in (term.left, term.right):
            raise self._fail("choice:term", path, term=term, premise=premise.term)
        return self._triple(premise.pre, term, premise.post_ok, premise.post_err)

    def _rule_pair(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        ok_part, err_part = premises
        self._same(ok_part.pre, err_part.pre, "pair:pre", path)
        self._same(ok_part.term, err_part.term, "pair:term", path)
        ok = self._need(ok_part, "ok", "pair", path)
        err = self._need(err_part, "err", "pair", path)
        return self._triple(ok_part.pre, ok_part.term, ok, err)

    # iteration

    def _rule_rec(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        step, rest = premises
        self._same(Star(step.term), rest.term, "rec:term", path)
        reached = self._need(step, "ok", "rec", path)
        self._same(self.lat.join(step.pre, reached), rest.pre, "rec:pre", path)
        return self._triple(step.pre, rest.term, self._need(rest, "ok", "rec", path))

    def _rule_iterate(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        (step,) = premises
        q = self._need(step, "ok", "iterate", path)
        bound = self.analysis.closure(step.pre)
        if not self.lat.le(q, bound):
            raise self._fail("iterate:side", path, q=q, bound=bound)
        return self._triple(step.pre, Star(step.term), self.lat.join(step.pre, q))

    def _rule_iterate_non_zero(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        (premise,) = premises
        term = premise.term
        if not (isinstance(term, Seq) and isinstance(term.left, Star) and term.left.body == term.right):
            raise self._fail("iterate-non-zero:term", path, term=term)
        return self._triple(premise.pre, term.left, premise.post_ok, premise.post_err)

    def _rule_rec_err(self, _side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        loop, step = premises
        self._same(Star(step.term), loop.term, "rec-err:term", path)
        self._same(self._need(loop, "ok", "rec-err", path), step.pre, "rec-err:intermediate", path)
        return self._triple(loop.pre, loop.term, err=self._need(step, "err", "rec-err", path))

    def _rule_limit(self, side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        rule = "limit" if self.system.local else "back-v"
        chain = [self._value(value, rule, path) for value in side["chain"]]
        last = len(chain) - 1
        back = side.get("back", last)
        if not isinstance(back, int) or not 0 <= back <= last:
            msg = f"{rule}: :back must be an index into the chain"
            raise DerivationError(msg, path)
        body = premises[0].term
        for index, premise in enumerate(premises):
            where = f"{path}/{index}"
            self._same(body, premise.term, f"{rule}:term", where)
            self._same(chain[index], premise.pre, f"{rule}:chain-pre", where)
            following = chain[index + 1] if index < last else chain[back]
            self._same(following, self._need(premise, "ok", rule, where), f"{rule}:chain-post", where)
        joined = self.lat.join_all(chain)
        self._top_distributes(chain, joined, rule, path)
        return self._triple(chain[0], Star(body), joined)

    def _rule_back_v(self, side: dict[str, Any], premises: list[Triple], path: str) -> Triple:
        return self._rule_limit(side, premises, path)

    def _top_distributes(self, chain: list[object], joined: object, rule: str, path: str) -> None:
        model = self.analysis.model
        if self.analysis.kind is not ConcreteKind.TOPP or not isinstance(model, TableModel):
            return
        top = model.top
        spread = self.lat.join_all([model.seq(top, c) for c in chain])
        if model.seq(top, joined) != spread:
            raise self._fail(f"{rule}:top-distributivity", path, join=joined, spread=spread)


# Verification


def _annotate(checker: ProofChecker, node: Derivation, path: str) -> Derivation:
    here = f"{path}/{node.rule}" if path else node.rule
    children = [_annotate(checker, child, f"{here}[{i}]") for i, child in enumerate(node.children)]
    conclusion = checker.conclude(node.rule, node.side, [child.conclusion for child in children], here)
    return node.model_copy(update={"children": children, "conclusion": conclusion})


def check_derivation(system: System, analysis: Analysis, derivation: Derivation) -> tuple[Verdict, Derivation | None]:
    """Check a derivation bottom-up, returning the verdict and, when accepted, the tree
    with every node's conclusion filled in.

    Raises:
        DerivationError: For malformed trees (unknown rule, arity, side data).
    """
    checker = ProofChecker(system, analysis)
    try:
        annotated = _annotate(checker, derivation, "")
    except _Violation as violation:
        logger.debug("rejected: %s", violation.failure.describe())
        return Verdict(status="rejected", failures=[violation.failure]), None
    return Verdict(status="accepted", conclusion=annotated.conclusion), annotated


def verify(system: System, analysis: Analysis, derivation: Derivation) -> Verdict:
    """Check a derivation; the first violated condition rejects it."""
    return check_derivation(system, analysis, derivation)[0]


def proves(conclusion: Triple, triple: Triple) -> bool:
    """Whether a conclusion establishes every component the triple asserts."""
    if conclusion.pre != triple.pre or conclusion.term != triple.term:
        return False
    return all(conclusion.component(eps) == triple.component(eps) for eps in components(triple))


# Synthesis


class _Builder:
    """Canonical derivations following the completeness construction."""

    def __init__(self, checker: ProofChecker) -> None:
        self.checker = checker
        self.system = checker.system
        self.semantics = checker.analysis.concrete
        self.lat = checker.lat

    def node(self, rule: str, children: list[Derivation], **side: Any) -> Derivation:
        conclusion = self.checker.conclude(rule, side, [child.conclusion for child in children], rule)
        return Derivation(rule=rule, children=children, side=side, conclusion=conclusion)

    @property
    def _local(self) -> bool:
        return self.system.local

    def ok(self, p: object, term: Term) -> Derivation:
        """Proves ``[p] term [ok: post]``."""
        match term:
            case Atom() | Zero() | One():
                return self.node("transfer", [], atom=term, pre=p)
            case Plus(left, right):
                return self._choice(term, self.ok(p, left), self.ok(p, right))
            case Seq(left, right):
                first = self.ok(p, left)
                second = self.ok(first.conclusion.post_ok, right)
                rule = {System.LCIL: "seq-ok", System.LCTIL: "seq-ok", System.IL: "seq-normal"}.get(self.system, "seq")
                return self.node(rule, [first, second])
            case Star(body):
                return self._chain(p, body)
        msg = f"not a term: {term!r}"
        raise TypeError(msg)

    def _choice(self, term: Plus, left: Derivation, right: Derivation) -> Derivation:
        if self.system in {System.UL, System.IL}:
            return self.node("disj", [self.node("choice", [left], term=term), self.node("choice", [right], term=term)])
        return self.node("join", [left, right])

    def _chain(self, p: object, body: Term) -> Derivation:
        chain: list[object] = [p]
        seen = {p: 0}
        steps: list[Derivation] = []
        bound = self.lat.size
        while True:
            step = self.ok(chain[-1], body)
            steps.append(step)
            following = step.conclusion.post_ok
            if following in seen:
                back = seen[following]
                break
            if len(chain) >= bound:
                raise SynthesisError(f"star chain exceeded {bound} elements", reason="bound")
            seen[following] = len(chain)
            chain.append(following)
        rule = "limit" if self._local else "back-v"
        side: dict[str, Any] = {"chain": chain}
        if back != len(chain) - 1:
            side["back"] = back
        return self.node(rule, steps, **side)

    def err(self, p: object, term: Term) -> Derivation:
        """Proves ``[p] term [err: post_err]`` (pair systems)."""
        match term:
            case Atom() | Zero() | One():
                return self.node("transfer", [], atom=term, pre=p)
            case Plus(left, right):
                return self._choice(term, self.both(p, left), self.both(p, right))
            case Seq(left, right):
                first = self.both(p, left)
                second = self.err(first.conclusion.post_ok, right)
                if self.system is System.IL:
                    normal = self.node("seq-normal", [first, second])
                    short = self.node("short-circuit", [first], term=right)
                    return self.node("disj", [normal, short])
                return self.node("seq-err", [first, second])
            case Star(body):
                loop = self.ok(p, term)
                step = self.err(loop.conclusion.post_ok, body)
                if self.system is System.IL:
                    return self.node("iterate-non-zero", [self.node("seq-normal", [loop, step])])
                return self.node("rec-err", [loop, step])
        msg = f"not a term: {term!r}"
        raise TypeError(msg)

    def both(self, p: object, term: Term) -> Derivation:
        """Proves ``[p] term [ok: post][err: post_err]``."""
        if isinstance(term, Atom | Zero | One):
            return self.node("transfer", [], atom=term, pre=p)
        if isinstance(term, Plus):
            return self._choice(term, self.both(p, term.left), self.both(p, term.right))
        return self.node("pair", [self.ok(p, term), self.err(p, term)])

    def finish(self, derivation: Derivation, triple: Triple) -> Derivation:
        """Weaken the canonical conclusion to the requested triple."""
        if proves(derivation.conclusion, triple):
            return derivation
        rule = "relax" if self._local else "consequence"
        side: dict[str, Any] = {"pre": triple.pre}
        for eps in components(triple):
            side[eps] = triple.component(eps)
        return self.node(rule, [derivation], **side)


def synthesize(system: System, analysis: Analysis, triple: Triple) -> Derivation:
    """Build a derivation of a valid triple by the completeness construction.

    Atoms become ``transfer``; sums ``join`` (``disj`` of ``choice`` in UL/IL); sequences
    ``seq``; stars a ``limit`` chain of iterates cut at the first repetition; a final
    ``relax`` (``consequence``) weakens to the requested posts. Err components follow
    ``seq-err``/``rec-err`` (``short-circuit``/``iterate-non-zero`` in IL).

    Raises:
        SynthesisError: If the triple is invalid, an atom of the term is not globally
            complete, or a star chain does not repeat within the lattice size.
    """
    if triple.system is not system:
        triple = triple.model_copy(update={"system": system})
    verdict = validity(analysis, triple)
    if not verdict.ok:
        raise SynthesisError(
            f"triple is not valid: {verdict.failures[0].describe()}", reason="invalid", verdict=verdict
        )
    if system.local:
        needed: tuple[Eps, ...] = EPS if system.pairs else ("ok",)
        failures = incomplete_atoms(analysis, triple.term, needed)
        if failures:
            atom, check = failures[0]
            raise SynthesisError(reason="incomplete-atom", atom=atom.name, witness=analysis.fmt(check.p))
    builder = _Builder(ProofChecker(system, analysis))
    try:
        match triple.eps:
            case "ok":
                derivation = builder.ok(triple.pre, triple.term)
            case "err":
                derivation = builder.err(triple.pre, triple.term)
            case _:
                derivation = builder.both(triple.pre, triple.term)
        result = builder.finish(derivation, triple)
    except _Violation as violation:
        # Cannot happen for valid triples over globally complete atoms
        msg = f"synthesis produced an invalid step: {violation.failure.describe()}"
        raise SynthesisError(msg, reason="invalid") from violation
    logger.debug("synthesized %d nodes for %s", result.nodes(), pretty_term(triple.term))
    return result
