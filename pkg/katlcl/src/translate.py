"""Translators between the local completeness systems at the trivial domain and UL/IL.

Forward translations (LCK/LCTK to UL, LCIL/LCTIL to IL) rewrite rule by rule. Rules
without a direct counterpart in the other direction are replaced by a synthesized
derivation of the node's conclusion: at the trivial domain every valid triple is
derivable and every atom is globally complete.
"""

import logging
from collections.abc import Callable

from katlcl.src.errors import DerivationError, DomainError
from katlcl.src.lattice import ConcreteKind
from katlcl.src.logic import ProofChecker, check_derivation, proves, synthesize
from katlcl.src.models import Derivation, System
from katlcl.src.semantics import Analysis
from katlcl.src.term import Plus

logger = logging.getLogger(__name__)

# Rules that carry over with their side data unchanged
_RENAMES: dict[System, dict[str, str]] = {
    System.UL: {"transfer": "transfer", "relax": "consequence", "seq": "seq", "limit": "back-v"},
    System.IL: {
        "transfer": "transfer",
        "relax": "consequence",
        "seq-ok": "seq-normal",
        "limit": "back-v",
        "pair": "pair",
    },
    System.LCK: {"transfer": "transfer", "consequence": "relax", "seq": "seq", "back-v": "limit"},
    System.LCIL: {"transfer": "transfer", "consequence": "relax", "back-v": "limit", "pair": "pair"},
}
_RENAMES[System.LCTK] = _RENAMES[System.LCK]
_RENAMES[System.LCTIL] = _RENAMES[System.LCIL]


def target_system(source: System, analysis: Analysis) -> System:
    """The system a derivation in ``source`` translates to."""
    top = analysis.kind is ConcreteKind.TOPP
    match source:
        case System.LCK | System.LCTK:
            return System.UL
        case System.LCIL | System.LCTIL:
            return System.IL
        case System.UL:
            return System.LCTK if top else System.LCK
        case System.IL:
            return System.LCTIL if top else System.LCIL
    msg = f"no translation from {source}"
    raise DerivationError(msg)


class _Translator:
    def __init__(self, analysis: Analysis, target: System) -> None:
        self.analysis = analysis
        self.target = target
        self.checker = ProofChecker(target, analysis)
        self.renames = _RENAMES[target]
        self.expanders: dict[str, Callable[[Derivation, list[Derivation]], Derivation]] = {}
        if target is System.UL or target is System.IL:
            self.expanders = {"join": self._join, "choice": self._join}
        if target is System.IL:
            self.expanders |= {"seq-err": self._seq_err, "rec-err": self._rec_err}

    def node(self, rule: str, children: list[Derivation], **side: object) -> Derivation:
        conclusion = self.checker.conclude(rule, side, [child.conclusion for child in children], rule)
        return Derivation(rule=rule, children=children, side=side, conclusion=conclusion)

    def translate(self, source: Derivation) -> Derivation:
        if source.rule in self.renames:
            children = [self.translate(child) for child in source.children]
            return self.node(self.renames[source.rule], children, **source.side)
        if source.rule in self.expanders:
            return self.expanders[source.rule](source, [self.translate(child) for child in source.children])
        logger.debug("re-synthesizing %s node in %s", source.rule, self.target)
        return synthesize(self.target, self.analysis, source.conclusion.model_copy(update={"system": self.target}))

    def _join(self, source: Derivation, children: list[Derivation]) -> Derivation:
        term = source.conclusion.term
        assert isinstance(term, Plus)
        left, right = (self.node("choice", [child], term=term) for child in children)
        return self.node("disj", [left, right])

    def _seq_err(self, source: Derivation, children: list[Derivation]) -> Derivation:
        first, second = children
        normal = self.node("seq-normal", [first, second])
        short = self.node("short-circuit", [first], term=source.conclusion.term.right)
        return self.node("disj", [normal, short])

    def _rec_err(self, _source: Derivation, children: list[Derivation]) -> Derivation:
        loop, step = children
        return self.node("iterate-non-zero", [self.node("seq-normal", [loop, step])])


def translate(source: System, analysis: Analysis, derivation: Derivation) -> tuple[System, Derivation]:
    """Translate a derivation to the equivalent system at the trivial domain.

    Returns:
        The target system and a derivation in it proving the source conclusion.

    Raises:
        DomainError: If the domain is not trivial.
        DerivationError: If the source derivation is rejected.
    """
    if not analysis.domain.trivial:
        msg = f"translation needs the trivial domain, got {analysis.domain.name}"
        raise DomainError(msg)
    verdict, annotated = check_derivation(source, analysis, derivation)
    if annotated is None:
        msg = f"source derivation is rejected: {verdict.failures[0].describe()}"
        raise DerivationError(msg)
    target = target_system(source, analysis)
    result = _Translator(analysis, target).translate(annotated)
    if not proves(result.conclusion, annotated.conclusion):
        msg = f"translation to {target} changed the conclusion"
        raise DerivationError(msg)
    logger.debug("translated %s (%d nodes) to %s (%d nodes)", source, annotated.nodes(), target, result.nodes())
    return target, result


def translate_lck_ul(source: System, analysis: Analysis, derivation: Derivation) -> Derivation:
    """LCK (or LCTK) to UL and back, at the trivial domain."""
    if source not in {System.LCK, System.LCTK, System.UL}:
        msg = f"translate_lck_ul expects lck, lctk or ul, got {source}"
        raise DerivationError(msg)
    return translate(source, analysis, derivation)[1]


def translate_lcil_il(source: System, analysis: Analysis, derivation: Derivation) -> Derivation:
    """LCIL (or LCTIL) to IL and back, at the trivial domain."""
    if source not in {System.LCIL, System.LCTIL, System.IL}:
        msg = f"translate_lcil_il expects lcil, lctil or il, got {source}"
        raise DerivationError(msg)
    return translate(source, analysis, derivation)[1]
