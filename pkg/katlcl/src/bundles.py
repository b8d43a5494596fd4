"""Run the bundled worked examples.

Each bundle directory under ``katlcl/bundles/`` holds a ``bundle.json`` manifest, a model
file, a domain file and derivation files; every check listed in the manifest becomes
one row of the report.
"""

import logging
from collections.abc import Iterator
from pathlib import Path

from pydantic import ValidationError

from katlcl.src.config import BUNDLES_DIR
from katlcl.src.domain import check_galois
from katlcl.src.errors import KatError
from katlcl.src.kat import check_kat_axioms, top_representable
from katlcl.src.loaders import Session
from katlcl.src.logic import analyse_spec, proves, validity, verify
from katlcl.src.models import Bundle, BundleCheck, DerivationCase, PostCase, RepresentableCase, TripleCase

logger = logging.getLogger(__name__)


def bundle_names(root: Path = BUNDLES_DIR) -> list[str]:
    """Names of the bundles under ``root``, sorted."""
    return sorted(path.parent.name for path in root.glob("*/bundle.json"))


def open_bundle(name: str, root: Path = BUNDLES_DIR) -> tuple[Bundle, Session]:
    """Load a bundle manifest and the session it describes."""
    directory = root / name
    bundle = Bundle.load(directory / "bundle.json")
    domain = directory / bundle.domain
    session = Session.open(
        directory / bundle.model, str(domain) if domain.exists() else bundle.domain, bundle.system
    )
    return bundle, session


class _Runner:
    def __init__(self, bundle: Bundle, session: Session, directory: Path, seed: int | None) -> None:
        self.bundle = bundle
        self.session = session
        self.directory = directory
        self.seed = seed

    def row(self, check: str, passed: bool, detail: str = "") -> BundleCheck:
        if not passed:
            logger.debug("%s: %s failed %s", self.bundle.name, check, detail)
        return BundleCheck(bundle=self.bundle.name, check=check, passed=passed, detail=detail)

    def fmt(self, value: object) -> str:
        return self.session.analysis.fmt(value)

    def laws(self) -> Iterator[BundleCheck]:
        if self.bundle.axioms:
            report = check_kat_axioms(self.session.model, seed=self.seed)
            failed = ", ".join(result.law for result in report.failures)
            yield self.row("kat axioms", report.passed, failed or f"{len(report.results)} laws")
        report = check_galois(self.session.domain, seed=self.seed)
        failed = ", ".join(result.law for result in report.failures)
        yield self.row(f"{self.session.domain.name} insertion", report.passed, failed or f"{len(report.results)} laws")

    def post(self, case: PostCase) -> Iterator[BundleCheck]:
        session = self.session
        term, pre = session.term(case.term), session.value(case.pre)
        semantics = session.analysis.concrete
        ok = semantics.ok(term, pre)
        yield self.row(f"post {case.term}", ok == session.value(case.ok), f"ok: {self.fmt(ok)}")
        if case.err is not None:
            err = semantics.err(term, pre)
            yield self.row(f"post-err {case.term}", err == session.value(case.err), f"err: {self.fmt(err)}")

    def triple(self, case: TripleCase) -> Iterator[BundleCheck]:
        session = self.session
        triple = session.triple(case.triple)
        verdict = validity(session.analysis, triple)
        detail = verdict.failures[0].describe() if verdict.failures else verdict.status
        yield self.row(f"check {case.triple}", verdict.status == case.expect, detail)
        for eps, spec, alerts in (("ok", case.spec_ok, case.alerts_ok), ("err", case.spec_err, case.alerts_err)):
            if spec is None:
                continue
            report = analyse_spec(session.analysis, triple.component(eps), session.value(spec), eps)
            expected = session.value(alerts) if alerts is not None else session.analysis.lattice.bottom
            passed = report.proved == (alerts is None) and report.true_alerts == expected
            detail = "proved" if report.proved else f"true alerts {self.fmt(report.true_alerts)}"
            yield self.row(f"spec {eps} {spec}", passed, detail)

    def derivation(self, case: DerivationCase) -> Iterator[BundleCheck]:
        session = self.session
        tree = session.derivation(self.directory / case.file)
        verdict = verify(self.bundle.system, session.analysis, tree)
        passed = verdict.status == case.expect
        detail = verdict.failures[0].describe() if verdict.failures else f"{tree.nodes()} nodes"
        if passed and case.conclusion is not None and verdict.conclusion is not None:
            passed = proves(verdict.conclusion, session.triple(case.conclusion))
            if not passed:
                detail = f"proves a different triple: pre {self.fmt(verdict.conclusion.pre)}"
        yield self.row(f"verify {case.file}", passed, detail)

    def representable(self, case: RepresentableCase) -> Iterator[BundleCheck]:
        model = self.session.model
        found = sorted(str(q) for q in top_representable(model, self.session.value(case.codomain)))
        expected = sorted(str(self.session.model.tests.parse(text)) for text in case.tests)
        yield self.row(f"representable {case.codomain}", found == expected, f"tests {found}")

    def run(self) -> list[BundleCheck]:
        rows = list(self.laws())
        for handler, cases in (
            (self.post, self.bundle.posts),
            (self.triple, self.bundle.triples),
            (self.derivation, self.bundle.derivations),
            (self.representable, self.bundle.representable),
        ):
            for case in cases:
                try:
                    rows.extend(handler(case))
                except (KatError, OSError) as exc:
                    rows.append(self.row(type(case).__name__, False, str(exc)))
        return rows


def run_bundle(name: str, seed: int | None = None, root: Path = BUNDLES_DIR) -> list[BundleCheck]:
    """Every check of one bundle; load or check errors become failed rows."""
    try:
        bundle, session = open_bundle(name, root)
        return _Runner(bundle, session, root / name, seed).run()
    except (KatError, OSError, ValidationError) as exc:
        return [BundleCheck(bundle=name, check="load", passed=False, detail=str(exc))]


def bundle_notes(name: str, root: Path = BUNDLES_DIR) -> list[str]:
    """Finitization notes of a bundle; empty when the manifest does not load."""
    try:
        return Bundle.load(root / name / "bundle.json").notes
    except (OSError, ValidationError):
        return []
