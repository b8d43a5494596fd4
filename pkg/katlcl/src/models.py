"""Pydantic models for judgments, verdicts, law reports and example bundles."""

from enum import StrEnum
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field


class LawResult(BaseModel):
    """Outcome of one quantified law."""

    law: str
    passed: bool
    checked: int
    sampled: bool = False
    witness: dict[str, str] | None = None


class LawReport(BaseModel):
    """Outcome of a law suite on one model or domain."""

    subject: str
    results: list[LawResult]
    sampled: bool = False
    seed: int | None = None

    @property
    def passed(self) -> bool:
        """All laws hold."""
        return all(result.passed for result in self.results)

    @property
    def failures(self) -> list[LawResult]:
        """Laws that fail, with witnesses."""
        return [result for result in self.results if not result.passed]

    def get(self, law: str) -> LawResult:
        """Result for a named law."""
        for result in self.results:
            if result.law == law:
                return result
        raise KeyError(law)


class System(StrEnum):
    """Proof systems."""

    LCK = "lck"
    UL = "ul"
    LCIL = "lcil"
    IL = "il"
    LCTK = "lctk"
    LCTIL = "lctil"

    @property
    def pairs(self) -> bool:
        """Judgments carry ok/err components."""
        return self in {System.LCIL, System.IL, System.LCTIL}

    @property
    def top(self) -> bool:
        """Pre and post are codomains in topp rather than tests."""
        return self in {System.LCTK, System.LCTIL}

    @property
    def local(self) -> bool:
        """Validity involves the abstract domain."""
        return self not in {System.UL, System.IL}


class Triple(BaseModel):
    """A judgment ``[pre] term [ok: post_ok][err: post_err]``.

    ``post_err`` is only used by pair systems; a component left as None is not
    asserted by the judgment.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    system: System
    pre: Any
    term: Any
    post_ok: Any = None
    post_err: Any = None

    @property
    def eps(self) -> Literal["ok", "err", "both"]:
        """Which components the judgment asserts."""
        if self.post_ok is not None and self.post_err is not None:
            return "both"
        return "err" if self.post_err is not None else "ok"

    def component(self, eps: Literal["ok", "err"]) -> Any:
        """Postcondition of one component."""
        return self.post_ok if eps == "ok" else self.post_err


class Failure(BaseModel):
    """A violated condition, where it was found and the values involved."""

    condition: str
    path: str = ""
    detail: dict[str, str] = Field(default_factory=dict)

    def describe(self) -> str:
        """One line: condition, node path and values."""
        where = f" at {self.path}" if self.path else ""
        values = " ".join(f"{key}={value}" for key, value in self.detail.items())
        return f"{self.condition}{where} {values}".rstrip()


class Verdict(BaseModel):
    """Result of a validity check or a derivation check."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: Literal["valid", "invalid", "accepted", "rejected"]
    failures: list[Failure] = Field(default_factory=list)
    conclusion: Triple | None = None

    @property
    def ok(self) -> bool:
        """Valid or accepted."""
        return self.status in {"valid", "accepted"}


class Derivation(BaseModel):
    """A rule-labelled proof tree; ``conclusion`` is filled in when known."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    rule: str
    children: list["Derivation"] = Field(default_factory=list)
    side: dict[str, Any] = Field(default_factory=dict)
    conclusion: Triple | None = None

    def nodes(self) -> int:
        """Number of nodes in the tree."""
        return 1 + sum(child.nodes() for child in self.children)

    def bare(self) -> "Derivation":
        """The same tree with every conclusion dropped."""
        return self.model_copy(update={"children": [child.bare() for child in self.children], "conclusion": None})

    def rules(self) -> set[str]:
        """Rule names used anywhere in the tree."""
        found = {self.rule}
        for child in self.children:
            found |= child.rules()
        return found


class SpecReport(BaseModel):
    """A postcondition checked against a specification."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    component: Literal["ok", "err"] = "ok"
    post: Any
    spec: Any
    closure: Any
    proved: bool
    true_alerts: Any


# Example bundles


class PostCase(BaseModel):
    """Expected concrete post of a term."""

    term: str
    pre: str
    ok: str
    err: str | None = None


class TripleCase(BaseModel):
    """A triple with its expected validity and optional specification checks."""

    triple: str
    expect: Literal["valid", "invalid"] = "valid"
    spec_ok: str | None = None
    spec_err: str | None = None
    alerts_ok: str | None = None
    alerts_err: str | None = None


class DerivationCase(BaseModel):
    """A derivation file with its expected verdict."""

    file: str
    expect: Literal["accepted", "rejected"] = "accepted"
    conclusion: str | None = None


class RepresentableCase(BaseModel):
    """A codomain and the tests expected to represent it."""

    codomain: str
    tests: list[str]


class Bundle(BaseModel):
    """A worked example: model, domain and the checks to run on them."""

    model_config = ConfigDict(extra="ignore")

    name: str
    title: str
    system: System
    model: str
    domain: str
    notes: list[str] = Field(default_factory=list)
    axioms: bool = False
    posts: list[PostCase] = Field(default_factory=list)
    triples: list[TripleCase] = Field(default_factory=list)
    derivations: list[DerivationCase] = Field(default_factory=list)
    representable: list[RepresentableCase] = Field(default_factory=list)

    @classmethod
    def load(cls, path: str | Path) -> "Bundle":
        """Load from a ``bundle.json`` file."""
        return cls.model_validate_json(Path(path).read_text())


class BundleCheck(BaseModel):
    """One row of an ``examples`` run."""

    bundle: str
    check: str
    passed: bool
    detail: str = ""
