"""Exception hierarchy for katlcl.

Every error carries the CLI exit code it maps to. Logical failures (an invalid
triple, a rejected derivation) are not errors: they come back as a Verdict.
"""

from katlcl.src.config import EXIT_PARSE, EXIT_SEMANTIC, EXIT_SYNTHESIS


class KatError(Exception):
    """Base class for all katlcl errors."""

    exit_code = EXIT_SEMANTIC


class KatParseError(KatError):
    """Raised on malformed terms, literals, triples or input files."""

    exit_code = EXIT_PARSE

    def __init__(self, msg: str, position: int | None = None) -> None:
        """Initialize with an optional character position."""
        self.position = position
        super().__init__(msg if position is None else f"{msg} at position {position}")


class KatSemanticError(KatError):
    """Raised when well-formed input does not make sense for the loaded model."""

    exit_code = EXIT_SEMANTIC


class UnknownAtomError(KatSemanticError):
    """Raised when a term or derivation names an atom the model does not declare."""

    def __init__(self, name: str) -> None:
        """Initialize with the offending identifier."""
        self.name = name
        super().__init__(f"unknown atom '{name}'")


class LiteralError(KatSemanticError):
    """Raised when a literal denotes a value outside the model or lattice."""


class ModelError(KatSemanticError):
    """Raised for model bounds, kind mismatches and symbolic materialization."""


class DomainError(KatSemanticError):
    """Raised when an abstract domain breaks the insertion laws or does not fit the model."""


class DerivationError(KatSemanticError):
    """Raised for malformed derivation trees (unknown rule, arity, side data)."""

    def __init__(self, msg: str, path: str | None = None) -> None:
        """Initialize with the node path where the tree is malformed."""
        self.path = path
        super().__init__(msg if path is None else f"{msg} (node {path})")


class SynthesisError(KatError):
    """Raised when a triple is outside the reach of proof synthesis.

    ``reason`` is one of ``invalid`` (the triple is not valid), ``incomplete-atom``
    (an atom of the term is not globally complete; ``atom`` and ``witness`` name it)
    or ``bound`` (a star chain did not repeat within the lattice size).
    """

    exit_code = EXIT_SYNTHESIS

    def __init__(
        self,
        msg: str | None = None,
        *,
        reason: str = "invalid",
        atom: str | None = None,
        witness: str | None = None,
        verdict: object | None = None,
    ) -> None:
        """Initialize with the failure reason and its witness data."""
        self.reason = reason
        self.atom = atom
        self.witness = witness
        self.verdict = verdict
        if msg is None and reason == "incomplete-atom":
            msg = f"atom '{atom}' is not globally complete; witness test {witness}"
        super().__init__(msg or f"cannot synthesize: {reason}")
