"""katlcl CLI."""

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import typer
from rich.markup import escape
from rich.table import Table

from katlcl.src.bundles import bundle_names, bundle_notes, run_bundle
from katlcl.src.config import DEFAULT_SAMPLES, EXIT_FAIL, EXTENSIONALITY_CARRIER, LOG_LEVEL, MAX_SAMPLED_CARRIER
from katlcl.src.domain import check_galois
from katlcl.src.errors import KatError, ModelError
from katlcl.src.kat import RelationalModel, TableModel, check_extensionality, check_kat_axioms
from katlcl.src.loaders import Session
from katlcl.src.logic import analyse_spec, check_derivation, synthesize, validity
from katlcl.src.models import LawReport, System, Verdict
from katlcl.src.proofs import format_derivation
from katlcl.src.translate import translate as translate_derivation
from katlcl.src.utils import console, err_console, setup_logging

logger = logging.getLogger(__name__)

app = typer.Typer(help="Local completeness logic on Kleene algebra with tests.", no_args_is_help=True)

MODEL = typer.Option(..., "--model", "-m", exists=True, dir_okay=False, help="Model file")
DOMAIN = typer.Option("trivial", "--domain", "-d", help="Built-in domain name or domain file")
SYSTEM = typer.Option(System.LCK, "--system", "-s", help="Proof system")
TOP = typer.Option(False, "--top", help="Run UL/IL over topp codomains")


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Check triples and derivations of local completeness logic."""
    setup_logging("DEBUG" if verbose else LOG_LEVEL)


@contextmanager
def _errors() -> Iterator[None]:
    """Map katlcl errors to their exit codes."""
    try:
        yield
    except KatError as exc:
        err_console.print(f"[red]error:[/red] {exc}")
        raise typer.Exit(exc.exit_code) from None


def _print_verdict(verdict: Verdict, session: Session) -> None:
    if verdict.ok:
        console.print(f"[green]✓ {verdict.status}[/green]")
        if verdict.conclusion is not None:
            conclusion = verdict.conclusion
            posts = " ".join(
                f"[{eps}: {session.analysis.fmt(value)}]"
                for eps, value in (("ok", conclusion.post_ok), ("err", conclusion.post_err))
                if value is not None
            )
            console.print(f"  [{session.analysis.fmt(conclusion.pre)}] {conclusion.term} {posts}", markup=False)
        return
    console.print(f"[red]✗ {verdict.status}[/red]")
    for failure in verdict.failures:
        console.print(f"condition {failure.describe()}", markup=False)


@app.command()
def post(
    term: str = typer.Argument(..., help="Term, e.g. '(u;b1)*'"),
    pre: str = typer.Argument(..., help="Precondition literal, e.g. '{++,--}'"),
    model: Path = MODEL,
    err: bool = typer.Option(False, "--err", "-e", help="Also print the erroneous post"),
    top: bool = typer.Option(False, "--top", help="Pre is a topp codomain 'top{...}'"),
) -> None:
    """Print the strongest postcondition of a term."""
    with _errors():
        session = Session.open(model, system=System.UL, top=top)
        semantics = session.analysis.concrete
        t, p = session.term(term), session.value(pre)
        line = f"ok: {session.analysis.fmt(semantics.ok(t, p))}"
        if err:
            line += f" err: {session.analysis.fmt(semantics.err(t, p))}"
        console.print(line, markup=False)


@app.command()
def check(
    triple: str = typer.Option(..., "--triple", "-t", help="'[pre] term [ok: q][err: r]'"),
    model: Path = MODEL,
    domain: str = DOMAIN,
    system: System = SYSTEM,
    top: bool = TOP,
    spec_ok: str | None = typer.Option(None, "--spec-ok", help="Specification for the ok post"),
    spec_err: str | None = typer.Option(None, "--spec-err", help="Specification for the err post"),
) -> None:
    """Check the validity of a triple, optionally against a specification."""
    with _errors():
        session = Session.open(model, domain, system, top=top)
        tr = session.triple(triple)
        verdict = validity(session.analysis, tr)
        _print_verdict(verdict, session)
        failed = not verdict.ok
        for eps, spec in (("ok", spec_ok), ("err", spec_err)):
            if spec is None:
                continue
            q = tr.component(eps)
            if q is None:
                msg = f"the triple has no {eps} component to check against --spec-{eps}"
                raise ModelError(msg)
            report = analyse_spec(session.analysis, q, session.value(spec), eps)
            fmt = session.analysis.fmt
            if report.proved:
                console.print(f"[green]✓ {eps} spec proved[/green]: A(q) = {fmt(report.closure)}")
            else:
                failed = True
                console.print(f"[red]✗ {eps} spec not proved[/red]: A(q) = {fmt(report.closure)}")
                console.print(f"  true alerts: {fmt(report.true_alerts)}", markup=False)
    if failed:
        raise typer.Exit(EXIT_FAIL)


@app.command()
def verify(
    derivation: Path = typer.Option(..., "--derivation", "-D", exists=True, dir_okay=False, help="Derivation file"),
    model: Path = MODEL,
    domain: str = DOMAIN,
    system: System = SYSTEM,
    top: bool = TOP,
) -> None:
    """Check a derivation tree."""
    with _errors():
        session = Session.open(model, domain, system, top=top)
        verdict, _tree = check_derivation(system, session.analysis, session.derivation(derivation))
        _print_verdict(verdict, session)
    if not verdict.ok:
        raise typer.Exit(EXIT_FAIL)


@app.command()
def prove(
    triple: str = typer.Option(..., "--triple", "-t", help="'[pre] term [ok: q][err: r]'"),
    model: Path = MODEL,
    domain: str = DOMAIN,
    system: System = SYSTEM,
    top: bool = TOP,
    emit: Path | None = typer.Option(None, "--emit", "-o", help="Write the derivation here"),
) -> None:
    """Synthesize a derivation of a valid triple."""
    with _errors():
        session = Session.open(model, domain, system, top=top)
        tree = synthesize(system, session.analysis, session.triple(triple))
        text = format_derivation(tree, session.domain.concrete)
    if emit is None:
        console.print(text, markup=False, highlight=False)
        return
    emit.write_text(text + "\n")
    console.print(f"[green]✓[/green] {tree.nodes()} nodes written to [cyan]{emit}[/cyan]")


@app.command()
def translate(
    derivation: Path = typer.Option(..., "--derivation", "-D", exists=True, dir_okay=False, help="Derivation file"),
    model: Path = MODEL,
    system: System = SYSTEM,
    top: bool = TOP,
    emit: Path | None = typer.Option(None, "--emit", "-o", help="Write the translation here"),
) -> None:
    """Translate between LCK/LCTK and UL, or LCIL/LCTIL and IL, at the trivial domain."""
    with _errors():
        session = Session.open(model, "trivial", system, top=top)
        target, tree = translate_derivation(system, session.analysis, session.derivation(derivation))
        text = format_derivation(tree, session.domain.concrete)
    if emit is None:
        console.print(f"[dim]# {system} -> {target}[/dim]")
        console.print(text, markup=False, highlight=False)
        return
    emit.write_text(text + "\n")
    console.print(f"[green]✓[/green] {target} derivation written to [cyan]{emit}[/cyan]")


@app.command()
def examples(
    only: list[str] | None = typer.Option(None, "--only", help="Run only the named bundles"),
    seed: int | None = typer.Option(None, "--seed", help="Seed for sampled law suites"),
) -> None:
    """Run the bundled worked examples."""
    names = bundle_names()
    if only:
        unknown = sorted(set(only) - set(names))
        if unknown:
            err_console.print(f"[red]error:[/red] unknown bundle(s) {', '.join(unknown)}; have {', '.join(names)}")
            raise typer.Exit(EXIT_FAIL)
        names = [name for name in names if name in only]

    all_ok = True
    for name in names:
        table = Table(title=f"Worked examples: {name}", show_header=True, header_style="bold")
        table.add_column("Check")
        table.add_column("OK", justify="center")
        table.add_column("Detail", style="dim")
        for row in run_bundle(name, seed=seed):
            status = "[green]✓[/green]" if row.passed else "[red]✗[/red]"
            all_ok &= row.passed
            table.add_row(row.check, status, row.detail)
        console.print(table)
        for note in bundle_notes(name):
            console.print(f"  [dim]note:[/dim] {escape(note)}", highlight=False)
    if not all_ok:
        raise typer.Exit(EXIT_FAIL)


def _law_table(report: LawReport) -> Table:
    sampled = f", sampled with seed {report.seed}" if report.sampled else ""
    table = Table(title=f"{report.subject}{sampled}", show_header=True, header_style="bold")
    table.add_column("Law")
    table.add_column("Checked", justify="right")
    table.add_column("OK", justify="center")
    table.add_column("Witness", style="dim")
    for result in report.results:
        witness = ", ".join(f"{k}={v}" for k, v in (result.witness or {}).items())
        status = "[green]✓[/green]" if result.passed else "[red]✗[/red]"
        table.add_row(result.law, str(result.checked), status, witness)
    return table


@app.command()
def laws(
    model: Path = MODEL,
    domain: str | None = typer.Option(None, "--domain", "-d", help="Also check this domain"),
    top: bool = typer.Option(False, "--top", help="Domain over topp codomains"),
    seed: int | None = typer.Option(None, "--seed", help="Sampling seed"),
    samples: int = typer.Option(DEFAULT_SAMPLES, "--samples", help="Cases per sampled law"),
) -> None:
    """Check the KAT axioms, diamond laws and insertion laws."""
    with _errors():
        session = Session.open(model, domain or "trivial", top=top)
        reports: list[LawReport] = []
        kat = session.model
        if isinstance(kat, TableModel) or (isinstance(kat, RelationalModel) and kat.n <= MAX_SAMPLED_CARRIER):
            reports.append(check_kat_axioms(session.model, seed=seed, samples=samples))
        if isinstance(kat, RelationalModel) and kat.n <= EXTENSIONALITY_CARRIER:
            reports.append(check_extensionality(session.model))
        if domain is not None:
            reports.append(check_galois(session.domain, seed=seed, samples=samples))
    if not reports:
        console.print("[dim]Nothing to check: symbolic model and no domain.[/dim]")
        return
    for report in reports:
        console.print(_law_table(report))
    if not all(report.passed for report in reports):
        raise typer.Exit(EXIT_FAIL)


if __name__ == "__main__":
    app()
