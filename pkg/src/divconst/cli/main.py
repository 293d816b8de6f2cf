import csv
import io
import json
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError

from divconst.analysis import EntropyDomainError
from divconst.config_utils import ConfigYMLPathNotSetError, EstimatorSettings, RootConfig
from divconst.divisor_graph import IllegalTripleError
from divconst.kernels import KernelBudgetError
from divconst.local_stats import StatKind, StatRangeError
from divconst.oracle import OracleGuardError
from divconst.presets import UnknownPresetError
from divconst.run_config import OutputFormat, RunConfig
from divconst.term_cache import CacheCorruptionError

app = typer.Typer(
    help="Certified bounds for divisor-graph constants. Documents go to stdout, logs to stderr."
)

EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_GUARD = 3
EXIT_CACHE = 4

# first match wins
EXIT_CODES = (
    (CacheCorruptionError, EXIT_CACHE),
    (KernelBudgetError, EXIT_GUARD),
    (OracleGuardError, EXIT_GUARD),
    (ValidationError, EXIT_INVALID),
    (IllegalTripleError, EXIT_INVALID),
    (UnknownPresetError, EXIT_INVALID),
    (EntropyDomainError, EXIT_INVALID),
    (ConfigYMLPathNotSetError, EXIT_INVALID),
    (StatRangeError, EXIT_CHECK_FAILED),
)


@contextmanager
def exit_codes():
    try:
        yield
    except tuple(kind for kind, _ in EXIT_CODES) as e:
        code = next(code for kind, code in EXIT_CODES if isinstance(e, kind))
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code)


def _csv(row: dict) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(row), lineterminator="\n")
    writer.writeheader()
    writer.writerow(row)
    return buffer.getvalue().rstrip("\n")


def _emit(document: dict, output_format: OutputFormat) -> None:
    if output_format is OutputFormat.JSON:
        typer.echo(json.dumps(document))
    elif output_format is OutputFormat.CSV:
        typer.echo(_csv(document))
    else:
        for key, value in document.items():
            typer.echo(f"{key}: {value}")


@app.command()
def initialize():
    """
    Create the base, log and cache directories from config.yml.

    Example usage:
    divconst-cli initialize
    """
    from divconst.initialize import Initializer

    with exit_codes():
        for created in Initializer().create_dirs():
            typer.echo(f"created {created}")


@app.command()
def estimate(
    constant: str = typer.Option(..., "--constant", "-c", help="alpha, beta, eta, theta, b or c"),
    budget: Optional[int] = typer.Option(None, "--budget", help="include blocks with d*i^5 <= BUDGET"),
    preset: Optional[str] = typer.Option(None, "--preset", help="desk, paper-alpha, paper-eta, paper-theta, paper-c"),
    obs2_jmax: Optional[int] = typer.Option(None, "--obs2-jmax", help="depth of multiplication-rule crediting"),
    cache: Optional[Path] = typer.Option(None, "--cache", help="JSONL term cache to resume from and extend"),
    no_cache: bool = typer.Option(False, "--no-cache", help="evaluate every term in memory only"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
    workers: Optional[int] = typer.Option(None, "--workers", help="processes evaluating run starts"),
    max_vertices: Optional[int] = typer.Option(None, "--max-vertices", help="largest component any kernel accepts"),
    with_timing: bool = typer.Option(False, "--with-timing", help="add wall time to the document"),
    no_ledger: bool = typer.Option(False, "--no-ledger", help="do not record the run in the SQLite ledger"),
):
    """
    Certified interval for one constant.

    Example usage:
    divconst-cli estimate --constant alpha --budget 1000000
    divconst-cli estimate --constant theta --preset paper-theta --workers 8
    """
    from divconst.estimator import ConstantEstimator
    from divconst.time_utils import get_current_time

    with exit_codes():
        config = RunConfig(
            command="estimate",
            constant=constant,
            budget=budget,
            preset=preset,
            obs2_jmax=obs2_jmax,
            cache=cache,
            use_cache=not no_cache,
            output_format=output_format,
            max_vertices=max_vertices,
            workers=workers,
        )
        started_at = get_current_time()
        interval = ConstantEstimator(
            config.constant,
            config.budget_spec,
            config.obs2_jmax,
            config.cache_path,
            limits=config.kernel_limits(),
            workers=config.workers,
        ).run(with_timing=with_timing)
        _emit(interval.model_dump(mode="json", exclude_none=True), config.output_format)

        if not no_ledger and EstimatorSettings.load().ledger and RootConfig.is_configured():
            from divconst.db_utils.database import RunLedger

            RunLedger().record(interval, started_at)


@app.command()
def ratio(
    kind: StatKind,
    d: int,
    t: int,
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format"),
):
    """
    Exact local statistic of the component of d in [d, t].

    Example usage:
    divconst-cli ratio r 1 2
    divconst-cli ratio v 8 98
    """
    from divconst.divisor_graph import ReductionTriple, build_component
    from divconst.local_stats import LocalStats

    with exit_codes():
        triple = ReductionTriple.of(d, t)
        value = LocalStats().stat(kind, d, t)
        component = build_component(d, t)
        if output_format is OutputFormat.TEXT:
            typer.echo(str(value))
            typer.echo(f"triple: {triple.as_tuple()}")
            typer.echo(f"component: {' '.join(map(str, component.vertices))}")
            return
        document = {
            "kind": kind.value,
            "i": triple.i,
            "d": triple.d,
            "t": triple.t,
            "value": str(value),
            "component": " ".join(map(str, component.vertices)),
        }
        if value.sizes is not None:
            document["sizes"] = f"{value.sizes[0]} {value.sizes[1]}"
        _emit(document, output_format)


def _oracle(config: RunConfig):
    from divconst.oracle import Oracle

    return Oracle(config.oracle_settings(), config.kernel_limits())


@app.command()
def oracle(
    n: int,
    max_oracle_n: Optional[int] = typer.Option(None, "--max-oracle-n", help="largest n counted"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
):
    """
    Brute-force Q, M, m, H, G and C on [1, n].

    Example usage:
    divconst-cli oracle 7
    """
    with exit_codes():
        config = RunConfig(command="oracle", n=n, max_oracle_n=max_oracle_n, output_format=output_format)
        counts = _oracle(config).brute_all(config.n)
        _emit(counts.model_dump(mode="json"), config.output_format)


@app.command()
def verify(kind: StatKind, n: int):
    """
    Check that the local statistics telescope to the brute-force counts on [k, n] for every k.

    Example usage:
    divconst-cli verify r 9
    """
    with exit_codes():
        config = RunConfig(command="verify", n=n)
        report = _oracle(config).verify_telescoping_report(kind, config.n)
    for row in report.rows:
        status = "PASS" if row.ok else "FAIL"
        typer.echo(f"k={row.k} {row.triple} {status} partial={row.partial} expected={row.expected}")
    mismatch = report.first_mismatch
    if mismatch is None:
        typer.echo(f"PASS {kind.value} n={n}")
        return
    typer.echo(
        f"FAIL {kind.value} n={n}: first mismatch at k={mismatch.k}, "
        f"{mismatch.partial} != {mismatch.expected}"
    )
    raise typer.Exit(EXIT_CHECK_FAILED)


@app.command()
def median(
    alpha_lo: float = typer.Option(1.572939, "--alpha-lo"),
    alpha_hi: float = typer.Option(1.574445, "--alpha-hi"),
    eta_lo: float = typer.Option(1.2125, "--eta-lo"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
):
    """
    Asymptotic fractions bounding the median size of a primitive subset of [1, n].

    Example usage:
    divconst-cli median --alpha-lo 1.572939 --alpha-hi 1.574445 --eta-lo 1.2125
    """
    from divconst.analysis import median_bounds

    with exit_codes():
        result = median_bounds(alpha_lo, alpha_hi, eta_lo)
        document = result.model_dump()
        document["lower_frac"] = f"{result.lower_frac:.6f}"
        document["upper_frac"] = f"{result.upper_frac:.6f}"
        _emit(document, output_format)


@app.command()
def conjecture(
    limit: int = typer.Option(60, "--limit"),
    long_run: bool = typer.Option(False, "--long-run", help="allow limits above oracle.conjecture_limit"),
):
    """
    Search for failures of g(nm) <= g(n) g(m) (coprime n, m) and of g(p^(k+1)) <= g(p^k).

    Example usage:
    divconst-cli conjecture --limit 60
    """
    with exit_codes():
        config = RunConfig(command="conjecture", limit=limit)
        found = _oracle(config).check_submultiplicative(config.limit, long_run)
    if not found:
        typer.echo(f"no counterexamples up to {limit}")
        return
    for example in found:
        typer.echo(f"{example.family} {example.args}: {example.lhs} > {example.rhs}")


if __name__ == "__main__":
    app()
