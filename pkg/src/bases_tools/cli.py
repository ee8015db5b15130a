import sys
from pathlib import Path
from typing import Any, Literal

import structlog
from argdantic import ArgField, ArgParser
from dotenv import load_dotenv
from pydantic import ValidationError

from bases_tools.models import Command, JobSpec, Suite
from bases_tools.service import EXIT_INVALID, run
from bases_tools.utils import setup_logging

load_dotenv()
cli = ArgParser(name="bases-tools", description="Bases Tools - lax isotropic bases complexes and their symmetries")

LogLevel = Literal["debug", "info", "warning"]
OutputFormat = Literal["json", "csv"]


def _execute(command: Command, output: Path | None, log_level: str, **fields: Any) -> None:
    setup_logging(log_level=log_level)
    log = structlog.get_logger()
    try:
        job = JobSpec(command=command, **fields)
    except ValidationError as e:
        log.error("Invalid job", error=str(e))
        sys.exit(EXIT_INVALID)

    try:
        report = run(job)
    except KeyboardInterrupt:
        log.info("Interrupted")
        sys.exit(EXIT_INVALID)

    rendered = report.render()
    if output is not None:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(rendered)
        log.info("Report written", path=str(output))
    else:
        sys.stdout.write(rendered if rendered.endswith("\n") else rendered + "\n")
    sys.exit(report.exit_code)


@cli.command()
def vertices(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the coefficient ring Z_L"),
    delta_k: int = ArgField("--delta-k", default=0, description="Size k of the base simplex a_1, ..., a_k"),
    restrict_w: bool = ArgField("--restrict-w", default=False, description="Restrict to W = <a_1, ..., a_g>"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Count the lax vertices of the complex."""
    _execute(
        "vertices",
        output,
        log_level,
        g=g,
        modulus=level,
        delta_k=delta_k,
        restrict_w=restrict_w,
        output_format=output_format,
    )


@cli.command()
def build(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the coefficient ring Z_L"),
    delta_k: int = ArgField("--delta-k", default=0, description="Size k of the base simplex a_1, ..., a_k"),
    restrict_w: bool = ArgField("--restrict-w", default=False, description="Restrict to W = <a_1, ..., a_g>"),
    max_dim: int | None = ArgField("--max-dim", default=None, description="Highest simplex dimension to materialize"),
    cache_dir: Path | None = ArgField("--cache-dir", default=None, description="Complex cache directory"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Build the complex and store it in the cache."""
    _execute(
        "build",
        output,
        log_level,
        g=g,
        modulus=level,
        delta_k=delta_k,
        restrict_w=restrict_w,
        max_dim=max_dim,
        cache_dir=cache_dir,
        output_format=output_format,
    )


@cli.command()
def betti(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the coefficient ring Z_L"),
    delta_k: int = ArgField("--delta-k", default=0, description="Size k of the base simplex a_1, ..., a_k"),
    restrict_w: bool = ArgField("--restrict-w", default=False, description="Restrict to W = <a_1, ..., a_g>"),
    up_to: int | None = ArgField("--up-to", default=None, description="Highest reduced Betti number to compute"),
    max_dim: int | None = ArgField("--max-dim", default=None, description="Highest simplex dimension to materialize"),
    cache_dir: Path | None = ArgField("--cache-dir", default=None, description="Complex cache directory"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Exact reduced Betti numbers, checked against the connectivity range."""
    _execute(
        "betti",
        output,
        log_level,
        g=g,
        modulus=level,
        delta_k=delta_k,
        restrict_w=restrict_w,
        up_to=up_to,
        max_dim=max_dim,
        cache_dir=cache_dir,
        output_format=output_format,
    )


@cli.command()
def orbit(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the coefficient ring Z_L"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Orbit of ±a_1 under transvections, compared with the full vertex set."""
    _execute("orbit", output, log_level, g=g, modulus=level, output_format=output_format)


@cli.command()
def connect(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the coefficient ring Z_L"),
    delta_k: int = ArgField("--delta-k", default=0, description="Size k of the base simplex a_1, ..., a_k"),
    restrict_w: bool = ArgField("--restrict-w", default=False, description="Restrict to W = <a_1, ..., a_g>"),
    cache_dir: Path | None = ArgField("--cache-dir", default=None, description="Complex cache directory"),
    seed: int = ArgField("--seed", default=0, description="Seed for sampled vertex pairs"),
    budget: int | None = ArgField("--budget", default=None, description="Step budget per path"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Join vertex pairs by rank-reduction paths, every edge re-verified."""
    _execute(
        "connect",
        output,
        log_level,
        g=g,
        modulus=level,
        delta_k=delta_k,
        restrict_w=restrict_w,
        cache_dir=cache_dir,
        seed=seed,
        budget=budget,
        output_format=output_format,
    )


@cli.command()
def fill(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the coefficient ring Z_L"),
    delta_k: int = ArgField("--delta-k", default=0, description="Size k of the base simplex a_1, ..., a_k"),
    restrict_w: bool = ArgField("--restrict-w", default=False, description="Restrict to W = <a_1, ..., a_g>"),
    seed: int = ArgField("--seed", default=0, description="Seed for the random cycles"),
    budget: int | None = ArgField("--budget", default=None, description="Step budget per loop"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Contract seeded random loops by certified moves."""
    _execute(
        "fill",
        output,
        log_level,
        g=g,
        modulus=level,
        delta_k=delta_k,
        restrict_w=restrict_w,
        seed=seed,
        budget=budget,
        output_format=output_format,
    )


@cli.command()
def quotient(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the coefficient ring Z_L"),
    factor: int = ArgField("--factor", default=2, description="Build at level L * factor and divide by the kernel"),
    max_dim: int | None = ArgField("--max-dim", default=None, description="Highest simplex dimension to materialize"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Compare Bases(g, L m) divided by the level-L kernel with Bases(g, L)."""
    _execute(
        "quotient",
        output,
        log_level,
        g=g,
        modulus=level,
        factor=factor,
        max_dim=max_dim,
        output_format=output_format,
    )


@cli.command()
def coinvariants(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the transvection powers"),
    delta_k: int = ArgField("--delta-k", default=1, description="Number k of fixed vectors a_1, ..., a_k"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Rational coinvariants of the Heisenberg-type abelianization."""
    _execute("coinvariants", output, log_level, g=g, modulus=level, delta_k=delta_k, output_format=output_format)


@cli.command()
def verify(
    g: int = ArgField(description="Genus"),
    level: int = ArgField("--L", description="Level L of the coefficient ring Z_L"),
    suite: Suite = ArgField("--suite", default="all", description="Verification suite to run"),
    delta_k: int = ArgField("--delta-k", default=0, description="Size k of the base simplex a_1, ..., a_k"),
    restrict_w: bool = ArgField("--restrict-w", default=False, description="Restrict to W = <a_1, ..., a_g>"),
    max_dim: int | None = ArgField("--max-dim", default=None, description="Highest simplex dimension to materialize"),
    cache_dir: Path | None = ArgField("--cache-dir", default=None, description="Complex cache directory"),
    seed: int = ArgField("--seed", default=0, description="Seed for every randomized check"),
    budget: int | None = ArgField("--budget", default=None, description="Step budget per path or loop"),
    output_format: OutputFormat = ArgField("--format", default="json", description="Report format"),
    output: Path | None = ArgField("-o", default=None, description="Write the report here instead of stdout"),
    log_level: LogLevel = ArgField("-l", default="info", description="Log level"),
) -> None:
    """Run a verification suite."""
    _execute(
        "verify",
        output,
        log_level,
        g=g,
        modulus=level,
        suite=suite,
        delta_k=delta_k,
        restrict_w=restrict_w,
        max_dim=max_dim,
        cache_dir=cache_dir,
        seed=seed,
        budget=budget,
        output_format=output_format,
    )


def main():
    cli()


if __name__ == "__main__":
    main()
