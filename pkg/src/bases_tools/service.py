import random
import time
from collections.abc import Callable

import structlog
from pydantic import ValidationError

from bases_tools import __version__
from bases_tools.bases_complex import enumerate_lax_vertices
from bases_tools.errors import BudgetExceededError, CertificationError, InternalInvariantError
from bases_tools.heisenberg import KContext
from bases_tools.io import ComplexCache, spec_key
from bases_tools.models import CheckOutcome, JobSpec, Report
from bases_tools.simplicial import connected_components, reduced_betti
from bases_tools.sp_group import level_quotient
from bases_tools.suites import (
    Verdict,
    coinvariant_check,
    connect_pairs,
    fill_cycles,
    lax_vertex_count,
    run_suite,
    timed,
    transitivity,
)

log = structlog.get_logger()

EXIT_PASS = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3


class JobService:
    """Runs one job against the complex cache and collects its checks into a report."""

    def __init__(self, cache: ComplexCache | None = None):
        self.cache = cache

    def _cache_for(self, job: JobSpec) -> ComplexCache:
        return self.cache or ComplexCache(job.cache_dir)

    def vertices(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        spec = job.bases_spec()

        def count() -> Verdict:
            found = len(enumerate_lax_vertices(spec))
            if spec.delta_k or spec.restrict_w:
                return Verdict(ok=True, value=found)
            expected = lax_vertex_count(spec.g, spec.modulus)
            return Verdict(ok=found == expected, value=found, expected=expected)

        return [timed("vertex_count", "enumeration against the closed-form count", count)], None

    def build(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        spec = job.bases_spec()
        X = self._cache_for(job).get_or_build(spec)
        check = timed(
            "build",
            "clique extension with the simplex predicate",
            lambda: Verdict(ok=True, value=X.f_vector),
        )
        return [check], spec_key(spec)

    def betti(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        claimed = job.g - job.delta_k - 2
        up_to = job.up_to if job.up_to is not None else max(claimed, 0)
        spec = job.bases_spec(max_dim=max(job.max_dim or 0, up_to + 1))
        X = self._cache_for(job).get_or_build(spec)
        betti = reduced_betti(X, up_to).reduced_betti
        checks = []
        for i, b in enumerate(betti):
            expected = 0 if i <= claimed else None
            checks.append(
                timed(
                    "reduced_betti",
                    "exact rational rank",
                    lambda b=b, expected=expected: Verdict(
                        ok=expected is None or b == expected, value=b, expected=expected
                    ),
                    dim=i,
                )
            )
        components = len(connected_components(X))
        checks.append(
            timed(
                "components",
                "union-find",
                lambda: Verdict(ok=components - 1 == betti[0], value=components, expected=betti[0] + 1),
            )
        )
        return checks, spec_key(spec)

    def orbit(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        check = timed(
            "transitivity",
            "orbit BFS with replayed witness words",
            lambda: transitivity(job.g, job.modulus),
        )
        return [check], None

    def connect(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        spec = job.bases_spec()
        X = self._cache_for(job).get_or_build(spec)
        check = timed(
            "connect",
            "edge-by-edge simplex predicate and BFS components",
            lambda: connect_pairs(spec, X, rng, job.budget),
        )
        return [check], spec_key(spec)

    def fill(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        spec = job.bases_spec()
        check = timed("fill", "certified moves ending at a constant loop", lambda: fill_cycles(spec, rng, job.budget))
        return [check], None

    def quotient(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        def compare() -> Verdict:
            report = level_quotient(job.g, job.modulus, job.factor, job.max_dim)
            return Verdict(
                ok=report.isomorphic,
                value={"orbits": report.orbits, "kernel_order": report.kernel_order},
                expected={"orbits": report.target_vertices},
                witness=report.witness,
            )

        return [timed("level_quotient", "vertex and simplex sets compared under reduction", compare)], None

    def coinvariants(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        ctx = KContext(g=job.g, k=max(job.delta_k, 1))
        check = timed(
            "coinvariants",
            "exact rational rank of displacement vectors",
            lambda: coinvariant_check(ctx, job.modulus),
        )
        return [check], None

    def verify(self, job: JobSpec, rng: random.Random) -> tuple[list[CheckOutcome], str | None]:
        return run_suite(job, rng, self._cache_for(job)), None

    def handle(self, job: JobSpec) -> Report:
        """
        Execute the job's command.

        Returns:
            the report, with exit code 0 when every check passed, 1 when a property failed,
            2 on invalid input and 3 when a budget or size guard stopped the run
        """
        start = time.perf_counter()
        report = Report(tool_version=__version__, job=job, seed=job.seed, job_hash=job.digest())
        command: Callable[[JobSpec, random.Random], tuple[list[CheckOutcome], str | None]] = getattr(
            self, job.command
        )
        log.info("Starting job", command=job.command, g=job.g, L=job.modulus, delta_k=job.delta_k, seed=job.seed)
        try:
            checks, cache_key = command(job, random.Random(job.seed))
            report.checks, report.cache_key = checks, cache_key
            report.exit_code = EXIT_PASS if all(c.passed for c in checks) else EXIT_FAILED
        except BudgetExceededError as e:
            log.error("Budget exceeded", error=str(e))
            report.exit_code, report.error = EXIT_BUDGET, str(e)
        except (CertificationError, InternalInvariantError) as e:
            log.error("Certification failed", error=str(e))
            report.exit_code, report.error = EXIT_FAILED, str(e)
        except (ValueError, ValidationError) as e:
            log.error("Invalid input", error=str(e))
            report.exit_code, report.error = EXIT_INVALID, str(e)
        report.elapsed_ms = (time.perf_counter() - start) * 1000
        failed = [c.check for c in report.checks if not c.passed]
        log.info("Job finished", exit_code=report.exit_code, checks=len(report.checks), failed=failed)
        return report


def run(job: JobSpec, cache: ComplexCache | None = None) -> Report:
    return JobService(cache).handle(job)
