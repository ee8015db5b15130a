import logging
import sys
from collections.abc import Hashable, Iterable
from typing import Literal

import structlog


def setup_logging(
    log_level: str,
    format_type: Literal["json", "stdout"] = "stdout",
    suppress: Iterable[str] = ("sympy",),
) -> None:
    """
    Set up console logging. Logs are written to stderr, reports own stdout.

    Args:
        log_level: Log level (debug, info, warning, error, critical)
        format_type: 'json' forces structured output, 'stdout' picks pretty printing on a terminal
        suppress: noisy third-party loggers to silence
    """
    logging.basicConfig(level=log_level.upper(), stream=sys.stderr)
    for logger in suppress:
        logging.getLogger(logger).setLevel(logging.WARNING)
    processors = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.StackInfoRenderer(),
        structlog.dev.set_exc_info,
        structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S", utc=False),
    ]
    if sys.stderr.isatty() and format_type == "stdout":
        # pretty printing when we run in a terminal session.
        processors.extend([structlog.dev.ConsoleRenderer()])
    else:
        # print JSON when we run, e.g., in CI.
        processors.extend(
            [
                structlog.processors.dict_tracebacks,
                structlog.processors.JSONRenderer(),
            ]
        )
    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(logging.getLevelName(log_level.upper())),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


class UnionFind:
    """
    Disjoint sets with path compression and union by rank.

    >>> uf = UnionFind([1, 2, 3])
    >>> uf.union(1, 2)
    >>> uf.find(2) == uf.find(1)
    True
    """

    def __init__(self, items: Iterable[Hashable] = ()) -> None:
        self.parent: dict[Hashable, Hashable] = {}
        self.rank: dict[Hashable, int] = {}
        for item in items:
            self.add(item)

    def add(self, x: Hashable) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0

    def find(self, x: Hashable) -> Hashable:
        self.add(x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: Hashable, y: Hashable) -> None:
        px, py = self.find(x), self.find(y)
        if px == py:
            return
        if self.rank[px] < self.rank[py]:
            px, py = py, px
        self.parent[py] = px
        if self.rank[px] == self.rank[py]:
            self.rank[px] += 1

    def groups(self) -> list[list[Hashable]]:
        """Return the disjoint sets, each sorted, ordered by their smallest member."""
        buckets: dict[Hashable, list[Hashable]] = {}
        for item in self.parent:
            buckets.setdefault(self.find(item), []).append(item)
        return sorted((sorted(members) for members in buckets.values()), key=lambda members: members[0])
