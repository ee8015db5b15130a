import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any

import structlog
from pydantic import ValidationError

from bases_tools.bases_complex import BasesSpec, build_bases
from bases_tools.config import FORMAT_VERSION, settings
from bases_tools.errors import ToolkitError
from bases_tools.simplicial import SimplicialComplex
from bases_tools.zl_linalg import LaxVector, ZLVector

log = structlog.get_logger()


class CacheInvalidError(ToolkitError):
    """
    Raised when a cached complex is corrupt or written with another format version.
    """


def complex_to_dict(X: SimplicialComplex, spec: BasesSpec) -> dict[str, Any]:
    """
    The on-disk schema: vertices as canonical representatives in sorted order, simplices of
    dimension >= 1 as sorted vertex index lists, grouped by dimension.
    """
    order = sorted(X.vertices, key=lambda v: X.label(v).coords)
    index = {v: i for i, v in enumerate(order)}
    simplices = {}
    for d in range(1, X.dimension + 1):
        simplices[str(d)] = sorted(sorted(index[v] for v in s) for s in X.simplices(d))
    return {
        "format_version": FORMAT_VERSION,
        "g": spec.g,
        "L": spec.modulus,
        "delta_k": spec.delta_k,
        "restrict_W": spec.restrict_w,
        "max_dim": max(spec.top_dim, 0),
        "vertices": [list(X.label(v).coords) for v in order],
        "simplices": simplices,
    }


def dumps(X: SimplicialComplex, spec: BasesSpec) -> str:
    return json.dumps(complex_to_dict(X, spec), separators=(",", ":"))


def complex_from_dict(data: dict[str, Any], spec: BasesSpec | None = None) -> SimplicialComplex:
    """
    Raises:
        CacheInvalidError: on a version mismatch, a spec mismatch or any malformed content
    """
    if not isinstance(data, dict) or data.get("format_version") != FORMAT_VERSION:
        version = data.get("format_version") if isinstance(data, dict) else None
        raise CacheInvalidError(f"unsupported format version {version}")
    try:
        stored = BasesSpec(
            g=data["g"],
            modulus=data["L"],
            delta_k=data["delta_k"],
            restrict_w=data["restrict_W"],
            max_dim=data["max_dim"],
        )
        if spec is not None and (stored.g, stored.modulus, stored.delta_k, stored.restrict_w, stored.top_dim) != (
            spec.g,
            spec.modulus,
            spec.delta_k,
            spec.restrict_w,
            spec.top_dim,
        ):
            raise CacheInvalidError("cached complex was built for another spec")
        labels = {}
        for i, coords in enumerate(data["vertices"]):
            labels[i] = LaxVector(rep=ZLVector(g=stored.g, modulus=stored.modulus, coords=tuple(coords)))
        if [v.coords for v in labels.values()] != sorted(v.coords for v in labels.values()):
            raise CacheInvalidError("vertices are not in canonical order")
        simplices: list[tuple[int, ...]] = [(i,) for i in labels]
        for d, entries in sorted(data["simplices"].items(), key=lambda item: int(item[0])):
            for entry in entries:
                if len(entry) != int(d) + 1 or any(i not in labels for i in entry):
                    raise CacheInvalidError(f"malformed {d}-simplex {entry}")
                simplices.append(tuple(entry))
        cap = None if stored.is_complete else stored.top_dim
        return SimplicialComplex(simplices, labels, skeleton_cap=cap)
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise CacheInvalidError(f"corrupt cached complex: {e}") from e


def spec_key(spec: BasesSpec) -> str:
    payload = json.dumps(
        {
            "g": spec.g,
            "L": spec.modulus,
            "delta_k": spec.delta_k,
            "restrict_W": spec.restrict_w,
            "max_dim": spec.top_dim,
            "format_version": FORMAT_VERSION,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


class ComplexCache:
    """
    Persists built complexes as JSON, one file per spec.
    Writes go to a temporary file in the same directory and are renamed into place.
    """

    def __init__(self, directory: Path | None = None) -> None:
        self.directory = Path(directory or settings.cache.directory)

    def path(self, spec: BasesSpec) -> Path:
        suffix = "_W" if spec.restrict_w else ""
        return self.directory / f"bases_g{spec.g}_L{spec.modulus}_k{spec.delta_k}{suffix}_{spec_key(spec)[:16]}.json"

    def store(self, X: SimplicialComplex, spec: BasesSpec) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.path(spec)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".{target.stem}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as f:
                f.write(dumps(X, spec))
            os.replace(tmp, target)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        log.debug("Stored complex", path=str(target))
        return target

    def load(self, spec: BasesSpec) -> SimplicialComplex | None:
        """
        Returns:
            the cached complex, or None when nothing was stored for this spec

        Raises:
            CacheInvalidError: when the stored file cannot be used
        """
        target = self.path(spec)
        if not target.exists():
            return None
        try:
            data = json.loads(target.read_text())
        except json.JSONDecodeError as e:
            raise CacheInvalidError(f"corrupt cache file {target}: {e}") from e
        return complex_from_dict(data, spec)

    def get_or_build(self, spec: BasesSpec) -> SimplicialComplex:
        """Load the complex, rebuilding it when the cache is missing or invalid."""
        try:
            cached = self.load(spec)
        except CacheInvalidError as e:
            log.warning("Discarding cached complex", error=str(e))
            cached = None
        if cached is not None:
            log.info("Loaded complex from cache", path=str(self.path(spec)))
            return cached
        X = build_bases(spec)
        self.store(X, spec)
        return X
