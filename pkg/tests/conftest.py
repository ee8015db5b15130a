import random

import pytest

from bases_tools.bases_complex import BasesComplex, BasesSpec, build_bases
from bases_tools.config import settings
from bases_tools.io import ComplexCache


@pytest.fixture
def rng():
    """Seeded generator, so every randomized test is reproducible."""
    return random.Random(1234)


@pytest.fixture
def cache(tmp_path):
    """Complex cache in a throwaway directory."""
    return ComplexCache(tmp_path / "cache")


@pytest.fixture
def fast_settings(monkeypatch):
    """Shrink the trial counts of the verification suites."""
    monkeypatch.setattr(settings.verify, "form_trials", 200)
    monkeypatch.setattr(settings.verify, "snf_trials", 50)
    monkeypatch.setattr(settings.verify, "reduction_trials", 200)
    monkeypatch.setattr(settings.verify, "commutator_trials", 200)
    monkeypatch.setattr(settings.verify, "fill_cycles", 5)
    monkeypatch.setattr(settings.verify, "pair_sample", 100)
    return settings


@pytest.fixture(scope="session")
def spec_2_2():
    return BasesSpec(g=2, L=2)


@pytest.fixture(scope="session")
def spec_3_2():
    return BasesSpec(g=3, L=2)


@pytest.fixture(scope="session")
def bases_2_2(spec_2_2):
    """Bases(2, 2): 15 vertices, 45 edges."""
    return build_bases(spec_2_2)


@pytest.fixture(scope="session")
def bases_3_2(spec_3_2):
    """Bases(3, 2) up to its 2-simplices."""
    return build_bases(spec_3_2)


@pytest.fixture(scope="session")
def complex_3_2(spec_3_2):
    """Shared predicates for Bases(3, 2), so that neighbor caches are reused across tests."""
    return BasesComplex(spec_3_2)
