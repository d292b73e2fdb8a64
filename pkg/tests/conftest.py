"""Pytest configuration and fixtures for tests."""

import random
from pathlib import Path

import pytest

from cga_invariants.services.arith import HalfInt

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture
def ell_32() -> HalfInt:
    return HalfInt(3)


@pytest.fixture
def ell_52() -> HalfInt:
    return HalfInt(5)


@pytest.fixture
def ell_72() -> HalfInt:
    return HalfInt(7)


@pytest.fixture
def ell_92() -> HalfInt:
    return HalfInt(9)


@pytest.fixture
def rng() -> random.Random:
    """Seeded generator for the randomised property suites."""
    return random.Random(20240611)
