import math
from pathlib import Path

import numpy as np
import pytest

from bb84sec import gf2
from bb84sec.gf2 import BitString, ParityCode
from bb84sec.security import PerBitNoise

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def random_code(n: int, r: int, rng: np.random.Generator) -> ParityCode:
    while True:
        strings = [BitString(n, int(rng.integers(1, 2 ** n))) for _ in range(r + 1)]
        if gf2.is_independent(strings):
            bits = tuple(int(b) for b in rng.integers(0, 2, size=r))
            return ParityCode(strings[0], tuple(strings[1:]), bits)


def random_noise(n: int, rng: np.random.Generator) -> PerBitNoise:
    return PerBitNoise(tuple(rng.uniform(0, math.pi / 4, size=n)))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g + g.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# criterion number -> (title, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} ({detail})")
