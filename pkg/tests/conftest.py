from functools import lru_cache

import pytest

from fibspec import PHI, dft_fast, realize, word_by_substitution

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def golden_chain(m):
    return realize(word_by_substitution(m), PHI, 1.0)


@lru_cache(maxsize=None)
def golden_spectrum(m):
    return dft_fast(golden_chain(m))


@pytest.fixture
def record_criterion():
    def record(number, name, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {name}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
