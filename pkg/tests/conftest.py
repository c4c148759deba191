import sys

import numpy as np
import pytest

from evotypes.graph import from_edge_list, gen_ba, gen_er

sys.path.insert(0, str(__import__("pathlib").Path(__file__).parent))

_VERDICTS: list[str] = []


def record_verdict(label: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
    _VERDICTS.append(line)
    sys.__stdout__.write("\n" + line + "\n")
    sys.__stdout__.flush()


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)


def triangle():
    return from_edge_list(3, [(0, 1), (1, 2), (0, 2)])


def path3():
    return from_edge_list(3, [(0, 1), (1, 2)])


def cycle(n):
    return from_edge_list(n, [(i, (i + 1) % n) for i in range(n)])


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return from_edge_list(10, outer + spokes + inner)


def fixed_corpus():
    """Five fixed graphs with n <= 12 used for exhaustive checks."""
    return {
        "petersen": petersen(),
        "c12": cycle(12),
        "k6": from_edge_list(6, [(i, j) for i in range(6) for j in range(i + 1, 6)]),
        "er11": gen_er(11, 0.4, 7),
        "ba12": gen_ba(12, 2, 3),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
