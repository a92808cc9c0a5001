import numpy as np
import pytest

from qconsensus.partitions import Partition, enumerate_tabloids

# Vertex orders of the reference example matrices, as Yamanouchi words.
REFERENCE_ORDER = {
    (3, 1): ["2111", "1211", "1121", "1112"],
    (2, 2): ["2211", "2121", "1221", "2112", "1212", "1122"],
    (2, 1): ["211", "121", "112"],
    (1, 1, 1): ["231", "213", "321", "123", "312", "132"],
}


def reference_permutation(parts):
    """Indices into the lexicographic tabloid list that give the reference order."""
    words = ["".join(map(str, t.yamanouchi)) for t in enumerate_tabloids(Partition(parts))]
    return [words.index(w) for w in REFERENCE_ORDER[tuple(parts)]]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
