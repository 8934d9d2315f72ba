import itertools
import sys

import numpy as np
import pytest

from codedmir.combinatorics import SystemParams, user_set
from codedmir.placement import SubpacketId

FILES = "ABCDE"

# worked-example UL signals, x^k(S) for each transmission S, files A..E = 1..5
K3_UL_SIGNALS = {
    (1, 2): ["B1", "A2", "-B3-A3"],
    (1, 3): ["C1", "-C2-A2", "A3"],
}

K5_UL_SIGNALS = {
    (1, 2, 3): ["B13", "C12", "A23", "-B34-A34-A24", "-B35-A35-A25"],
    (1, 2, 4): ["B14", "D12", "-D23-D13-A23", "A24", "-B45-A45-A25"],
    (1, 2, 5): ["B15", "E12", "-E23-E13-A23", "-E24-E14-A24", "A25"],
    (1, 3, 4): ["C14", "-C24-D12-C12", "D13", "A34", "-C45-A45-A35"],
    (1, 3, 5): ["C15", "-C25-E12-C12", "E13", "-E34-E14-A34", "A35"],
    (1, 4, 5): ["D15", "-D25-E12-D12", "-D35-E13-D13", "E14", "A45"],
}


def parse_cell(cell: str) -> dict:
    """``"-B34-A34"`` -> {SubpacketId: sign}, q is always 1 in these examples."""
    out = {}
    for sign, name in zip(*[iter(_tokens(cell))] * 2):
        sid = SubpacketId(FILES.index(name[0]) + 1, user_set(int(c) for c in name[1:]), 1)
        out[sid] = sign
    return out


def _tokens(cell):
    cell = cell if cell[0] in "+-" else "+" + cell
    parts = []
    for ch in cell:
        if ch in "+-":
            parts += [1 if ch == "+" else -1, ""]
        else:
            parts[-1] += ch
    return parts


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CONFIGS = [(3, 1, 2), (4, 1, 2), (5, 2, 3), (6, 2, 3), (7, 3, 3)]


def params_of(K, t, L, **kw):
    return SystemParams(K=K, L=L, t=t, **kw)


def all_subsets(K, r):
    return [tuple(c) for c in itertools.combinations(range(1, K + 1), r)]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
