"""Shared fixtures: small graphs, seeded generators, temp graph files."""

import numpy as np
import pytest

from spherelangevin import GraphInstance


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" in nodeid and "::" in nodeid:
                rows.append((nodeid.split("::")[-1], outcome))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, outcome in sorted(rows):
            status = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line("%s %s" % (status, name))


C5_EDGES = ((1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (1, 5, 1.0))
K3_EDGES = ((1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0))


@pytest.fixture
def rng():
    """Fresh deterministic generator for a single test."""
    return np.random.default_rng(12345)


@pytest.fixture
def c5():
    """Unweighted 5-cycle; brute-force max cut is 4."""
    return GraphInstance(5, C5_EDGES)


@pytest.fixture
def k3():
    """Triangle; brute-force max cut is 2."""
    return GraphInstance(3, K3_EDGES)


def _graph_text(n, edges):
    lines = ["%d %d" % (n, len(edges))]
    for i, j, w in edges:
        if float(w) == int(w):
            lines.append("%d %d %d" % (i, j, int(w)))
        else:
            lines.append("%d %d %r" % (i, j, w))
    return "\n".join(lines) + "\n"


@pytest.fixture
def c5_file(tmp_path):
    p = tmp_path / "c5.txt"
    p.write_text(_graph_text(5, C5_EDGES))
    return p


@pytest.fixture
def k3_file(tmp_path):
    p = tmp_path / "k3.txt"
    p.write_text(_graph_text(3, K3_EDGES))
    return p
