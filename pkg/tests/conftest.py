import random

import pytest
from hypothesis import settings

from flagkneser.graph import build_graph

# timings swing on a loaded single-core box, so no per-example deadline
settings.register_profile("repo", deadline=None, max_examples=60)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def graphs():
    cache = {}

    def get(n, T):
        key = (n, tuple(T))
        if key not in cache:
            cache[key] = build_graph(n, T)
        return cache[key]

    return get


@pytest.fixture
def rng():
    return random.Random(20240611)


_GATE_LINES: list[tuple[str, str]] = []


@pytest.fixture
def gate(request):
    """Record one status line per acceptance criterion; echoed live and in the summary."""
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def record(label: str, status: str, detail: str) -> None:
        text = f"criterion {label:<4} {status:<8} {detail}"
        _GATE_LINES.append((label, text))
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(text)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _GATE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, text in sorted(_GATE_LINES, key=lambda x: (int(x[0].rstrip("abcdefghijklmnopqrstuvwxyz")), x[0])):
        terminalreporter.write_line(text)
