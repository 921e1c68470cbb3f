import math

import pytest

from eraser_superres.bench import four_block_config
from eraser_superres.dsl import four_block_document

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def bench():
    """Four-block layout with the printed wave-plate phases (both pi/4)."""
    return four_block_config(math.pi / 4, math.pi / 4)


@pytest.fixture
def bench_canonical():
    return four_block_config(math.pi / 4, 3 * math.pi / 4)


@pytest.fixture
def bench_file(tmp_path):
    path = tmp_path / "bench.bench"
    path.write_text(four_block_document(), encoding="utf-8")
    return path


@pytest.fixture
def criterion(request):
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def check(num, text, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {text}"
        if detail:
            line += f" ({detail})"
        lines.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
