import numpy as np
import pytest

from levelsync.level import SEGMENT_HEIGHT, SEGMENT_WIDTH, Segment, TileKind, flat_segment, parse_level

SKY = "-" * SEGMENT_WIDTH


def seg(*rows: str) -> Segment:
    """Segment from its bottom rows; rows above are sky."""
    rows = [SKY] * (SEGMENT_HEIGHT - len(rows)) + list(rows)
    return parse_level("\n".join(rows) + "\n")[0]


def with_gap(base: Segment, start: int, width: int) -> Segment:
    g = base.grid.copy()
    g[:, start : start + width] = TileKind.EMPTY
    return Segment(g)


@pytest.fixture
def flat():
    return flat_segment()


@pytest.fixture
def enemy_gap_segment():
    return seg(
        "-----E--------E-------------",
        "XXXXXXXXX---XXXXXXXXXXXXXXXX",
        "XXXXXXXXX---XXXXXXXXXXXXXXXX",
    )


@pytest.fixture
def pipe_segment():
    return seg(
        "----------SSS---------------",
        "----------------------------",
        "--------------------T-------",
        "-----o--------------t-------",
        "XXXXXXXXXXXXXXXXXXXXXXXXXXXX",
        "XXXXXXXXXXXXXXXXXXXXXXXXXXXX",
    )


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
