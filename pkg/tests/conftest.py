from pathlib import Path

import pytest

from spokenud.eaf import load_conversation_store, load_speaker_store
from spokenud.pipeline import ConvertConfig

GOLDEN = Path(__file__).parent / "fixtures" / "golden"

ACCEPTANCE_LINES = []


@pytest.fixture
def golden_dir():
    return GOLDEN


@pytest.fixture
def golden_config():
    return ConvertConfig(
        speakers=load_speaker_store((GOLDEN / "speakers.json").read_bytes()),
        conversations=load_conversation_store((GOLDEN / "conversations.json").read_bytes()),
        langs=GOLDEN / "langs",
    )


@pytest.fixture
def golden_text():
    return (GOLDEN / "c01.conllu").read_text(encoding="utf-8")


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
