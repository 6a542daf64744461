import pytest
from hypothesis import settings

# oracle-backed properties vary a lot in cost per example; timing is not what they test
settings.register_profile("repo", deadline=None)
settings.load_profile("repo")

_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion("3", ok, "detail")`` then assert."""

    def record(label, ok, detail=""):
        line = f"CRITERION {label}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _RESULTS[label] = (bool(ok), detail)
        assert ok, line

    return record


def _key(label):
    head = "".join(ch for ch in label if ch.isdigit())
    return int(head or 0), label


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=_key):
        ok, detail = _RESULTS[label]
        terminalreporter.write_line(f"CRITERION {label:>3}: {'PASS' if ok else 'FAIL'}  {detail}")
