import pytest


@pytest.fixture
def criterion(request):
    """Write one visible PASS/FAIL line per acceptance criterion, then assert."""
    reporter = request.config.pluginmanager.getplugin("terminalreporter")

    def emit(k: int, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}"
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        else:
            print(line)
        assert ok, line

    return emit
