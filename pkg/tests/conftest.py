import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", {})
    if mod is None:
        return
    terminalreporter.section("acceptance criteria")
    for number in range(1, 12):
        ok, detail = verdicts.get(number, (False, "did not report a verdict"))
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
