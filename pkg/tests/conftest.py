import os

import pytest

_LINES = []


def record(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    _LINES.append(line)
    print(line, flush=True)


@pytest.fixture(scope="session", autouse=True)
def acceptance_report():
    yield
    if _LINES:
        path = os.path.join(os.path.dirname(__file__), "_acceptance_report.txt")
        with open(path, "w") as fh:
            fh.write("\n".join(_LINES) + "\n")
