import dataclasses

import numpy as np
import pytest


class CallCounter:
    """Wraps a TestFunction's vectorised body and counts evaluated points."""

    def __init__(self, f):
        self.points = 0
        inner = f.func

        def counted(pts):
            self.points += len(pts)
            return inner(pts)

        self.f = dataclasses.replace(f, func=counted)


@pytest.fixture
def counter():
    return CallCounter


def midpoint_grid_integral(f, per_axis):
    """Tensor midpoint rule; used as a dense-grid oracle for d <= 2."""
    x = (np.arange(per_axis) + 0.5) / per_axis
    if f.d == 1:
        return float(np.mean(f(x.reshape(-1, 1))))
    xx, yy = np.meshgrid(x, x, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return float(np.mean(f(pts)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
