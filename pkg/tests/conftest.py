import numpy as np
import pytest


def brute_edt(boundary):
    """Distance from every pixel to the nearest True pixel, all pairs."""
    pts = np.argwhere(boundary)
    rows, cols = np.indices(boundary.shape)
    d2 = (rows[..., None] - pts[:, 0]) ** 2 + (cols[..., None] - pts[:, 1]) ** 2
    return np.sqrt(d2.min(axis=-1))


def disk(shape, cy, cx, r):
    rows, cols = np.indices(shape)
    return (rows - cy) ** 2 + (cols - cx) ** 2 <= r * r


def circle_sdf(shape, cy, cx, r):
    """Analytic distance to a circle, positive inside."""
    rows, cols = np.indices(shape)
    return r - np.hypot(rows - cy, cols - cx)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def boundary_hausdorff(a, b):
    """Symmetric Hausdorff distance between the boundary pixels of two masks."""
    from hiatusseg.grid import distance_transform, mask_boundary

    ba, bb = mask_boundary(a), mask_boundary(b)
    return max(distance_transform(ba)[bb].max(), distance_transform(bb)[ba].max())


acceptance_key = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request, capsys):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(acceptance_key, [])

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
