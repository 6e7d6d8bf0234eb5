"""Shared helpers for the test suite."""

import numpy as np

from multipot import GridFunction


def spike_tuple(grid, m, seed):
    """Tuples of smooth positive functions with coincident peaks on a small
    baseline.  Their triple-average maximal function spans several dyadic
    thresholds and is stable under grid refinement, which makes them good
    inputs for decomposition tests.
    """
    rng = np.random.default_rng(seed)
    x = grid.centers_1d()
    c = rng.uniform(-grid.L / 2, grid.L / 2)
    out = []
    for _ in range(m):
        amp = rng.uniform(3.0, 8.0)
        width = rng.uniform(0.04, 0.10) * grid.L
        base = rng.uniform(0.01, 0.03)
        vals = base + amp * np.exp(-(((x - c) / width) ** 2))
        out.append(GridFunction(grid, vals, nonneg=True))
    return out
