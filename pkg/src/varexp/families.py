"""Seeded test-function families for boundedness experiments."""

from __future__ import annotations

import numpy as np

from .space import UniformGrid1D

TRIG_DEGREES = (1, 2, 3, 4, 6, 8, 12, 16)
DYADIC_CELLS = ((1, 0), (2, 1), (3, 5), (4, 0), (5, 17), (6, 40))


def standard_family(space, seed=0):
    """Twenty functions laid out on the normalized position ``u`` of the space.

    Eight trigonometric polynomials of degree at most 16, six dyadic
    indicators and six random band-limited functions (degree 16) drawn from
    ``numpy.random.default_rng(seed)``.
    """
    u = space.param
    names, funcs = [], []
    for d in TRIG_DEGREES:
        names.append(f"trig{d}")
        funcs.append(np.cos(2 * np.pi * d * u) + 0.5 * np.sin(2 * np.pi * (d // 2 + 1) * u) + 0.25)
    for m, j in DYADIC_CELLS:
        names.append(f"ind{m}_{j}")
        funcs.append(((u >= j / 2**m) & (u < (j + 1) / 2**m)).astype(float))
    rng = np.random.default_rng(seed)
    k = np.arange(17)
    for r in range(6):
        a = rng.standard_normal(17) / (1 + k)
        b = rng.standard_normal(17) / (1 + k)
        names.append(f"rand{r}")
        arg = 2 * np.pi * np.outer(k, u)
        funcs.append(a @ np.cos(arg) + b @ np.sin(arg))
    return names, np.array(funcs)


def probe_family(space, rho, p, anchors, depth=14):
    """Functions adapted to a weight: ``rho^{-p'} 1_{d(x, a) < 2^-j}`` at each anchor.

    These concentrate where the dual weight is large, which is where weighted
    bounds fail first. ``anchors`` are coordinates (grids) or point ids.
    """
    p = np.broadcast_to(np.asarray(p, dtype=float), (space.n,))
    sigma = np.asarray(rho, dtype=float) ** (-p / (p - 1))
    names, funcs = ["ones"], [np.ones(space.n)]
    for a in anchors:
        if isinstance(space, UniformGrid1D) and not isinstance(a, (int, np.integer)):
            d = space.distances_to_coordinate(a)
            side = space.nodes > a
        else:
            d = space.distances_from(int(a))
            side = np.arange(space.n) > int(a)
        names.append(f"half@{a}")
        funcs.append(side.astype(float))
        for j in range(depth):
            names.append(f"probe@{a}_{j}")
            funcs.append(sigma * (d < 2.0**-j))
    return names, np.array(funcs)


def nonzero(names, funcs):
    keep = [i for i in range(len(names)) if np.any(funcs[i] != 0)]
    return [names[i] for i in keep], funcs[keep]
