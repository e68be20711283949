"""Seeded instance generators shared by the test modules."""

from __future__ import annotations

import math

import numpy as np

from bjortho.norms import NormSpec, Vec, norming_functional

P_VALUES = (1.0, 1.5, 2.0, 3.0, math.inf)
DIMS = (2, 3, 5)

# zoomed grid settings for the vector oracle; exact for convex objectives
ORACLE_POINTS = 2001
ORACLE_ZOOM = 3


def gaussian_pair(rng: np.random.Generator, space: NormSpec) -> tuple[Vec, Vec]:
    return Vec(rng.standard_normal(space.dim), space), Vec(rng.standard_normal(space.dim), space)


def orthogonal_pair(rng: np.random.Generator, space: NormSpec, jitter: float = 0.0) -> tuple[Vec, Vec]:
    """A pair with x BJ-orthogonal to y, optionally pushed off by ``jitter``.

    l_1 uses a coordinate vector x, l_inf a vector with two tied extreme
    coordinates, smooth norms the kernel of the norming functional.
    """
    n = space.dim
    y = rng.standard_normal(n)
    if space.p == 1.0:
        k = int(rng.integers(n))
        x = np.zeros(n)
        x[k] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        rest = np.abs(np.delete(y, k)).sum()
        y[k] = rng.uniform(-1.0, 1.0) * rest
    elif math.isinf(space.p):
        k1, k2 = rng.choice(n, size=2, replace=False)
        x = rng.uniform(-0.5, 0.5, n)
        x[k1], x[k2] = rng.choice([-1.0, 1.0]), rng.choice([-1.0, 1.0])
        # opposite signs of y against x at the two peaks keep both sides up
        y[k1] = abs(y[k1]) * np.sign(x[k1])
        y[k2] = -abs(y[k2]) * np.sign(x[k2])
    else:
        x = rng.standard_normal(n)
        f = norming_functional(Vec(x, space)).coords
        y = y - (f @ y) / (f @ x) * x
    y = y + jitter * x
    return Vec(x, space), Vec(y, space)


def mixed_pair(rng: np.random.Generator, i: int) -> tuple[Vec, Vec, float]:
    """Instance ``i`` of the mixed corpus: p and dim cycle, every third pair
    is structured so that Holds outcomes are well represented."""
    space = NormSpec(DIMS[(i // len(P_VALUES)) % len(DIMS)], P_VALUES[i % len(P_VALUES)])
    eps = float(rng.uniform(0.0, 0.95))
    kind = i % 3
    if kind == 0:
        x, y = gaussian_pair(rng, space)
    elif kind == 1:
        x, y = orthogonal_pair(rng, space)
    else:
        x, y = orthogonal_pair(rng, space, jitter=float(rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-3, -1)))
    return x, y, eps
