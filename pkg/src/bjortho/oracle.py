"""Brute-force reference evaluations.

Nothing here reuses the golden-section kernel, the search bounds or
the exact operator-norm formulas; only raw norm evaluation is shared with
the fast paths.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .norms import Vec, sample_sphere_array
from .op_space import Op
from .vec_ortho import TRIVIAL, Verdict, check_eps

# lambda range of every oracle grid, in units of ||x|| / ||y||; wider than
# any of the fast-path search bounds on purpose
ORACLE_RANGE = 4.0
DEFAULT_POINTS = 10**6
CHUNK = 1 << 16


def _grid_min(hv: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, points: int, zoom: int = 0) -> tuple[float, float]:
    """Uniform-grid minimum; each zoom round re-grids the two cells around the best point.

    Zooming is only sound for convex ``hv``.
    """
    if points < 2:
        raise ValueError("need at least two grid points")
    best_t, best_v = math.nan, math.inf
    a, b = lo, hi
    for _ in range(zoom + 1):
        ts = np.linspace(a, b, points)
        vals = np.concatenate([hv(ts[k : k + CHUNK]) for k in range(0, len(ts), CHUNK)])
        i = int(np.argmin(vals))
        if vals[i] < best_v:
            best_t, best_v = float(ts[i]), float(vals[i])
        a, b = ts[max(i - 1, 0)], ts[min(i + 1, points - 1)]
        if b <= a:
            break
    return best_t, best_v


def _line(x: Vec, y: Vec) -> Callable[[np.ndarray], np.ndarray]:
    sp = x.space
    return lambda ts: np.atleast_1d(sp.norm_array(x.coords[None, :] + ts[:, None] * y.coords[None, :]))


def grid_min_lambda(x: Vec, y: Vec, lo: float, hi: float, points: int = DEFAULT_POINTS, zoom: int = 0) -> tuple[float, float]:
    """(argmin, minval) of lam -> ||x + lam y|| on a uniform grid over [lo, hi]."""
    return _grid_min(_line(x, y), lo, hi, points, zoom)


ORACLE_KINDS = ("bj", "plus", "minus", "plus_eps", "minus_eps", "dragomir", "chmielinski")


# forward-difference step for the slope at a tight lambda = 0, relative to R
SLOPE_H = 1e-7
TIGHT = 1e-12


def _verdict_from_grid(h, sides, R, scale, slope_scale, points, zoom, approximate=False) -> Verdict:
    h0 = float(h(np.zeros(1))[0])
    best_t, best_v = 0.0, h0
    for lo, hi in sides:
        t, v = _grid_min(h, lo * R, hi * R, points, zoom)
        if v < best_v:
            best_t, best_v = t, v
    margin = best_v / scale
    if abs(margin) <= TIGHT and h0 / scale <= TIGHT:
        # every side is tight at 0: report how fast the inequality opens up
        d = SLOPE_H * R
        slopes = [(float(h(np.array([sgn * d]))[0]) - h0) / d for sgn in _directions(sides)]
        margin = max(0.0, min(slopes) / slope_scale)
    return Verdict.from_margin(margin, witness_lambda=best_t, approximate=approximate)


def _directions(sides) -> list[int]:
    out = []
    if any(hi > 0 for _, hi in sides):
        out.append(1)
    if any(lo < 0 for lo, _ in sides):
        out.append(-1)
    return out


def oracle_predicate(kind: str, x: Vec, y: Vec, eps: float = 0.0, points: int = DEFAULT_POINTS, zoom: int = 0) -> Verdict:
    """Grid evaluation of the defining inequality of ``kind``.

    The margin is the normalized grid minimum of (left side - threshold).
    When that minimum is zero because the inequality is tight at lambda = 0,
    the normalized one-sided difference quotient there is reported instead.
    Zooming (``zoom`` > 0) is sound because every tested function is convex
    on each side of 0.
    """
    if kind not in ORACLE_KINDS:
        raise ValueError(f"unknown predicate {kind!r}")
    eps = check_eps(eps)
    nx = float(x.space.norm_array(x.coords))
    ny = float(y.space.norm_array(y.coords))
    if nx == 0 or ny == 0:
        return TRIVIAL
    line = _line(x, y)
    return _grid_verdict(kind, line, nx, ny, eps, points, zoom)


def _grid_verdict(kind, line, nx, ny, eps, points, zoom, approximate=False) -> Verdict:
    R = ORACLE_RANGE * nx / ny
    s = math.sqrt(1.0 - eps * eps)
    both, pos, neg = [(-1.0, 1.0)], [(0.0, 1.0)], [(-1.0, 0.0)]
    if kind == "chmielinski":
        h = lambda ts: line(ts) ** 2 - nx * nx + 2.0 * eps * nx * ny * np.abs(ts)
        return _verdict_from_grid(h, pos + neg, R, max(nx * nx, 1.0), 2.0 * nx * ny, points, zoom, approximate)
    thr = nx if kind in ("bj", "plus", "minus") else s * nx
    sides = {"bj": both, "dragomir": both, "plus": pos, "plus_eps": pos, "minus": neg, "minus_eps": neg}[kind]
    return _verdict_from_grid(lambda ts: line(ts) - thr, sides, R, max(nx, 1.0), ny, points, zoom, approximate)


# --- operators ---------------------------------------------------------------


def _compass_ascent(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    step: float = 0.1,
    min_step: float = 1e-12,
    max_iter: int = 10_000,
) -> tuple[float, np.ndarray]:
    """Coordinate pattern search maximizing a scale-invariant ``f``."""
    n = len(x)
    dirs = np.vstack([np.eye(n), -np.eye(n)])
    x = x / np.max(np.abs(x))
    val = float(f(x[None, :])[0])
    for _ in range(max_iter):
        if step < min_step:
            break
        cand = x[None, :] + step * dirs
        vals = f(cand)
        j = int(np.argmax(vals))
        # demand a gain above roundoff, else noise keeps the loop alive
        if vals[j] > val * (1 + 4 * np.finfo(float).eps):
            x = cand[j] / np.max(np.abs(cand[j]))
            val = float(vals[j])
        else:
            step *= 0.5
    return val, x


def oracle_op_norm(T: Op, samples: int = 10**4, seed: int = 0, ascent_starts: int = 10) -> float:
    """Certified lower bound on ||T||: best sampled unit vector, then local ascent."""
    if T.is_zero():
        return 0.0
    dom, cod, M = T.domain, T.codomain, T.entries

    def ratio(X: np.ndarray) -> np.ndarray:
        nx = np.atleast_1d(dom.norm_array(X))
        ny = np.atleast_1d(cod.norm_array(X @ M.T))
        return np.where(nx > 0, ny / np.where(nx > 0, nx, 1.0), -np.inf)

    pts = sample_sphere_array(dom, samples, seed)
    vals = ratio(pts)
    order = np.argsort(-vals, kind="stable")[:ascent_starts]
    best = float(vals[order[0]])
    for i in order:
        v, _ = _compass_ascent(ratio, pts[i].copy())
        best = max(best, v)
    return best


def oracle_op_predicate(
    kind: str,
    T: Op,
    A: Op,
    eps: float = 0.0,
    lambda_points: int = 1001,
    samples: int = 10**4,
    seed: int = 0,
    zoom: int = 0,
    ascent_starts: int = 10,
) -> Verdict:
    """Grid over lambda with :func:`oracle_op_norm` at every grid point.

    Cost is lambda_points * (zoom + 1) sampled norm estimates.
    """
    if kind not in ("bj", "dragomir", "chmielinski"):
        raise ValueError(f"unknown operator predicate {kind!r}")
    eps = check_eps(eps)
    if T.domain != A.domain or T.codomain != A.codomain:
        raise ValueError("operators act between different spaces")
    est = lambda M: oracle_op_norm(Op(M, T.domain, T.codomain), samples, seed, ascent_starts)
    nT, nA = est(T.entries), est(A.entries)
    if nT == 0 or nA == 0:
        return TRIVIAL
    line = lambda ts: np.array([est(T.entries + t * A.entries) for t in ts])
    # lambda = 0 gives back nT exactly since the estimator is deterministic
    return _grid_verdict(kind, line, nT, nA, eps, lambda_points, zoom, approximate=True)
