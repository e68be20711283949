"""Birkhoff-James orthogonality, its one-sided cones and the two approximate
variants for vectors of a (weighted) l_p space.

Every predicate reduces to "a convex function of lambda stays above a
threshold" and is decided by golden-section minimization over a bracket
that provably contains every violation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .linesearch import DEFAULT_TOL, minimize_convex
from .norms import NormSpec, SpaceMismatch, UnsupportedNorm, Vec, inner, norm, unweighted_norm

MARGINAL_BAND = 1e-7
# below this (in margin units) a minimum is indistinguishable from the threshold
ROUNDOFF = 1e-12
# Richardson step for one-sided slopes, relative to the natural lambda scale
SLOPE_STEP = 1e-5


class Outcome(enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    MARGINAL = "Marginal"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Verdict:
    """Three-valued outcome of a predicate.

    ``margin`` is the signed, normalized distance from the threshold: the
    normalized minimum of the tested inequality when it is violated, and the
    normalized one-sided slope at lambda = 0 when the inequality is tight
    there (every Birkhoff-James type condition is tight at lambda = 0).
    """

    outcome: Outcome
    margin: float
    witness_lambda: float | None = None
    witness_vec: Vec | None = None
    approximate: bool = False

    @classmethod
    def from_margin(cls, margin: float, **kw) -> Verdict:
        return cls(classify(margin), float(margin), **kw)

    @property
    def satisfied(self) -> bool:
        """True unless the inequality is violated by more than the band."""
        return self.outcome is not Outcome.FAILS

    @property
    def marginal(self) -> bool:
        return self.outcome is Outcome.MARGINAL


def classify(margin: float) -> Outcome:
    if abs(margin) <= MARGINAL_BAND:
        return Outcome.MARGINAL
    return Outcome.HOLDS if margin > 0 else Outcome.FAILS


def all_of(*verdicts: Verdict) -> Verdict:
    v = min(verdicts, key=lambda v: v.margin)
    return replace(v, approximate=any(u.approximate for u in verdicts))


def any_of(*verdicts: Verdict) -> Verdict:
    v = max(verdicts, key=lambda v: v.margin)
    return replace(v, approximate=any(u.approximate for u in verdicts))


TRIVIAL = Verdict(Outcome.HOLDS, math.inf)


def check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {eps}")
    return eps


def one_sided_slope(h: Callable[[float], float], direction: int, step: float, h0: float) -> float:
    """Richardson estimate of lim_{t->0+} (h(direction*t) - h(0)) / t."""
    s1 = (h(direction * step) - h0) / step
    s2 = (h(2 * direction * step) - h0) / (2 * step)
    return 2.0 * s1 - s2


def convex_check(
    h: Callable[[float], float],
    brackets: Sequence[tuple[float, float]],
    scale: float,
    slope_scale: float,
    lam_scale: float,
    tol: float = DEFAULT_TOL,
    approximate: bool = False,
) -> Verdict:
    """Decide ``h(lam) >= 0`` on the union of ``brackets``.

    ``h`` must be convex on each bracket. Searching happens in the
    normalized variable lam / lam_scale so that ``tol`` is relative.
    """
    best_t, best_v = 0.0, math.inf
    for lo, hi in brackets:
        if hi <= lo:
            continue
        r = minimize_convex(lambda mu: h(mu * lam_scale), (lo / lam_scale, hi / lam_scale), tol)
        if r.minval < best_v:
            best_t, best_v = r.argmin * lam_scale, r.minval
    zero_in = any(lo <= 0.0 <= hi for lo, hi in brackets)
    h0 = math.nan
    if zero_in:
        h0 = float(h(0.0))
        if h0 <= best_v:
            best_t, best_v = 0.0, h0
    m0 = best_v / scale
    if abs(m0) > ROUNDOFF or not zero_in or h0 / scale > ROUNDOFF:
        margin = m0
    else:
        # tight at lam = 0: measure how fast h leaves the threshold
        step = SLOPE_STEP * lam_scale
        slopes = []
        if any(hi > 0 for _, hi in brackets):
            slopes.append(one_sided_slope(h, 1, step, h0))
        if any(lo < 0 for lo, _ in brackets):
            slopes.append(one_sided_slope(h, -1, step, h0))
        margin = max(0.0, min(slopes) / slope_scale)
    return Verdict.from_margin(margin, witness_lambda=best_t, approximate=approximate)


def _line_norm(x: Vec, y: Vec) -> Callable[[float], float]:
    """lam -> ||x + lam y||, specialised for speed."""
    sp = x.space
    d = sp.scale_factors
    xc, yc = x.coords * d, y.coords * d
    p = sp.p
    if p == 2.0:
        return lambda t: math.sqrt(float(np.dot(v := xc + t * yc, v)))
    if p == 1.0:
        return lambda t: float(np.abs(xc + t * yc).sum())
    if math.isinf(p):
        return lambda t: float(np.abs(xc + t * yc).max())
    return lambda t: unweighted_norm(xc + t * yc, p)


def _prepare(x: Vec, y: Vec):
    if x.space != y.space:
        raise SpaceMismatch(f"vectors live in different spaces: {x.space} vs {y.space}")
    return norm(x), norm(y)


def _bj_family(nx, ny, phi, brackets, threshold, tol, approximate=False) -> Verdict:
    """Test phi(lam) >= threshold over brackets given in lambda units."""
    return convex_check(
        lambda t: phi(t) - threshold,
        brackets,
        scale=max(nx, 1.0),
        slope_scale=ny,
        lam_scale=nx / ny,
        tol=tol,
        approximate=approximate,
    )


def _chmielinski_family(nx, ny, phi, eps, ext, tol, approximate=False, sides=(1, -1)) -> Verdict:
    """Test phi^2 >= nx^2 - 2 eps nx ny |lam| on the chosen half-lines."""
    c = 2.0 * eps * nx * ny
    nx2 = nx * nx
    return convex_check(
        lambda t: phi(t) ** 2 - nx2 + c * abs(t),
        [(0.0, ext) if s > 0 else (-ext, 0.0) for s in sides],
        scale=max(nx2, 1.0),
        slope_scale=2.0 * nx * ny,
        lam_scale=nx / ny,
        tol=tol,
        approximate=approximate,
    )


# Search bounds. Outside these lambda ranges the reverse triangle
# inequality already forces each defining inequality.
def bj_search_bound(nx: float, ny: float) -> float:
    """|lam| ||y|| >= 2||x||  implies  ||x + lam y|| >= ||x||."""
    return 2.0 * nx / ny


def dragomir_search_bound(nx: float, ny: float, eps: float) -> float:
    """|lam| ||y|| >= (1+s)||x||  implies  ||x + lam y|| >= s||x||, s = sqrt(1-eps^2)."""
    return (1.0 + math.sqrt(1.0 - eps * eps)) * nx / ny


def chmielinski_search_bound(nx: float, ny: float, eps: float) -> float:
    """t = |lam| ||y|| >= 2(1-eps)||x||  implies  (t - ||x||)^2 >= ||x||^2 - 2 eps ||x|| t."""
    return 2.0 * (1.0 - eps) * nx / ny


def is_bj_orthogonal(x: Vec, y: Vec, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        return TRIVIAL
    e = bj_search_bound(nx, ny) * bound_factor
    return _bj_family(nx, ny, _line_norm(x, y), [(-e, e)], nx, tol)


def in_plus_cone(x: Vec, y: Vec, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    """Test y in x^+, i.e. ||x + lam y|| >= ||x|| for every lam >= 0."""
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        return TRIVIAL
    e = bj_search_bound(nx, ny) * bound_factor
    return _bj_family(nx, ny, _line_norm(x, y), [(0.0, e)], nx, tol)


def in_minus_cone(x: Vec, y: Vec, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    """Test y in x^-, i.e. ||x + lam y|| >= ||x|| for every lam <= 0."""
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        return TRIVIAL
    e = bj_search_bound(nx, ny) * bound_factor
    return _bj_family(nx, ny, _line_norm(x, y), [(-e, 0.0)], nx, tol)


def in_plus_cone_eps(x: Vec, y: Vec, eps: float, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    eps = check_eps(eps)
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        return TRIVIAL
    e = dragomir_search_bound(nx, ny, eps) * bound_factor
    s = math.sqrt(1.0 - eps * eps)
    return _bj_family(nx, ny, _line_norm(x, y), [(0.0, e)], s * nx, tol)


def in_minus_cone_eps(x: Vec, y: Vec, eps: float, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    eps = check_eps(eps)
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        return TRIVIAL
    e = dragomir_search_bound(nx, ny, eps) * bound_factor
    s = math.sqrt(1.0 - eps * eps)
    return _bj_family(nx, ny, _line_norm(x, y), [(-e, 0.0)], s * nx, tol)


def is_dragomir_orthogonal(x: Vec, y: Vec, eps: float, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    """||x + lam y|| >= sqrt(1 - eps^2) ||x|| for every real lam."""
    eps = check_eps(eps)
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        return TRIVIAL
    e = dragomir_search_bound(nx, ny, eps) * bound_factor
    s = math.sqrt(1.0 - eps * eps)
    return _bj_family(nx, ny, _line_norm(x, y), [(-e, e)], s * nx, tol)


def is_chmielinski_orthogonal(x: Vec, y: Vec, eps: float, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    """||x + lam y||^2 >= ||x||^2 - 2 eps ||x|| ||lam y|| for every real lam."""
    eps = check_eps(eps)
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        return TRIVIAL
    e = chmielinski_search_bound(nx, ny, eps) * bound_factor
    return _chmielinski_family(nx, ny, _line_norm(x, y), eps, e, tol)


def is_ip_approx_orthogonal(x: Vec, y: Vec, eps: float) -> Verdict:
    """|<x, y>| <= eps ||x|| ||y||  (p = 2 only)."""
    eps = check_eps(eps)
    if not x.space.is_hilbert:
        raise UnsupportedNorm(f"no inner product on {x.space}")
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        return TRIVIAL
    return Verdict.from_margin((eps * nx * ny - abs(inner(x, y))) / max(nx * ny, 1.0))


PREDICATES = {
    "bj": lambda x, y, eps: is_bj_orthogonal(x, y),
    "plus": lambda x, y, eps: in_plus_cone(x, y),
    "minus": lambda x, y, eps: in_minus_cone(x, y),
    "plus_eps": in_plus_cone_eps,
    "minus_eps": in_minus_cone_eps,
    "dragomir": is_dragomir_orthogonal,
    "chmielinski": is_chmielinski_orthogonal,
    "ip": is_ip_approx_orthogonal,
}


def evaluate(kind: str, x: Vec, y: Vec, eps: float = 0.0) -> Verdict:
    try:
        fn = PREDICATES[kind]
    except KeyError:
        raise ValueError(f"unknown predicate {kind!r}") from None
    return fn(x, y, eps)


# --- witness decomposition -------------------------------------------------

STAGE2_GRID = 201


def _witness_ok(x: Vec, z: Vec, y: Vec, eps: float, ny: float) -> bool:
    return is_bj_orthogonal(x, z).satisfied and norm(z - y) <= eps * ny + MARGINAL_BAND * max(ny, 1.0)


def _cone_balance(x: Vec, y: Vec, t: float) -> float:
    z = y + t * x
    return min(in_plus_cone(x, z).margin, in_minus_cone(x, z).margin)


def _stage1(x: Vec, y: Vec, eps: float, nx: float, ny: float) -> Vec | None:
    # one-sided slopes shift linearly along y + t x:
    #   D+(x; y + t x) = D+(x; y) + t||x||,  D-(x; y + t x) = D-(x; y) - t||x||
    phi = _line_norm(x, y)
    step = SLOPE_STEP * nx / ny
    sp = one_sided_slope(phi, 1, step, nx)
    sm = one_sided_slope(phi, -1, step, nx)
    tmax = eps * ny / nx
    t = min(max((sm - sp) / (2.0 * nx), -tmax), tmax)
    z = y + t * x
    if _witness_ok(x, z, y, eps, ny):
        return z
    if tmax == 0:
        return None
    ts = np.linspace(-tmax, tmax, STAGE2_GRID)
    bal = np.array([_cone_balance(x, y, float(s)) for s in ts])
    for i in np.argsort(-bal, kind="stable")[:5]:
        z = y + float(ts[i]) * x
        if _witness_ok(x, z, y, eps, ny):
            return z
    return None


def _bj_score_batch(x: Vec, zs: np.ndarray, nx: float, mu: np.ndarray) -> np.ndarray:
    """min over a lambda grid of ||x + lam z|| - ||x|| for each row z."""
    sp = x.space
    nz = np.atleast_1d(sp.norm_array(zs))
    out = np.empty(len(zs))
    for a in range(0, len(zs), 1024):
        b = min(a + 1024, len(zs))
        lam = mu[None, :] * (nx / np.where(nz[a:b] > 0, nz[a:b], 1.0))[:, None]
        pts = x.coords[None, None, :] + lam[:, :, None] * zs[a:b, None, :]
        out[a:b] = np.asarray(sp.norm_array(pts)).min(axis=1) - nx
    return out


def _stage2(x: Vec, y: Vec, eps: float, nx: float, ny: float) -> Vec | None:
    r = 2.0 * eps * ny / min(nx, ny)
    if r == 0:
        return None
    sp = x.space
    al = np.linspace(-r, r, STAGE2_GRID)
    be = np.linspace(1.0 - r, 1.0 + r, STAGE2_GRID)
    A, B = np.meshgrid(al, be, indexing="ij")
    zs = A.reshape(-1, 1) * x.coords + B.reshape(-1, 1) * y.coords
    dist = np.atleast_1d(sp.norm_array(zs - y.coords))
    feasible = dist <= eps * ny
    if not feasible.any():
        return None
    idx = np.flatnonzero(feasible)
    mu = np.linspace(-2.0, 2.0, 81)
    score = _bj_score_batch(x, zs[idx], nx, mu)
    cell = al[1] - al[0]

    def exact_score(a: float, b: float) -> float:
        z = Vec(a * x.coords + b * y.coords, sp)
        if norm(z - y) > eps * ny:
            return -math.inf
        return is_bj_orthogonal(x, z).margin

    for j in np.argsort(-score, kind="stable")[:3]:
        i = idx[j]
        a0, b0 = float(A.reshape(-1)[i]), float(B.reshape(-1)[i])
        # coordinate-wise golden-section refinement within the best cell
        for _ in range(2):
            ra = minimize_convex(lambda a: -max(exact_score(a, b0), -1e3), (a0 - cell, a0 + cell), 1e-9 * max(r, 1.0))
            if -ra.minval >= exact_score(a0, b0):
                a0 = ra.argmin
            rb = minimize_convex(lambda b: -max(exact_score(a0, b), -1e3), (b0 - cell, b0 + cell), 1e-9 * max(r, 1.0))
            if -rb.minval >= exact_score(a0, b0):
                b0 = rb.argmin
        z = Vec(a0 * x.coords + b0 * y.coords, sp)
        if _witness_ok(x, z, y, eps, ny):
            return z
    return None


@dataclass(frozen=True)
class Witness:
    z: Vec
    stage: int


def find_bj_witness_info(x: Vec, y: Vec, eps: float) -> Witness | None:
    eps = check_eps(eps)
    nx, ny = _prepare(x, y)
    if nx == 0 or ny == 0:
        raise ValueError("witness search needs nonzero x and y")
    z = _stage1(x, y, eps, nx, ny)
    if z is not None:
        return Witness(z, 1)
    z = _stage2(x, y, eps, nx, ny)
    if z is not None:
        return Witness(z, 2)
    return None


def find_bj_witness(x: Vec, y: Vec, eps: float) -> Vec | None:
    """Some z in span{x, y} with x BJ-orthogonal to z and ||z - y|| <= eps||y||."""
    w = find_bj_witness_info(x, y, eps)
    return None if w is None else w.z

