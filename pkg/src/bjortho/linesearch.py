"""Golden-section minimization of convex functions of one real variable."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

# shrink ratio of the golden-section interval per evaluation
RHO = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_TOL = 1e-10


class EvaluationError(ArithmeticError):
    """The objective returned a non-finite value."""


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("bracket endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class MinResult:
    argmin: float
    minval: float
    evaluations: int


def evaluation_bound(bracket: Bracket, tol: float) -> int:
    """Upper bound on the number of calls made by :func:`minimize_convex`."""
    if bracket.width <= tol:
        return 2
    return math.ceil(math.log(bracket.width / tol) / math.log(1.0 / RHO)) + 2


def _checked(f: Callable[[float], float]):
    def g(t: float) -> float:
        v = float(f(t))
        if not math.isfinite(v):
            raise EvaluationError(f"objective is not finite at {t!r}: {v!r}")
        return v

    return g


def minimize_convex(
    f: Callable[[float], float],
    bracket: Bracket | tuple[float, float],
    tol: float = DEFAULT_TOL,
) -> MinResult:
    """Minimize a convex ``f`` over ``bracket`` by golden-section search.

    The interval is shrunk until its width is at most ``tol``; the best
    evaluated point is returned. For flat minima any minimizing point may
    come back.
    """
    if not isinstance(bracket, Bracket):
        bracket = Bracket(*bracket)
    if not tol > 0:
        raise ValueError("tol must be positive")
    f = _checked(f)
    a, b = bracket.lo, bracket.hi
    if b - a <= tol:
        m = 0.5 * (a + b)
        fa, fm = f(a), f(m)
        return MinResult(a, fa, 2) if fa < fm else MinResult(m, fm, 2)

    c = b - RHO * (b - a)
    d = a + RHO * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    best_t, best_v = (c, fc) if fc <= fd else (d, fd)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - RHO * (b - a)
            fc = f(c)
            t, v = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + RHO * (b - a)
            fd = f(d)
            t, v = d, fd
        n += 1
        if v < best_v:
            best_t, best_v = t, v
    return MinResult(best_t, best_v, n)


def minimize_convex_onesided(
    f: Callable[[float], float],
    side: Literal["nonnegative", "nonpositive"],
    bracket_extent: float,
    tol: float = DEFAULT_TOL,
) -> MinResult:
    """Infimum of a convex ``f`` over ``[0, extent]`` or ``[-extent, 0]``.

    The caller guarantees that ``f`` does not decrease beyond the extent.
    ``f(0)`` is always evaluated, so a minimum at the origin is exact.
    """
    if not bracket_extent >= 0:
        raise ValueError("bracket_extent must be nonnegative")
    if side == "nonnegative":
        br = Bracket(0.0, bracket_extent)
    elif side == "nonpositive":
        br = Bracket(-bracket_extent, 0.0)
    else:
        raise ValueError(f"unknown side {side!r}")
    f0 = _checked(f)(0.0)
    if bracket_extent == 0:
        return MinResult(0.0, f0, 1)
    res = minimize_convex(f, br, tol)
    if f0 <= res.minval:
        return MinResult(0.0, f0, res.evaluations + 1)
    return MinResult(res.argmin, res.minval, res.evaluations + 1)
