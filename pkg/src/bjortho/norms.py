"""Weighted l_p norms on R^n: evaluation, inner products, norming functionals
and unit-sphere sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

INF = math.inf


class SpaceMismatch(ValueError):
    """Vectors or operators live in incompatible spaces."""


class UnsupportedNorm(ValueError):
    """The requested operation is not defined for this norm."""


def parse_p(token: str | float) -> float:
    """Parse a p value; accepts numbers and the token ``inf``."""
    if isinstance(token, str):
        t = token.strip().lower()
        if t in ("inf", "infinity", "oo"):
            return INF
        p = float(t)
    else:
        p = float(token)
    if not (p >= 1.0):
        raise ValueError(f"p must lie in [1, inf], got {token!r}")
    return p


def format_p(p: float) -> str:
    if math.isinf(p):
        return "inf"
    return f"{p:g}"


@dataclass(frozen=True)
class NormSpec:
    """A finite-dimensional real space with a (weighted) l_p norm.

    ``p`` is stored as a float where ``math.inf`` is the sup norm, never a
    large finite stand-in.
    """

    dim: int
    p: float = 2.0
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", parse_p(self.p))
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != self.dim:
                raise ValueError("weights must have length dim")
            if not all(v > 0 and math.isfinite(v) for v in w):
                raise ValueError("weights must be finite and positive")
            object.__setattr__(self, "weights", None if all(v == 1.0 for v in w) else w)

    @classmethod
    def lp(cls, p: float | str, dim: int) -> NormSpec:
        return cls(dim=dim, p=parse_p(p))

    @property
    def is_hilbert(self) -> bool:
        return self.p == 2.0

    @property
    def is_smooth(self) -> bool:
        return 1.0 < self.p < INF

    @property
    def w(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.dim)
        return np.asarray(self.weights)

    @property
    def scale_factors(self) -> np.ndarray:
        """Diagonal D with ||x|| = ||D x||_p (unweighted)."""
        if self.weights is None:
            return np.ones(self.dim)
        if math.isinf(self.p):
            return self.w
        return self.w ** (1.0 / self.p)

    def norm_array(self, a: np.ndarray) -> np.ndarray | float:
        """Norm along the last axis of a raw coordinate array."""
        a = np.asarray(a, dtype=float)
        if self.weights is not None:
            a = a * self.scale_factors
        return unweighted_norm(a, self.p)

    def vec(self, coords: Sequence[float] | np.ndarray) -> Vec:
        return Vec(coords, self)

    def __str__(self) -> str:
        s = f"l{format_p(self.p)}^{self.dim}"
        return s if self.weights is None else s + f"[w={list(self.weights)}]"


def _rescaled(a: np.ndarray, p: float) -> np.ndarray:
    # divide by the max entry so |x|^p neither overflows nor underflows
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    return safe[..., 0] * (((a / safe) ** p).sum(axis=-1) ** (1.0 / p))


def unweighted_norm(a: np.ndarray, p: float):
    a = np.abs(a)
    if p == 2.0:
        s = np.einsum("...i,...i->...", a, a)
        r = np.sqrt(s)
        # squares under/overflow outside this window; redo those rows rescaled
        off = (s < 1e-290) | (s > 1e290)
        if np.any(off):
            r = np.where(off, _rescaled(a, p), r)
    elif p == 1.0:
        r = a.sum(axis=-1)
    elif math.isinf(p):
        r = a.max(axis=-1)
    else:
        r = _rescaled(a, p)
    if np.ndim(r) == 0:
        return float(r)
    return r


@dataclass(frozen=True, eq=False)
class Vec:
    """Coordinates of a vector together with the space it belongs to."""

    coords: np.ndarray
    space: NormSpec = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape[0] != self.space.dim:
            raise SpaceMismatch(
                f"{c.shape[0]} coordinates given for a space of dimension {self.space.dim}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __add__(self, other: Vec) -> Vec:
        _same_space(self, other)
        return Vec(self.coords + other.coords, self.space)

    def __sub__(self, other: Vec) -> Vec:
        _same_space(self, other)
        return Vec(self.coords - other.coords, self.space)

    def __mul__(self, alpha: float) -> Vec:
        return Vec(float(alpha) * self.coords, self.space)

    __rmul__ = __mul__

    def __neg__(self) -> Vec:
        return Vec(-self.coords, self.space)

    def is_zero(self) -> bool:
        return not np.any(self.coords)


def _same_space(x: Vec, y: Vec) -> None:
    if x.space != y.space:
        raise SpaceMismatch(f"vectors live in different spaces: {x.space} vs {y.space}")


def norm(x: Vec) -> float:
    return float(x.space.norm_array(x.coords))


def inner(x: Vec, y: Vec) -> float:
    """(Weighted) Euclidean inner product; only defined when p = 2."""
    _same_space(x, y)
    if not x.space.is_hilbert:
        raise UnsupportedNorm(f"no inner product on {x.space}")
    return float(np.dot(x.space.w * x.coords, y.coords))


def norming_functional(x: Vec) -> Vec:
    """The unique norm-one functional f with f(x) = ||x|| at a smooth point.

    Returned as coordinates acting by the plain dot product.
    """
    sp = x.space
    if not sp.is_smooth:
        raise UnsupportedNorm(f"norming functional is not unique for p = {format_p(sp.p)}")
    nx = norm(x)
    if nx == 0:
        raise ValueError("the zero vector has no norming functional")
    u = x.coords / nx
    f = sp.w * np.sign(u) * np.abs(u) ** (sp.p - 1.0)
    return Vec(f, sp)


def dual_norm(f: Vec) -> float:
    """Norm of the functional v -> f . v with respect to ``f.space``."""
    sp = f.space
    g = f.coords / sp.scale_factors
    if math.isinf(sp.p):
        q = 1.0
    elif sp.p == 1.0:
        q = INF
    else:
        q = sp.p / (sp.p - 1.0)
    return float(unweighted_norm(g, q))


def sample_sphere_array(space: NormSpec, count: int, seed: int) -> np.ndarray:
    """``count`` seeded unit vectors as rows of an array."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, space.dim))
    n = np.atleast_1d(space.norm_array(g))
    # a zero gaussian draw has probability zero; redraw defensively
    while np.any(n == 0):
        bad = n == 0
        g[bad] = rng.standard_normal((int(bad.sum()), space.dim))
        n = np.atleast_1d(space.norm_array(g))
    return g / n[:, None]


def sample_sphere(space: NormSpec, count: int, seed: int) -> list[Vec]:
    return [Vec(row, space) for row in sample_sphere_array(space, count, seed)]
