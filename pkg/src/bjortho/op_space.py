"""Matrices as operators between l_p spaces: induced norms, norm attainment
sets and operator-level orthogonality predicates."""

from __future__ import annotations

import enum
import functools
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .linesearch import DEFAULT_TOL
from .norms import INF, NormSpec, SpaceMismatch, UnsupportedNorm, Vec, format_p, parse_p, sample_sphere_array, unweighted_norm
from .vec_ortho import (
    TRIVIAL,
    Verdict,
    _bj_family,
    _chmielinski_family,
    bj_search_bound,
    check_eps,
    chmielinski_search_bound,
    dragomir_search_bound,
)

# relative tolerance for ties in the norm attainment set
ATTAIN_RTOL = 1e-9
MAX_SIGN_DIM = 20
DEDUP_DIST = 1e-6
MULTISTARTS = 32


class DimensionOverflow(ValueError):
    """Brute-force enumeration would be too large."""


class ZeroOperator(ValueError):
    """The zero operator has no norm attainment set to speak of."""


class MatrixFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Op:
    """A real m x n matrix acting from ``domain`` (dim n) to ``codomain`` (dim m)."""

    entries: np.ndarray
    domain: NormSpec
    codomain: NormSpec

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2:
            raise ValueError("operator entries must form a 2-D array")
        if e.shape != (self.codomain.dim, self.domain.dim):
            raise SpaceMismatch(
                f"matrix of shape {e.shape} does not map {self.domain} to {self.codomain}"
            )
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def on(cls, entries, p: float | str = 2.0, q: float | str | None = None) -> Op:
        """Operator from l_p^n to l_q^m (q defaults to p)."""
        e = np.atleast_2d(np.asarray(entries, dtype=float))
        p = parse_p(p)
        q = p if q is None else parse_p(q)
        return cls(e, NormSpec(e.shape[1], p), NormSpec(e.shape[0], q))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __call__(self, v: Vec | np.ndarray) -> Vec:
        c = v.coords if isinstance(v, Vec) else np.asarray(v, dtype=float)
        return Vec(self.entries @ c, self.codomain)

    def plus(self, other: Op, lam: float = 1.0) -> Op:
        _same_spaces(self, other)
        return Op(self.entries + lam * other.entries, self.domain, self.codomain)

    def is_zero(self) -> bool:
        return not np.any(self.entries)

    @property
    def exact(self) -> bool:
        """Whether the induced norm is computed exactly."""
        pd, pc = self.domain.p, self.codomain.p
        return pd == 1.0 or math.isinf(pd) or (pd == 2.0 and pc == 2.0)

    @property
    def hilbert(self) -> bool:
        return (
            self.domain.p == 2.0
            and self.codomain.p == 2.0
            and self.domain.weights is None
            and self.codomain.weights is None
        )

    def reduced(self) -> np.ndarray:
        """Matrix of the same operator between the unweighted spaces."""
        return self.entries * self.codomain.scale_factors[:, None] / self.domain.scale_factors[None, :]


def _same_spaces(T: Op, A: Op) -> None:
    if T.domain != A.domain or T.codomain != A.codomain:
        raise SpaceMismatch("operators act between different spaces")


@functools.lru_cache(maxsize=None)
def sign_vectors(n: int) -> np.ndarray:
    """All 2^(n-1) sign vectors of length n with first entry +1."""
    if n > MAX_SIGN_DIM:
        raise DimensionOverflow(f"l_inf domain of dimension {n} exceeds {MAX_SIGN_DIM}")
    k = np.arange(2 ** (n - 1))[:, None]
    bits = (k >> np.arange(n - 1)[None, :]) & 1
    s = np.hstack([np.ones((len(k), 1)), 1.0 - 2.0 * bits])
    s.setflags(write=False)
    return s


def _dual(v: np.ndarray, q: float) -> np.ndarray:
    """g with ||g||_{q*} = 1 and g . v = ||v||_q."""
    if math.isinf(q):
        g = np.zeros_like(v)
        i = int(np.argmax(np.abs(v)))
        g[i] = 1.0 if v[i] >= 0 else -1.0
        return g
    if q == 1.0:
        return np.sign(v)
    nv = unweighted_norm(v, q)
    if nv == 0:
        return np.zeros_like(v)
    a = np.abs(v) / nv
    return np.sign(v) * a ** (q - 1.0)


def _conj(p: float) -> float:
    if p == 1.0:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _power_ascent(M: np.ndarray, pd: float, pc: float, x: np.ndarray, iters: int = 200) -> tuple[float, np.ndarray]:
    """Nonlinear power iteration for max ||Mx||_pc over ||x||_pd = 1."""
    x = x / unweighted_norm(x, pd)
    val = unweighted_norm(M @ x, pc)
    for _ in range(iters):
        y = M @ x
        if not np.any(y):
            break
        z = M.T @ _dual(y, pc)
        if not np.any(z):
            break
        xn = _dual(z, _conj(pd))
        xn = xn / unweighted_norm(xn, pd)
        vn = unweighted_norm(M @ xn, pc)
        if vn <= val * (1.0 + 1e-15):
            break
        x, val = xn, vn
    return val, x


def _multistart(M: np.ndarray, pd: float, pc: float, seed: int = 0) -> list[tuple[float, np.ndarray]]:
    n = M.shape[1]
    starts = np.vstack([np.eye(n), sample_sphere_array(NormSpec(n, pd), MULTISTARTS, seed)])
    return [_power_ascent(M, pd, pc, s) for s in starts]


def _matrix_norm(M: np.ndarray, pd: float, pc: float) -> float:
    if pd == 2.0 and pc == 2.0:
        return float(np.linalg.svd(M, compute_uv=False)[0]) if M.size else 0.0
    if pd == 1.0:
        return float(np.max(unweighted_norm(M.T, pc)))
    if math.isinf(pd):
        return float(np.max(unweighted_norm(sign_vectors(M.shape[1]) @ M.T, pc)))
    return max(v for v, _ in _multistart(M, pd, pc))


def op_norm_info(T: Op) -> tuple[float, bool]:
    """(||T||, exact). Inexact values are certified lower bounds."""
    return _matrix_norm(T.reduced(), T.domain.p, T.codomain.p), T.exact


def op_norm(T: Op) -> float:
    return op_norm_info(T)[0]


class AttainmentKind(enum.Enum):
    FINITE = "FinitePoints"
    SUBSPHERE = "Subsphere"
    APPROXIMATE = "Approximate"


@dataclass(frozen=True, eq=False)
class AttainmentSet:
    """Representation of M_T = {x in S_X : ||Tx|| = ||T||}.

    ``points`` holds unit vectors as rows (closed under negation for finite
    sets); ``basis`` holds an orthonormal basis of H_0 as columns when M_T is
    the unit sphere of H_0. ``complete`` is False when vertex ties mean that
    the true set may also contain points interior to faces.
    """

    kind: AttainmentKind
    attained_norm: float
    points: np.ndarray | None = None
    basis: np.ndarray | None = None
    quality_gap: float | None = None
    singular_gap: float | None = None
    complete: bool = True

    @property
    def exact(self) -> bool:
        return self.kind is not AttainmentKind.APPROXIMATE

    @property
    def dimension(self) -> int | None:
        return None if self.basis is None else self.basis.shape[1]

    @property
    def is_continuum(self) -> bool:
        return self.kind is AttainmentKind.SUBSPHERE and self.basis.shape[1] > 1

    def finite_points(self) -> np.ndarray:
        """All points when M_T is finite (a one-dimensional H_0 gives +-b)."""
        if self.kind is AttainmentKind.SUBSPHERE:
            if self.basis.shape[1] != 1:
                raise ValueError("attainment set is a continuum")
            b = self.basis[:, 0]
            return np.vstack([b, -b])
        return self.points

    def summary(self) -> str:
        if self.kind is AttainmentKind.SUBSPHERE:
            return f"Subsphere(dim={self.dimension}, norm={self.attained_norm:.12g})"
        return f"{self.kind.value}({len(self.points)} points, norm={self.attained_norm:.12g})"


def _pm(rows: np.ndarray) -> np.ndarray:
    return np.vstack([rows, -rows])


def attainment_set(T: Op) -> AttainmentSet:
    if T.is_zero():
        raise ZeroOperator("the zero operator attains its norm everywhere")
    M = T.reduced()
    dd = T.domain.scale_factors
    pd, pc = T.domain.p, T.codomain.p
    if pd == 2.0 and pc == 2.0:
        _, s, vt = np.linalg.svd(M)
        top = s[0]
        k = int(np.sum(s >= top * (1.0 - ATTAIN_RTOL)))
        basis = (vt[:k].T) / dd[:, None]
        if k < len(s):
            nxt = s[k]
        elif k < M.shape[1]:
            nxt = 0.0
        else:
            nxt = None
        gap = None if nxt is None else (top - nxt) / top
        return AttainmentSet(AttainmentKind.SUBSPHERE, float(top), basis=basis, singular_gap=gap)
    if pd == 1.0:
        cols = unweighted_norm(M.T, pc)
        top = float(cols.max())
        idx = np.flatnonzero(cols >= top * (1.0 - ATTAIN_RTOL))
        pts = np.zeros((len(idx), M.shape[1]))
        pts[np.arange(len(idx)), idx] = 1.0 / dd[idx]
        return AttainmentSet(AttainmentKind.FINITE, top, points=_pm(pts), complete=len(idx) == 1)
    if math.isinf(pd):
        S = sign_vectors(M.shape[1])
        vals = unweighted_norm(S @ M.T, pc)
        top = float(vals.max())
        idx = np.flatnonzero(vals >= top * (1.0 - ATTAIN_RTOL))
        pts = S[idx] / dd[None, :]
        return AttainmentSet(AttainmentKind.FINITE, top, points=_pm(pts), complete=len(idx) == 1)

    found = sorted(_multistart(M, pd, pc), key=lambda r: -r[0])
    clusters: list[tuple[float, np.ndarray]] = []
    for v, x in found:
        if all(min(np.linalg.norm(x - c), np.linalg.norm(x + c)) > DEDUP_DIST for _, c in clusters):
            clusters.append((v, x))
    top = clusters[0][0]
    band = 1e-7 * max(top, 1.0)
    keep = [x for v, x in clusters if v >= top - band]
    rest = [v for v, _ in clusters if v < top - band]
    gap = top - rest[0] if rest else math.inf
    pts = np.array(keep) / dd[None, :]
    return AttainmentSet(AttainmentKind.APPROXIMATE, float(top), points=_pm(pts), quality_gap=gap, complete=False)


def _orthonormal(B: np.ndarray) -> bool:
    return np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-8)


def restricted_norm_complement(T: Op, H0_basis: np.ndarray) -> float:
    """Norm of T restricted to the orthogonal complement of span(H0_basis)."""
    if not T.hilbert:
        raise UnsupportedNorm("the restricted norm needs unweighted l_2 on both sides")
    B = np.asarray(H0_basis, dtype=float).reshape(T.domain.dim, -1)
    if B.shape[1] and not _orthonormal(B):
        raise ValueError("H0 basis must be orthonormal")
    n = T.domain.dim
    if B.shape[1] >= n:
        return 0.0
    if B.shape[1] == 0:
        C = np.eye(n)
    else:
        u, _, _ = np.linalg.svd(B, full_matrices=True)
        C = u[:, B.shape[1]:]
    return float(np.linalg.svd(T.entries @ C, compute_uv=False)[0])


def mt_subset_of_ma(T: Op, A: Op, M: AttainmentSet | None = None) -> bool:
    """Whether every point of M_T is also a norm-attaining point of A."""
    if A.is_zero():
        return False
    M = attainment_set(T) if M is None else M
    nA = op_norm(A)
    cut = nA * (1.0 - ATTAIN_RTOL)
    if M.kind is AttainmentKind.SUBSPHERE:
        s = np.linalg.svd(A.reduced() @ (M.basis * T.domain.scale_factors[:, None]), compute_uv=False)
        return bool(len(s) == M.basis.shape[1] and s.min() >= cut)
    vals = np.atleast_1d(T.codomain.norm_array(M.points @ A.entries.T))
    return bool(np.all(vals >= cut))


# --- operator-level predicates ---------------------------------------------


def op_line(T: Op, A: Op) -> Callable[[float], float]:
    """lam -> ||T + lam A||."""
    MT, MA = T.reduced(), A.reduced()
    pd, pc = T.domain.p, T.codomain.p
    return lambda t: _matrix_norm(MT + t * MA, pd, pc)


def _op_prepare(T: Op, A: Op):
    _same_spaces(T, A)
    nT, eT = op_norm_info(T)
    nA, eA = op_norm_info(A)
    return nT, nA, not (eT and eA)


def op_is_bj_orthogonal(T: Op, A: Op, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    nT, nA, approx = _op_prepare(T, A)
    if nT == 0 or nA == 0:
        return TRIVIAL
    e = bj_search_bound(nT, nA) * bound_factor
    return _bj_family(nT, nA, op_line(T, A), [(-e, e)], nT, tol, approximate=approx)


def op_is_dragomir_orthogonal(T: Op, A: Op, eps: float, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    eps = check_eps(eps)
    nT, nA, approx = _op_prepare(T, A)
    if nT == 0 or nA == 0:
        return TRIVIAL
    e = dragomir_search_bound(nT, nA, eps) * bound_factor
    s = math.sqrt(1.0 - eps * eps)
    return _bj_family(nT, nA, op_line(T, A), [(-e, e)], s * nT, tol, approximate=approx)


def op_is_chmielinski_orthogonal(T: Op, A: Op, eps: float, *, tol: float = DEFAULT_TOL, bound_factor: float = 1.0) -> Verdict:
    eps = check_eps(eps)
    nT, nA, approx = _op_prepare(T, A)
    if nT == 0 or nA == 0:
        return TRIVIAL
    e = chmielinski_search_bound(nT, nA, eps) * bound_factor
    return _chmielinski_family(nT, nA, op_line(T, A), eps, e, tol, approximate=approx)


OP_PREDICATES = {
    "bj": lambda T, A, eps: op_is_bj_orthogonal(T, A),
    "dragomir": op_is_dragomir_orthogonal,
    "chmielinski": op_is_chmielinski_orthogonal,
}


# --- matrix text format ------------------------------------------------------
#
#   rows: 2
#   cols: 2
#   domain: 2
#   codomain: inf
#   entries: 1 2
#            3 4
#
# '#' starts a comment; entries are row-major and may span several lines.

_KEYS = ("rows", "cols", "domain", "codomain", "entries")


def parse_matrix(text: str) -> Op:
    fields: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^([A-Za-z_]+)\s*:\s*(.*)$", line)
        if m:
            key = m.group(1).lower()
            if key not in _KEYS:
                raise MatrixFormatError(f"unknown field {key!r}")
            if key in fields:
                raise MatrixFormatError(f"duplicate field {key!r}")
            fields[key] = m.group(2).replace(",", " ").split()
            current = key
        elif current == "entries":
            fields["entries"].extend(line.replace(",", " ").split())
        else:
            raise MatrixFormatError(f"unexpected line: {raw!r}")
    missing = [k for k in ("rows", "cols", "entries") if k not in fields]
    if missing:
        raise MatrixFormatError(f"missing field(s): {', '.join(missing)}")
    try:
        rows = int(_single(fields, "rows"))
        cols = int(_single(fields, "cols"))
        dom = parse_p(_single(fields, "domain")) if "domain" in fields else 2.0
        cod = parse_p(_single(fields, "codomain")) if "codomain" in fields else dom
        vals = [float(t) for t in fields["entries"]]
    except ValueError as exc:
        raise MatrixFormatError(str(exc)) from None
    if rows < 1 or cols < 1:
        raise MatrixFormatError("rows and cols must be positive")
    if len(vals) != rows * cols:
        raise MatrixFormatError(f"expected {rows * cols} entries, found {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise MatrixFormatError("entries must be finite")
    return Op(np.array(vals).reshape(rows, cols), NormSpec(cols, dom), NormSpec(rows, cod))


def _single(fields: dict[str, list[str]], key: str) -> str:
    v = fields[key]
    if len(v) != 1:
        raise MatrixFormatError(f"field {key!r} takes exactly one value")
    return v[0]


def load_matrix(path: str | Path) -> Op:
    return parse_matrix(Path(path).read_text())


def format_matrix(T: Op) -> str:
    if T.domain.weights is not None or T.codomain.weights is not None:
        raise MatrixFormatError("the text format has no field for weights")
    lines = [
        f"rows: {T.shape[0]}",
        f"cols: {T.shape[1]}",
        f"domain: {format_p(T.domain.p)}",
        f"codomain: {format_p(T.codomain.p)}",
    ]
    body = [" ".join(repr(float(v)) for v in row) for row in T.entries]
    lines.append("entries: " + body[0])
    lines.extend("         " + b for b in body[1:])
    return "\n".join(lines) + "\n"
