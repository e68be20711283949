"""Two-sided verifiers for the operator characterizations.

Each verifier evaluates the definition of the operator relation (lhs) and
the characterization through the norm attainment set M_T (rhs) separately
and reports whether the two agree.

Existence over M_T is exhaustive when M_T is finite. When M_T is the unit
sphere of a subspace of dimension >= 2 it is searched on a seeded mesh
followed by Nelder-Mead refinement; a witness found there is conclusive,
while its absence is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.optimize import minimize

from .linesearch import DEFAULT_TOL
from .norms import NormSpec, UnsupportedNorm, Vec, norm, sample_sphere_array
from .op_space import (
    AttainmentKind,
    AttainmentSet,
    Op,
    attainment_set,
    mt_subset_of_ma,
    op_is_bj_orthogonal,
    op_is_chmielinski_orthogonal,
    op_is_dragomir_orthogonal,
    op_line,
    op_norm,
    restricted_norm_complement,
)
from .vec_ortho import (
    TRIVIAL,
    Outcome,
    Verdict,
    _bj_family,
    _chmielinski_family,
    _line_norm,
    all_of,
    any_of,
    check_eps,
    chmielinski_search_bound,
    in_minus_cone,
    in_plus_cone,
    is_chmielinski_orthogonal,
    is_ip_approx_orthogonal,
)

MESH_POINTS = 256
REFINE_STARTS = 3
# l_2 instances whose top singular values are this close are numerically
# ambiguous about the dimension of M_T
SINGULAR_GAP_MIN = 1e-6


@dataclass(frozen=True)
class TheoremVerdict:
    name: str
    lhs: Verdict
    rhs: Verdict
    agree: bool | None
    skipped: bool
    skip_reason: str | None = None
    witnesses: dict[str, Any] = field(default_factory=dict)
    moreover: Verdict | None = None

    def to_dict(self) -> dict[str, Any]:
        def v(d: Verdict | None):
            if d is None:
                return None
            return {"outcome": d.outcome.value, "margin": _num(d.margin), "approximate": d.approximate}

        return {
            "theorem": self.name,
            "lhs": v(self.lhs),
            "rhs": v(self.rhs),
            "moreover": v(self.moreover),
            "agree": self.agree,
            "skipped": self.skipped,
            "skip_reason": self.skip_reason,
            "witnesses": self.witnesses,
        }


def _num(x: float) -> float | str:
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


# --- existential search over M_T ---------------------------------------------


@dataclass
class _Found:
    verdict: Verdict
    point: np.ndarray | None
    conclusive: bool
    mesh: int | None = None


def _search(M: AttainmentSet, score: Callable[[np.ndarray], Verdict], seed: int = 0) -> _Found:
    """Best verdict of ``score`` over M_T (largest margin)."""
    if not M.is_continuum:
        pts = M.finite_points()
        vs = [score(x) for x in pts]
        i = max(range(len(vs)), key=lambda k: vs[k].margin)
        return _Found(vs[i], pts[i], M.complete)

    B = M.basis
    d = B.shape[1]
    C = sample_sphere_array(NormSpec(d, 2.0), MESH_POINTS, seed)
    vs = [score(B @ c) for c in C]
    order = sorted(range(len(vs)), key=lambda k: -vs[k].margin)
    best_v, best_x = vs[order[0]], B @ C[order[0]]
    if best_v.outcome is Outcome.HOLDS:
        return _Found(best_v, best_x, False, MESH_POINTS)

    def obj(c: np.ndarray) -> float:
        n = np.linalg.norm(c)
        if n == 0:
            return math.inf
        return -score(B @ (c / n)).margin

    for k in order[:REFINE_STARTS]:
        res = minimize(obj, C[k], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 200 * d})
        c = res.x / np.linalg.norm(res.x)
        # re-validate the refined point through the predicate itself
        v = score(B @ c)
        if v.margin > best_v.margin:
            best_v, best_x = v, B @ c
    return _Found(best_v, best_x, False, MESH_POINTS)


def _images(T: Op, A: Op, x: np.ndarray) -> tuple[Vec, Vec]:
    return T(x), A(x)


def _plus(T, A):
    return lambda x: in_plus_cone(*_images(T, A, x))


def _minus(T, A):
    return lambda x: in_minus_cone(*_images(T, A, x))


def _g_check(T: Op, A: Op, nT: float, nA: float, eps: float, sides, use_image_norm=False):
    """x -> verdict for ||Tx + lam Ax||^2 >= n^2 - 2 eps n ||A|| |lam| on ``sides``.

    ``n`` is ||T||, or ||Tx|| when ``use_image_norm`` is set.
    """

    def check(x: np.ndarray) -> Verdict:
        tx, ax = _images(T, A, x)
        n = norm(tx) if use_image_norm else nT
        a = norm(ax)
        # beyond this |lam| the reverse triangle inequality settles the sign
        ext = chmielinski_search_bound(n, nA, eps)
        if a > eps * nA:
            ext = max(ext, 2.0 * n * (a - eps * nA) / (a * a))
        return _chmielinski_family(n, nA, _line_norm(tx, ax), eps, ext, DEFAULT_TOL, sides=sides)

    return check


# --- bookkeeping --------------------------------------------------------------


def _point(x: np.ndarray | None):
    return None if x is None else [float(v) for v in x]


def _degenerate(T: Op, A: Op) -> bool:
    return T.is_zero() or A.is_zero()


def _trivial(name: str, lhs: Verdict) -> TheoremVerdict:
    return _finish(name, lhs, TRIVIAL, None, {"note": "zero operator"})


def _finish(
    name: str,
    lhs: Verdict,
    rhs: Verdict,
    M: AttainmentSet | None,
    witnesses: dict[str, Any],
    conclusive: bool = True,
    moreover: Verdict | None = None,
    skip: str | None = None,
) -> TheoremVerdict:
    reason = skip
    if reason is None and M is not None:
        if not M.exact or lhs.approximate or rhs.approximate:
            reason = "approximate norm attainment set"
        elif M.singular_gap is not None and 0 < M.singular_gap < SINGULAR_GAP_MIN:
            reason = "near-degenerate top singular value"
    if reason is None and any(v is not None and v.marginal for v in (lhs, rhs, moreover)):
        reason = "marginal"
    if reason is None and not conclusive and lhs.outcome is Outcome.HOLDS and rhs.outcome is not Outcome.HOLDS:
        reason = "no witness at search resolution"
    if reason is not None:
        return TheoremVerdict(name, lhs, rhs, None, True, reason, witnesses, moreover)
    agree = lhs.outcome is rhs.outcome and (moreover is None or moreover.outcome is lhs.outcome)
    return TheoremVerdict(name, lhs, rhs, agree, False, None, witnesses, moreover)


def _search_meta(*found: _Found) -> dict[str, Any]:
    mesh = [f.mesh for f in found if f.mesh is not None]
    return {"mesh_points": mesh[0]} if mesh else {}


def _lhs_b(T: Op, A: Op, eps: float) -> Verdict:
    return op_is_chmielinski_orthogonal(T, A, eps)


# --- verifiers -----------------------------------------------------------------


def verify_dragomir_char(T: Op, A: Op, eps: float, seed: int = 0) -> TheoremVerdict:
    """T is eps-D orthogonal to A iff (a) or (b): a one-sided cone condition at
    some x in M_T together with the threshold on a bounded lambda interval."""
    name = "dragomir"
    eps = check_eps(eps)
    lhs = op_is_dragomir_orthogonal(T, A, eps)
    if _degenerate(T, A):
        return _trivial(name, lhs)
    M = attainment_set(T)
    if not M.exact:
        return _finish(name, lhs, TRIVIAL, M, {})
    nT, nA = op_norm(T), op_norm(A)
    s = math.sqrt(1.0 - eps * eps)
    r = nT / nA
    line = op_line(T, A)

    def interval(lo: float, hi: float) -> Verdict:
        return _bj_family(nT, nA, line, [(lo * r, hi * r)], s * nT, DEFAULT_TOL)

    fa = _search(M, _plus(T, A), seed)
    fb = _search(M, _minus(T, A), seed)
    ia = interval(-1.0 - s, -1.0 + s)
    ib = interval(1.0 - s, 1.0 + s)
    a = all_of(fa.verdict, ia)
    b = all_of(fb.verdict, ib)
    rhs = any_of(a, b)
    w = {
        "x": _point(fa.point),
        "y": _point(fb.point),
        "a": a.outcome.value,
        "b": b.outcome.value,
        "lambda_a": ia.witness_lambda,
        "lambda_b": ib.witness_lambda,
        **_search_meta(fa, fb),
    }
    # the interval parts are exact; only the cone searches can be inconclusive
    conclusive = (fa.conclusive or ia.outcome is not Outcome.HOLDS) and (fb.conclusive or ib.outcome is not Outcome.HOLDS)
    return _finish(name, lhs, rhs, M, w, conclusive)


def verify_bj_char(T: Op, A: Op, seed: int = 0) -> TheoremVerdict:
    """T is BJ orthogonal to A iff Ax in (Tx)^+ and Ay in (Ty)^- for some x, y in M_T."""
    name = "bj"
    lhs = op_is_bj_orthogonal(T, A)
    if _degenerate(T, A):
        return _trivial(name, lhs)
    M = attainment_set(T)
    if not M.exact:
        return _finish(name, lhs, TRIVIAL, M, {})
    fx = _search(M, _plus(T, A), seed)
    fy = _search(M, _minus(T, A), seed)
    rhs = all_of(fx.verdict, fy.verdict)
    w = {"x": _point(fx.point), "y": _point(fy.point), **_search_meta(fx, fy)}
    return _finish(name, lhs, rhs, M, w, fx.conclusive and fy.conclusive)


def min_abs_form(S: np.ndarray) -> tuple[float, np.ndarray]:
    """min of |c^T S c| over unit c for symmetric S, with a minimizer.

    The form takes every value between its extreme eigenvalues on the
    sphere, so the minimum is 0 whenever those have opposite signs.
    """
    mu, V = np.linalg.eigh(S)
    lo, hi = mu[0], mu[-1]
    if lo < 0 < hi:
        c = math.sqrt(hi / (hi - lo)) * V[:, 0] + math.sqrt(-lo / (hi - lo)) * V[:, -1]
        return 0.0, c
    if abs(lo) <= abs(hi):
        return float(abs(lo)), V[:, 0]
    return float(abs(hi)), V[:, -1]


def verify_hilbert_char(T: Op, A: Op, eps: float) -> TheoremVerdict:
    """On l_2: T is eps-B orthogonal to A iff |<Tx, Ax>| <= eps ||T|| ||A|| for some x in M_T."""
    name = "hilbert"
    eps = check_eps(eps)
    if not (T.hilbert and A.hilbert):
        raise UnsupportedNorm("the Hilbert characterization needs unweighted l_2 on both sides")
    lhs = _lhs_b(T, A, eps)
    if _degenerate(T, A):
        return _trivial(name, lhs)
    M = attainment_set(T)
    B = M.basis
    nT, nA = M.attained_norm, op_norm(A)
    S = B.T @ T.entries.T @ A.entries @ B
    m, c = min_abs_form(0.5 * (S + S.T))
    x = B @ c
    rhs = Verdict.from_margin((eps * nT * nA - m) / max(nT * nA, 1.0))
    rest = restricted_norm_complement(T, B)
    w = {
        "x": _point(x),
        "min_abs_inner": m,
        "subspace_dim": B.shape[1],
        "restricted_norm": rest,
        "norm_gap_positive": rest < nT,
    }
    moreover = None
    if mt_subset_of_ma(T, A, M):
        moreover = is_ip_approx_orthogonal(T(x), A(x), eps)
    return _finish(name, lhs, rhs, M, w, moreover=moreover)


def _moreover_b(T: Op, A: Op, M: AttainmentSet, eps: float, seed: int) -> Verdict | None:
    if not mt_subset_of_ma(T, A, M):
        return None
    f = _search(M, lambda x: is_chmielinski_orthogonal(*_images(T, A, x), eps), seed)
    return f.verdict


def verify_compact_char(T: Op, A: Op, eps: float, seed: int = 0) -> TheoremVerdict:
    """With M_T = D u (-D), D compact connected: T is eps-B orthogonal to A iff
    ||Tx + lam Ax||^2 >= ||T||^2 - 2 eps ||T|| ||lam A|| for all lam at one x in M_T."""
    name = "compact"
    eps = check_eps(eps)
    lhs = _lhs_b(T, A, eps)
    if _degenerate(T, A):
        return _trivial(name, lhs)
    M = attainment_set(T)
    if not M.exact:
        return _finish(name, lhs, TRIVIAL, M, {})
    if M.kind is AttainmentKind.FINITE and len(M.points) != 2:
        return _finish(name, lhs, TRIVIAL, M, {}, skip="attainment set is not D u (-D) with D connected")
    nT, nA = M.attained_norm, op_norm(A)
    f = _search(M, _g_check(T, A, nT, nA, eps, (1, -1)), seed)
    w = {"x": _point(f.point), **_search_meta(f)}
    moreover = _moreover_b(T, A, M, eps, seed)
    return _finish(name, lhs, f.verdict, M, w, f.conclusive, moreover)


def verify_compact_complete_char(T: Op, A: Op, eps: float, seed: int = 0) -> TheoremVerdict:
    """T is eps-B orthogonal to A iff the squared inequality holds for lam >= 0
    at some x in M_T and for lam <= 0 at some y in M_T."""
    name = "compact-complete"
    eps = check_eps(eps)
    lhs = _lhs_b(T, A, eps)
    if _degenerate(T, A):
        return _trivial(name, lhs)
    M = attainment_set(T)
    if not M.exact:
        return _finish(name, lhs, TRIVIAL, M, {})
    nT, nA = M.attained_norm, op_norm(A)
    fx = _search(M, _g_check(T, A, nT, nA, eps, (1,)), seed)
    fy = _search(M, _g_check(T, A, nT, nA, eps, (-1,)), seed)
    rhs = all_of(fx.verdict, fy.verdict)
    w = {"x": _point(fx.point), "y": _point(fy.point), **_search_meta(fx, fy)}
    moreover = _moreover_b(T, A, M, eps, seed)
    return _finish(name, lhs, rhs, M, w, fx.conclusive and fy.conclusive, moreover)


def verify_bounded_char_findim(T: Op, A: Op, eps: float, seed: int = 0) -> TheoremVerdict:
    """Finite-dimensional reading of the sequential characterization.

    Sequences of almost norming unit vectors cluster in M_T and the vanishing
    relaxations drop out, leaving (a') ||Ax|| <= eps ||A|| at some x in M_T,
    or (b') one-sided squared inequalities with ||Tx|| in place of ||T||.
    This reformulation is derived, not quoted.
    """
    name = "bounded-findim"
    eps = check_eps(eps)
    lhs = _lhs_b(T, A, eps)
    if _degenerate(T, A):
        return _trivial(name, lhs)
    M = attainment_set(T)
    if not M.exact:
        return _finish(name, lhs, TRIVIAL, M, {})
    nA = op_norm(A)
    scale = max(nA, 1.0)
    if M.kind is AttainmentKind.SUBSPHERE:
        V = M.basis * T.domain.scale_factors[:, None]
        _, sv, vt = np.linalg.svd(A.reduced() @ V)
        smallest = sv[-1] if len(sv) == V.shape[1] else 0.0
        xa = M.basis @ vt[-1]
        fa = _Found(Verdict.from_margin((eps * nA - smallest) / scale), xa, True)
    else:
        fa = _search(M, lambda x: Verdict.from_margin((eps * nA - norm(A(x))) / scale), seed)
    nT = M.attained_norm
    fx = _search(M, _g_check(T, A, nT, nA, eps, (1,), use_image_norm=True), seed)
    fy = _search(M, _g_check(T, A, nT, nA, eps, (-1,), use_image_norm=True), seed)
    b = all_of(fx.verdict, fy.verdict)
    rhs = any_of(fa.verdict, b)
    w = {
        "a_point": _point(fa.point),
        "a": fa.verdict.outcome.value,
        "x": _point(fx.point),
        "y": _point(fy.point),
        "b": b.outcome.value,
        "derived": True,
        **_search_meta(fx, fy),
    }
    conclusive = fa.conclusive and fx.conclusive and fy.conclusive
    return _finish(name, lhs, rhs, M, w, conclusive)


VERIFIERS: dict[str, Callable[..., TheoremVerdict]] = {
    "dragomir": verify_dragomir_char,
    "bj": lambda T, A, eps=0.0, seed=0: verify_bj_char(T, A, seed),
    "hilbert": lambda T, A, eps, seed=0: verify_hilbert_char(T, A, eps),
    "compact": verify_compact_char,
    "compact-complete": verify_compact_complete_char,
    "bounded-findim": verify_bounded_char_findim,
}
