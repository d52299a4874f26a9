"""Reflection representations built from Cartan matrices.

A representation is stored as covectors ``alpha`` (N x n, row i is
alpha_i) and vectors ``v`` (n x N, column j is v_j).  The generator for
s_i is ``x -> x - alpha_i(x) v_i``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cartan as ct
from . import coxeter as cx
from .cartan import CartanMatrix
from .coxeter import INF, CoxeterMatrix

RANK_RTOL = 1e-9
AMBIGUOUS_BAND = (1e-12, 1e-7)
INVOLUTION_TOL = 1e-9
RELATION_TOL = 1e-6
RECOVERY_TOL = 1e-9
BLOCK_TOL = 1e-9


class RepError(ValueError):
    pass


class NonSemisimpleRequired(RepError):
    pass


class RankAmbiguous(RepError):
    pass


def reflection_matrix(alpha_i, v_i) -> np.ndarray:
    return np.eye(len(v_i)) - np.outer(v_i, alpha_i)


@dataclass(frozen=True, eq=False)
class ReflectionRep:
    alpha: np.ndarray
    v: np.ndarray
    cartan: Optional[CartanMatrix] = None
    generators: tuple = field(default=(), repr=False)

    def __post_init__(self):
        alpha = np.array(self.alpha, float)
        v = np.array(self.v, float)
        if alpha.ndim != 2 or v.ndim != 2 or alpha.shape != v.T.shape:
            raise RepError(f"alpha {alpha.shape} and v {v.shape} must be N x n and n x N")
        for arr in (alpha, v):
            arr.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "v", v)
        if not self.generators:
            gens = []
            for i in range(alpha.shape[0]):
                g = reflection_matrix(alpha[i], v[:, i])
                g.setflags(write=False)
                gens.append(g)
            object.__setattr__(self, "generators", tuple(gens))

    @property
    def n(self) -> int:
        return self.alpha.shape[1]

    @property
    def N(self) -> int:
        return self.alpha.shape[0]

    def cartan_entries(self) -> np.ndarray:
        return self.alpha @ self.v

    def word_matrix(self, word: Sequence[int]) -> np.ndarray:
        """rho(s_{w0} s_{w1} ...) for a 0-based word."""
        out = np.eye(self.n)
        for i in word:
            out = out @ self.generators[i]
        return out


def _pivot_rows(a: np.ndarray):
    """Greedy complete pivoting.  Returns (rows, pivot magnitudes)."""
    R = np.array(a, float)
    rows_left = list(range(R.shape[0]))
    cols_left = list(range(R.shape[1]))
    chosen, pivots = [], []
    while rows_left and cols_left:
        sub = np.abs(R[np.ix_(rows_left, cols_left)])
        k = np.unravel_index(int(np.argmax(sub)), sub.shape)
        r, c = rows_left[k[0]], cols_left[k[1]]
        p = R[r, c]
        pivots.append(abs(p))
        chosen.append(r)
        if p == 0:
            break
        for rr in rows_left:
            if rr != r:
                R[rr] -= (R[rr, c] / p) * R[r]
        rows_left.remove(r)
        cols_left.remove(c)
    return chosen, pivots


def numerical_rank(a: np.ndarray):
    """Rank by greedy pivoting, plus the basis rows and the pivot gap.

    Raises
    ------
    RankAmbiguous
        If a pivot falls inside the ambiguous band relative to the largest.
    """
    rows, pivots = _pivot_rows(a)
    if not pivots or pivots[0] == 0:
        return 0, [], math.inf
    scale = pivots[0]
    r = next((k for k, p in enumerate(pivots) if p <= RANK_RTOL * scale), len(pivots))
    dropped = pivots[r:]
    gap = pivots[r - 1] / dropped[0] if dropped and dropped[0] > 0 else math.inf
    lo, hi = AMBIGUOUS_BAND
    for p in pivots:
        if lo * scale < p < hi * scale:
            raise RankAmbiguous(
                f"numerical rank ambiguous: pivot {p / scale:.3e} (relative) in band "
                f"({lo:g}, {hi:g}); pivot gap {gap:.3e}")
    return r, sorted(rows[:r]), gap


def _zero_type_components(A: CartanMatrix) -> list:
    out = []
    for comp in cx.irreducible_components(A.coxeter):
        if len(comp.vertices) == 1:
            continue
        if ct.matrix_type(A, comp.vertices).type == "Zero":
            out.append(comp.vertices)
    return out


def build_rep(A: CartanMatrix, n: Optional[int] = None) -> ReflectionRep:
    """Semisimple reflection representation with Cartan matrix A.

    The alpha's of ``rank(A)`` independent rows of A (greedy pivoting)
    are taken as coordinate covectors; the other alpha's are the forced
    linear combinations and the v's are read off from A.  When n exceeds
    the rank a trivial summand is appended.

    Raises
    ------
    RepError
        If rank(A) > n.
    RankAmbiguous
        If the numerical rank is not clear cut.
    NonSemisimpleRequired
        If some irreducible component is of zero type: the semisimple
        model then has a fundamental cone with empty interior.
    """
    a = A.entries
    N = A.N
    n = N if n is None else int(n)
    r, rows, gap = numerical_rank(a)
    if r > n:
        raise RepError(f"rank(A) = {r} > n = {n}")
    zero = _zero_type_components(A)
    if zero:
        raise NonSemisimpleRequired(
            "non-semisimple required: zero-type component "
            f"{cx.one_based(zero[0])} has no semisimple realization with "
            "nonempty fundamental cone")
    B = a[rows, :]
    C = np.linalg.lstsq(B.T, a.T, rcond=None)[0].T
    for k, i in enumerate(rows):
        C[i] = 0.0
        C[i, k] = 1.0
    alpha = np.zeros((N, n))
    alpha[:, :r] = C
    v = np.zeros((n, N))
    v[:r, :] = B
    return ReflectionRep(alpha, v, A)


@dataclass
class RepReport:
    involution_error: float
    relation_errors: list
    relation_failures: list
    cartan_error: float
    interior_status: str
    interior_point: Optional[np.ndarray] = None
    interior_margin: float = math.nan

    @property
    def passed(self) -> bool:
        return (self.involution_error <= INVOLUTION_TOL and not self.relation_failures
                and self.cartan_error <= RECOVERY_TOL
                and self.interior_status != "failed")

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "involution_error": self.involution_error,
            "involution_tol": INVOLUTION_TOL,
            "relation_tol": RELATION_TOL,
            "relation_failures": [
                {"pair": [i + 1, j + 1], "m": m, "error": e} for i, j, m, e in self.relation_failures],
            "relation_max_error": max((e for *_, e in self.relation_errors), default=0.0),
            "cartan_error": self.cartan_error,
            "cartan_tol": RECOVERY_TOL,
            "interior": self.interior_status,
            "interior_margin": self.interior_margin,
        }


def interior_point(A: CartanMatrix, v: np.ndarray):
    """Point in the interior of the fundamental cone from Perron-Frobenius
    vectors, or None when some component is of zero type."""
    x = np.zeros(v.shape[0])
    for comp in cx.irreducible_components(A.coxeter):
        verts = list(comp.vertices)
        rep = ct.matrix_type(A, verts)
        if rep.type == "Zero":
            return None
        sign = 1.0 if rep.type == "Negative" else -1.0
        x = x + sign * (v[:, verts] @ rep.pf_vector)
    return x


def verify_rep(rep: ReflectionRep, W: Optional[CoxeterMatrix] = None,
               A: Optional[CartanMatrix] = None) -> RepReport:
    """Check involutions, Coxeter relations, Cartan recovery and the
    nonempty-interior certificate.  Never raises on failed checks."""
    A = A if A is not None else rep.cartan
    W = W if W is not None else (A.coxeter if A is not None else None)
    if W is None:
        raise RepError("verify_rep needs W or a Cartan matrix")
    n, N = rep.n, rep.N
    eye = np.eye(n)
    inv_err = max(float(np.abs(g @ g - eye).max()) for g in rep.generators)
    rel_errs, fails = [], []
    for i in range(N):
        for j in range(i + 1, N):
            m = W.m[i][j]
            if m == INF:
                continue
            p = np.linalg.matrix_power(rep.generators[i] @ rep.generators[j], int(m))
            e = float(np.abs(p - eye).max())
            rel_errs.append((i, j, int(m), e))
            if e > RELATION_TOL:
                fails.append((i, j, int(m), e))
    target = A.entries if A is not None else rep.cartan_entries()
    rec = float(np.abs(rep.cartan_entries() - target).max())
    status, x, margin = "undetermined", None, math.nan
    if A is not None:
        try:
            x = interior_point(A, rep.v)
        except ct.CartanError:
            x = None
        if x is not None:
            vals = rep.alpha @ x
            margin = float(vals.max())
            scale = max(1.0, float(np.abs(vals).max()))
            status = "certified" if margin < -1e-12 * scale else "failed"
    return RepReport(inv_err, rel_errs, fails, rec, status, x, margin)


def _orth(M: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of M."""
    if M.size == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((n, 0))
    return U[:, s > RANK_RTOL * s[0]]


def _null(M: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the kernel of M (M has n columns)."""
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, Vh = np.linalg.svd(M)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    r = int((s > RANK_RTOL * scale).sum())
    return Vh[r:].T.copy()


def _complement(sub: np.ndarray, within: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(sub) inside
    span(within); both are orthonormal column sets."""
    if within.shape[1] == 0:
        return within
    P = within - sub @ (sub.T @ within)
    U, s, _ = np.linalg.svd(P, full_matrices=False)
    return U[:, s > 1e-7]


@dataclass
class SubspaceReport:
    V_v_basis: np.ndarray
    V_alpha_basis: np.ndarray
    rank_A: int
    reduced: bool
    dual_reduced: bool

    def intersection_dim(self) -> int:
        n = self.V_v_basis.shape[0]
        both = np.hstack([self.V_v_basis, self.V_alpha_basis])
        return self.V_v_basis.shape[1] + self.V_alpha_basis.shape[1] - _orth(both, n).shape[1]


def _rank(M: np.ndarray) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > RANK_RTOL * s[0]).sum()) if s.size and s[0] > 0 else 0


def subspace_report(rep: ReflectionRep) -> SubspaceReport:
    Vv = _orth(rep.v, rep.n)
    Va = _null(rep.alpha, rep.n)
    r = _rank(rep.cartan_entries())
    return SubspaceReport(Vv, Va, r, Va.shape[1] == 0, Vv.shape[1] == rep.n)


@dataclass
class BlockDecomposition:
    """Adapted basis (U'', V_alpha ∩ V_v, U', U''') and induced reps."""

    U2: np.ndarray
    K: np.ndarray
    U1: np.ndarray
    U3: np.ndarray
    basis: np.ndarray
    blocks: list
    dims: tuple
    pattern_error: float
    rho_v: ReflectionRep
    rho_alpha: ReflectionRep
    rho_v_alpha: ReflectionRep


_ZERO_BLOCKS = [(0, 1), (0, 2), (0, 3), (1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]
_ID_BLOCKS = [(0, 0), (1, 1), (3, 3)]


def block_decomposition(rep: ReflectionRep) -> BlockDecomposition:
    """Conjugate the generators into the adapted block-triangular form.

    In the basis (U'', K = V_alpha ∩ V_v, U', U''') every generator has
    identity blocks on U'', K and U''' and zeros below the diagonal
    blocks and on the rest of the U'' row.
    """
    n = rep.n
    Vv = _orth(rep.v, n)
    Va = _null(rep.alpha, n)
    K = Vv @ _null(rep.alpha @ Vv, Vv.shape[1]) if Vv.shape[1] else np.zeros((n, 0))
    K = _orth(K, n) if K.shape[1] else K
    U2 = _complement(K, Va)
    U1 = _complement(K, Vv)
    span = _orth(np.hstack([Va, Vv]), n)
    U3 = _complement(span, np.eye(n))
    P = np.hstack([U2, K, U1, U3])
    if P.shape[1] != n:
        raise RepError(f"adapted basis has {P.shape[1]} vectors, expected {n}")
    Pinv = np.linalg.inv(P)
    dims = (U2.shape[1], K.shape[1], U1.shape[1], U3.shape[1])
    cuts = np.cumsum((0,) + dims)
    sl = [slice(cuts[k], cuts[k + 1]) for k in range(4)]
    blocks = [Pinv @ g @ P for g in rep.generators]
    err = 0.0
    for g in blocks:
        scale = max(1.0, float(np.abs(g).max()))
        for r, c in _ZERO_BLOCKS:
            blk = g[sl[r], sl[c]]
            if blk.size:
                err = max(err, float(np.abs(blk).max()) / scale)
        for r, c in _ID_BLOCKS:
            blk = g[sl[r], sl[c]]
            if blk.size:
                err = max(err, float(np.abs(blk - np.eye(blk.shape[0])).max()) / scale)
    vc = Pinv @ rep.v

    def induced(cols):
        idx = np.r_[tuple(np.arange(cuts[k], cuts[k + 1]) for k in cols)]
        return ReflectionRep(rep.alpha @ P[:, idx], vc[idx, :], rep.cartan)

    return BlockDecomposition(U2, K, U1, U3, P, blocks, dims, err,
                              induced((1, 2)), induced((2, 3)), induced((2,)))


def is_invariant_hyperplane(rep: ReflectionRep, phi, tol: float = 1e-9) -> bool:
    """Whether ker(phi) is preserved by every generator."""
    phi = np.asarray(phi, float)
    phi = phi / np.abs(phi).max()
    for g in rep.generators:
        psi = phi @ g
        # psi must be a multiple of phi
        M = np.vstack([phi, psi])
        if np.linalg.svd(M, compute_uv=False)[1] > tol * max(1.0, np.abs(psi).max()):
            return False
    return True


def atilde_model(N: int, a: float):
    """Explicit A~_{N-1} representation of negative type.

    alpha_i = e_i - e_{i+1}, v_i = e_i - e_{i+1} for i < N,
    alpha_N = -e_1/a + e_N and v_N = -a e_1 + e_N.

    Returns
    -------
    (ReflectionRep, ndarray)
        The representation and the zigzag element
        rho((s_1...s_{N-1})(s_{N-2}...s_1) s_N), which is
        Diag(1/a, 1, ..., 1, a).
    """
    if int(N) != N or N < 3:
        raise RepError("N must be an integer >= 3")
    if not (a > 0 and math.isfinite(a)):
        raise RepError("a must be a positive real")
    if a == 1:
        raise RepError("a = 1 gives a zero-type matrix; the model needs a != 1")
    alpha = np.zeros((N, N))
    v = np.zeros((N, N))
    for i in range(N - 1):
        alpha[i, i], alpha[i, i + 1] = 1.0, -1.0
        v[i, i], v[i + 1, i] = 1.0, -1.0
    alpha[N - 1, 0], alpha[N - 1, N - 1] = -1.0 / a, 1.0
    v[0, N - 1], v[N - 1, N - 1] = -a, 1.0
    rep = ReflectionRep(alpha, v, ct.affine_atilde_cartan(N, a))
    return rep, rep.word_matrix(zigzag_word(N))


def zigzag_word(N: int) -> list:
    return list(range(N - 1)) + list(range(N - 3, -1, -1)) + [N - 1]


@dataclass(frozen=True)
class ProximalData:
    t: float
    matrix: np.ndarray
    regime: str
    eigenvalues: Optional[tuple] = None
    x_plus: Optional[np.ndarray] = None
    x_minus: Optional[np.ndarray] = None


def n2_proximal(A: CartanMatrix) -> ProximalData:
    """Eigen-data of rho(s_1 s_2) on span(v_1, v_2) for a 2 x 2 matrix.

    In the basis (v_1, v_2) the element is ``[[t - 1, A12], [-A21, -1]]``
    with t = A12 A21.  For t > 4 it is proximal with eigenvectors
    ``x_pm = (t ± sqrt(t(t-4))) v_1 - 2 A21 v_2``; otherwise the
    ``"unipotent"`` regime marker is returned without eigen-data.
    """
    a = A.entries if isinstance(A, CartanMatrix) else np.asarray(A, float)
    if a.shape != (2, 2):
        raise RepError("n2_proximal needs a 2 x 2 Cartan matrix")
    a12, a21 = float(a[0, 1]), float(a[1, 0])
    t = a12 * a21
    M = np.array([[t - 1.0, a12], [-a21, -1.0]])
    if t <= 4.0:
        return ProximalData(t, M, "unipotent")
    r = math.sqrt(t * (t - 4.0))
    lp, lm = (t - 2.0 + r) / 2.0, (t - 2.0 - r) / 2.0
    xp = np.array([t + r, -2.0 * a21])
    xm = np.array([t - r, -2.0 * a21])
    return ProximalData(t, M, "proximal", (lp, lm), xp, xm)


def nonsemisimple_atilde1_rep() -> ReflectionRep:
    """Non-semisimple Ã_1 realization with t = 4 and V_alpha = 0.

    alpha_1 = (2, 1), alpha_2 = (-2, 0), v_1 = (1, 0), v_2 = (-1, 0); the
    Cartan matrix is the Tits matrix [[2, -2], [-2, 2]].
    """
    alpha = np.array([[2.0, 1.0], [-2.0, 0.0]])
    v = np.array([[1.0, -1.0], [0.0, 0.0]])
    W = ct.atilde_coxeter(2)
    return ReflectionRep(alpha, v, ct.tits_cartan(W))


def rep_to_json(rep: ReflectionRep) -> str:
    payload = {"n": rep.n, "alpha": rep.alpha.tolist(),
               "v": rep.v.T.tolist(),
               "generators": [g.tolist() for g in rep.generators]}
    return json.dumps(payload)


def rep_from_json(text: str, A: Optional[CartanMatrix] = None) -> ReflectionRep:
    d = json.loads(text)
    alpha = np.array(d["alpha"], float)
    v = np.array(d["v"], float).T
    if alpha.shape[1] != int(d["n"]):
        raise RepError("declared n does not match alpha")
    return ReflectionRep(alpha, v, A)
