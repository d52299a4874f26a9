"""Cartan matrices: compatibility, type, diagonal-conjugation invariants."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coxeter import INF, CoxeterMatrix, format_coxeter, parse_coxeter
from . import coxeter as cx

PRODUCT_TOL = 1e-9
ZERO_TYPE_RTOL = 1e-8
PF_RESIDUAL = 1e-12


class CartanError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CartanMatrix:
    """Real N x N matrix paired with its Coxeter matrix."""

    entries: np.ndarray
    coxeter: CoxeterMatrix

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise CartanError("Cartan matrix must be square")
        if a.shape[0] != self.coxeter.N:
            raise CartanError(f"size {a.shape[0]} does not match N={self.coxeter.N}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    @property
    def A(self) -> np.ndarray:
        return self.entries

    def __eq__(self, other):
        return (isinstance(other, CartanMatrix) and self.coxeter == other.coxeter
                and np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash((self.coxeter, self.entries.tobytes()))

    def __repr__(self):
        return f"CartanMatrix({self.entries.tolist()!r}, N={self.N})"


@dataclass(frozen=True)
class Violation:
    clause: str
    i: int
    j: int
    detail: str

    def __str__(self):
        return f"{self.clause} at ({self.i + 1},{self.j + 1}): {self.detail}"


@dataclass(frozen=True)
class TypeReport:
    lowest_eigenvalue: float
    pf_vector: np.ndarray
    type: str
    tolerance_used: float
    dense_eigenvalue: float = math.nan


@dataclass(frozen=True)
class EquivalenceInvariants:
    pair_products: dict
    cycle_products: dict


def tits_entry(m) -> float:
    if m == INF:
        return -2.0
    if m == 2:
        return 0.0
    return -2.0 * math.cos(math.pi / m)


def validate(A: CartanMatrix, W: Optional[CoxeterMatrix] = None, level: str = "full") -> list:
    """Violated clauses of weak compatibility (``level="weak"``) or
    compatibility (``level="full"``); an empty list means valid.
    """
    if level not in ("weak", "full"):
        raise ValueError("level must be 'weak' or 'full'")
    W = A.coxeter if W is None else W
    a = A.entries
    if W.N != A.N:
        raise CartanError("dimension mismatch")
    out = []
    for i in range(A.N):
        if a[i, i] != 2.0:
            out.append(Violation("diagonal", i, i, f"A[i][i]={a[i, i]!r} != 2"))
    for i in range(A.N):
        for j in range(i + 1, A.N):
            m = W.m[i][j]
            aij, aji = a[i, j], a[j, i]
            if m == 2:
                if aij != 0 or aji != 0:
                    out.append(Violation("zero-iff-commuting", i, j,
                                         f"m=2 but entries ({aij:.17g}, {aji:.17g})"))
                continue
            if not (aij < 0 and aji < 0):
                out.append(Violation("negative-off-diagonal", i, j,
                                     f"m={cx._label_str(m)} needs negative entries, "
                                     f"got ({aij:.17g}, {aji:.17g})"))
                continue
            p = aij * aji
            if m != INF:
                target = 4 * math.cos(math.pi / m) ** 2
                if abs(p - target) > PRODUCT_TOL:
                    out.append(Violation("product-4cos2", i, j,
                                         f"product {p:.17g} != {target:.17g}"))
            elif level == "full" and p < 4 - PRODUCT_TOL:
                out.append(Violation("product-ge-4", i, j, f"product {p:.17g} < 4"))
    return out


def is_compatible(A: CartanMatrix, level: str = "full") -> bool:
    return not validate(A, level=level)


def submatrix(A: CartanMatrix, subset: Sequence[int]) -> CartanMatrix:
    s = list(subset)
    if not s:
        raise CartanError("empty subset")
    return CartanMatrix(A.entries[np.ix_(s, s)], A.coxeter.restrict(s))


def _zero_tol(a: np.ndarray) -> float:
    return ZERO_TYPE_RTOL * max(1.0, float(np.abs(a).sum(axis=1).max()))


def _balance(a: np.ndarray) -> np.ndarray:
    """Positive diagonal d with d_i a_ij / d_j symmetric in modulus on a
    spanning forest of the support graph."""
    n = a.shape[0]
    d = np.ones(n)
    seen = np.zeros(n, bool)
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        stack = [root]
        while stack:
            p = stack.pop()
            for c in range(n):
                if not seen[c] and a[p, c] != 0 and a[c, p] != 0:
                    seen[c] = True
                    d[c] = d[p] * math.sqrt(abs(a[p, c] / a[c, p]))
                    stack.append(c)
    return d


def _perron(B: np.ndarray):
    """Largest eigenvalue and positive eigenvector of a nonnegative
    irreducible matrix.

    A dense solve gives the starting guess.  Inverse iteration (power
    iteration on ``(sigma - B)^-1``) then tightens the Collatz-Wielandt
    bracket ``min (Bx)_i/x_i <= rho <= max (Bx)_i/x_i`` below
    ``PF_RESIDUAL`` relative width.
    """
    w, V = np.linalg.eig(B)
    k = int(np.argmax(w.real))
    rho_dense = float(w[k].real)
    x = np.abs(V[:, k].real)
    scale = max(1.0, float(np.abs(B).max()))
    x = np.maximum(x / x.max(), 1e-300)
    eye = np.eye(B.shape[0])
    rho = rho_dense
    for _ in range(20):
        ratios = (B @ x) / x
        lo, hi = float(ratios.min()), float(ratios.max())
        rho = 0.5 * (lo + hi)
        if hi - lo <= PF_RESIDUAL * scale:
            break
        sigma = hi + 1e-9 * scale
        z = np.abs(np.linalg.solve(sigma * eye - B, x))
        x = np.maximum(z / z.max(), 1e-300)
    return rho, x, rho_dense


def matrix_type(A: CartanMatrix, subset: Optional[Sequence[int]] = None) -> TypeReport:
    """Type of an irreducible Cartan matrix from the Perron-Frobenius data
    of ``2 Id - A``.

    Raises
    ------
    CartanError
        If the induced diagram is disconnected or an off-diagonal entry
        is positive.
    """
    if subset is not None:
        A = submatrix(A, subset)
    a = A.entries
    if not A.coxeter.is_connected():
        raise CartanError("matrix_type needs a connected diagram")
    off = a - np.diag(np.diag(a))
    if (off > 0).any():
        raise CartanError("positive off-diagonal entry; not weakly compatible")
    n = A.N
    d = _balance(a)
    b = (d[:, None] * a) / d[None, :]
    B = 2 * np.eye(n) - b
    B[B < 0] = 0.0
    rho, y, rho_dense = _perron(B)
    t = y / d
    t /= t.max()
    lam = 2.0 - rho
    tol = _zero_tol(a)
    kind = "Zero" if abs(lam) <= tol else ("Positive" if lam > 0 else "Negative")
    return TypeReport(lam, t, kind, tol, 2.0 - rho_dense)


def _tree(W: CoxeterMatrix):
    # recursive DFS keeps parent pointers consistent with visiting order
    parent = {}
    order = []

    def visit(v):
        order.append(v)
        for u in W.neighbors(v):
            if u not in parent:
                parent[u] = v
                visit(u)

    for root in range(W.N):
        if root not in parent:
            parent[root] = None
            visit(root)
    return parent, order


def normalize(A: CartanMatrix) -> CartanMatrix:
    """Canonical representative under positive diagonal conjugation.

    Entries on the edges of the DFS spanning tree rooted at the smallest
    vertex are made symmetric (geometric mean of moduli).
    """
    if not A.coxeter.is_connected():
        raise CartanError("normalize needs a connected diagram; normalize per component")
    a = A.entries
    parent, order = _tree(A.coxeter)
    d = np.ones(A.N)
    for v in order:
        p = parent[v]
        if p is not None:
            d[v] = d[p] * math.sqrt(a[p, v] / a[v, p])
    return CartanMatrix((d[:, None] * a) / d[None, :], A.coxeter)


def conjugate(A: CartanMatrix, d) -> CartanMatrix:
    """D A D^{-1} for the positive diagonal D = diag(d)."""
    d = np.asarray(d, float)
    if (d <= 0).any():
        raise CartanError("conjugating diagonal must be positive")
    return CartanMatrix((d[:, None] * A.entries) / d[None, :], A.coxeter)


def _canonical_cycle(cyc):
    k = cyc.index(min(cyc))
    c = cyc[k:] + cyc[:k]
    if c[-1] < c[1]:
        c = [c[0]] + c[1:][::-1]
    return tuple(c)


def fundamental_cycles(W: CoxeterMatrix) -> list:
    """Cycle basis of the diagram from the DFS spanning forest.

    Each cycle is a vertex tuple starting at its smallest vertex, oriented
    towards the smaller of that vertex's two cycle neighbours.
    """
    parent, _ = _tree(W)

    def path_to_root(v):
        out = [v]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return out

    cycles = []
    for i, j, _lab in W.edges():
        if parent.get(j) == i or parent.get(i) == j:
            continue
        pi, pj = path_to_root(i), path_to_root(j)
        common = set(pi) & set(pj)
        lca = next(v for v in pi if v in common)
        up = pi[:pi.index(lca) + 1]
        down = pj[:pj.index(lca)]
        cycles.append(_canonical_cycle(up + down[::-1]))
    return cycles


def cycle_product(A: CartanMatrix, cycle) -> float:
    a = A.entries
    num = den = 1.0
    k = len(cycle)
    for r in range(k):
        i, j = cycle[r], cycle[(r + 1) % k]
        num *= a[i, j]
        den *= a[j, i]
    return float(num / den)


def equivalence_invariants(A: CartanMatrix) -> EquivalenceInvariants:
    """Pair products on diagram edges and cycle products on a cycle basis."""
    a = A.entries
    pairs = {(i, j): float(a[i, j] * a[j, i]) for i, j, _ in A.coxeter.edges()}
    cycles = {c: cycle_product(A, c) for c in fundamental_cycles(A.coxeter)}
    return EquivalenceInvariants(pairs, cycles)


def is_symmetrizable(A: CartanMatrix, tol: float = 1e-9) -> bool:
    inv = equivalence_invariants(A)
    return all(abs(r - 1.0) <= tol for r in inv.cycle_products.values())


def tits_cartan(W: CoxeterMatrix) -> CartanMatrix:
    """Symmetric matrix with entries -2cos(pi/m), and -2 when m is infinite."""
    a = np.array([[2.0 if i == j else tits_entry(W.m[i][j]) for j in range(W.N)]
                  for i in range(W.N)])
    return CartanMatrix(a, W)


def _pair_key(i, j):
    return (min(i, j), max(i, j))


def deformed_tits_cartan(W: CoxeterMatrix, lam: dict) -> CartanMatrix:
    """Tits matrix with -(2 + lam[i,j]) on the infinite pairs.

    Parameters
    ----------
    lam : dict
        Keys are 0-based pairs ``(i, j)`` with ``m[i][j]`` infinite
        (either order); values are nonnegative.

    Raises
    ------
    CartanError
        On missing or extra keys, or a negative value.
    """
    want = {(i, j) for i, j, m in W.edges() if m == INF}
    got = {}
    for k, v in lam.items():
        key = _pair_key(*k)
        if key in got:
            raise CartanError(f"duplicate key {k}")
        got[key] = float(v)
    if set(got) != want:
        missing = sorted(want - set(got))
        extra = sorted(set(got) - want)
        raise CartanError(f"lambda keys must be the infinite pairs; missing {missing}, extra {extra}")
    a = tits_cartan(W).entries.copy()
    for (i, j), v in got.items():
        if v < 0:
            raise CartanError(f"negative lambda at {(i, j)}")
        a[i, j] = a[j, i] = -(2.0 + v)
    return CartanMatrix(a, W)


def _primes():
    n = 2
    while True:
        if all(n % p for p in range(2, int(n ** 0.5) + 1)):
            yield n
        n += 1


GENERIC_INF_ENTRY = -2.5


def generic_cc_cartan(W: CoxeterMatrix) -> CartanMatrix:
    """A compatible Cartan matrix that is convex cocompact for W.

    Infinite pairs get the symmetric entry -2.5.  The pairs labelled 3
    get ``A[i][j] = -t``, ``A[j][i] = -1/t`` with distinct primes
    t = 2, 3, 5, ... in edge order, so no product of the t's over one set of
    edges can equal a product over a disjoint set.

    Raises
    ------
    CoxeterError
        If W is reducible, finite, or fails ¬(IC) or (Ã).
    """
    if not cx.admits_cc_reflection_rep(W):
        raise cx.CoxeterError("generic_cc_cartan needs W satisfying ¬(IC) and (Ã)")
    a = tits_cartan(W).entries.copy()
    primes = _primes()
    for i, j, m in W.edges():
        if m == INF:
            a[i, j] = a[j, i] = GENERIC_INF_ENTRY
        elif m == 3:
            t = float(next(primes))
            a[i, j] = -t
            a[j, i] = -1.0 / t
    return CartanMatrix(a, W)


def atilde_coxeter(N: int) -> CoxeterMatrix:
    if N == 2:
        return CoxeterMatrix.from_edges(2, [(0, 1, INF)])
    return CoxeterMatrix.from_edges(N, [(i, (i + 1) % N, 3) for i in range(N)])


def affine_atilde_cartan(N: int, a: float) -> CartanMatrix:
    """Cyclic Cartan matrix of type A~_{N-1} with corners -a and -1/a.

    Its determinant is ``2 - a - 1/a``.
    """
    if int(N) != N or N < 3:
        raise CartanError("N must be an integer >= 3")
    if not (a > 0 and math.isfinite(a)):
        raise CartanError("a must be a positive real")
    m = 2 * np.eye(N)
    for i in range(N - 1):
        m[i, i + 1] = m[i + 1, i] = -1.0
    m[0, N - 1] = -a
    m[N - 1, 0] = -1.0 / a
    return CartanMatrix(m, atilde_coxeter(N))


def cartan_to_json(A: CartanMatrix) -> str:
    payload = {"n": A.N, "coxeter": format_coxeter(A.coxeter),
               "entries": A.entries.tolist()}
    return json.dumps(payload, indent=1)


def cartan_from_json(text: str, base_dir=None) -> CartanMatrix:
    """Read the ``.cartan`` JSON format.  ``coxeter`` holds either an
    inline ``.cox`` payload or a path (relative to ``base_dir``)."""
    try:
        d = json.loads(text)
        n = int(d["n"])
        cox = d["coxeter"]
        entries = d["entries"]
    except (ValueError, KeyError, TypeError) as e:
        raise CartanError(f"malformed .cartan payload: {e}") from None
    if "\n" not in cox.strip() and not cox.strip().isdigit():
        from pathlib import Path
        p = Path(cox)
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        cox = p.read_text()
    W = parse_coxeter(cox)
    A = CartanMatrix(np.array(entries, float), W)
    if A.N != n:
        raise CartanError(f"declared n={n} but matrix is {A.N}x{A.N}")
    return A
