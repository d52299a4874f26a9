"""Shared test fixtures: hand-built diagram families and random pairs."""
import itertools
import math

import numpy as np

from coxcc import coxeter as cx
from coxcc.cartan import CartanMatrix, conjugate
from coxcc.coxeter import INF, CoxeterMatrix


def path(n, labels=None):
    labels = labels or [3] * (n - 1)
    return [(i, i + 1, labels[i]) for i in range(n - 1)]


def spherical_families(max_rank=9):
    """(name, W) for the finite irreducible families."""
    out = []
    E = CoxeterMatrix.from_edges
    for n in range(1, max_rank + 1):
        out.append((f"A{n}", E(n, path(n))))
    for n in range(2, max_rank + 1):
        out.append((f"B{n}", E(n, path(n, [3] * (n - 2) + [4]))))
    for n in range(4, max_rank + 1):
        out.append((f"D{n}", E(n, path(n - 1) + [(n - 3, n - 1, 3)])))
    for n in (6, 7, 8):
        out.append((f"E{n}", E(n, path(n - 1) + [(2, n - 1, 3)])))
    out.append(("F4", E(4, path(4, [3, 4, 3]))))
    out.append(("H3", E(3, path(3, [5, 3]))))
    out.append(("H4", E(4, path(4, [5, 3, 3]))))
    for p in (5, 6, 7, 100):
        out.append((f"I2({p})", E(2, [(0, 1, p)])))
    return out


def _arms(lengths):
    edges, nxt = [], 1
    for L in lengths:
        prev = 0
        for _ in range(L):
            edges.append((prev, nxt, 3))
            prev, nxt = nxt, nxt + 1
    return nxt, edges


def affine_families(max_rank=8):
    """(name, W) for the affine irreducible families; rank = nodes - 1."""
    out = []
    E = CoxeterMatrix.from_edges
    out.append(("A~1", E(2, [(0, 1, INF)])))
    for n in range(2, max_rank + 1):
        out.append((f"A~{n}", E(n + 1, [(i, (i + 1) % (n + 1), 3) for i in range(n + 1)])))
    for n in range(3, max_rank + 1):
        # fork (0, 1) at node 2, path 2..n, last edge labelled 4
        edges = [(0, 2, 3), (1, 2, 3)] + [(i, i + 1, 3) for i in range(2, n - 1)] + [(n - 1, n, 4)]
        out.append((f"B~{n}", E(n + 1, edges)))
    for n in range(2, max_rank + 1):
        out.append((f"C~{n}", E(n + 1, path(n + 1, [4] + [3] * (n - 2) + [4]))))
    for n in range(4, max_rank + 1):
        edges = [(0, 2, 3), (1, 2, 3)] + [(i, i + 1, 3) for i in range(2, n - 2)]
        edges += [(n - 2, n - 1, 3), (n - 2, n, 3)]
        out.append((f"D~{n}", E(n + 1, edges)))
    for name, arms in (("E~6", (2, 2, 2)), ("E~7", (1, 3, 3)), ("E~8", (1, 2, 5))):
        k, edges = _arms(arms)
        out.append((name, E(k, edges)))
    out.append(("F~4", E(5, path(5, [3, 3, 4, 3]))))
    out.append(("G~2", E(3, path(3, [3, 6]))))
    return out


LABELS = (2, 2, 2, 3, 3, 3, 4, 5, 6, INF, INF)


def random_admissible_diagram(rng, N):
    """Irreducible infinite W satisfying not-(IC) and (A~)."""
    while True:
        edges = [(i, j, LABELS[rng.integers(len(LABELS))])
                 for i, j in itertools.combinations(range(N), 2)]
        W = CoxeterMatrix.from_edges(N, [e for e in edges if e[2] != 2])
        if len(cx.irreducible_components(W)) != 1 or cx.is_finite(W):
            continue
        if cx.admits_cc_reflection_rep(W):
            return W


def random_compatible(rng, W, boundary_p=0.35):
    """Random compatible Cartan matrix.

    With probability ``boundary_p`` the infinite pairs get product exactly
    4; independently the matrix is either generic or a diagonal conjugate
    of a symmetric one (so label-3 cycle products are exactly 1).
    """
    N = W.N
    sym = rng.random() < 0.4
    a = 2.0 * np.eye(N)
    for i, j, m in W.edges():
        r = 1.0 if sym else math.exp(rng.normal(0, 0.6))
        if m == INF:
            if rng.random() < boundary_p:
                k = 1.0 if sym else float(2.0 ** rng.integers(-2, 3))
                a[i, j], a[j, i] = -2.0 * k, -2.0 / k
                continue
            p = 4.0 + rng.exponential(3.0)
        else:
            p = 4.0 * math.cos(math.pi / m) ** 2
        a[i, j], a[j, i] = -math.sqrt(p) * r, -math.sqrt(p) / r
    A = CartanMatrix(a, W)
    if sym:
        A = conjugate(A, np.exp(rng.normal(0, 0.7, N)))
    return A


def random_pair(rng, max_N=6):
    N = int(rng.integers(2, max_N + 1))
    W = random_admissible_diagram(rng, N)
    return W, random_compatible(rng, W)


def normal_form_count(depth):
    """Elements of length <= depth in <s0,s1,s2 | si^2, (s0 s2)^2> by
    brute-force rewriting (ii -> e, 20 -> 02) of all words."""
    seen = set()
    for L in range(depth + 1):
        for w in itertools.product(range(3), repeat=L):
            w = list(w)
            changed = True
            while changed:
                changed = False
                for k in range(len(w) - 1):
                    if w[k] == w[k + 1]:
                        del w[k:k + 2]
                        changed = True
                        break
                    if w[k] == 2 and w[k + 1] == 0:
                        w[k], w[k + 1] = 0, 2
                        changed = True
                        break
            seen.add(tuple(w))
    return len(seen)
