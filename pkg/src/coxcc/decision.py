"""Convex cocompactness verdicts for reflection groups.

Two independent routes decide the condition on Cartan submatrices:

* the zero-type route scans every connected subset and classifies the
  submatrix by its lowest eigenvalue;
* the determinant route only looks at the infinite pairs (product > 4)
  and at induced cycles labelled 3 (cycle product != 1).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import cartan as ct
from . import coxeter as cx
from .cartan import CartanMatrix
from .coxeter import INF, CoxeterMatrix

TOL_STRICT = 1e-7


class DecisionError(ValueError):
    pass


class IncompatibleCartan(DecisionError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("incompatible Cartan matrix: " + "; ".join(map(str, violations)))


@dataclass
class Witness:
    condition: str
    subset: tuple
    value: Optional[float] = None
    boundary: bool = False
    detail: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.subset and isinstance(self.subset[0], tuple):
            d["subset"] = [list(cx.one_based(s)) for s in self.subset]
        else:
            d["subset"] = list(cx.one_based(self.subset))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        sub = d["subset"]
        if sub and isinstance(sub[0], list):
            subset = tuple(tuple(i - 1 for i in s) for s in sub)
        else:
            subset = tuple(i - 1 for i in sub)
        return cls(d["condition"], subset, d.get("value"), d.get("boundary", False),
                   d.get("detail", ""))


@dataclass
class CCVerdict:
    exists_cc_rep: bool
    ncc: bool
    cc: bool
    scc: bool
    anosov: bool
    witnesses: list = field(default_factory=list)
    routes: dict = field(default_factory=dict)
    affine_case: Optional[dict] = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "exists": self.exists_cc_rep,
            "ncc": self.ncc,
            "cc": self.cc,
            "scc": self.scc,
            "anosov": self.anosov,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "routes": dict(self.routes),
            "affine_case": self.affine_case,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CCVerdict":
        return cls(d["exists"], d["ncc"], d["cc"], d["scc"], d["anosov"],
                   [Witness.from_dict(w) for w in d.get("witnesses", [])],
                   dict(d.get("routes", {})), d.get("affine_case"), d.get("reason", ""))


def _require_irreducible_infinite(W: CoxeterMatrix):
    comps = cx.irreducible_components(W)
    if len(comps) != 1:
        raise DecisionError("W is reducible; decide each irreducible component separately")
    if cx.classify_component(comps[0]).is_finite:
        raise DecisionError("W is finite")


def exists_verdict(W: CoxeterMatrix):
    """Whether W admits a convex cocompact reflection representation.

    Returns
    -------
    (bool, str, Witness or None)
        The reason names the violated condition.
    """
    _require_irreducible_infinite(W)
    ic, pair = cx.condition_IC(W)
    if ic:
        return False, "(IC)", Witness("IC", pair, detail="disjoint commuting infinite subsets")
    ok, bad = cx.condition_Atilde(W)
    if not ok:
        g = cx.classify_subset(W, bad)
        return False, "(Ã)", Witness("Atilde", bad, detail=f"affine subset of type {g.name}")
    return True, "¬(IC) and (Ã) hold", None


def label3_cycles(W: CoxeterMatrix) -> list:
    """Induced simple cycles of length >= 3 whose edges are all labelled 3.

    Each cycle starts at its smallest vertex and is listed once.
    """
    adj3 = {i: [j for j in range(W.N) if W.m[i][j] == 3] for i in range(W.N)}
    out = []

    def induced(cyc):
        k = len(cyc)
        es = sum(1 for a in range(k) for b in range(a + 1, k) if W.m[cyc[a]][cyc[b]] >= 3)
        return es == k

    def dfs(start, path, on_path):
        cur = path[-1]
        for nxt in adj3[cur]:
            if nxt == start and len(path) >= 3:
                if path[1] < path[-1] and induced(path):
                    out.append(tuple(path))
            elif nxt > start and nxt not in on_path:
                on_path.add(nxt)
                path.append(nxt)
                dfs(start, path, on_path)
                path.pop()
                on_path.discard(nxt)

    for s in range(W.N):
        dfs(s, [s], {s})
    return sorted(out, key=lambda c: (len(c), sorted(c)))


def zd_route(W: CoxeterMatrix, A: CartanMatrix, tol: float = TOL_STRICT):
    """Determinant route: infinite-pair products and label-3 cycle products.

    Returns ``(ok, witnesses)``; a value within ``tol`` of the threshold
    counts as failing, with the boundary flag set.
    """
    a = A.entries
    wit = []
    for i, j, m in W.edges():
        if m != INF:
            continue
        p = float(a[i, j] * a[j, i])
        if not p > 4 + tol:
            wit.append(Witness("ZD-pair", (i, j), p, abs(p - 4) <= tol,
                               "infinite pair with product not > 4"))
    for cyc in label3_cycles(W):
        r = ct.cycle_product(A, cyc)
        if abs(r - 1) <= tol:
            wit.append(Witness("ZD-cycle", tuple(sorted(cyc)), r, True,
                               f"A~{len(cyc) - 1} cycle with cycle product 1"))
    return not wit, wit


def zt_route(W: CoxeterMatrix, A: CartanMatrix):
    """Zero-type route: exhaustive scan of connected subsets."""
    wit = []
    for s in cx.connected_subsets(W):
        if len(s) < 2:
            continue
        rep = ct.matrix_type(A, s)
        if rep.type == "Zero":
            wit.append(Witness("ZT", s, rep.lowest_eigenvalue, True,
                               f"zero-type submatrix (tolerance {rep.tolerance_used:.1e})"))
    return not wit, wit


def _check_pair(W: CoxeterMatrix, A: CartanMatrix):
    if A.coxeter != W:
        raise DecisionError("Cartan matrix is paired with a different Coxeter matrix")
    bad = ct.validate(A, W, "full")
    if bad:
        raise IncompatibleCartan(bad)


def decide(W: CoxeterMatrix, A: CartanMatrix, tol_strict: float = TOL_STRICT) -> CCVerdict:
    """Full verdict for an irreducible infinite W and a compatible A.

    Raises
    ------
    IncompatibleCartan
        If A is not compatible with W.
    DecisionError
        If W is reducible or finite.
    """
    _check_pair(W, A)
    _require_irreducible_infinite(W)
    if cx.classify(W)[0].kind == "affine":
        return decide_affine(W, A, tol_strict)
    exists, reason, gw = exists_verdict(W)
    if not exists:
        return CCVerdict(False, False, False, False, False, [gw], {},
                         reason=f"group obstruction: {reason}")
    zd_ok, zd_w = zd_route(W, A, tol_strict)
    zt_ok, zt_w = zt_route(W, A)
    routes = {"zt": zt_ok, "zd": zd_ok, "agree": zt_ok == zd_ok}
    cc = zd_ok and zt_ok
    hyp = cx.is_word_hyperbolic(W)
    scc = cc and hyp
    if cc:
        reason = "no zero-type standard subgroup"
    else:
        reason = "zero-type or singular Cartan submatrix"
    if not routes["agree"]:
        reason += "; tolerance fault: routes disagree"
    return CCVerdict(True, cc, cc, scc, scc, zd_w + zt_w, routes, reason=reason)


def reduced_realization(A: CartanMatrix):
    """Generators of the realization with alpha_i = e_i and v_j = A[:, j].

    The alphas form a basis, so the fundamental cone is the negative
    orthant; this works for any type, including zero type.
    """
    a = A.entries
    n = A.N
    return [np.eye(n) - np.outer(a[:, i], np.eye(n)[i]) for i in range(n)]


def _root_of_unity_order(z: complex, qmax: int = 60, tol: float = 1e-4) -> Optional[int]:
    # loose tolerance: eigenvalues in Jordan blocks split by ~eps^(1/k)
    if abs(abs(z) - 1) > tol:
        return None
    theta = math.atan2(z.imag, z.real)
    f = Fraction(theta / (2 * math.pi)).limit_denominator(qmax)
    if abs(float(f) * 2 * math.pi - theta) > tol:
        return None
    return f.denominator


def unipotent_screen(A: CartanMatrix):
    """Look for a nontrivial unipotent power of the Coxeter element in the
    reduced realization.  Returns ``(found, exponent)``."""
    gens = reduced_realization(A)
    c = np.eye(A.N)
    for g in gens:
        c = c @ g
    orders = []
    for z in np.linalg.eigvals(c):
        q = _root_of_unity_order(complex(z))
        if q is None:
            return False, None
        orders.append(q)
    e = 1
    for q in orders:
        e = e * q // math.gcd(e, q)
    p = np.linalg.matrix_power(c, e)
    d = p - np.eye(A.N)
    scale = max(1.0, float(np.abs(p).max()))
    nontrivial = float(np.abs(d).max()) > 1e-6 * scale
    nilpotent = float(np.abs(np.linalg.matrix_power(d / scale, A.N)).max()) <= 1e-8
    return nontrivial and nilpotent, e


def decide_affine(W: CoxeterMatrix, A: CartanMatrix, tol_strict: float = TOL_STRICT) -> CCVerdict:
    """Verdict for an affine irreducible W.

    Convex cocompact exactly when W is of type A~_{N-1} and A is of
    negative type with nonzero determinant.  The unipotent-free,
    non-zero-type and nonzero-determinant conditions are evaluated
    separately and must agree.
    """
    _check_pair(W, A)
    g = cx.classify(W)
    if len(g) != 1 or g[0].kind != "affine":
        raise DecisionError("decide_affine needs an affine irreducible W")
    g = g[0]
    atilde = g.is_atilde(W.N - 1)
    mt = ct.matrix_type(A)
    det = float(np.linalg.det(A.entries))
    found, expo = unipotent_screen(A)
    conds = {
        "unipotent_free": not found,
        "not_zero_type": mt.type != "Zero",
        "det_nonzero": abs(det) > tol_strict,
        "atilde_negative": atilde and mt.type == "Negative",
    }
    cc = atilde and mt.type == "Negative" and abs(det) > tol_strict
    consistent = all(v == cc for v in conds.values())
    exists = cx.admits_cc_reflection_rep(W)
    routes, zd_w, zt_w = {}, [], []
    if exists:
        zd_ok, zd_w = zd_route(W, A, tol_strict)
        zt_ok, zt_w = zt_route(W, A)
        routes = {"zt": zt_ok, "zd": zd_ok, "agree": zt_ok == zd_ok}
    wit = []
    if not atilde:
        wit.append(Witness("affine-type", tuple(range(W.N)), None, False,
                           f"affine type {g.name} is not A~{W.N - 1}"))
    if mt.type != "Negative":
        wit.append(Witness("type", tuple(range(W.N)), mt.lowest_eigenvalue,
                           mt.type == "Zero", f"{mt.type} type"))
    affine_case = {
        "family": g.name,
        "atilde": atilde,
        "type": mt.type,
        "lowest_eigenvalue": mt.lowest_eigenvalue,
        "det": det,
        "unipotent_free": not found,
        "unipotent_exponent": expo,
        "conditions": conds,
        "consistent": consistent,
    }
    reason = "affine case"
    if not consistent:
        reason += "; inconsistent affine conditions"
    return CCVerdict(exists, cc, cc, False, False, wit + zd_w + zt_w, routes,
                     affine_case, reason)
