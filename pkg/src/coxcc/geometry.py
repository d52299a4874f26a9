"""Cones, orbits and pictures for reflection representations.

The fundamental cone is ``{x : alpha_i(x) <= 0}`` and the dual cone is
the nonnegative span of the v_j.  Orbits are enumerated breadth first
with matrices as faithful element labels.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cartan as ct
from . import coxeter as cx
from .cartan import CartanMatrix
from .coxeter import CoxeterMatrix
from .reflection import ReflectionRep

DEDUP_RTOL = 1e-6
MAX_ORBIT_DEPTH = 12
MAX_RENDER_DEPTH = 10
SIGMA_TOL = 1e-9
WITNESS_TOL = 1e-8


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class PolyCone:
    """Cone given by inequalities ``c(x) <= 0`` or by generators."""

    kind: str
    data: np.ndarray

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, float)
        if self.kind == "inequalities":
            vals = self.data @ x
            return bool((vals <= tol * max(1.0, float(np.abs(x).max()))).all())
        if self.kind == "generators":
            t, *_ = np.linalg.lstsq(self.data, x, rcond=None)
            if np.abs(self.data @ t - x).max() > 1e-9 * max(1.0, float(np.abs(x).max())):
                return False
            return bool((t >= -tol * max(1.0, float(np.abs(t).max()))).all())
        raise GeometryError(f"unknown cone kind {self.kind!r}")


def fundamental_cone(rep: ReflectionRep) -> PolyCone:
    return PolyCone("inequalities", rep.alpha)


def dual_cone(rep: ReflectionRep) -> PolyCone:
    return PolyCone("generators", rep.v)


def _v_independent(rep: ReflectionRep) -> bool:
    s = np.linalg.svd(rep.v, compute_uv=False)
    return rep.N <= rep.n and s[-1] > 1e-9 * s[0]


def v_coordinates(rep: ReflectionRep, x) -> np.ndarray:
    """Coordinates t with x = sum t_j v_j (v's must be independent)."""
    if not _v_independent(rep):
        raise GeometryError("v_1..v_N are linearly dependent")
    t, *_ = np.linalg.lstsq(rep.v, np.asarray(x, float), rcond=None)
    return t


@dataclass
class PrunedDomain:
    """Pruned fundamental cone: alpha_i(x) <= 0 and t_j >= 0."""

    rep: ReflectionRep
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.x0 is None and self.rep.cartan is not None:
            from .reflection import interior_point
            self.x0 = interior_point(self.rep.cartan, self.rep.v)

    def in_delta(self, x) -> bool:
        return fundamental_cone(self.rep).contains(x, SIGMA_TOL)

    def in_sigma(self, x) -> bool:
        t = v_coordinates(self.rep, x)
        scale = max(1.0, float(np.abs(t).max()))
        return self.in_delta(x) and bool((t >= -SIGMA_TOL * scale).all())

    def in_sigma_flat(self, x) -> bool:
        t = v_coordinates(self.rep, x)
        scale = max(1.0, float(np.abs(t).max()))
        return self.in_delta(x) and bool((t > SIGMA_TOL * scale).all())


@dataclass
class Tiling:
    rep: ReflectionRep
    words: list
    matrices: np.ndarray
    lengths: list
    right: list
    depth: int
    dedup_tol: float
    warnings: list = field(default_factory=list)

    @property
    def elements(self) -> list:
        return list(zip(self.words, self.matrices))

    def __len__(self):
        return len(self.words)

    def word_str(self, k: int) -> str:
        w = self.words[k]
        return " ".join(f"s{i + 1}" for i in w) if w else "e"

    def to_jsonl(self) -> str:
        lines = [json.dumps({"word": self.word_str(k), "matrix": self.matrices[k].tolist()})
                 for k in range(len(self))]
        return "\n".join(lines) + "\n"


def _normalized(M: np.ndarray) -> np.ndarray:
    return (M / np.abs(M).max()).ravel()


def orbit(rep: ReflectionRep, depth: int, tol: float = DEDUP_RTOL) -> Tiling:
    """All elements of word length <= depth, breadth first.

    Elements are identified by their matrices, compared after dividing
    by the max-abs entry.  Words are the lexicographically first reduced
    words, ordered by length then lexicographically.

    Raises
    ------
    GeometryError
        If ``depth`` exceeds the budget.
    """
    if depth < 0 or depth > MAX_ORBIT_DEPTH:
        raise GeometryError(f"orbit depth must be in 0..{MAX_ORBIT_DEPTH}")
    n, N = rep.n, rep.N
    gens = rep.generators
    words = [()]
    mats = [np.eye(n)]
    lengths = [0]
    right = [[-1] * N]
    notes = []
    prev_idx: list = []
    frontier = [0]
    for L in range(1, depth + 1):
        prev_arr = np.array([_normalized(mats[k]) for k in prev_idx]) if prev_idx else None
        new_idx: list = []
        new_arr = np.empty((len(frontier) * N, n * n))
        for k in frontier:
            for i in range(N):
                if right[k][i] >= 0:
                    continue
                M = mats[k] @ gens[i]
                key = _normalized(M)
                hit = -1
                for pool, idx in ((prev_arr, prev_idx), (new_arr[:len(new_idx)], new_idx)):
                    if pool is None or len(idx) == 0:
                        continue
                    d = np.abs(pool - key).max(axis=1)
                    j = int(np.argmin(d))
                    if d[j] <= tol:
                        hit = idx[j]
                        break
                    if d[j] <= 10 * tol:
                        msg = f"dedup near-collision at {d[j]:.2e} (tolerance {tol:.0e})"
                        notes.append(msg)
                        warnings.warn(msg)
                if hit < 0:
                    hit = len(words)
                    words.append(words[k] + (i,))
                    mats.append(M)
                    lengths.append(L)
                    right.append([-1] * N)
                    new_arr[len(new_idx)] = key
                    new_idx.append(hit)
                right[k][i] = hit
                right[hit][i] = k
        prev_idx, frontier = frontier, new_idx
    return Tiling(rep, words, np.array(mats), lengths, right, depth, tol, notes)


def length_property_check(rep: ReflectionRep, depth: int) -> dict:
    """Compare ``l(g s_i) > l(g)`` with ``rho(g) v_i`` lying in the
    nonnegative span of the v's, for every g of length <= depth.
    """
    if not _v_independent(rep):
        return {"skipped": True, "reason": "v's linearly dependent", "disagreements": []}
    T = orbit(rep, depth + 1)
    bad = []
    checked = 0
    for k in range(len(T)):
        if T.lengths[k] > depth:
            continue
        for i in range(rep.N):
            j = T.right[k][i]
            longer = T.lengths[j] > T.lengths[k]
            t = v_coordinates(rep, T.matrices[k] @ rep.v[:, i])
            in_cone = bool((t >= -1e-9 * max(1.0, float(np.abs(t).max()))).all())
            checked += 1
            if longer != in_cone:
                bad.append({"word": T.word_str(k), "generator": i + 1,
                            "longer": longer, "in_cone": in_cone})
    return {"skipped": False, "checked": checked, "disagreements": bad}


def delta_membership_check(rep: ReflectionRep, samples, depth: int) -> dict:
    """Inequality test for the fundamental cone against the orbit test
    ``rho(g)x - x`` in the dual cone for every enumerated g.

    The orbit test is only a necessary condition at finite depth, so a
    point accepted by the inequalities must never be refuted by it.
    """
    if not _v_independent(rep):
        raise GeometryError("v_1..v_N are linearly dependent")
    T = orbit(rep, depth)
    out = []
    for x in samples:
        x = np.asarray(x, float)
        vals = rep.alpha @ x
        ineq = bool((vals <= 1e-12 * max(1.0, float(np.abs(x).max()))).all())
        orbit_ok = True
        for M in T.matrices:
            t = v_coordinates(rep, M @ x - x)
            if (t < -1e-9 * max(1.0, float(np.abs(t).max()), float(np.abs(x).max()))).any():
                orbit_ok = False
                break
        out.append({"inequality": ineq, "orbit": orbit_ok, "violation": ineq and not orbit_ok})
    return {"depth": depth, "results": out,
            "violations": sum(r["violation"] for r in out)}


@dataclass
class SigmaBoundary:
    touches_boundary: bool
    condition: Optional[str] = None
    subset: Optional[tuple] = None
    t: Optional[np.ndarray] = None
    point: Optional[np.ndarray] = None
    alpha_values: Optional[np.ndarray] = None
    stabilizer: Optional[tuple] = None
    stabilizer_infinite: Optional[bool] = None

    def to_dict(self) -> dict:
        d = {"touches_boundary": self.touches_boundary}
        if self.touches_boundary:
            sub = self.subset
            if sub and isinstance(sub[0], tuple):
                sub = [list(cx.one_based(s)) for s in sub]
            else:
                sub = list(cx.one_based(sub))
            d.update({"condition": self.condition, "subset": sub,
                      "t": self.t.tolist(), "alpha_values": self.alpha_values.tolist(),
                      "stabilizer": list(cx.one_based(self.stabilizer)),
                      "stabilizer_infinite": self.stabilizer_infinite})
        return d


def sigma_boundary_test(W: CoxeterMatrix, A: CartanMatrix) -> SigmaBoundary:
    """Whether the pruned domain meets the boundary of the Tits-Vinberg
    domain, with a Perron-Frobenius witness point when it does.

    Raises
    ------
    GeometryError
        If W is reducible or A is not of negative type.
    """
    if len(cx.irreducible_components(W)) != 1:
        raise GeometryError("W must be irreducible")
    if ct.matrix_type(A).type != "Negative":
        raise GeometryError("A must be of negative type")
    a = A.entries
    N = A.N
    ic, pair = cx.condition_IC(W)
    if ic:
        support, zero_on, cond, subset = pair[0], pair[1], "IC", pair
    else:
        found = None
        for s in cx.connected_subsets(W):
            if len(s) >= 2 and ct.matrix_type(A, s).type == "Zero":
                found = s
                break
        if found is None:
            return SigmaBoundary(False)
        support, zero_on, cond, subset = found, found, "ZT", found
    t = np.zeros(N)
    t[list(support)] = ct.matrix_type(A, support).pf_vector
    vals = a @ t
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(vals[list(zero_on)]).max() > WITNESS_TOL * scale or vals.max() > WITNESS_TOL * scale:
        raise GeometryError("witness point failed its own check")
    stab = tuple(i for i in range(N) if abs(vals[i]) <= WITNESS_TOL * scale)
    point = None
    try:
        from .reflection import build_rep
        point = build_rep(A).v @ t
    except ValueError:
        pass
    return SigmaBoundary(True, cond, subset, t, point, vals, stab, not cx.is_finite(W, stab))


def _convex_halfplanes(poly: np.ndarray):
    P = np.asarray(poly, float)
    k = len(P)
    if k < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    area = 0.5 * sum(P[i, 0] * P[(i + 1) % k, 1] - P[(i + 1) % k, 0] * P[i, 1] for i in range(k))
    if area == 0:
        raise GeometryError("degenerate polygon")
    sgn = 1.0 if area > 0 else -1.0
    normals, offsets = [], []
    for i in range(k):
        e = P[(i + 1) % k] - P[i]
        nrm = sgn * np.array([e[1], -e[0]])
        normals.append(nrm)
        offsets.append(nrm @ P[i])
        turn = e[0] * (P[(i + 2) % k] - P[(i + 1) % k])[1] - e[1] * (P[(i + 2) % k] - P[(i + 1) % k])[0]
        if sgn * turn < 0:
            raise GeometryError("polygon is not convex")
    return np.array(normals), np.array(offsets)


def hilbert_distance(polygon, y, z) -> float:
    """Hilbert distance in a convex polygon.

    ``1/2 log(|az|/|ay| * |yb|/|zb|)`` where a, y, z, b lie in this order
    on the line through y and z, with a and b on the boundary.

    Raises
    ------
    GeometryError
        If the polygon is not convex or y, z are not strictly inside.
    """
    nrm, off = _convex_halfplanes(polygon)
    y = np.asarray(y, float)
    z = np.asarray(z, float)
    scale = max(1.0, float(np.abs(np.asarray(polygon, float)).max()))
    for p in (y, z):
        if (nrm @ p - off >= -1e-12 * scale * np.linalg.norm(nrm, axis=1)).any():
            raise GeometryError("point on or outside the boundary")
    d = z - y
    if not np.any(d):
        return 0.0
    # y + s d is inside iff s (n.d) <= off - n.y
    nd = nrm @ d
    slack = off - nrm @ y
    s_hi = min(slack[k] / nd[k] for k in range(len(nd)) if nd[k] > 0)
    s_lo = max(slack[k] / nd[k] for k in range(len(nd)) if nd[k] < 0)
    # |az| = 1 - s_lo, |ay| = -s_lo, |yb| = s_hi, |zb| = s_hi - 1 (units of |d|)
    return 0.5 * math.log(((1 - s_lo) / (-s_lo)) * (s_hi / (s_hi - 1)))


def _cone_rays(C: np.ndarray) -> np.ndarray:
    """Unit extreme rays of the pointed 3D cone ``{y : C y <= 0}``."""
    rays = []
    cn = np.linalg.norm(C, axis=1)
    for a in range(len(C)):
        for b in range(a + 1, len(C)):
            r = np.cross(C[a], C[b])
            nr = np.linalg.norm(r)
            if nr <= 1e-12 * cn[a] * cn[b]:
                continue
            r = r / nr
            for sgn in (1.0, -1.0):
                if ((C @ (sgn * r)) <= 1e-9 * cn).all():
                    q = sgn * r
                    if not any(np.abs(q - u).max() < 1e-9 for u in rays):
                        rays.append(q)
    return np.array(rays)


def _cyclic(rays: np.ndarray) -> np.ndarray:
    axis = rays.sum(axis=0)
    axis /= np.linalg.norm(axis)
    u = np.linalg.svd(axis[None, :])[2][1:]
    ang = np.arctan2(rays @ u[1], rays @ u[0])
    return rays[np.argsort(ang, kind="stable")]


CLIP_EPS = 1e-3


def _clip(poly: np.ndarray, phi: np.ndarray, eps: float) -> np.ndarray:
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp, fq = phi @ p - eps, phi @ q - eps
        if fp >= 0:
            out.append(p)
        if (fp >= 0) != (fq >= 0):
            s = fp / (fp - fq)
            out.append(p + s * (q - p))
    return np.array(out)


@dataclass
class Chart:
    """Affine chart ``{phi = 1}`` with an orthonormal frame of ker(phi).

    For n = 4 a 4 x 3 ``slice_basis`` selects a projective plane.
    """

    phi: np.ndarray
    slice_basis: Optional[np.ndarray] = None

    def frame(self):
        f = self.phi_local()
        e = np.linalg.svd(f[None, :])[2][1:]
        return f, e

    def phi_local(self) -> np.ndarray:
        return self.phi if self.slice_basis is None else self.phi @ self.slice_basis


def default_chart(rep: ReflectionRep, slice_basis=None) -> Chart:
    """Chart dual to minus the sum of the walls, positive on the cone."""
    return Chart(-rep.alpha.sum(axis=0), slice_basis)


def _tile_polygon(C, phi, frame, eps=CLIP_EPS):
    rays = _cone_rays(C)
    if len(rays) < 3:
        return None, False
    rays = _cyclic(rays)
    f = rays @ phi
    if (f < 0).all():
        rays = -rays
        f = -f
    clipped = False
    if (f < eps).any():
        rays = _clip(rays, phi, eps)
        clipped = True
        if len(rays) < 3:
            return None, True
    pts = rays / (rays @ phi)[:, None]
    return np.column_stack([pts @ frame[0], pts @ frame[1]]), clipped


def _fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def _path(pts) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in pts)


def render_svg(tiling: Tiling, out=None, chart: Optional[Chart] = None,
               slice_basis=None) -> str:
    """SVG drawing of the tiling in an affine chart.

    Translates of the fundamental polygon are drawn in light grey, the
    pruned domain in dark grey and the convex hull of all tile vertices
    as a dashed outline approximating the domain boundary.

    Raises
    ------
    GeometryError
        For n other than 3 (or 4 with a 3-dimensional slice), or depth
        beyond the rendering budget.
    """
    rep = tiling.rep
    if tiling.depth > MAX_RENDER_DEPTH:
        raise GeometryError(f"render depth capped at {MAX_RENDER_DEPTH}")
    if rep.n == 3:
        B = np.eye(3)
    elif rep.n == 4 and slice_basis is not None:
        B = np.asarray(slice_basis, float)
        if B.shape != (4, 3):
            raise GeometryError("slice basis must be 4 x 3")
    else:
        raise GeometryError(f"unsupported dimension n={rep.n}")
    chart = chart or default_chart(rep, None if rep.n == 3 else B)
    phi, frame = chart.frame()
    tiles = []
    n_clipped = 0
    for M in tiling.matrices:
        C = rep.alpha @ np.linalg.inv(M) @ B
        poly, clipped = _tile_polygon(C, phi, frame)
        n_clipped += clipped
        if poly is not None:
            tiles.append(poly)
    if n_clipped:
        warnings.warn(f"{n_clipped} tiles cross the line at infinity of the chart and were clipped")
    sigma = None
    if rep.N == rep.n and _v_independent(rep):
        Cs = np.vstack([rep.alpha @ B, -np.linalg.inv(rep.v) @ B])
        sigma, _ = _tile_polygon(Cs, phi, frame)
    base = tiles[0]
    center = base.mean(axis=0)
    diam = float(np.ptp(base, axis=0).max()) or 1.0
    allpts = np.vstack(tiles)
    near = allpts[np.linalg.norm(allpts - center, axis=1) <= 25 * diam]
    lo, hi = near.min(axis=0), near.max(axis=0)
    pad = 0.05 * float((hi - lo).max())
    lo, hi = lo - pad, hi + pad
    w, h = hi - lo
    hull_pts = None
    if len(tiles) > 1:
        from scipy.spatial import ConvexHull
        try:
            hull = ConvexHull(near)
            hull_pts = near[hull.vertices]
        except Exception:
            hull_pts = None
    stroke = 0.002 * float(max(w, h))
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(lo[0])} {_fmt(-hi[1])} {_fmt(w)} {_fmt(h)}" width="800" height="{_fmt(800 * h / w)}">',
        f'<!-- tiles: {len(tiles)}; depth: {tiling.depth}; clipped: {n_clipped} -->',
        "<defs><clipPath id=\"view\">"
        f'<rect x="{_fmt(lo[0])}" y="{_fmt(-hi[1])}" width="{_fmt(w)}" height="{_fmt(h)}"/>'
        "</clipPath></defs>",
        f'<g clip-path="url(#view)" stroke="black" stroke-width="{_fmt(stroke)}" stroke-linejoin="round">',
    ]
    for k, poly in enumerate(tiles):
        fill = "#9fb7d9" if k == 0 else "#e6e6e6"
        parts.append(f'<polygon points="{_path(poly)}" fill="{fill}"/>')
    if sigma is not None:
        parts.append(f'<polygon points="{_path(sigma)}" fill="#404040" fill-opacity="0.8"/>')
    if hull_pts is not None:
        parts.append(f'<polygon points="{_path(hull_pts)}" fill="none" stroke="#c03030" '
                     f'stroke-dasharray="{_fmt(4 * stroke)}"/>')
    parts.append("</g>")
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def sample_interior(rep: ReflectionRep, k: int, rng: np.random.Generator,
                    margin: float = 1e-3) -> np.ndarray:
    """Random points of the open fundamental cone (n = N, independent alphas)."""
    if rep.n != rep.N:
        raise GeometryError("sampling needs n = N")
    # the cone is simplicial: x = -alpha^{-1} w with w > 0
    inv = np.linalg.inv(rep.alpha)
    w = rng.dirichlet(np.ones(rep.N), size=k) + margin
    return -(w @ inv.T)
