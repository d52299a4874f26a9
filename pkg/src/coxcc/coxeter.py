"""Coxeter matrices, diagrams and the spherical/affine/large trichotomy.

Generators are indexed from 0 inside the library.  The ``.cox`` text
format and all user-facing output use 1-based indices.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Optional, Sequence

INF = math.inf

MAX_SUBSET_N = 20


class CoxeterError(ValueError):
    pass


def _label_str(m) -> str:
    return "inf" if m == INF else str(int(m))


@dataclass(frozen=True)
class CoxeterMatrix:
    """Symmetric Coxeter matrix with ``INF`` for infinite order.

    Parameters
    ----------
    m : tuple of tuples
        Entries with ``m[i][i] == 1`` and ``m[i][j] >= 2`` (or ``INF``)
        off the diagonal.

    Raises
    ------
    CoxeterError
        If the matrix is not square, not symmetric, or has bad entries.
    """

    m: tuple

    def __post_init__(self):
        rows = tuple(tuple(_norm_label(x) for x in row) for row in self.m)
        object.__setattr__(self, "m", rows)
        n = len(rows)
        if n == 0:
            raise CoxeterError("empty Coxeter matrix")
        for i, row in enumerate(rows):
            if len(row) != n:
                raise CoxeterError("Coxeter matrix must be square")
            if row[i] != 1:
                raise CoxeterError(f"m[{i + 1}][{i + 1}] must be 1")
            for j in range(n):
                if i != j:
                    if row[j] < 2:
                        raise CoxeterError(f"m[{i + 1}][{j + 1}] < 2")
                    if rows[j][i] != row[j]:
                        raise CoxeterError(f"asymmetric entry at ({i + 1},{j + 1})")

    @property
    def N(self) -> int:
        return len(self.m)

    @classmethod
    def from_edges(cls, N: int, edges) -> "CoxeterMatrix":
        """Build from 0-based ``(i, j, label)`` triples; other pairs get 2."""
        m = [[1 if i == j else 2 for j in range(N)] for i in range(N)]
        for i, j, lab in edges:
            if i == j or not (0 <= i < N and 0 <= j < N):
                raise CoxeterError(f"bad edge ({i}, {j})")
            m[i][j] = m[j][i] = lab
        return cls(tuple(map(tuple, m)))

    def edges(self) -> list:
        """Diagram edges ``(i, j, label)`` with i < j and label >= 3."""
        return [(i, j, self.m[i][j]) for i in range(self.N)
                for j in range(i + 1, self.N) if self.m[i][j] >= 3]

    def neighbors(self, i: int) -> list:
        return [j for j in range(self.N) if j != i and self.m[i][j] >= 3]

    def restrict(self, subset: Sequence[int]) -> "CoxeterMatrix":
        s = list(subset)
        return CoxeterMatrix(tuple(tuple(self.m[i][j] for j in s) for i in s))

    def is_connected(self, subset: Optional[Sequence[int]] = None) -> bool:
        verts = list(range(self.N)) if subset is None else list(subset)
        if not verts:
            return False
        return len(_component_of(self, verts[0], set(verts))) == len(verts)

    def __str__(self):
        return format_coxeter(self)


def _norm_label(x):
    if x == INF:
        return INF
    if isinstance(x, float):
        if not x.is_integer():
            raise CoxeterError(f"non-integer label {x}")
        return int(x)
    return int(x)


def _component_of(W: CoxeterMatrix, start: int, allowed: set) -> list:
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        for j in allowed:
            if j not in seen and W.m[i][j] >= 3:
                seen.add(j)
                stack.append(j)
    return sorted(seen)


def parse_coxeter(text: str) -> CoxeterMatrix:
    """Parse the ``.cox`` format.

    The first non-comment line is N.  Each further line is ``i j m`` with
    1-based indices and m an integer >= 2 or ``inf``.  ``#`` starts a
    comment and unlisted pairs get m = 2.

    Raises
    ------
    CoxeterError
        On malformed lines, bad indices, labels below 2 or conflicting
        duplicate entries.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines:
        raise CoxeterError("empty .cox input")
    lineno, first = lines[0]
    try:
        N = int(first)
    except ValueError:
        raise CoxeterError(f"line {lineno}: expected N, got {first!r}") from None
    if N < 1:
        raise CoxeterError(f"line {lineno}: N must be positive")
    m = [[1 if i == j else None for j in range(N)] for i in range(N)]
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise CoxeterError(f"line {lineno}: expected 'i j m', got {line!r}")
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise CoxeterError(f"line {lineno}: bad index in {line!r}") from None
        tok = parts[2].lower()
        if tok in ("inf", "infinity", "oo"):
            lab = INF
        else:
            try:
                lab = int(tok)
            except ValueError:
                raise CoxeterError(f"line {lineno}: bad label {parts[2]!r}") from None
        if not (0 <= i < N and 0 <= j < N):
            raise CoxeterError(f"line {lineno}: index out of range 1..{N}")
        if i == j:
            raise CoxeterError(f"line {lineno}: diagonal entries are fixed to 1")
        if lab < 2:
            raise CoxeterError(f"line {lineno}: label must be >= 2")
        if m[i][j] is not None and m[i][j] != lab:
            raise CoxeterError(
                f"line {lineno}: conflicting entries for ({i + 1},{j + 1}): "
                f"{_label_str(m[i][j])} vs {_label_str(lab)}")
        m[i][j] = m[j][i] = lab
    rows = tuple(tuple(2 if x is None else x for x in row) for row in m)
    return CoxeterMatrix(rows)


def format_coxeter(W: CoxeterMatrix) -> str:
    """Inverse of :func:`parse_coxeter` (only non-2 pairs are listed)."""
    out = [str(W.N)]
    for i in range(W.N):
        for j in range(i + 1, W.N):
            if W.m[i][j] != 2:
                out.append(f"{i + 1} {j + 1} {_label_str(W.m[i][j])}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class DiagramComponent:
    vertices: tuple
    edges: tuple = field(default=())


@dataclass(frozen=True)
class GroupClass:
    """Spherical / affine / large classification of an irreducible piece.

    ``family`` is a letter (``"A"``, ``"I2"``, ``"E"``, ...) and ``rank``
    the index in the table: number of nodes for spherical families
    (p for I2(p)) and number of nodes minus one for affine ones.
    """

    kind: str
    family: Optional[str] = None
    rank: Optional[int] = None

    @property
    def name(self) -> str:
        if self.kind == "large":
            return "Large"
        if self.family == "I2":
            return f"I2({self.rank})"
        if self.kind == "affine":
            if self.family == "C" and self.rank == 2:
                return "B~2=C~2"
            return f"{self.family}~{self.rank}"
        return f"{self.family}{self.rank}"

    @property
    def is_finite(self) -> bool:
        return self.kind == "spherical"

    def is_atilde(self, k: Optional[int] = None) -> bool:
        ok = self.kind == "affine" and self.family == "A"
        return ok and (k is None or self.rank == k)

    def __str__(self):
        return self.name


LARGE = GroupClass("large")


@dataclass(frozen=True)
class StandardSubgroup:
    subset: tuple
    coxeter: CoxeterMatrix


def irreducible_components(W: CoxeterMatrix) -> list:
    """Connected components of the diagram, ordered by smallest vertex."""
    left = set(range(W.N))
    comps = []
    while left:
        start = min(left)
        verts = _component_of(W, start, left)
        left -= set(verts)
        es = tuple((i, j, W.m[i][j]) for i, j in itertools.combinations(verts, 2)
                   if W.m[i][j] >= 3)
        comps.append(DiagramComponent(tuple(verts), es))
    return comps


def _component(W: CoxeterMatrix, subset) -> DiagramComponent:
    verts = tuple(sorted(subset))
    es = tuple((i, j, W.m[i][j]) for i, j in itertools.combinations(verts, 2)
               if W.m[i][j] >= 3)
    return DiagramComponent(verts, es)


def _path_order(verts, adj):
    ends = [v for v in verts if len(adj[v]) == 1]
    order = [ends[0]]
    prev = None
    while len(order) < len(verts):
        cur = order[-1]
        nxt = [u for u in adj[cur] if u != prev][0]
        prev = cur
        order.append(nxt)
    return order


def _classify_path(n, labels) -> GroupClass:
    lab = list(labels)
    rev = lab[::-1]
    if all(x == 3 for x in lab):
        return GroupClass("spherical", "A", n)
    for seq in (lab, rev):
        if seq[0] == 4 and all(x == 3 for x in seq[1:]):
            return GroupClass("spherical", "B", n)
    if n >= 3 and lab[0] == 4 and lab[-1] == 4 and all(x == 3 for x in lab[1:-1]):
        return GroupClass("affine", "C", n - 1)
    patterns = {
        (3, 4, 3): GroupClass("spherical", "F", 4),
        (3, 3, 4, 3): GroupClass("affine", "F", 4),
        (5, 3): GroupClass("spherical", "H", 3),
        (5, 3, 3): GroupClass("spherical", "H", 4),
        (6, 3): GroupClass("affine", "G", 2),
    }
    for seq in (tuple(lab), tuple(rev)):
        if seq in patterns:
            return patterns[seq]
    return LARGE


def _arms(center, adj, label):
    """Walk each arm from a degree-3 vertex; return lists of edge labels."""
    arms = []
    for start in sorted(adj[center]):
        labs = [label(center, start)]
        prev, cur = center, start
        while len(adj[cur]) == 2:
            nxt = [u for u in adj[cur] if u != prev][0]
            labs.append(label(cur, nxt))
            prev, cur = cur, nxt
        if len(adj[cur]) > 2:
            return None
        arms.append(labs)
    return arms


def _classify_tree(n, verts, adj, label) -> GroupClass:
    degs = {v: len(adj[v]) for v in verts}
    maxdeg = max(degs.values())
    if maxdeg <= 2:
        order = _path_order(verts, adj)
        return _classify_path(n, [label(a, b) for a, b in zip(order, order[1:])])
    branch = [v for v in verts if degs[v] >= 3]
    labels = [label(a, b) for a in verts for b in adj[a] if a < b]
    if maxdeg == 4:
        if n == 5 and all(x == 3 for x in labels):
            return GroupClass("affine", "D", 4)
        return LARGE
    if maxdeg > 4:
        return LARGE
    if len(branch) == 1:
        arms = _arms(branch[0], adj, label)
        if arms is None:
            return LARGE
        if all(x == 3 for x in labels):
            lens = tuple(sorted(len(a) for a in arms))
            if lens[0] == 1 and lens[1] == 1:
                return GroupClass("spherical", "D", lens[2] + 3)
            table = {
                (1, 2, 2): GroupClass("spherical", "E", 6),
                (1, 2, 3): GroupClass("spherical", "E", 7),
                (1, 2, 4): GroupClass("spherical", "E", 8),
                (2, 2, 2): GroupClass("affine", "E", 6),
                (1, 3, 3): GroupClass("affine", "E", 7),
                (1, 2, 5): GroupClass("affine", "E", 8),
            }
            return table.get(lens, LARGE)
        # B~n: two short arms, the third ends with a 4-labelled leaf edge
        if sorted(labels).count(4) == 1 and all(x in (3, 4) for x in labels):
            short = [a for a in arms if len(a) == 1 and a[0] == 3]
            long_ = [a for a in arms if not (len(a) == 1 and a[0] == 3)]
            if len(short) >= 2 and len(long_) <= 1:
                tail = long_[0] if long_ else None
                if tail is not None and tail[-1] == 4 and all(x == 3 for x in tail[:-1]):
                    return GroupClass("affine", "B", n - 1)
        return LARGE
    if len(branch) == 2 and all(x == 3 for x in labels):
        for b in branch:
            if sum(1 for u in adj[b] if degs[u] == 1) != 2:
                return LARGE
        return GroupClass("affine", "D", n - 1)
    return LARGE


def classify_component(C: DiagramComponent, W: Optional[CoxeterMatrix] = None) -> GroupClass:
    """Match a connected diagram against the spherical and affine tables.

    Each family is recognised by structural predicates (degree sequence,
    labels, cycles, arm lengths) rather than graph isomorphism.
    """
    verts = list(C.vertices)
    n = len(verts)
    labs = {}
    adj = {v: set() for v in verts}
    for i, j, lab in C.edges:
        adj[i].add(j)
        adj[j].add(i)
        labs[(min(i, j), max(i, j))] = lab

    def label(a, b):
        return labs[(min(a, b), max(a, b))]

    if n == 1:
        return GroupClass("spherical", "A", 1)
    values = list(labs.values())
    if any(x == INF for x in values):
        return GroupClass("affine", "A", 1) if n == 2 else LARGE
    if n == 2:
        p = int(values[0])
        if p == 3:
            return GroupClass("spherical", "A", 2)
        if p == 4:
            return GroupClass("spherical", "B", 2)
        return GroupClass("spherical", "I2", p)
    ne = len(C.edges)
    if ne == n:
        if all(len(adj[v]) == 2 for v in verts) and all(x == 3 for x in values):
            return GroupClass("affine", "A", n - 1)
        return LARGE
    if ne > n:
        return LARGE
    return _classify_tree(n, verts, adj, label)


@lru_cache(maxsize=65536)
def classify_subset(W: CoxeterMatrix, subset: tuple) -> GroupClass:
    """Classify the connected standard subgroup on ``subset``."""
    return classify_component(_component(W, subset))


def classify(W: CoxeterMatrix) -> list:
    """Classification of every irreducible component of W."""
    return [classify_component(c) for c in irreducible_components(W)]


def is_finite(W: CoxeterMatrix, subset: Optional[Sequence[int]] = None) -> bool:
    """True when every irreducible factor of W_{subset} is spherical."""
    verts = list(range(W.N)) if subset is None else sorted(subset)
    if not verts:
        return True
    sub = W.restrict(verts)
    for c in irreducible_components(sub):
        lifted = tuple(verts[i] for i in c.vertices)
        if not classify_subset(W, lifted).is_finite:
            return False
    return True


def _check_budget(W: CoxeterMatrix):
    if W.N > MAX_SUBSET_N:
        raise CoxeterError(f"subset enumeration capped at N <= {MAX_SUBSET_N} (got {W.N})")


def _iter_subsets(N) -> Iterator[tuple]:
    for k in range(1, N + 1):
        yield from itertools.combinations(range(N), k)


@lru_cache(maxsize=256)
def connected_subsets(W: CoxeterMatrix) -> tuple:
    """All nonempty subsets with connected induced diagram, by size then lex."""
    _check_budget(W)
    return tuple(s for s in _iter_subsets(W.N) if W.is_connected(s))


def enumerate_standard_subgroups(W: CoxeterMatrix,
                                 filter: Optional[Callable] = None) -> list:
    """All standard subgroups whose subset passes ``filter(W, subset)``.

    Subsets are 0-based tuples ordered by size, then lexicographically.
    """
    _check_budget(W)
    out = []
    for s in _iter_subsets(W.N):
        if filter is None or filter(W, s):
            out.append(StandardSubgroup(s, W.restrict(s)))
    return out


def connected(W, s) -> bool:
    return W.is_connected(s)


def is_atilde_k(W, s, min_k: int = 2) -> bool:
    """Filter: connected and of type A~_k with k >= min_k."""
    if not W.is_connected(s):
        return False
    g = classify_subset(W, tuple(s))
    return g.is_atilde() and g.rank >= min_k


def _commute(W, a, b) -> bool:
    return all(W.m[i][j] == 2 for i in a for j in b)


@lru_cache(maxsize=256)
def condition_IC(W: CoxeterMatrix):
    """Whether (IC) holds: disjoint commuting S', S'' with both infinite.

    Returns
    -------
    (bool, witness)
        ``witness`` is the first pair ``(S', S'')`` of connected infinite
        subsets found, or None.
    """
    inf_sets = [s for s in connected_subsets(W) if not classify_subset(W, s).is_finite]
    for a, b in itertools.combinations(inf_sets, 2):
        if set(a).isdisjoint(b) and _commute(W, a, b):
            return True, (a, b)
    return False, None


@lru_cache(maxsize=256)
def condition_Atilde(W: CoxeterMatrix):
    """Whether (Ã) holds: connected affine subsets of size >= 3 are A~.

    Returns ``(True, None)`` or ``(False, first_violating_subset)``.
    """
    for s in connected_subsets(W):
        if len(s) < 3:
            continue
        g = classify_subset(W, s)
        if g.kind == "affine" and not g.is_atilde(len(s) - 1):
            return False, s
    return True, None


def affine_subsets(W: CoxeterMatrix, min_size: int = 3) -> list:
    return [s for s in connected_subsets(W)
            if len(s) >= min_size and classify_subset(W, s).kind == "affine"]


def is_word_hyperbolic(W: CoxeterMatrix) -> bool:
    """Moussong: no (IC) pair and no connected affine subset of size >= 3."""
    return not condition_IC(W)[0] and not affine_subsets(W)


def _require_irreducible_infinite(W: CoxeterMatrix):
    comps = irreducible_components(W)
    if len(comps) != 1:
        raise CoxeterError("W must be irreducible")
    if classify_component(comps[0]).is_finite:
        raise CoxeterError("W must be infinite")


def admits_cc_reflection_rep(W: CoxeterMatrix) -> bool:
    """Existence of a convex cocompact reflection representation.

    Raises
    ------
    CoxeterError
        If W is reducible or finite.
    """
    _require_irreducible_infinite(W)
    return not condition_IC(W)[0] and condition_Atilde(W)[0]


def peripheral_subgroups(W: CoxeterMatrix) -> list:
    """Pairs ``(U, U_perp)`` with U of type A~_k (k >= 2).

    W must be large, irreducible and satisfy ¬(IC) and (Ã).
    """
    _require_irreducible_infinite(W)
    if classify(W)[0].kind != "large":
        raise CoxeterError("peripheral subgroups are defined here for large W only")
    if condition_IC(W)[0] or not condition_Atilde(W)[0]:
        raise CoxeterError("W must satisfy ¬(IC) and (Ã)")
    out = []
    for U in connected_subsets(W):
        if not is_atilde_k(W, U):
            continue
        perp = tuple(s for s in range(W.N)
                     if s not in U and all(W.m[u][s] == 2 for u in U))
        if not is_finite(W, perp):
            raise CoxeterError(f"U_perp of {U} is infinite, contradicting ¬(IC)")
        out.append((U, perp))
    return out


def one_based(subset) -> tuple:
    return tuple(i + 1 for i in subset)
