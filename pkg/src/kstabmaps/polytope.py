"""Rational polytopes: exact hulls, volumes, mixed volumes, lattice counts.

The hull code is exact. In dimension >= 3 scipy's qhull only proposes
candidate facets; each candidate is recomputed from its vertices in exact
arithmetic and checked against every input point before it is accepted.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import ceil, floor, lcm
from typing import Iterable, Sequence

from .errors import DimensionMismatch, FunctionOutOfRange, TriangulationFailure
from .exactmath import Q, UniPoly, fmt, interpolate
from .linalg import dot, primitive, rank, rref


def _pt(p) -> tuple:
    return tuple(Q(x) for x in p)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


@dataclass(frozen=True)
class Facet:
    """Inequality normal . x <= offset with a primitive integer normal."""

    normal: tuple
    offset: Fraction

    def value(self, p) -> Fraction:
        return dot(self.normal, p)


# ---------------------------------------------------------------- hull code

def _monotone_chain(pts: list) -> list:
    """Counter-clockwise strictly convex hull of 2D points (exact)."""
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _facets_full(pts: list) -> list:
    """Facets of a full-dimensional point configuration in R^d."""
    d = len(pts[0])
    if d == 1:
        xs = [p[0] for p in pts]
        return [Facet((1,), max(xs)), Facet((-1,), -min(xs))]
    if d == 2:
        hull = _monotone_chain(pts)
        out = []
        for a, b in zip(hull, hull[1:] + hull[:1]):
            nrm = primitive((b[1] - a[1], a[0] - b[0]))
            out.append(Facet(nrm, dot(nrm, a)))
        return out
    return _facets_qhull(pts)


def _integral(pts: list) -> tuple[int, list]:
    """Common denominator D and the points scaled by D as integer tuples."""
    D = 1
    for p in pts:
        for x in p:
            D = lcm(D, Fraction(x).denominator)
    return D, [tuple(int(x * D) for x in p) for p in pts]


def _det(m: list) -> int:
    """Determinant of a small square matrix by cofactor expansion."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = 0
    for j in range(n):
        if m[0][j]:
            minor = [row[:j] + row[j + 1:] for row in m[1:]]
            total += (-1) ** j * m[0][j] * _det(minor)
    return total


def _normal_through(diffs: list, d: int):
    """Integer normal of the hyperplane spanned by d-1 difference vectors, or None."""
    nrm = [(-1) ** j * _det([row[:j] + row[j + 1:] for row in diffs]) for j in range(d)]
    if not any(nrm):
        return None
    return primitive(nrm)


def _facets_qhull(pts: list) -> list:
    import numpy as np
    from scipy.spatial import ConvexHull, QhullError

    d = len(pts[0])
    D, ipts = _integral(pts)
    try:
        hull = ConvexHull(np.array([[float(x) for x in p] for p in ipts]))
    except QhullError as exc:  # pragma: no cover - degenerate input is filtered earlier
        raise TriangulationFailure(str(exc)) from exc
    found = {}
    for simplex in hull.simplices:
        # skip simplices lying on an already accepted facet
        if any(all(sum(a * b for a, b in zip(n, ipts[i])) == off for i in simplex)
               for n, off in found.items()):
            continue
        base = ipts[simplex[0]]
        nrm = _normal_through([tuple(x - y for x, y in zip(ipts[i], base)) for i in simplex[1:]], d)
        if nrm is None:
            continue
        off = sum(a * b for a, b in zip(nrm, base))
        vals = [sum(a * b for a, b in zip(nrm, p)) for p in ipts]
        if max(vals) > off:
            nrm = tuple(-x for x in nrm)
            off = -off
            vals = [-v for v in vals]
        if max(vals) > off:
            raise TriangulationFailure("qhull proposed a non-supporting hyperplane")
        found[nrm] = off
    # every facet must be spanned by d affinely independent input points
    for nrm, off in found.items():
        on = [p for p in ipts if sum(a * b for a, b in zip(nrm, p)) == off]
        if rank([_sub(p, on[0]) for p in on[1:]]) != d - 1:
            raise TriangulationFailure("facet candidate is not a facet")
    if len(found) < d + 1:
        raise TriangulationFailure("too few facets for a full-dimensional hull")
    return [Facet(nrm, Fraction(off, D)) for nrm, off in found.items()]


def _affine_frame(pts: list):
    """Affine rank of the points and coordinate indices projecting injectively."""
    base = pts[0]
    diffs = [_sub(p, base) for p in pts[1:]]
    if not diffs:
        return 0, []
    _, piv = rref(diffs)
    return len(piv), piv


def _hull_vertices(pts: list) -> tuple[list, int]:
    pts = sorted(set(pts))
    dim, coords = _affine_frame(pts)
    if dim == 0:
        return pts, 0
    proj = {tuple(p[c] for c in coords): p for p in pts}
    keys = list(proj)
    if dim == 1:
        return sorted([proj[min(keys)], proj[max(keys)]]), 1
    if dim == 2:
        return sorted(proj[k] for k in _monotone_chain(keys)), 2
    facets = _facets_full(keys)
    D, ikeys = _integral(keys)
    ifacets = [(f.normal, f.offset * D) for f in facets]
    verts = []
    for k, ik in zip(keys, ikeys):
        active = [n for n, off in ifacets if sum(a * b for a, b in zip(n, ik)) == off]
        if rank(active) == dim:
            verts.append(proj[k])
    return sorted(verts), dim


# ---------------------------------------------------------------- polytopes

@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many rational points; vertices are irredundant."""

    ambient_dim: int
    vertices: tuple
    dim: int

    @classmethod
    def from_points(cls, points: Iterable, ambient_dim: int | None = None):
        pts = [_pt(p) for p in points]
        if not pts:
            raise ValueError("a polytope needs at least one point")
        d = len(pts[0]) if ambient_dim is None else ambient_dim
        if any(len(p) != d for p in pts):
            raise DimensionMismatch("points of differing dimension")
        verts, dim = _hull_vertices(pts)
        return cls._make(d, tuple(verts), dim)

    @classmethod
    def _make(cls, d, verts, dim):
        return cls(d, verts, dim)

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    @property
    def is_lattice(self) -> bool:
        return all(x.denominator == 1 for v in self.vertices for x in v)

    @cached_property
    def denominator(self) -> int:
        """Least s with s*P a lattice polytope."""
        return lcm(1, *(x.denominator for v in self.vertices for x in v))

    @cached_property
    def facets(self) -> tuple:
        if not self.is_full:
            raise DimensionMismatch("facets are only defined for full-dimensional polytopes")
        return tuple(_facets_full(list(self.vertices)))

    def facet_vertices(self, facet: Facet) -> list:
        return [v for v in self.vertices if facet.value(v) == facet.offset]

    def contains(self, p) -> bool:
        p = _pt(p)
        if self.is_full:
            return all(f.value(p) <= f.offset for f in self.facets)
        return Polytope.from_points(list(self.vertices) + [p], self.ambient_dim).vertices == self.vertices

    def scale(self, s) -> "Polytope":
        s = Q(s)
        if s < 0:
            raise ValueError("negative dilation")
        if s == 0:
            return Polytope.from_points([(0,) * self.ambient_dim])
        verts = tuple(tuple(s * x for x in v) for v in self.vertices)
        return self._rebuild(verts)

    def translate(self, u) -> "Polytope":
        u = _pt(u)
        return self._rebuild(tuple(sorted(_add(v, u) for v in self.vertices)))

    def _rebuild(self, verts) -> "Polytope":
        integral = all(x.denominator == 1 for v in verts for x in v)
        cls = type(self) if integral else Polytope
        return cls(self.ambient_dim, verts, self.dim)

    def lift(self, t=0) -> "Polytope":
        """Embed as P x {t} one dimension up."""
        t = Q(t)
        return Polytope(self.ambient_dim + 1, tuple(v + (t,) for v in self.vertices), self.dim)

    def __add__(self, other: "Polytope") -> "Polytope":
        return minkowski_sum(self, other)

    @cached_property
    def volume(self) -> Fraction:
        return volume(self)

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "vertices": [[fmt(x) for x in v] for v in self.vertices]}


class LatticePolytope(Polytope):
    """Polytope with integer vertices."""

    @classmethod
    def _make(cls, d, verts, dim):
        if any(x.denominator != 1 for v in verts for x in v):
            raise ValueError("lattice polytope vertices must be integral")
        return cls(d, verts, dim)

    @classmethod
    def from_json(cls, data: dict) -> "LatticePolytope":
        verts = data["vertices"]
        d = int(data.get("ambient_dim", len(verts[0])))
        return cls.from_points([[Q(x) for x in v] for v in verts], d)

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "vertices": [[int(x) for x in v] for v in self.vertices]}


def as_lattice(P: Polytope) -> LatticePolytope:
    return LatticePolytope._make(P.ambient_dim, P.vertices, P.dim)


def segment(a, b) -> LatticePolytope:
    return LatticePolytope.from_points([(a,), (b,)])


def simplex(d: int) -> LatticePolytope:
    pts = [(0,) * d] + [tuple(int(i == j) for j in range(d)) for i in range(d)]
    return LatticePolytope.from_points(pts)


def cube(d: int, side: int = 1) -> LatticePolytope:
    return LatticePolytope.from_points(itertools.product((0, side), repeat=d))


def minkowski_sum(*polys: Polytope) -> Polytope:
    d = polys[0].ambient_dim
    if any(P.ambient_dim != d for P in polys):
        raise DimensionMismatch("Minkowski sum of polytopes in different dimensions")
    acc = polys[0]
    for P in polys[1:]:
        acc = Polytope.from_points([_add(a, b) for a in acc.vertices for b in P.vertices], d)
    return acc


def project_out(P: Polytope, j: int) -> Polytope:
    return Polytope.from_points([v[:j] + v[j + 1:] for v in P.vertices], P.ambient_dim - 1)


# ---------------------------------------------------------------- volumes

def volume(P: Polytope) -> Fraction:
    """Euclidean volume in the ambient space; zero for lower-dimensional P.

    Uses the cone decomposition over facets: vol = 1/d * sum_F h_F * vol(F),
    written with primitive normals so no square roots appear.
    """
    if not P.is_full:
        return Fraction(0)
    d = P.ambient_dim
    verts = list(P.vertices)
    if d == 1:
        return verts[-1][0] - verts[0][0]
    if d == 2:
        hull = _monotone_chain(verts)
        area = sum(
            (a[0] * b[1] - a[1] * b[0] for a, b in zip(hull, hull[1:] + hull[:1])), Fraction(0)
        )
        return area / 2
    apex = verts[0]
    total = Fraction(0)
    for f in P.facets:
        h = f.offset - f.value(apex)
        if h == 0:
            continue
        j = next(i for i, a in enumerate(f.normal) if a != 0)
        face = Polytope.from_points([v[:j] + v[j + 1:] for v in P.facet_vertices(f)], d - 1)
        if not face.is_full:
            raise TriangulationFailure("facet projection collapsed")
        total += h * volume(face) / abs(f.normal[j])
    return total / d


def facet_lattice_volume(P: Polytope, facet: Facet) -> Fraction:
    """Volume of a facet normalized by the lattice of its hyperplane.

    For toric varieties this is D_F . L^(d-1) / (d-1)! for the facet divisor.
    """
    d = P.ambient_dim
    j = next(i for i, a in enumerate(facet.normal) if a != 0)
    verts = P.facet_vertices(facet)
    if d == 1:
        return Fraction(1)
    face = Polytope.from_points([v[:j] + v[j + 1:] for v in verts], d - 1)
    return volume(face) / abs(facet.normal[j])


@lru_cache(maxsize=4096)
def _volume_of_sum(key: tuple) -> Fraction:
    polys = [Polytope(d, verts, dim) for d, verts, dim in key]
    return minkowski_sum(*polys).volume


def mixed_volume(polytopes: Sequence[Polytope]) -> Fraction:
    """Normalized mixed volume V(P_1..P_d) with V(P,...,P) = vol(P).

    Inclusion-exclusion over all 2^d - 1 partial Minkowski sums.
    """
    d = len(polytopes)
    if d == 0:
        raise DimensionMismatch("mixed volume of an empty list")
    if any(P.ambient_dim != d for P in polytopes):
        raise DimensionMismatch(f"mixed volume needs {d} polytopes in dimension {d}")
    total = Fraction(0)
    for size in range(1, d + 1):
        sgn = (-1) ** (d - size)
        for S in itertools.combinations(range(d), size):
            key = tuple(sorted((polytopes[i].ambient_dim, polytopes[i].vertices, polytopes[i].dim) for i in S))
            total += sgn * _volume_of_sum(key)
    fact = 1
    for i in range(2, d + 1):
        fact *= i
    return total / fact


# ---------------------------------------------------------------- lattice points

def _count_full(P: Polytope, r) -> int:
    d = P.ambient_dim
    r = Q(r)
    ineqs = [(f.normal, floor(r * f.offset)) for f in P.facets]
    lo = [ceil(r * min(v[i] for v in P.vertices)) for i in range(d)]
    hi = [floor(r * max(v[i] for v in P.vertices)) for i in range(d)]
    if any(a > b for a, b in zip(lo, hi)):
        return 0
    last = d - 1
    upper = [(a[:last], a[last], B) for a, B in ineqs if a[last] > 0]
    lower = [(a[:last], -a[last], B) for a, B in ineqs if a[last] < 0]
    flat = [(a[:last], B) for a, B in ineqs if a[last] == 0]
    total = 0
    for head in itertools.product(*(range(lo[i], hi[i] + 1) for i in range(last))):
        if any(sum(x * y for x, y in zip(a, head)) > B for a, B in flat):
            continue
        top = hi[last]
        for a, c, B in upper:
            top = min(top, (B - sum(x * y for x, y in zip(a, head))) // c)
        bot = lo[last]
        for a, c, B in lower:
            # a.head - c*t <= B  <=>  t >= (a.head - B)/c
            bot = max(bot, -((B - sum(x * y for x, y in zip(a, head))) // c))
        if top >= bot:
            total += top - bot + 1
    return total


def lattice_points(P: Polytope, r=1) -> list:
    """All lattice points of rP (any dimension); meant for small inputs."""
    rP = P.scale(r)
    if rP.dim == 0:
        v = rP.vertices[0]
        return [tuple(int(x) for x in v)] if all(x.denominator == 1 for x in v) else []
    dim, coords = _affine_frame(list(rP.vertices))
    base = rP.vertices[0]
    # parametrize the affine hull by the chosen coordinates
    diffs = [_sub(v, base) for v in rP.vertices[1:]]
    red, piv = rref([[row[c] for c in coords] + list(row) for row in diffs])
    # rows give, for each unit step in coordinate coords[i], the full displacement
    steps = [row[dim:] for row in red[:dim]]
    proj = Polytope.from_points([tuple(v[c] for c in coords) for v in rP.vertices], dim)
    lo = [ceil(min(v[i] for v in proj.vertices)) for i in range(dim)]
    hi = [floor(max(v[i] for v in proj.vertices)) for i in range(dim)]
    out = []
    for y in itertools.product(*(range(lo[i], hi[i] + 1) for i in range(dim))):
        if not all(f.value(y) <= f.offset for f in proj.facets):
            continue
        x = list(base)
        for i in range(dim):
            delta = y[i] - base[coords[i]]
            x = [a + delta * b for a, b in zip(x, steps[i])]
        if all(c.denominator == 1 for c in x):
            out.append(tuple(int(c) for c in x))
    return sorted(out)


def lattice_count(P: Polytope, r=1) -> int:
    """|rP cap Z^d| by exact bounding-box scan."""
    if P.is_full:
        return _count_full(P, r)
    return len(lattice_points(P, r))


def ehrhart(P: Polytope) -> UniPoly:
    """Ehrhart polynomial of a full-dimensional lattice polytope.

    Fitted at r = 1..d+1 plus two verification dilations; the constant term is
    pinned by a third check at r = 0 (it must be 1).
    """
    if not P.is_full:
        raise DimensionMismatch("Ehrhart polynomial needs a full-dimensional polytope")
    if not P.is_lattice:
        raise ValueError("Ehrhart polynomial requested for a non-lattice polytope")
    d = P.ambient_dim
    samples = [(r, lattice_count(P, r)) for r in range(1, d + 4)]
    p = interpolate(samples, d)
    if p.coeff(0) != 1:
        from .errors import InconsistentSamples

        raise InconsistentSamples(f"Ehrhart constant term {fmt(p.coeff(0))} != 1")
    return p


# ---------------------------------------------------------------- PL functions

def vertices_from_halfspaces(A: Sequence, b: Sequence) -> list:
    """Vertices of {x : A x <= b} by brute force over d-subsets (small inputs only)."""
    d = len(A[0])
    rows = []
    for row, rhs in zip(A, b):
        D, (irow,) = _integral([tuple(row) + (rhs,)])
        rows.append(irow)
    rows = sorted(set(rows))
    found = set()
    for S in itertools.combinations(rows, d):
        M = [r[:d] for r in S]
        det = _det(M)
        if det == 0:
            continue
        # Cramer's rule in integers: x = num / det
        num = [_det([r[:j] + (r[d],) + r[j + 1:d] for r in S]) for j in range(d)]
        sg = 1 if det > 0 else -1
        if all(sg * sum(a * xi for a, xi in zip(r[:d], num)) <= sg * r[d] * det for r in rows):
            found.add(tuple(Fraction(xi, det) for xi in num))
    return sorted(found)


@dataclass(frozen=True)
class PLConvexFunction:
    """f(x) = max_i (<linear_i, x> + constant_i)."""

    pieces: tuple

    def __post_init__(self):
        clean = []
        for lin, c in self.pieces:
            piece = (tuple(Q(x) for x in lin), Q(c))
            if piece not in clean:
                clean.append(piece)
        if not clean:
            raise ValueError("a PL function needs at least one piece")
        if len({len(l) for l, _ in clean}) != 1:
            raise DimensionMismatch("pieces of differing dimension")
        object.__setattr__(self, "pieces", tuple(sorted(clean)))

    @classmethod
    def constant(cls, c, n: int) -> "PLConvexFunction":
        return cls((((0,) * n, c),))

    @property
    def n(self) -> int:
        return len(self.pieces[0][0])

    def __call__(self, x) -> Fraction:
        x = _pt(x)
        return max(dot(l, x) + c for l, c in self.pieces)

    @property
    def is_constant(self) -> bool:
        return len(self.pieces) == 1 and all(x == 0 for x in self.pieces[0][0])

    def shifted(self, c) -> "PLConvexFunction":
        return PLConvexFunction(tuple((l, k + Q(c)) for l, k in self.pieces))

    def dilated(self, m) -> "PLConvexFunction":
        """x -> m f(x/m)."""
        m = Q(m)
        return PLConvexFunction(tuple((l, m * k) for l, k in self.pieces))

    def _epigraph_vertices(self, P: Polytope) -> list:
        n = self.n
        A, b = [], []
        for f in P.facets:
            A.append(tuple(f.normal) + (0,))
            b.append(f.offset)
        for lin, c in self.pieces:
            A.append(lin + (-1,))
            b.append(-c)
        top = max(self(v) for v in P.vertices)
        A.append((0,) * n + (1,))
        b.append(top)
        return vertices_from_halfspaces(A, b)

    def minimum_on(self, P: Polytope) -> Fraction:
        return min(v[-1] for v in self._epigraph_vertices(P))

    def maximum_on(self, P: Polytope) -> Fraction:
        return max(self(v) for v in P.vertices)

    def pruned(self, P: Polytope) -> "PLConvexFunction":
        """Drop pieces that are not maximal on a full-dimensional part of P."""
        ev = self._epigraph_vertices(P)
        keep = []
        for lin, c in self.pieces:
            on = [v for v in ev if dot(lin, v[:-1]) + c == v[-1]]
            if on and rank([_sub(v, on[0]) for v in on[1:]]) == self.n:
                keep.append((lin, c))
        return PLConvexFunction(tuple(keep))

    def to_json(self) -> dict:
        return {"pieces": [{"linear": [fmt(x) for x in l], "constant": fmt(c)} for l, c in self.pieces]}

    @classmethod
    def from_json(cls, data: dict) -> "PLConvexFunction":
        return cls(tuple((tuple(Q(x) for x in p["linear"]), Q(p["constant"])) for p in data["pieces"]))


@dataclass(frozen=True)
class GraphPolytope:
    """Q = {(x,t) : x in P, 0 <= t <= R - f(x)} together with its data."""

    base: Polytope
    f: PLConvexFunction
    R: Fraction
    Q: Polytope

    @property
    def s(self) -> int:
        """Common denominator: sQ is a lattice polytope."""
        return self.Q.denominator


def graph_polytope(P: Polytope, f: PLConvexFunction, R) -> GraphPolytope:
    R = Q(R)
    if not P.is_full:
        raise DimensionMismatch("graph polytope needs a full-dimensional base")
    if f.n != P.ambient_dim:
        raise DimensionMismatch("PL function and polytope dimensions differ")
    lo, hi = f.minimum_on(P), f.maximum_on(P)
    if lo < 0:
        raise FunctionOutOfRange(f"f takes the negative value {fmt(lo)} on P")
    if hi > R:
        raise FunctionOutOfRange(f"f reaches {fmt(hi)} > R = {fmt(R)} on P")
    if lo == R:
        raise FunctionOutOfRange(f"f = R = {fmt(R)} on all of P leaves Q flat; take R larger")
    f = f.pruned(P)
    n = P.ambient_dim
    A, b = [], []
    for fc in P.facets:
        A.append(tuple(fc.normal) + (0,))
        b.append(fc.offset)
    A.append((0,) * n + (-1,))
    b.append(0)
    for lin, c in f.pieces:
        A.append(lin + (1,))
        b.append(R - c)
    Qp = Polytope.from_points(vertices_from_halfspaces(A, b), n + 1)
    return GraphPolytope(P, f, R, Qp)
