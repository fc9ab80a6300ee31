"""Iterated function schemes: similitudes, fixed points and cell geometry.

Two coordinate systems are supported.  In *barycentric* mode a point is its
coefficient vector over the declared simplex vertices, so gasket-type maps
(halving towards a vertex) stay rational even when the Cartesian vertices
are irrational.  In *cartesian* mode points are plain coordinate vectors.

Arithmetic is exact (``fractions.Fraction``) unless a tolerance is set, in
which case scalars are floats and two points coincide when their distance
is below the tolerance.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
import logging
import math
from typing import Optional
import warnings

from . import _linalg as la
from .words import EMPTY, Word, check_word

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


class IfsError(ValueError):
    """The scheme violates a structural requirement."""


class ExactModeRequired(IfsError):
    pass


class AmbiguousContact(UserWarning):
    """Two points lie between eps and 2 eps apart in tolerance mode."""


@dataclass(frozen=True)
class Similitude:
    """The affine map ``x -> linear @ x + translation`` with contraction ``ratio``."""

    linear: tuple
    translation: tuple
    ratio: object
    scale: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        d = len(self.linear)
        c = self.linear[0][0]
        if all(self.linear[i][j] == (c if i == j else 0) for i in range(d) for j in range(d)):
            object.__setattr__(self, "scale", c)

    def __call__(self, x):
        c = self.scale
        if c is not None:
            return tuple(c * a + t for a, t in zip(x, self.translation))
        return la.vadd(la.matvec(self.linear, x), self.translation)

    def compose(self, inner: "Similitude") -> "Similitude":
        """``self ∘ inner``."""
        return Similitude(
            la.matmul(self.linear, inner.linear),
            la.vadd(la.matvec(self.linear, inner.translation), self.translation),
            self.ratio * inner.ratio,
        )

    @classmethod
    def identity(cls, dim, one=Fraction(1)):
        return cls(la.identity(dim, one), tuple(one - one for _ in range(dim)), one)

    @classmethod
    def homothety(cls, ratio, center):
        """Scale by ``ratio`` towards ``center``."""
        d = len(center)
        one = ratio / ratio
        lin = tuple(tuple(ratio if i == j else one - one for j in range(d)) for i in range(d))
        return cls(lin, tuple((one - ratio) * c for c in center), ratio)


@dataclass(eq=False)
class IFS:
    """A finite family of contracting similitudes.

    ``vertices`` are Cartesian points; in barycentric mode there must be one
    per coordinate and they are used only to leave the exact chart (rendering,
    Euclidean distances).  ``open_set`` lists polytope vertices in the scheme's
    own coordinates.  ``intersection`` selects how cells are tested for
    contact: ``"vertices"`` compares the vertex sets S_w(F_0), ``"boxes"``
    intersects axis-aligned cell boxes.
    """

    maps: tuple
    coordinates: str = "cartesian"
    vertices: Optional[tuple] = None
    open_set: Optional[tuple] = None
    tolerance: Optional[float] = None
    intersection: str = "vertices"
    box: Optional[tuple] = None
    name: str = "ifs"
    _map_cache: dict = field(default_factory=dict, repr=False)
    _cell_cache: dict = field(default_factory=dict, repr=False)
    _box_cache: dict = field(default_factory=dict, repr=False)
    _fixed: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        self.maps = tuple(self.maps)
        if len(self.maps) < 2:
            raise IfsError("an IFS needs at least two maps")
        if self.coordinates not in ("cartesian", "barycentric"):
            raise IfsError(f"unknown coordinate system {self.coordinates!r}")
        if self.intersection not in ("vertices", "boxes"):
            raise IfsError(f"unknown intersection mode {self.intersection!r}")
        dims = {len(s.translation) for s in self.maps}
        if len(dims) != 1:
            raise IfsError("maps act on different dimensions")
        if self.coordinates == "barycentric" and self.vertices is not None:
            if len(self.vertices) != self.dim:
                raise IfsError("barycentric mode needs one vertex per coordinate")
        if self.tolerance is not None:
            log.info("%s: tolerance mode, epsilon=%g", self.name, self.tolerance)
        for s in self.maps:
            if not 0 < s.ratio < 1:
                raise IfsError(f"contraction ratio {s.ratio} not in (0, 1)")

    @property
    def n_letters(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        """Dimension of the coordinate vectors."""
        return len(self.maps[0].translation)

    @property
    def geometric_dim(self) -> int:
        """Dimension of the space the attractor lives in."""
        return self.dim - 1 if self.coordinates == "barycentric" else self.dim

    @property
    def exact(self) -> bool:
        return self.tolerance is None

    @property
    def one(self):
        return Fraction(1) if self.exact else 1.0

    def same_point(self, x, y) -> bool:
        if self.exact:
            return x == y
        return math.dist(x, y) < self.tolerance

    def chart(self, x):
        """Full-dimensional affine coordinates (drops the first barycentric one)."""
        return tuple(x[1:]) if self.coordinates == "barycentric" else tuple(x)

    def to_cartesian(self, x):
        if self.coordinates == "cartesian":
            return tuple(float(c) for c in x)
        if self.vertices is None:
            raise IfsError("Cartesian vertices not declared")
        d = len(self.vertices[0])
        return tuple(sum(float(lam) * float(v[k]) for lam, v in zip(x, self.vertices)) for k in range(d))


def compose_map(w: Word, ifs: IFS) -> Similitude:
    """``S_w = S_{w_1} ∘ ... ∘ S_{w_n}``; the empty word gives the identity."""
    cache = ifs._map_cache
    hit = cache.get(w)
    if hit is not None:
        return hit
    if not w:
        s = Similitude.identity(ifs.dim, ifs.one)
    else:
        check_word(w, ifs.n_letters)
        s = compose_map(w[:-1], ifs).compose(ifs.maps[w[-1] - 1])
    cache[w] = s
    return s


def fixed_point(s: Similitude, barycentric: bool, tol=0):
    d = len(s.translation)
    one = s.ratio / s.ratio
    rows = [
        [(one if i == j else one - one) - s.linear[i][j] for j in range(d)] for i in range(d)
    ]
    rhs = list(s.translation)
    if barycentric:
        rows.append([one] * d)
        rhs.append(one)
    x = la.solve(rows, rhs, tol)
    if x is None:
        raise IfsError("map has no unique fixed point (not contractive?)")
    return x


def fixed_points(ifs: IFS):
    """``(F_0', F_0)``: all fixed points, and the essential ones.

    A fixed point x is essential when S_i(x) = S_j(y) for some maps i, j and
    a different fixed point y.
    """
    if ifs._fixed is not None:
        return ifs._fixed
    tol = 0 if ifs.exact else ifs.tolerance * 1e-3
    f0p = tuple(fixed_point(s, ifs.coordinates == "barycentric", tol) for s in ifs.maps)
    images = [[s(q) for s in ifs.maps] for q in f0p]
    essential = []
    near = False
    for a, x in enumerate(f0p):
        hit = False
        for b, y in enumerate(f0p):
            if ifs.same_point(x, y):
                continue
            for i in range(ifs.n_letters):
                for j in range(ifs.n_letters):
                    p, q = images[a][i], images[b][j]
                    if ifs.same_point(p, q):
                        hit = True
                    elif not ifs.exact and math.dist(p, q) < 2 * ifs.tolerance:
                        near = True
        if hit:
            essential.append(x)
    if near:
        warnings.warn(f"{ifs.name}: fixed-point images within (eps, 2 eps) of each other", AmbiguousContact, stacklevel=2)
    ifs._fixed = (f0p, tuple(essential))
    return ifs._fixed


def check_distinct_fixed_points(ifs: IFS):
    f0p, _ = fixed_points(ifs)
    for (i, x), (j, y) in combinations(enumerate(f0p), 2):
        if ifs.same_point(x, y):
            raise IfsError(f"maps {i + 1} and {j + 1} share the fixed point {x}")


def check_similitudes(ifs: IFS):
    """Check |S(x)-S(y)| = c|x-y| on pairs of fixed points (exact when possible)."""
    f0p, _ = fixed_points(ifs)
    if ifs.coordinates == "barycentric":
        if ifs.vertices is None:
            return
        cart = ifs.to_cartesian
        exact = False
    else:
        cart = tuple
        exact = ifs.exact
    for k, s in enumerate(ifs.maps):
        for x, y in combinations(f0p, 2):
            lhs = sum((p - q) ** 2 for p, q in zip(cart(s(x)), cart(s(y))))
            rhs = s.ratio**2 * sum((p - q) ** 2 for p, q in zip(cart(x), cart(y)))
            if exact:
                ok = lhs == rhs
            else:
                ok = abs(float(lhs) - float(rhs)) <= 1e-9 * max(1.0, float(rhs))
            if not ok:
                raise IfsError(f"map {k + 1} is not a similitude with ratio {s.ratio}")


def validate(ifs: IFS) -> IFS:
    check_similitudes(ifs)
    check_distinct_fixed_points(ifs)
    return ifs


def cell_vertices(w: Word, ifs: IFS) -> tuple:
    """``S_w(F_0)``, ordered like ``F_0``."""
    cache = ifs._cell_cache
    hit = cache.get(w)
    if hit is None:
        if not w:
            hit = fixed_points(ifs)[1]
        else:
            # S_w = S_{w_1} ∘ S_{w_2...w_n}: one base map per level
            check_word(w, ifs.n_letters)
            s = ifs.maps[w[0] - 1]
            hit = tuple(s(x) for x in cell_vertices(w[1:], ifs))
        cache[w] = hit
    return hit


def base_box(ifs: IFS):
    if ifs.box is not None:
        return ifs.box
    f0p, _ = fixed_points(ifs)
    lo = tuple(min(q[k] for q in f0p) for k in range(ifs.dim))
    hi = tuple(max(q[k] for q in f0p) for k in range(ifs.dim))
    return lo, hi


def cell_box(w: Word, ifs: IFS):
    """Axis-aligned box ``S_w(B)`` of the base box B; maps must be diagonal."""
    cache = ifs._box_cache
    hit = cache.get(w)
    if hit is not None:
        return hit
    if not w:
        hit = base_box(ifs)
    else:
        check_word(w, ifs.n_letters)
        s = ifs.maps[w[0] - 1]
        for i, row in enumerate(s.linear):
            for j, a in enumerate(row):
                if i != j and a != 0:
                    raise IfsError("box intersection needs axis-aligned maps")
        lo, hi = cell_box(w[1:], ifs)
        a, b = s(lo), s(hi)
        hit = tuple(map(min, a, b)), tuple(map(max, a, b))
    cache[w] = hit
    return hit


def contact_dimension(v: Word, w: Word, ifs: IFS):
    """Dimension of the contact between the cells of v and w.

    Returns ``(dim, ambiguous)`` where ``dim`` is -1 for disjoint cells, 0 for
    a point contact, 1 for a segment and so on.  ``ambiguous`` is set in
    tolerance mode when some pair of points is within (eps, 2 eps).
    """
    if ifs.intersection == "boxes":
        (lo1, hi1), (lo2, hi2) = cell_box(v, ifs), cell_box(w, ifs)
        d = 0
        for a1, b1, a2, b2 in zip(lo1, hi1, lo2, hi2):
            lo, hi = max(a1, a2), min(b1, b2)
            if ifs.exact:
                if lo > hi:
                    return -1, False
                d += lo < hi
            else:
                if lo > hi + ifs.tolerance:
                    return -1, lo <= hi + 2 * ifs.tolerance
                d += hi - lo > ifs.tolerance
        return d, False
    shared, ambiguous = shared_vertices(cell_vertices(v, ifs), cell_vertices(w, ifs), ifs)
    if not shared:
        return -1, ambiguous
    return affine_rank(shared, ifs), ambiguous


def shared_vertices(p, q, ifs: IFS):
    if ifs.exact:
        sq = set(q)
        return [x for x in p if x in sq], False
    out, ambiguous = [], False
    eps = ifs.tolerance
    for x in p:
        dmin = min(math.dist(x, y) for y in q)
        if dmin < eps:
            out.append(x)
        elif dmin < 2 * eps:
            ambiguous = True
    return out, ambiguous


def affine_rank(points, ifs: IFS) -> int:
    pts = [ifs.chart(x) for x in points]
    if len(pts) <= 1:
        return 0
    diffs = [la.vsub(x, pts[0]) for x in pts[1:]]
    return la.rank(diffs, 0 if ifs.exact else ifs.tolerance)


def in_hull(x, points, tol=0) -> bool:
    """Closed convex-hull membership, decided on simplices spanned by ``points``."""
    pts = [tuple(p) for p in points]
    one = Fraction(1) if not tol else 1.0
    diffs = [la.vsub(p, pts[0]) for p in pts[1:]]
    r = la.rank(diffs, tol) if diffs else 0
    for sub in combinations(pts, r + 1):
        cols = [list(p) + [one] for p in sub]
        a = [list(row) for row in zip(*cols)]
        mu = la.solve(a, list(x) + [one], tol)
        if mu is not None and all(m >= -tol for m in mu):
            return True
    return False


def interiors_disjoint(p, q, tol=0) -> bool:
    """Separating-axis test for two convex polytopes given by their vertices."""
    d = len(p[0])
    dirs = [la.vsub(b, a) for poly in (p, q) for a, b in combinations(poly, 2)]
    if d == 1:
        axes = [(Fraction(1) if not tol else 1.0,)]
    else:
        axes = []
        for combo in combinations(dirs, d - 1):
            n = la.null_vector(list(combo), tol)
            if n is not None:
                axes.append(n)
    for n in axes:
        pp = [la.dot(n, x) for x in p]
        qq = [la.dot(n, x) for x in q]
        if max(pp) <= min(qq) + tol or max(qq) <= min(pp) + tol:
            return True
    return False


def osc_probe(ifs: IFS, samples: int = 0) -> dict:
    """Advisory check of the declared open set (not a proof of the OSC).

    Verifies S_i(O) ⊆ O on the polytope vertices and pairwise disjointness
    of the image interiors.  ``samples`` extra points per map (convex
    combinations of the vertices) are also tested for containment.
    """
    if ifs.open_set is None:
        return {"status": "undeclared"}
    tol = 0 if ifs.exact else ifs.tolerance
    poly = [ifs.chart(x) for x in ifs.open_set]
    images = [[ifs.chart(s(x)) for x in ifs.open_set] for s in ifs.maps]
    uncontained = []
    for i, img in enumerate(images):
        probes = list(img)
        for k in range(samples):
            weights = [Fraction(1 + (k * 7 + j * 3) % 5) for j in range(len(img))]
            tot = sum(weights)
            probes.append(tuple(sum(wt / tot * v[c] for wt, v in zip(weights, img)) for c in range(len(img[0]))))
        if not all(in_hull(x, poly, tol) for x in probes):
            uncontained.append(i + 1)
    overlapping = [
        (i + 1, j + 1)
        for i, j in combinations(range(len(images)), 2)
        if not interiors_disjoint(images[i], images[j], tol)
    ]
    ok = not uncontained and not overlapping
    return {
        "status": "pass" if ok else "fail",
        "contained": not uncontained,
        "uncontained_maps": uncontained,
        "disjoint": not overlapping,
        "overlapping_pairs": overlapping,
    }


def cell_in_parent(w: Word, a: int, ifs: IFS) -> bool:
    """Whether the vertices of cell ``wa`` lie in the hull of cell ``w``."""
    tol = 0 if ifs.exact else ifs.tolerance
    if ifs.intersection == "boxes":
        (lo, hi), (lo2, hi2) = cell_box(w, ifs), cell_box(w + bytes([a]), ifs)
        return all(l <= l2 + tol and h2 <= h + tol for l, h, l2, h2 in zip(lo, hi, lo2, hi2))
    outer = [ifs.chart(x) for x in cell_vertices(w, ifs)]
    return all(in_hull(ifs.chart(x), outer, tol) for x in cell_vertices(w + bytes([a]), ifs))


__all__ = [
    "EMPTY",
    "IFS",
    "IfsError",
    "Similitude",
    "cell_box",
    "cell_vertices",
    "compose_map",
    "contact_dimension",
    "fixed_points",
    "osc_probe",
    "validate",
]
