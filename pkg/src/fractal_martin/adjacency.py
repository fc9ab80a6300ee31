"""The relation ∼ on words, its classes per level, and structural audits.

Two words of equal length are related when their cells touch and their
parents differ; a word is always related to itself.  Classes are the
connected components of this relation within a level, and ``R(w)`` is the
size of the class of ``w``.  The audits report where the relation fails to
be transitive, whether the (B2) dichotomy holds, finite-depth nestedness
evidence, and the LW1–LW5 conditions of a chain built on the relation.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
import warnings

import numpy as np
from scipy.cluster.hierarchy import DisjointSet
from scipy.spatial import cKDTree

from .ifs import (
    IFS,
    AmbiguousContact,
    ExactModeRequired,
    cell_box,
    cell_vertices,
    compose_map,
    contact_dimension,
    fixed_points,
)
from .words import EMPTY, Word, check_word, enumerate_level, format_word


@dataclass(frozen=True)
class EquivalenceRules:
    """How ∼ is generated.

    ``contact`` is the minimal dimension of the cell contact that counts as
    touching: 0 accepts a single common point, 1 requires a common segment.
    Each rule ``(alpha, beta)`` glues ``u·alpha·a^j ∼ u·beta·b^j`` for every
    prefix ``u`` and every ``j ≥ 0``, where ``a`` and ``b`` are the last
    letters of ``alpha`` and ``beta``; this is the shape of the corner
    gluings ``uab^k ∼ uba^k``.
    """

    mode: str = "geometric"
    contact: int = 0
    rules: tuple = ()

    def __post_init__(self):
        if self.mode not in ("geometric", "geometric-plus-rules", "rules"):
            raise ValueError(f"unknown equivalence mode {self.mode!r}")
        closed = set()
        for a, b in self.rules:
            if len(a) != len(b) or not a:
                raise ValueError("rule words must be non-empty and of equal length")
            if a[:-1] == b[:-1]:
                raise ValueError("rule words must have different parents")
            closed.add((a, b))
            closed.add((b, a))
        object.__setattr__(self, "rules", tuple(sorted(closed)))

    @property
    def uses_geometry(self) -> bool:
        return self.mode != "rules"

    @property
    def uses_rules(self) -> bool:
        return self.mode != "geometric"

    def partners(self, v: Word):
        """Words glued to ``v`` by some rule."""
        n = len(v)
        for a, b in self.rules:
            la_ = len(a)
            for s in range(la_, n + 1):
                tail = v[n - s :]
                if tail[:la_] != a or any(c != a[-1] for c in tail[la_:]):
                    continue
                yield v[: n - s] + b + bytes([b[-1]]) * (s - la_)

    def glued(self, v: Word, w: Word) -> bool:
        return self.uses_rules and w in set(self.partners(v))


GEOMETRIC = EquivalenceRules()


def equivalent(v: Word, w: Word, ifs: IFS, rules: EquivalenceRules = GEOMETRIC) -> bool:
    """Decide ``v ∼ w`` directly from the definition."""
    if v == w:
        return True
    if len(v) != len(w) or v[:-1] == w[:-1]:
        return False
    if rules.glued(v, w):
        return True
    if not rules.uses_geometry:
        return False
    dim, ambiguous = contact_dimension(v, w, ifs)
    if ambiguous:
        warnings.warn(
            f"ambiguous contact between {v!r} and {w!r} (distance in (eps, 2 eps))",
            AmbiguousContact,
            stacklevel=2,
        )
    return dim >= rules.contact


@dataclass
class LevelStructure:
    depth: int
    words: list
    classes: list
    class_index: dict
    neighbors: dict
    ambiguous: list = field(default_factory=list)

    def cls(self, w: Word) -> tuple:
        return self.classes[self.class_index[w]]

    def R(self, w: Word) -> int:
        return len(self.cls(w))

    def related(self, v: Word, w: Word) -> bool:
        return v == w or w in self.neighbors[v]

    def same_class(self, v: Word, w: Word) -> bool:
        return self.class_index[v] == self.class_index[w]


def _candidate_pairs(words, ifs: IFS):
    """Pairs of same-level words whose cells might touch."""
    if not ifs.exact:
        pts, owner = [], []
        for w in words:
            for x in cell_vertices(w, ifs):
                pts.append([float(c) for c in x])
                owner.append(w)
        tree = cKDTree(np.asarray(pts))
        for i, j in tree.query_pairs(2 * ifs.tolerance):
            if owner[i] != owner[j]:
                yield owner[i], owner[j]
        return
    buckets = defaultdict(list)
    for w in words:
        if ifs.intersection == "boxes":
            lo, hi = cell_box(w, ifs)
            keys = {tuple(h if bit else l for l, h, bit in zip(lo, hi, bits)) for bits in _corners(len(lo))}
        else:
            keys = set(cell_vertices(w, ifs))
        for k in keys:
            buckets[k].append(w)
    for ws in buckets.values():
        yield from combinations(ws, 2)


def _corners(d):
    return [tuple((k >> i) & 1 for i in range(d)) for k in range(1 << d)]


def build_level_structure(n: int, ifs: IFS, rules: EquivalenceRules = GEOMETRIC) -> LevelStructure:
    """Classes of ∼ at depth ``n`` as connected components."""
    words = enumerate_level(n, ifs.n_letters)
    neighbors = {w: set() for w in words}
    ambiguous = []
    if n >= 2:
        if rules.uses_geometry:
            seen = set()
            for v, w in _candidate_pairs(words, ifs):
                key = (v, w) if v < w else (w, v)
                if key in seen or v[:-1] == w[:-1]:
                    continue
                seen.add(key)
                dim, amb = contact_dimension(v, w, ifs)
                if amb:
                    ambiguous.append(key)
                if dim >= rules.contact:
                    neighbors[v].add(w)
                    neighbors[w].add(v)
        if rules.uses_rules:
            for v in words:
                for w in rules.partners(v):
                    if w != v:
                        neighbors[v].add(w)
                        neighbors[w].add(v)
    if ambiguous:
        warnings.warn(f"{len(ambiguous)} ambiguous contacts at depth {n}", AmbiguousContact, stacklevel=2)
    ds = DisjointSet(words)
    for v, ns in neighbors.items():
        for w in ns:
            ds.merge(v, w)
    classes = sorted(tuple(sorted(s)) for s in ds.subsets())
    class_index = {w: i for i, c in enumerate(classes) for w in c}
    return LevelStructure(n, words, classes, class_index, neighbors, ambiguous)


FULL_LEVEL_LIMIT = 20000


class WordSpace:
    """Level structures of one IFS and rule set, built lazily and cached.

    Levels with at most ``full_limit`` words are built whole.  Beyond that,
    classes are found locally: a cell can only meet cells whose parents meet
    its parent (or share it), so neighbours are searched among children of
    the parent's touching cells.
    """

    def __init__(self, ifs: IFS, rules: EquivalenceRules = GEOMETRIC, full_limit: int = FULL_LEVEL_LIMIT):
        self.ifs = ifs
        self.rules = rules
        self.full_limit = full_limit
        self._levels = {}
        self._touching = {}
        self._local = {}

    @property
    def n_letters(self) -> int:
        return self.ifs.n_letters

    def level(self, n: int) -> LevelStructure:
        lv = self._levels.get(n)
        if lv is None:
            lv = self._levels[n] = build_level_structure(n, self.ifs, self.rules)
        return lv

    def _full(self, n: int) -> bool:
        return n in self._levels or self.n_letters**n <= self.full_limit

    def touching(self, y: Word) -> frozenset:
        """Words of length ``|y|`` other than ``y`` whose cells meet the cell of ``y``."""
        hit = self._touching.get(y)
        if hit is None:
            if not y:
                hit = frozenset()
            else:
                base = {EMPTY} if len(y) == 1 else self.touching(y[:-1]) | {y[:-1]}
                cands = {x + bytes([a]) for x in base for a in range(1, self.n_letters + 1)}
                cands.discard(y)
                hit = frozenset(x for x in cands if contact_dimension(x, y, self.ifs)[0] >= 0)
            self._touching[y] = hit
        return hit

    def neighbors(self, v: Word) -> set:
        """Words ``w ≠ v`` with ``v ∼ w``."""
        if self._full(len(v)):
            return self.level(len(v)).neighbors[v]
        out = set()
        if self.rules.uses_geometry:
            for x in self.touching(v):
                if x[:-1] != v[:-1] and contact_dimension(x, v, self.ifs)[0] >= self.rules.contact:
                    out.add(x)
        if self.rules.uses_rules:
            out.update(w for w in self.rules.partners(v) if w != v)
        return out

    def cls(self, w: Word) -> tuple:
        if self._full(len(w)):
            return self.level(len(w)).cls(w)
        hit = self._local.get(w)
        if hit is None:
            seen = {w}
            todo = [w]
            while todo:
                for x in self.neighbors(todo.pop()):
                    if x not in seen:
                        seen.add(x)
                        todo.append(x)
            hit = tuple(sorted(seen))
            for x in hit:
                self._local[x] = hit
        return hit

    def R(self, w: Word) -> int:
        return len(self.cls(w))

    def same_class(self, v: Word, w: Word) -> bool:
        if len(v) != len(w):
            return False
        if self._full(len(v)):
            return self.level(len(v)).same_class(v, w)
        return w in self.cls(v)

    def children(self, v: Word) -> list:
        """``{v̂a : v̂ ∼ v, a ∈ A}`` in lexicographic order."""
        return [u + bytes([a]) for u in self.cls(v) for a in range(1, self.n_letters + 1)]

    def ancestors(self, x: Word) -> dict:
        """``{level: set of u with u ≪ x}`` for every level up to ``|x|``."""
        out = {len(x): {x}}
        cur = {x}
        for j in range(len(x) - 1, -1, -1):
            cur = {u for s in cur for u in self.cls(s[:-1])}
            out[j] = cur
        return out

    def format(self, w: Word) -> str:
        return format_word(w, self.n_letters)

    def check(self, w: Word) -> Word:
        return check_word(w, self.n_letters)


def audit_transitivity(n: int, space: WordSpace) -> list:
    """Triples ``(u, v, w)`` with ``u ∼ v ∼ w`` but not ``u ∼ w``, at depth n."""
    lv = space.level(n)
    out = []
    for v in lv.words:
        for u, w in combinations(sorted(lv.neighbors[v]), 2):
            if w not in lv.neighbors[u]:
                out.append((u, v, w))
    return out


def check_B2(n: int, space: WordSpace, masses) -> dict:
    """Which clause of (B2) each word of depth ``1..n`` satisfies."""
    words = []
    ok = True
    for k in range(1, n + 1):
        lv = space.level(k)
        up = space.level(k - 1)
        for w in lv.words:
            cls = lv.cls(w)
            mw = masses.of(w)
            mass_eq = all(masses.of(x) == mw for x in cls)
            parent_eq = all(up.same_class(w[:-1], x[:-1]) for x in cls)
            ok &= mass_eq or parent_eq
            if not (mass_eq and parent_eq) or len(cls) > 1:
                words.append({"word": space.format(w), "mass": mass_eq, "parent": parent_eq})
    failing = [r for r in words if not (r["mass"] or r["parent"])]
    return {"depth": n, "pass": ok, "failing": failing, "nontrivial": words}


def check_nested(n: int, ifs: IFS) -> dict:
    """Finite-depth evidence for nestedness (connectivity and nesting axioms)."""
    if not ifs.exact:
        raise ExactModeRequired("exact mode required")
    N = ifs.n_letters
    f0p, f0 = fixed_points(ifs)
    f0set = set(f0)

    ones = enumerate_level(1, N)
    ds = DisjointSet(ones)
    for v, w in combinations(ones, 2):
        if contact_dimension(v, w, ifs)[0] >= 0:
            ds.merge(v, w)
    connected = ds.n_subsets == 1

    # nesting: every point shared by depth-n cells lies in S_v(F_0) ∩ S_w(F_0)
    # for each pair of distinct ancestors v, w at a common level
    nesting_violations = []
    owners = defaultdict(list)
    for x in enumerate_level(n, N):
        for p in cell_vertices(x, ifs):
            owners[p].append(x)
    vert_cache = {}

    def verts(u):
        if u not in vert_cache:
            vert_cache[u] = set(cell_vertices(u, ifs))
        return vert_cache[u]

    for p, xs in owners.items():
        for x, y in combinations(xs, 2):
            for ell in range(1, n + 1):
                v, w = x[:ell], y[:ell]
                if v != w and not (p in verts(v) and p in verts(w)):
                    nesting_violations.append((v, w, p))
                    break

    child_hits = []
    for k in range(n):
        for u in enumerate_level(k, N):
            su = compose_map(u, ifs)
            for a in range(1, N + 1):
                got = verts(u + bytes([a])) & verts(u)
                if got != {su(f0p[a - 1])}:
                    child_hits.append((u, a))

    pair_hits = []
    for k in range(1, n + 1):
        bucket = defaultdict(list)
        for u in enumerate_level(k, N):
            for p in verts(u):
                bucket[p].append(u)
        seen = set()
        for us in bucket.values():
            for u, v in combinations(us, 2):
                if (u, v) in seen or u[:-1] == v[:-1]:
                    continue
                seen.add((u, v))
                if len(verts(u) & verts(v)) > 1:
                    pair_hits.append((u, v))

    fmt = lambda w: format_word(w, N)
    return {
        "depth": n,
        "connected": connected,
        "nesting": not nesting_violations,
        "nesting_violations": [(fmt(v), fmt(w), [str(c) for c in p]) for v, w, p in nesting_violations[:20]],
        "single_vertex_in_child": not child_hits,
        "child_violations": [(fmt(u), a) for u, a in child_hits[:20]],
        "at_most_one_point": not pair_hits,
        "pair_violations": [(fmt(u), fmt(v)) for u, v in pair_hits[:20]],
        "all_fixed_points_essential": set(f0p) == f0set,
        "pass": connected and not nesting_violations and not child_hits and not pair_hits,
    }


def _lw_inf(chain, n):
    space = chain.space
    best = None
    for k in range(n):
        for cls in space.level(k).classes:
            denom = chain.class_mass(cls[0])
            for w in space.children(cls[0]):
                p = chain.masses.of(w) / denom
                if best is None or p < best:
                    best = p
    return best


def _lw_ratio(chain, n):
    space = chain.space
    worst = Fraction(1)
    for x in space.level(n).words:
        for us in space.ancestors(x).values():
            ms = [chain.masses.of(u) for u in us]
            worst = max(worst, max(ms) / min(ms))
    return worst


def ds_type_check(n: int, chain) -> dict:
    """LW1–LW5 at truncation depth ``n`` for a chain on this word space.

    LW1–LW3 are decided exactly on all transitions into depth ≤ n.  LW4 and
    LW5 only have trend evidence at finite depth: the infimum of positive
    transition probabilities and the largest same-level ancestor mass ratio
    are compared with their values at depth n−1.
    """
    space = chain.space
    ifs = space.ifs
    lw1 = lw2 = lw3 = True
    for k in range(n):
        lv = space.level(k)
        nxt = space.level(k + 1)
        for v in lv.words:
            for w in space.children(v):
                if w[:-1] != v and contact_dimension(v, w[:-1], ifs)[0] < 0:
                    lw2 = False
            for a in range(1, space.n_letters + 1):
                if chain.transition(v, v + bytes([a])) <= 0:
                    lw1 = False
            # LW3: w⁻ ∼ v and w ∼ vk for some letter k must give p(v, w) > 0
            for a in range(1, space.n_letters + 1):
                for w in nxt.cls(v + bytes([a])):
                    if lv.same_class(w[:-1], v) and chain.transition(v, w) <= 0:
                        lw3 = False
    a_n = _lw_inf(chain, n)
    a_prev = _lw_inf(chain, n - 1) if n >= 2 else a_n
    c_n = _lw_ratio(chain, n)
    c_prev = _lw_ratio(chain, n - 1) if n >= 1 else c_n
    return {
        "depth": n,
        "LW1": lw1,
        "LW2": lw2,
        "LW3": lw3,
        "LW4": a_n > 0 and not a_n < a_prev,
        "LW5": not c_n > c_prev,
        "inf_probability": a_n,
        "inf_probability_previous": a_prev,
        "inf_decreased": a_n < a_prev,
        "C0": c_n,
        "C0_previous": c_prev,
        "pass": lw1 and lw2 and lw3 and a_n > 0 and not a_n < a_prev and not c_n > c_prev,
    }


__all__ = [
    "EMPTY",
    "AmbiguousContact",
    "EquivalenceRules",
    "LevelStructure",
    "WordSpace",
    "audit_transitivity",
    "build_level_structure",
    "check_B2",
    "check_nested",
    "ds_type_check",
    "equivalent",
]
