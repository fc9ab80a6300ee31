"""The weighted Markov chain on word space.

From a word ``v`` the chain moves to a child ``v̂i`` of any ``v̂ ∼ v`` with
probability ``m(v̂i) / Σ_{v̂∼v} m(v̂)``.  Everything here is exact rational
arithmetic; only path sampling touches machine integers, and it compares
them against exact cumulative thresholds.
"""

import csv
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .adjacency import WordSpace, check_B2
from .words import EMPTY, Word, shortlex


class MassError(ValueError):
    pass


class B2Required(RuntimeError):
    """The fast q recursion was requested on a structure failing (B2)."""


class MassDistribution:
    """Positive letter weights summing to one, extended multiplicatively."""

    def __init__(self, masses):
        ms = tuple(Fraction(m) for m in masses)
        if len(ms) < 2:
            raise MassError("need a mass for every letter")
        if any(m <= 0 for m in ms):
            raise MassError("masses must be positive")
        if sum(ms) != 1:
            raise MassError("masses must sum to 1")
        self.letters = ms
        self._memo = {EMPTY: Fraction(1)}

    @classmethod
    def uniform(cls, n_letters: int) -> "MassDistribution":
        return cls([Fraction(1, n_letters)] * n_letters)

    @property
    def n_letters(self) -> int:
        return len(self.letters)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.letters)) == 1

    def of(self, w: Word) -> Fraction:
        m = self._memo.get(w)
        if m is None:
            m = self._memo[w] = self.of(w[:-1]) * self.letters[w[-1] - 1]
        return m

    def __repr__(self):
        return f"MassDistribution({', '.join(str(m) for m in self.letters)})"


class MarkovChain:
    def __init__(self, space: WordSpace, masses: MassDistribution):
        if masses.n_letters != space.n_letters:
            raise MassError("mass count differs from the number of maps")
        self.space = space
        self.masses = masses
        self._class_mass = {}
        self._green = {}
        self._nstep = {}
        self._forward = {}
        self._hom = None
        self._faults = {}

    @property
    def n_letters(self) -> int:
        return self.space.n_letters

    def homogeneous(self) -> "MarkovChain":
        """The chain with uniform masses on the same equivalence structure."""
        if self._hom is None:
            self._hom = self if self.masses.is_uniform else MarkovChain(self.space, MassDistribution.uniform(self.n_letters))
        return self._hom

    def mass(self, w: Word) -> Fraction:
        return self.masses.of(w)

    def class_mass(self, v: Word) -> Fraction:
        """``Σ_{v̂∼v} m(v̂)``."""
        cls = self.space.cls(v)
        s = self._class_mass.get(cls[0])
        if s is None:
            s = self._class_mass[cls[0]] = sum(self.masses.of(u) for u in cls)
        return s

    def transition(self, v: Word, w: Word) -> Fraction:
        if len(w) != len(v) + 1 or not self.space.same_class(w[:-1], v):
            return Fraction(0)
        return self.masses.of(w) / self.class_mass(v)

    def children(self, v: Word) -> list:
        """``[(w, p(v, w))]`` over the support of ``p(v, ·)``."""
        denom = self.class_mass(v)
        return [(w, self.masses.of(w) / denom) for w in self.space.children(v)]

    def n_step(self, v: Word, w: Word, n: int) -> Fraction:
        """``p_n(v, w) = Σ_u p_{n-1}(v, u) p(u, w)`` with ``p_0`` the delta."""
        if n == 0:
            return Fraction(int(v == w))
        if len(w) - len(v) != n:
            return Fraction(0)
        key = (v, w)
        hit = self._nstep.get(key)
        if hit is None:
            # p(u, w) > 0 exactly for u in the class of w⁻
            hit = sum(
                (self.n_step(v, u, n - 1) * self.transition(u, w) for u in self.space.cls(w[:-1])),
                Fraction(0),
            )
            self._nstep[key] = hit
        return hit

    def green(self, v: Word, w: Word) -> Fraction:
        """``g(v, w) = p(w⁻, w) Σ_{u∼w⁻} g(v, u)``, with ``g(v, v) = 1``."""
        if len(w) <= len(v):
            return Fraction(int(v == w))
        key = (v, w)
        hit = self._green.get(key)
        if hit is None and key in self._faults:
            hit = self._green[key] = self._faults[key]
        if hit is None:
            u = w[:-1]
            s = sum((self.green(v, x) for x in self.space.cls(u)), Fraction(0))
            hit = self._green[key] = self.masses.of(w) / self.class_mass(u) * s if s else Fraction(0)
        return hit

    def green_from(self, v: Word, depth: int) -> dict:
        """``{w: g(v, w)}`` for all successors ``w`` of ``v`` with ``|w| ≤ depth``.

        Propagates one level at a time: all children of one class share the
        class sum of the previous level.
        """
        key = v
        cached = self._forward.get(key)
        if cached is not None and cached[0] >= depth:
            return {w: g for w, g in cached[1].items() if len(w) <= depth}
        out = {v: Fraction(1)}
        front = {v: Fraction(1)}
        space = self.space
        for _ in range(len(v), depth):
            sums = {}
            for u, g in front.items():
                cls = space.cls(u)
                sums[cls] = sums.get(cls, 0) + g
            nxt = {}
            for cls, s in sums.items():
                factor = s / self.class_mass(cls[0])
                for u in cls:
                    for a in range(1, self.n_letters + 1):
                        w = u + bytes([a])
                        nxt[w] = self.masses.of(w) * factor
            out.update(nxt)
            front = nxt
        for (fv, fw), val in self._faults.items():
            if fv == v and fw in out:
                out[fw] = val
        self._forward[key] = (depth, out)
        return dict(out)

    def inject_fault(self, v: Word, w: Word, value: Fraction):
        """Test hook: force ``g(v, w)`` to ``value`` in every later lookup."""
        self._faults[(v, w)] = Fraction(value)
        self._green.clear()
        self._forward.clear()

    def q(self, v: Word, w: Word, method: str = "definition") -> Fraction:
        """The normalised Green function ``q(v, w) = g(v, w) m(w)⁻¹ Σ_{v̂∼v} m(v̂)``.

        ``method`` selects the closed definition, the mass-weighted level
        recursion, or the mass-free recursion ``q(v, wi) = R(w)⁻¹ Σ_{w̃∼w} q(v, w̃)``
        which requires (B2).
        """
        if v == w:
            return Fraction(1)
        if method == "definition":
            return self.green(v, w) * self.class_mass(v) / self.masses.of(w)
        if method not in ("recursive", "fast"):
            raise ValueError(f"unknown q method {method!r}")
        if method == "fast":
            self.require_B2(len(w))
        return self._q_rec(v, w, method == "fast", {})

    def _q_rec(self, v, w, fast, memo):
        if v == w:
            return Fraction(1)
        if len(w) <= len(v):
            return Fraction(0)
        hit = memo.get(w)
        if hit is not None:
            return hit
        u = w[:-1]
        space = self.space
        if space.same_class(u, v):
            val = Fraction(1)
        else:
            cls = space.cls(u)
            if fast:
                val = sum((self._q_rec(v, x, fast, memo) for x in cls), Fraction(0)) / len(cls)
            else:
                val = sum((self._q_rec(v, x, fast, memo) * self.masses.of(x) for x in cls), Fraction(0))
                val /= self.class_mass(u)
        memo[w] = val
        return val

    def require_B2(self, depth: int):
        report = check_B2(depth, self.space, self.masses)
        if not report["pass"]:
            bad = report["failing"][0]["word"]
            raise B2Required(f"(B2) fails at word {bad}; the mass-free q recursion does not apply")

    def apply_operator(self, f, v: Word) -> Fraction:
        """``(Pf)(v) = Σ_w p(v, w) f(w)``."""
        return sum((p * f(w) for w, p in self.children(v)), Fraction(0))

    # sampling

    def _thresholds(self, depth):
        """Per level: words, index map, child indices and integer thresholds."""
        space = self.space
        levels = []
        for k in range(depth + 1):
            words = space.level(k).words
            levels.append((words, {w: i for i, w in enumerate(words)}))
        tables = []
        for k in range(depth):
            words, _ = levels[k]
            idx_next = levels[k + 1][1]
            rows = []
            for v in words:
                kids = self.children(v)
                acc = Fraction(0)
                cuts = []
                for _, p in kids[:-1]:
                    acc += p
                    # r < acc * 2^64  <=>  r < ceil(acc * 2^64) for integer r
                    cuts.append(-((-acc.numerator << 64) // acc.denominator))
                rows.append((np.array([idx_next[w] for w, _ in kids]), np.array(cuts, dtype=np.uint64)))
            tables.append(rows)
        return levels, tables

    def sample_indices(self, seed: int, depth: int, start: int, count: int):
        """State indices of paths ``start .. start+count-1``, shape ``(count, depth+1)``.

        Path ``i`` draws from Philox counter blocks ``[i*B, (i+1)*B)`` under key
        ``seed``, so each path depends only on ``(seed, i)``.
        """
        levels, tables = self._thresholds(depth)
        out = np.zeros((count, depth + 1), dtype=np.int64)
        if depth == 0 or count == 0:
            return levels, out
        blocks = -(-depth // 4)
        bg = np.random.Philox(key=seed)
        bg.advance(start * blocks)
        draws = bg.random_raw(count * blocks * 4).reshape(count, blocks * 4)[:, :depth]
        for k in range(depth):
            state = out[:, k]
            for s in np.unique(state):
                sel = state == s
                kids, cuts = tables[k][s]
                out[sel, k + 1] = kids[np.searchsorted(cuts, draws[sel, k], side="right")]
        return levels, out

    def sample_path(self, seed: int, depth: int, index: int = 0) -> list:
        """``[X_0, ..., X_depth]`` for path number ``index``; ``X_0`` is the empty word."""
        levels, out = self.sample_indices(seed, depth, index, 1)
        return [levels[k][0][i] for k, i in enumerate(out[0])]

    def occupancy(self, seed: int, depth: int, n_paths: int) -> Counter:
        """How often each depth-``depth`` word is ``X_depth`` over ``n_paths`` paths."""
        levels, out = self.sample_indices(seed, depth, 0, n_paths)
        words = levels[depth][0]
        counts = np.bincount(out[:, depth], minlength=len(words))
        return Counter({w: int(c) for w, c in zip(words, counts) if c})


def occupancy_report(chain: MarkovChain, seed: int, depth: int, n_paths: int, z_limit: float = 4.0) -> dict:
    counts = chain.occupancy(seed, depth, n_paths)
    rows = []
    flagged = False
    for w in chain.space.level(depth).words:
        m = chain.mass(w)
        freq = counts.get(w, 0) / n_paths
        var = float(m) * (1 - float(m)) / n_paths
        z = (freq - float(m)) / math.sqrt(var) if var > 0 else 0.0
        flagged |= abs(z) > z_limit
        rows.append({"word": chain.space.format(w), "count": counts.get(w, 0), "frequency": freq, "predicted": str(m), "z": z})
    return {"depth": depth, "paths": n_paths, "seed": seed, "rows": rows, "flagged": flagged}


@dataclass
class KernelTable:
    """Sparse ``(v, w) -> (g, q, k, k_hom)`` over all pairs with ``g(v, w) > 0`` up to ``depth``."""

    depth: int
    entries: dict
    class_masses: dict

    @classmethod
    def build(cls, chain: MarkovChain, depth: int) -> "KernelTable":
        entries = {}
        class_masses = {}
        hom = chain.homogeneous()
        for n in range(depth + 1):
            for v in chain.space.level(n).words:
                mv = chain.class_mass(v)
                class_masses[v] = mv
                g_hom = hom.green_from(v, depth)
                for w, g in chain.green_from(v, depth).items():
                    q = Fraction(1) if v == w else g * mv / chain.mass(w)
                    entries[(v, w)] = (g, q, g / chain.mass(w), g_hom[w] / hom.mass(w))
        return cls(depth, entries, class_masses)

    def rows(self):
        return sorted(self.entries, key=lambda vw: (shortlex(vw[0]), shortlex(vw[1])))

    def write_csv(self, path, space: WordSpace):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["v", "w", "gap", "g", "q"])
            for v, w in self.rows():
                g, q = self.entries[(v, w)][:2]
                out.writerow([space.format(v), space.format(w), len(w) - len(v), ratstr(g), ratstr(q)])


def ratstr(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
