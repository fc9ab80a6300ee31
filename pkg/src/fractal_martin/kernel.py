"""Martin kernels, the homogeneous bridge, and the truncated Martin metric.

``k(v, w) = g(v, w) / g(∅, w) = g(v, w) / m(w)``.  The homogeneous kernel is
the same quantity for the uniform-mass chain on the same structure; under
(B1) and (B2) the two differ by a factor depending on ``v`` only.
"""

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional
import warnings

from .adjacency import check_B2
from .chain import MarkovChain, ratstr
from .words import EMPTY, EventuallyPeriodic, Word, enumerate_upto, shortlex


class AuditRefused(RuntimeError):
    """A structural assumption needed by the requested formula failed."""


class TruncationWarning(UserWarning):
    pass


def martin_kernel(chain: MarkovChain, v: Word, w: Word) -> Fraction:
    return chain.green(v, w) / chain.mass(w)


def martin_kernel_hom(chain: MarkovChain, v: Word, w: Word) -> Fraction:
    return martin_kernel(chain.homogeneous(), v, w)


def bridge_factor(chain: MarkovChain, v: Word) -> Fraction:
    """``R(v) N^{-|v|} / Σ_{v̂∼v} m(v̂)``."""
    return Fraction(chain.space.R(v), chain.n_letters ** len(v)) / chain.class_mass(v)


def _audits(chain, depth):
    memo = chain.__dict__.setdefault("_bridge_audits", {})
    if depth not in memo:
        b2 = check_B2(depth, chain.space, chain.masses)
        b1 = check_B1(chain, depth=depth)
        memo[depth] = (b1, b2)
    return memo[depth]


def kernel_via_theorem(chain: MarkovChain, v: Word, w: Word, audit_depth: Optional[int] = None):
    """``(bridge value, direct value)`` of ``k(v, w)``.

    The bridge value is ``1/m(v)`` on the diagonal and
    ``k_hom(v, w) R(v) N^{-|v|} / Σ m(v̂)`` otherwise.  Refuses when the (B1)
    or (B2) audit fails at ``audit_depth`` (default ``|w|``).
    """
    b1, b2 = _audits(chain, audit_depth if audit_depth is not None else max(len(w), 1))
    if not b2["pass"]:
        raise AuditRefused(f"(B2) fails at word {b2['failing'][0]['word']}")
    if not b1["pass"]:
        bad = b1["failing"][0]
        raise AuditRefused(f"(B1) check fails for v={bad['v']} along {bad['xi']}")
    if v == w:
        bridge = 1 / chain.mass(v)
    else:
        bridge = martin_kernel_hom(chain, v, w) * bridge_factor(chain, v)
    return bridge, martin_kernel(chain, v, w)


# metric


@dataclass(eq=False)
class MetricWeights:
    """Weights ``a(u) > 0`` of the metric and its truncation depth ``D``."""

    depth: int = 8
    a: Optional[Callable] = None
    _memo: dict = field(default_factory=dict, repr=False)

    @classmethod
    def default(cls, chain: MarkovChain, depth: int = 8) -> "MetricWeights":
        """``a(u) = m(u)^{|u|+1}``, so ``a(u)/g(∅,u) = m(u)^{|u|}`` is summable."""
        return cls(depth, lambda u: chain.mass(u) ** (len(u) + 1))

    def __call__(self, u: Word) -> Fraction:
        x = self._memo.get(u)
        if x is None:
            x = Fraction(self.a(u))
            if x <= 0:
                raise ValueError(f"metric weight must be positive, got a({u!r}) = {x}")
            self._memo[u] = x
        return x


def _weights(chain, weights):
    return weights if weights is not None else MetricWeights.default(chain)


def metric_terms(chain: MarkovChain, x: Word, weights: MetricWeights = None) -> dict:
    """``{u: a(u) k(u, x)}`` over ``|u| ≤ D``; only ancestors of ``x`` contribute."""
    weights = _weights(chain, weights)
    memo = chain.__dict__.setdefault("_metric_terms", {})
    key = (weights, x)
    hit = memo.get(key)
    if hit is None:
        hit = {}
        for level, us in chain.space.ancestors(x).items():
            if level > weights.depth:
                continue
            for u in us:
                k = martin_kernel(chain, u, x)
                if k:
                    hit[u] = weights(u) * k
        memo[key] = hit
    return hit


def martin_metric(chain: MarkovChain, v: Word, w: Word, weights: MetricWeights = None) -> Fraction:
    """``ρ_D(v, w) = Σ_{|u|≤D} a(u) |k(u, v) - k(u, w)|``, exact."""
    weights = _weights(chain, weights)
    if weights.depth < max(len(v), len(w)):
        warnings.warn(
            f"truncation depth {weights.depth} below word length {max(len(v), len(w))}; separation not guaranteed",
            TruncationWarning,
            stacklevel=2,
        )
    tv, tw = metric_terms(chain, v, weights), metric_terms(chain, w, weights)
    zero = Fraction(0)
    return sum((abs(tv.get(u, zero) - tw.get(u, zero)) for u in tv.keys() | tw.keys()), zero)


def separation_witness(chain: MarkovChain, v: Word, w: Word, weights: MetricWeights = None):
    """A word ``u`` whose term in ``ρ_D(v, w)`` is positive, with that term.

    The longer word works (the shorter one has no kernel mass on it); for
    equal lengths ``w`` itself does.  ``None`` when ``v == w`` or ``u`` lies
    beyond the truncation.
    """
    if v == w:
        return None
    weights = _weights(chain, weights)
    u = v if len(v) > len(w) else w
    if len(u) > weights.depth:
        return None
    term = weights(u) * abs(martin_kernel(chain, u, v) - martin_kernel(chain, u, w))
    return (u, term) if term > 0 else None


# kernels along infinite words


@dataclass
class ExtendedKernel:
    v: Word
    values: list
    hom_values: list
    factor: Fraction
    stabilized_at: Optional[int]
    differences: list
    proportional: bool

    @property
    def last(self) -> Fraction:
        return self.values[-1]


def _stabilized_at(values):
    """Least 1-based index from which the sequence is constant, if any."""
    if len(values) < 2 or values[-1] != values[-2]:
        return None
    j = len(values) - 1
    while j > 0 and values[j - 1] == values[-1]:
        j -= 1
    return j + 1


def extended_kernel(chain: MarkovChain, v: Word, xi, n: int) -> ExtendedKernel:
    """``[k(v, ξ|_1), ..., k(v, ξ|_n)]`` plus stabilization and proportionality."""
    words = xi.prefixes(n)
    values = [martin_kernel(chain, v, w) for w in words]
    hom = [martin_kernel_hom(chain, v, w) for w in words]
    factor = bridge_factor(chain, v)
    proportional = all(
        k == kh * factor for j, (k, kh) in enumerate(zip(values, hom), start=1) if j > len(v) and (k or kh)
    )
    return ExtendedKernel(
        v,
        values,
        hom,
        factor,
        _stabilized_at(values),
        [b - a for a, b in zip(values, values[1:])],
        proportional,
    )


def periodic_test_points(n_letters: int, head_len: int = 1, period_len: int = 2) -> list:
    """Eventually periodic words ``u·(p)^∞`` with ``|u| ≤ head_len`` and
    ``1 ≤ |p| ≤ period_len``; periods that are powers of shorter ones are skipped."""
    out = []
    for head in enumerate_upto(head_len, n_letters):
        for p in enumerate_upto(period_len, n_letters):
            if not p:
                continue
            if any(len(p) % d == 0 and p == p[:d] * (len(p) // d) for d in range(1, len(p))):
                continue
            if head and head[-1:] == p[-1:]:
                continue
            out.append(EventuallyPeriodic(head, p))
    return out


def _contracting(values, head, period):
    """Exact stabilization, or block-wise non-increasing consecutive differences."""
    if _stabilized_at(values) is not None:
        return True
    diffs = [abs(b - a) for a, b in zip(values, values[1:])][head:]
    blocks = [max(diffs[i : i + period]) for i in range(0, len(diffs) - period + 1, period)]
    if len(blocks) < 2:
        return False
    return all(b <= a for a, b in zip(blocks, blocks[1:])) and blocks[-1] < blocks[0]


def check_B1(chain: MarkovChain, depth: int = 6, v_depth: int = 2, points=None) -> dict:
    """Finite-depth (B1) evidence on the homogeneous chain.

    Along each eventually periodic test word the sequence ``k_hom(v, ξ|_n)``
    must either become constant or have consecutive differences that shrink
    from one period block to the next.
    """
    hom = chain.homogeneous()
    if points is None:
        points = periodic_test_points(chain.n_letters)
        if chain.n_letters > 4:
            # keep the sample small on large alphabets: u(a) and (ab)
            points = [p for p in points if len(p.head) + len(p.period) <= 2]
            v_depth = min(v_depth, 1)
    rows = []
    failing = []
    for xi in points:
        for v in enumerate_upto(v_depth, chain.n_letters):
            start = max(len(v), len(xi.head))
            # at least three full period blocks of differences past the head
            n = max(depth, start + 3 * len(xi.period) + 1)
            vals = [martin_kernel(hom, v, w) for w in xi.prefixes(n)]
            ok = _contracting(vals, start, len(xi.period))
            row = {
                "xi": xi.format(chain.n_letters),
                "v": chain.space.format(v),
                "stabilized_at": _stabilized_at(vals),
                "pass": ok,
            }
            rows.append(row)
            if not ok:
                failing.append(row)
    return {"depth": depth, "pass": not failing, "failing": failing, "rows": rows}


def fingerprint(chain: MarkovChain, xi, depth: int, fp_depth: int = 2) -> dict:
    """``{u: k(u, ξ|_depth)}`` for ``|u| ≤ fp_depth``, zero entries dropped."""
    w = xi.prefix(depth)
    out = {}
    for u in enumerate_upto(fp_depth, chain.n_letters):
        k = martin_kernel(chain, u, w)
        if k:
            out[u] = k
    return out


def write_kernel_csv(chain: MarkovChain, depth: int, path):
    """Columns v, w, k, k_hom, bridge_factor over pairs with ``g(v, w) > 0``."""
    pairs = []
    for v in enumerate_upto(depth, chain.n_letters):
        for w in chain.green_from(v, depth):
            pairs.append((v, w))
    pairs.sort(key=lambda vw: (shortlex(vw[0]), shortlex(vw[1])))
    fmt = chain.space.format
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["v", "w", "k", "k_hom", "bridge_factor"])
        for v, w in pairs:
            out.writerow(
                [
                    fmt(v),
                    fmt(w),
                    ratstr(martin_kernel(chain, v, w)),
                    ratstr(martin_kernel_hom(chain, v, w)),
                    ratstr(bridge_factor(chain, v)),
                ]
            )
    return len(pairs)


__all__ = [
    "AuditRefused",
    "EMPTY",
    "ExtendedKernel",
    "MetricWeights",
    "TruncationWarning",
    "bridge_factor",
    "check_B1",
    "extended_kernel",
    "fingerprint",
    "kernel_via_theorem",
    "martin_kernel",
    "martin_kernel_hom",
    "martin_metric",
    "metric_terms",
    "periodic_test_points",
    "separation_witness",
    "write_kernel_csv",
]
