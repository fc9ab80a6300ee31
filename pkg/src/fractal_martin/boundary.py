"""Infinite words, their points on the attractor, and boundary diagnostics.

The diagnostics compare three finite-depth views of a pair of infinite
words: equivalence of their prefixes, the Euclidean distance of their coded
points, and truncated Martin distances under the configured and the uniform
masses.  They are evidence, reported with the truncation depths used.
"""

from dataclasses import dataclass
import math
from typing import Optional

from scipy.stats import spearmanr

from .chain import MarkovChain
from .ifs import IFS, cell_vertices, compose_map, fixed_point, fixed_points, in_hull
from .kernel import MetricWeights, fingerprint, martin_metric
from .words import EventuallyPeriodic, parse_infinite


class BoundaryError(ValueError):
    pass


@dataclass
class Address:
    point: tuple
    cartesian: tuple
    error: float = 0.0

    @property
    def exact(self) -> bool:
        return self.error == 0.0


def _diameter(points):
    return max((math.dist(p, q) for p in points for q in points), default=0.0)


def address_point(xi, ifs: IFS, n: int = 20) -> Address:
    """The point of the attractor coded by ``ξ``.

    For ``u·(p)^∞`` this is ``S_u`` applied to the fixed point of ``S_p``,
    exact in exact mode.  Otherwise the centroid of ``F_0`` is pushed through
    ``S_{ξ|n}`` and the cell diameter is returned as the error bound.
    """
    bary = ifs.coordinates == "barycentric"
    tol = 0 if ifs.exact else ifs.tolerance * 1e-3
    if isinstance(xi, EventuallyPeriodic):
        x = fixed_point(compose_map(xi.period, ifs), bary, tol)
        x = compose_map(xi.head, ifs)(x)
        return Address(tuple(x), ifs.to_cartesian(x))
    _, f0 = fixed_points(ifs)
    centroid = tuple(sum(c) / len(f0) for c in zip(*f0))
    w = xi.prefix(n)
    x = compose_map(w, ifs)(centroid)
    base = [ifs.to_cartesian(p) for p in f0]
    return Address(tuple(x), ifs.to_cartesian(x), _diameter(base) * float(compose_map(w, ifs).ratio))


def address_in_cell(xi, depth: int, ifs: IFS) -> bool:
    """Whether the coded point lies in the hull of the depth-``depth`` prefix cell."""
    x = address_point(xi, ifs).point
    tol = 0 if ifs.exact else ifs.tolerance
    return in_hull(ifs.chart(x), [ifs.chart(p) for p in cell_vertices(xi.prefix(depth), ifs)], tol)


@dataclass
class BoundaryVerdict:
    equivalent: bool
    n0: Optional[int]
    depth: int


def boundary_equivalent(space, xi, zeta, n: int) -> BoundaryVerdict:
    """Least ``n₀ ≤ n`` with ``ξ|_j ∼ ζ|_j`` for every ``n₀ ≤ j ≤ n``."""
    n0 = None
    for j in range(n, 0, -1):
        if not space.same_class(xi.prefix(j), zeta.prefix(j)):
            break
        n0 = j
    return BoundaryVerdict(n0 is not None, n0, n)


def parse_pairs(doc, n_letters: int) -> list:
    """Pairs from ``[["1(2)", "2(1)"], ...]`` or ``{"pairs": [...]}``."""
    if isinstance(doc, dict):
        doc = doc.get("pairs")
    if not isinstance(doc, list) or not doc:
        raise BoundaryError("pair list is empty or malformed")
    out = []
    for item in doc:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise BoundaryError(f"expected a pair of words, got {item!r}")
        try:
            out.append(tuple(parse_infinite(str(t), n_letters) for t in item))
        except ValueError as exc:
            raise BoundaryError(str(exc)) from None
    return out


def parse_pairs_text(text: str, n_letters: int) -> list:
    """One pair per line, separated by whitespace; ``#`` starts a comment."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    return parse_pairs(rows, n_letters)


def _rho_series(chain, xi, zeta, depths):
    out = []
    for d in depths:
        r = martin_metric(chain, xi.prefix(d), zeta.prefix(d), MetricWeights.default(chain, d))
        out.append((d, r))
    return out


def _decreasing(series):
    vals = [r for _, r in series]
    return all(b < a for a, b in zip(vals, vals[1:]))


def homeomorphism_diagnostic(chain: MarkovChain, pairs, depths=(4, 6, 8), fp_depth: int = 2) -> dict:
    """Per-pair evidence linking boundary equivalence, addresses and ρ_D.

    Kernel verdicts compare fingerprints ``u -> k(u, ξ|_D)`` (``|u| ≤ fp_depth``)
    at the largest depth, under the configured and under uniform masses.
    """
    if not pairs:
        raise BoundaryError("no pairs given")
    depths = sorted(depths)
    top = depths[-1]
    space = chain.space
    ifs = space.ifs
    hom = chain.homogeneous()
    n = space.n_letters
    rows = []
    for xi, zeta in pairs:
        verdict = boundary_equivalent(space, xi, zeta, top)
        ax, az = address_point(xi, ifs), address_point(zeta, ifs)
        rho = _rho_series(chain, xi, zeta, depths)
        rho_h = _rho_series(hom, xi, zeta, depths)
        fp_eq = fingerprint(chain, xi, top, fp_depth) == fingerprint(chain, zeta, top, fp_depth)
        fp_eq_h = fingerprint(hom, xi, top, fp_depth) == fingerprint(hom, zeta, top, fp_depth)
        rows.append(
            {
                "xi": xi.format(n),
                "zeta": zeta.format(n),
                "equivalent": verdict.equivalent,
                "n0": verdict.n0,
                "address_xi": [str(c) for c in ax.point],
                "address_zeta": [str(c) for c in az.point],
                "addresses_coincide": ax.point == az.point if ifs.exact else math.dist(ax.cartesian, az.cartesian) < ifs.tolerance,
                "address_distance": math.dist(ax.cartesian, az.cartesian),
                "rho_by_depth": [(d, float(r)) for d, r in rho],
                "rho_exact": [(d, str(r)) for d, r in rho],
                "hom_rho_by_depth": [(d, float(r)) for d, r in rho_h],
                "rho_decreasing": _decreasing(rho),
                "hom_rho_decreasing": _decreasing(rho_h),
                "rho_min": str(min(r for _, r in rho)),
                "kernel_equal": fp_eq,
                "kernel_equal_hom": fp_eq_h,
                "verdicts_agree": fp_eq == fp_eq_h == verdict.equivalent,
            }
        )
    dist = [r["address_distance"] for r in rows]
    rho_top = [r["rho_by_depth"][-1][1] for r in rows]
    corr = None
    if len(rows) >= 3 and len(set(dist)) > 1 and len(set(rho_top)) > 1:
        corr = float(spearmanr(dist, rho_top).statistic)
    consistent = all(r["addresses_coincide"] for r in rows if r["equivalent"])
    return {
        "depths": depths,
        "fingerprint_depth": fp_depth,
        "note": f"finite-depth evidence at truncation depths {depths}; not a proof",
        "pairs": rows,
        "spearman_address_vs_rho": corr,
        "equivalent_pairs_share_address": consistent,
        "verdicts_agree": all(r["verdicts_agree"] for r in rows),
        "pass": consistent and all(r["verdicts_agree"] for r in rows),
    }
