"""Exact identity checks run by ``verify``.

Each suite returns ``{"suite", "pass", "checked", "counterexample", ...}``;
``counterexample`` is the first failing case in shortlex order, or None.
A suite whose hypotheses fail on the configuration is reported as skipped.
"""

from fractions import Fraction
from itertools import combinations
import time

from .adjacency import check_B2
from .chain import MarkovChain, MassDistribution
from .kernel import (
    AuditRefused,
    MetricWeights,
    check_B1,
    kernel_via_theorem,
    martin_kernel,
    martin_metric,
    metric_terms,
    periodic_test_points,
)
from .words import EMPTY, enumerate_upto

SUITES = ("green", "factorization", "q-invariance", "theorem-bridge", "harmonic", "metric")


def _result(name, checked, bad, fmt, t0, **extra):
    out = {"suite": name, "pass": bad is None, "checked": checked, "counterexample": None}
    if bad is not None:
        out["counterexample"] = {k: (fmt(v) if isinstance(v, bytes) else str(v)) for k, v in bad.items()}
    out["seconds"] = round(time.perf_counter() - t0, 3)
    out.update(extra)
    return out


def _skip(name, reason):
    return {"suite": name, "pass": True, "skipped": reason, "checked": 0, "counterexample": None}


def green_identity(chain: MarkovChain, depth: int) -> dict:
    """``g(∅, w) = m(w)`` for every word of length ≤ depth."""
    t0 = time.perf_counter()
    n = 0
    for w in enumerate_upto(depth, chain.n_letters):
        n += 1
        g = chain.green(EMPTY, w)
        if g != chain.mass(w):
            return _result("green", n, {"v": EMPTY, "w": w, "g": g, "m": chain.mass(w)}, chain.space.format, t0)
    return _result("green", n, None, chain.space.format, t0)


def factorization(chain: MarkovChain, depth: int) -> dict:
    """``g(v, w) = Σ_{d(v,u)=k} g(v, u) g(u, w)`` for all ``1 ≤ k ≤ d(v, w)``."""
    t0 = time.perf_counter()
    fmt = chain.space.format
    n = 0
    words = enumerate_upto(depth, chain.n_letters)
    for v in words:
        gv = chain.green_from(v, depth)
        for k in range(1, depth - len(v) + 1):
            acc = {}
            for u, guv in gv.items():
                if len(u) != len(v) + k:
                    continue
                for w, guw in chain.green_from(u, depth).items():
                    acc[w] = acc.get(w, 0) + guv * guw
            for w in set(acc) | {w for w in gv if len(w) >= len(v) + k}:
                n += 1
                lhs, rhs = gv.get(w, Fraction(0)), acc.get(w, Fraction(0))
                if lhs != rhs:
                    return _result("factorization", n, {"v": v, "w": w, "k": k, "g": lhs, "sum": rhs}, fmt, t0)
    return _result("factorization", n, None, fmt, t0)


def _skewed(n_letters):
    # 1/2 on the first letter, the rest shared equally
    rest = Fraction(1, 2 * (n_letters - 1))
    return MassDistribution([Fraction(1, 2)] + [rest] * (n_letters - 1))


def q_invariance(chain: MarkovChain, depth: int, others=None) -> dict:
    """q tables under several mass distributions agree entry by entry."""
    t0 = time.perf_counter()
    fmt = chain.space.format
    report = check_B2(depth, chain.space, chain.masses)
    if not report["pass"]:
        return _skip("q-invariance", f"(B2) fails for the configured masses at {report['failing'][0]['word']}")
    candidates = others or [MassDistribution.uniform(chain.n_letters), _skewed(chain.n_letters)]
    # only distributions satisfying (B2) themselves are comparable
    dists = [chain.masses] + [
        m for m in candidates if m.letters != chain.masses.letters and check_B2(depth, chain.space, m)["pass"]
    ]
    if len(dists) < 2:
        return _skip("q-invariance", "no other mass distribution satisfies (B2) on this structure")
    chains = [chain] + [MarkovChain(chain.space, m) for m in dists[1:]]
    n = 0
    for v in enumerate_upto(depth, chain.n_letters):
        support = chains[0].green_from(v, depth)
        for other in chains[1:]:
            if set(other.green_from(v, depth)) != set(support):
                return _result("q-invariance", n, {"v": v, "issue": "support differs"}, fmt, t0)
        for w in support:
            n += 1
            q0 = chains[0].q(v, w)
            for other in chains[1:]:
                q1 = other.q(v, w)
                if q1 != q0:
                    return _result("q-invariance", n, {"v": v, "w": w, "q": q0, "q_other": q1, "masses": other.masses}, fmt, t0)
            fast = chains[0].q(v, w, "recursive")
            if fast != q0:
                return _result("q-invariance", n, {"v": v, "w": w, "q": q0, "q_recursive": fast}, fmt, t0)
    return _result("q-invariance", n, None, fmt, t0, distributions=[str(m) for m in dists])


def theorem_bridge(chain: MarkovChain, depth: int) -> dict:
    """``kernel_via_theorem`` equals the direct kernel on the support and the diagonal."""
    t0 = time.perf_counter()
    fmt = chain.space.format
    try:
        kernel_via_theorem(chain, EMPTY, EMPTY, audit_depth=depth)
    except AuditRefused as exc:
        return _skip("theorem-bridge", str(exc))
    n = 0
    for v in enumerate_upto(depth, chain.n_letters):
        for w in chain.green_from(v, depth):
            n += 1
            bridge, direct = kernel_via_theorem(chain, v, w, audit_depth=depth)
            if bridge != direct:
                return _result("theorem-bridge", n, {"v": v, "w": w, "bridge": bridge, "direct": direct}, fmt, t0)
    return _result("theorem-bridge", n, None, fmt, t0)


def harmonic(chain: MarkovChain, depth: int, n_points: int = 10) -> dict:
    """``k(v, w) = Σ_u p(v, u) k(u, w)`` whenever ``|w| > |v|``, and the truncated
    harmonicity of ``v -> k(v, ξ|_depth)`` on eventually periodic ``ξ``."""
    t0 = time.perf_counter()
    fmt = chain.space.format
    n = 0
    for v in enumerate_upto(depth - 1, chain.n_letters):
        kids = chain.children(v)
        targets = {w for w in chain.green_from(v, depth) if len(w) > len(v)}
        for u, _ in kids:
            targets |= set(chain.green_from(u, depth))
        for w in sorted(targets):
            n += 1
            lhs = martin_kernel(chain, v, w)
            rhs = sum((p * martin_kernel(chain, u, w) for u, p in kids), Fraction(0))
            if lhs != rhs:
                return _result("harmonic", n, {"v": v, "w": w, "k": lhs, "Pk": rhs}, fmt, t0)
    points = periodic_test_points(chain.n_letters)[:n_points]
    for xi in points:
        w = xi.prefix(depth)
        for v in enumerate_upto(depth - 1, chain.n_letters):
            n += 1
            lhs = martin_kernel(chain, v, w)
            rhs = chain.apply_operator(lambda u: martin_kernel(chain, u, w), v)
            if lhs != rhs:
                return _result("harmonic", n, {"v": v, "xi": xi.format(chain.n_letters), "k": lhs, "Pk": rhs}, fmt, t0)
    return _result("harmonic", n, None, fmt, t0, test_points=[xi.format(chain.n_letters) for xi in points])


def metric_axioms(chain: MarkovChain, depth: int, triple_len: int = None, sep_len: int = None) -> dict:
    """Nonnegativity, symmetry and triangle inequality of ``ρ_D`` on short words,
    and separation on all words up to ``sep_len``."""
    t0 = time.perf_counter()
    fmt = chain.space.format
    N = chain.n_letters
    if triple_len is None:
        triple_len = 3 if N <= 4 else 2
    if sep_len is None:
        sep_len = depth
        while sep_len > 1 and (N ** (sep_len + 1) - 1) // (N - 1) > 20000:
            sep_len -= 1
    weights = MetricWeights.default(chain, depth)
    words = enumerate_upto(min(triple_len, depth), N)
    rho = {}
    n = 0
    for v in words:
        for w in words:
            n += 1
            rho[v, w] = martin_metric(chain, v, w, weights)
            if rho[v, w] < 0 or (v == w) != (rho[v, w] == 0):
                return _result("metric", n, {"v": v, "w": w, "rho": rho[v, w]}, fmt, t0)
    for v, w in combinations(words, 2):
        n += 1
        if rho[v, w] != rho[w, v]:
            return _result("metric", n, {"v": v, "w": w, "issue": "asymmetric"}, fmt, t0)
    for u in words:
        for v in words:
            ruv = rho[u, v]
            for w in words:
                n += 1
                if rho[u, w] > ruv + rho[v, w]:
                    return _result("metric", n, {"u": u, "v": v, "w": w, "issue": "triangle"}, fmt, t0)
    # ρ_D(v, w) = 0 exactly when the term maps u -> a(u) k(u, ·) agree
    seen = {}
    for x in enumerate_upto(min(sep_len, depth), N):
        n += 1
        key = frozenset(metric_terms(chain, x, weights).items())
        if key in seen:
            return _result("metric", n, {"v": seen[key], "w": x, "issue": "rho = 0 for distinct words"}, fmt, t0)
        seen[key] = x
    return _result("metric", n, None, fmt, t0, triple_length=min(triple_len, depth), separation_length=min(sep_len, depth), truncation=depth)


RUNNERS = {
    "green": green_identity,
    "factorization": factorization,
    "q-invariance": q_invariance,
    "theorem-bridge": theorem_bridge,
    "harmonic": harmonic,
    "metric": metric_axioms,
}


def run(chain: MarkovChain, depth: int, suite: str = "all") -> list:
    names = SUITES if suite == "all" else (suite,)
    unknown = [s for s in names if s not in RUNNERS]
    if unknown:
        raise ValueError(f"unknown suite {unknown[0]!r}; choose from {', '.join(SUITES)} or all")
    return [RUNNERS[s](chain, depth) for s in names]


__all__ = ["SUITES", "run", "check_B1"] + [f.__name__ for f in RUNNERS.values()]
