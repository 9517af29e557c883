"""Seeded random instances and the batch verification harness.

Everything here is deterministic for a fixed seed: generators draw from
``random.Random`` only, and the harness reports results in a fixed order, so
repeated runs produce byte-identical summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from random import Random

from . import bounds as bounds_mod
from .chains import (
    PumpkinChain,
    as_metric_graph,
    eigenvalue,
    rayleigh_quotient,
    secular_m2,
    test_function_psi1,
    test_function_psi2,
    weighted_integral,
)
from .errors import SpecgapError
from .graphs import Edge, MetricGraph, cut_pendant, identify_vertices, shorten_edge
from .reduction import reduce


def random_chain(
    rng: Random,
    m_range=(1, 6),
    mult_range=(1, 20),
    length_range=(0.3, 2.0),
) -> PumpkinChain:
    m = rng.randint(*m_range)
    return PumpkinChain.build(
        [
            (rng.uniform(*length_range), rng.randint(*mult_range))
            for _ in range(m)
        ]
    )


def random_graph(
    rng: Random,
    vertex_range=(2, 6),
    max_edges: int = 8,
    length_range=(0.3, 2.0),
) -> MetricGraph:
    """Connected multigraph: a random spanning tree plus extra random edges.

    Extra edges may be loops or parallels, which exercises the full metric
    machinery.
    """
    n_v = rng.randint(*vertex_range)
    verts = [f"v{i}" for i in range(n_v)]
    edges = []
    for i in range(1, n_v):
        j = rng.randrange(i)
        edges.append((f"e{len(edges)}", verts[i], verts[j], rng.uniform(*length_range)))
    extra = rng.randint(0, max(0, max_edges - len(edges)))
    for _ in range(extra):
        u, v = rng.choice(verts), rng.choice(verts)
        edges.append((f"e{len(edges)}", u, v, rng.uniform(*length_range)))
    return MetricGraph.build(verts, edges)


def random_surgery(rng: Random, g: MetricGraph):
    """Pick one gap-monotone operation; returns (g_before, g_after, description)."""
    ops = ["shorten"]
    if g.n_vertices >= 3:
        ops.append("identify")
    ops.append("pendant")
    op = rng.choice(ops)
    if op == "shorten":
        edge = rng.choice(g.edges)
        factor = rng.uniform(0.3, 0.95)
        new_len = edge.length * Fraction(factor)
        return g, shorten_edge(g, edge.id, new_len), f"shorten {edge.id} by {factor:.3f}"
    if op == "identify":
        verts = sorted(g.vertices)
        u = rng.choice(verts)
        v = rng.choice([w for w in verts if w != u])
        return g, identify_vertices(g, u, v), f"identify {u},{v}"
    # the "before" graph carries a fresh pendant edge; cutting it recovers g
    attach = rng.choice(sorted(g.vertices))
    decorated = MetricGraph(
        g.vertices | {"pend"},
        g.edges + (Edge("pendant-edge", attach, "pend", Fraction(rng.uniform(0.3, 1.0))),),
    )
    after = cut_pendant(decorated, attach, seed_vertex="pend")
    return decorated, after, f"cut pendant at {attach}"


# ---------------------------------------------------------------------------
# verification harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerificationSummary:
    seed: int
    count: int
    results: tuple

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list:
        out = [f"verification seed={self.seed} count={self.count}"]
        for r in self.results:
            out.append(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
        out.append("result: " + ("all passed" if self.all_passed else "FAILURES PRESENT"))
        return out

    def to_json_obj(self) -> dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "all_passed": self.all_passed,
            "checks": [
                {"name": r.name, "passed": r.passed, "detail": r.detail}
                for r in self.results
            ],
        }


def run_verification(seed: int, count: int, fem_tol: float = 1e-4) -> VerificationSummary:
    """Random-instance property suite over chains, graphs, and surgeries.

    Checks the chain upper bound, the two trial-function estimates, the m=2
    secular cross-check, surgery and reduction gap monotonicity, diameter
    preservation, and bound-report consistency, on ``count`` instances each.
    """
    from .fem import lambda1_numeric  # deferred import: scipy

    if count < 1:
        raise SpecgapError("count must be at least 1")
    rng = Random(seed)
    results = []

    def check(name: str, passed: bool, detail: str) -> None:
        results.append(CheckResult(name, passed, detail))

    # chains: Theorem-style bound, trial functions, variational inequality
    worst_margin = math.inf
    ok = True
    for _ in range(count):
        chain = random_chain(rng, m_range=(2, 6))
        lam = eigenvalue(chain).lambda_
        cap = bounds_mod.chain_upper(chain.m, float(chain.total_length))
        psi1 = test_function_psi1(chain)
        psi2 = test_function_psi2(chain)
        ell = sorted((float(x) for x in chain.lengths), reverse=True)
        r1 = rayleigh_quotient(chain, psi1)
        r2 = rayleigh_quotient(chain, psi2)
        cushion = 1.0 + 1e-12
        this_ok = (
            lam <= cap * cushion
            and r1 <= (math.pi**2 / ell[0] ** 2) * cushion
            and r2 <= (math.pi**2 / (4 * ell[1] ** 2)) * cushion
            and lam <= r1 * cushion
            and lam <= r2 * cushion
            and abs(weighted_integral(chain, psi1)) < 1e-9
            and abs(weighted_integral(chain, psi2)) < 1e-9
        )
        ok = ok and this_ok
        worst_margin = min(worst_margin, cap - lam)
    check("chain_bound_and_trial_functions", ok, f"min bound margin {worst_margin:.3g}")

    # m=2 secular equation cross-check (flux-continuity sign)
    ok = True
    worst = 0.0
    for _ in range(count):
        chain = random_chain(rng, m_range=(2, 2))
        sigma = eigenvalue(chain).sigma
        (l1, l2) = (float(x) for x in chain.lengths)
        (k1, k2) = chain.multiplicities
        resid = abs(secular_m2(k1, k2, l1, l2, sigma, convention="flux")) / max(k1, k2)
        worst = max(worst, resid)
        ok = ok and resid < 1e-9
    check("m2_secular_residual", ok, f"max scaled residual {worst:.3g}")

    # surgery monotonicity
    ok = True
    worst = math.inf
    for _ in range(count):
        g = random_graph(rng)
        before, after, _desc = random_surgery(rng, g)
        lam_before = lambda1_numeric(before, tol=fem_tol).value
        lam_after = lambda1_numeric(after, tol=fem_tol).value
        ratio = lam_after / lam_before
        worst = min(worst, ratio)
        if lam_after < lam_before * (1 - 1e-3):
            ok = False
    check("surgery_monotonicity", ok, f"min after/before ratio {worst:.6f}")

    # reduction: diameter preservation, bookkeeping, monotonicity
    ok = True
    worst = math.inf
    for i in range(count):
        g = random_graph(rng)
        mode = "metric" if i % 2 == 0 else "combinatorial"
        chain, trace = reduce(g, mode)
        if sum(chain.lengths) != trace.diameter_exact:
            ok = False
        if chain.total_length > g.total_length_exact:
            ok = False
        budget = g.n_vertices + (2 if mode == "metric" else 0)
        if chain.m + 1 > budget:
            ok = False
        lam_g = lambda1_numeric(g, tol=fem_tol).value
        lam_c = eigenvalue(chain).lambda_
        ratio = lam_c / lam_g
        worst = min(worst, ratio)
        if lam_c < lam_g * (1 - 1e-3):
            ok = False
    check("reduction_pipeline", ok, f"min chain/input gap ratio {worst:.6f}")

    # bound reports on random graphs with a computed gap
    ok = True
    for _ in range(count):
        g = random_graph(rng)
        lam = lambda1_numeric(g, tol=fem_tol).value
        report = bounds_mod.bound_report(g, lam)
        if not report.consistent(rel_tol=2e-3):
            ok = False
    check("bound_report_consistency", ok, "all reports consistent")

    return VerificationSummary(seed, count, tuple(results))
