"""Closed-form spectral-gap bounds and a consistency report.

All bound functions take raw graph statistics so they can be tested in
isolation; :func:`bound_report` wires them to a concrete graph.  Lower
bounds never exceed the spectral gap and upper bounds never fall below it,
up to the tolerance of whatever eigenvalue estimate is supplied.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .errors import InputError
from .graphs import MetricGraph, combinatorial_diameter, diameter


def friedlander_lower(n: int, l: float, offset: int = 0) -> float:
    """Total-length lower bound for the n-th nonzero eigenvalue.

    As printed the bound reads ``(pi*(n-1)/(2l))**2``, which vanishes for the
    spectral gap (n=1).  ``offset=1`` switches to the shifted indexing
    ``(pi*n/(2l))**2``; both conventions are in circulation and neither is
    asserted as canonical here.
    """
    if n < 1:
        raise InputError("eigenvalue index must be at least 1")
    if l <= 0:
        raise InputError("total length must be positive")
    if offset not in (0, 1):
        raise InputError("offset must be 0 (as printed) or 1")
    return (math.pi * (n - 1 + offset) / (2.0 * l)) ** 2


def edge_count_upper(n_edges: int, l: float) -> float:
    """(pi * n_E / l)^2; attained by flowers and equilateral pumpkins."""
    if n_edges < 1 or l <= 0:
        raise InputError("need at least one edge and positive total length")
    return (math.pi * n_edges / l) ** 2


def kkmm_diameter_upper(n_vertices: int, diam: float) -> float:
    """(pi * (n_V + 1) / diam)^2, valid for n_V >= 2."""
    if n_vertices < 2:
        raise InputError("bound requires at least 2 vertices")
    if diam <= 0:
        raise InputError("diameter must be positive")
    return (math.pi * (n_vertices + 1) / diam) ** 2


def kkmm_combinatorial_upper(n_vertices: int, diam_v: float) -> float:
    """(pi * (n_V - 1) / diam_V)^2, valid for n_V >= 2."""
    if n_vertices < 2:
        raise InputError("bound requires at least 2 vertices")
    if diam_v <= 0:
        raise InputError("combinatorial diameter must be positive")
    return (math.pi * (n_vertices - 1) / diam_v) ** 2


def sharp_diameter_upper(n_vertices: int, diam: float) -> float:
    """(pi * (n_V + 2) / (2 diam))^2: the sharp metric-diameter bound."""
    if n_vertices < 2:
        raise InputError("bound requires at least 2 vertices")
    if diam <= 0:
        raise InputError("diameter must be positive")
    return (math.pi * (n_vertices + 2) / (2.0 * diam)) ** 2


def sharp_combinatorial_upper(n_vertices: int, diam_v: float) -> float:
    """(pi * n_V / (2 diam_V))^2: the sharp combinatorial-diameter bound."""
    if n_vertices < 2:
        raise InputError("bound requires at least 2 vertices")
    if diam_v <= 0:
        raise InputError("combinatorial diameter must be positive")
    return (math.pi * n_vertices / (2.0 * diam_v)) ** 2


def chain_upper(m: int, l: float) -> float:
    """((m+1) pi / (2 l))^2 for a pumpkin chain with m >= 2 pumpkins.

    Coincides with the sharp combinatorial bound at n_V = m + 1 and
    diam_V = l, which is exercised as an exact identity in the tests.
    """
    if m < 2:
        raise InputError("chain bound requires m >= 2 pumpkins")
    return sharp_combinatorial_upper(m + 1, l)


@dataclass(frozen=True)
class BoundEntry:
    name: str
    side: str  # "lower" | "upper"
    applicable: bool
    value: Optional[float]
    margin: Optional[float] = None  # lambda1 - value (lower) or value - lambda1 (upper)


@dataclass(frozen=True)
class BoundReport:
    n_vertices: int
    n_edges: int
    total_length: float
    diam: float
    diam_v: Optional[float]
    lambda1: Optional[float]
    entries: Tuple[BoundEntry, ...] = field(default_factory=tuple)

    @property
    def violations(self) -> tuple:
        return tuple(
            e.name
            for e in self.entries
            if e.applicable and e.margin is not None and e.margin < 0
        )

    def consistent(self, rel_tol: float = 1e-9) -> bool:
        if self.lambda1 is None:
            return True
        slack = rel_tol * abs(self.lambda1)
        return all(
            e.margin is None or not e.applicable or e.margin >= -slack
            for e in self.entries
        )

    def to_json_obj(self) -> dict:
        return {
            "statistics": {
                "n_vertices": self.n_vertices,
                "n_edges": self.n_edges,
                "total_length": self.total_length,
                "diameter": self.diam,
                "combinatorial_diameter": self.diam_v,
            },
            "lambda1": self.lambda1,
            "bounds": [
                {
                    "name": e.name,
                    "side": e.side,
                    "applicable": e.applicable,
                    "value": e.value,
                    "margin": e.margin,
                }
                for e in self.entries
            ],
        }

    def to_table(self) -> str:
        lines = [
            f"n_V={self.n_vertices}  n_E={self.n_edges}  "
            f"length={self.total_length:.6g}  diam={self.diam:.6g}  "
            f"diam_V={self.diam_v if self.diam_v is None else format(self.diam_v, '.6g')}",
        ]
        if self.lambda1 is not None:
            lines.append(f"lambda1={self.lambda1:.9g}")
        header = f"{'bound':<28}{'side':<7}{'value':>14}{'margin':>14}"
        lines.append(header)
        lines.append("-" * len(header))
        for e in self.entries:
            value = "n/a" if not e.applicable else f"{e.value:.6g}"
            margin = "" if e.margin is None or not e.applicable else f"{e.margin:.3g}"
            lines.append(f"{e.name:<28}{e.side:<7}{value:>14}{margin:>14}")
        return "\n".join(lines)


def bound_report(
    g: MetricGraph,
    lambda1: Optional[float] = None,
    friedlander_offset: int = 0,
) -> BoundReport:
    """Evaluate every applicable bound on a graph and flag violations."""
    n_v = g.n_vertices
    n_e = g.n_edges
    total = g.total_length
    diam, _ = diameter(g)
    diam_v = combinatorial_diameter(g) if n_v >= 2 else None

    def entry(name, side, applicable, value):
        margin = None
        if lambda1 is not None and applicable:
            margin = (lambda1 - value) if side == "lower" else (value - lambda1)
        return BoundEntry(name, side, applicable, value if applicable else None, margin)

    has_pairs = n_v >= 2 and diam_v is not None
    entries = (
        entry("friedlander_lower", "lower", True, friedlander_lower(1, total, friedlander_offset)),
        entry("edge_count_upper", "upper", True, edge_count_upper(n_e, total)),
        entry(
            "kkmm_diameter_upper", "upper", n_v >= 2, kkmm_diameter_upper(n_v, diam) if n_v >= 2 else None
        ),
        entry(
            "kkmm_combinatorial_upper",
            "upper",
            has_pairs,
            kkmm_combinatorial_upper(n_v, diam_v) if has_pairs else None,
        ),
        entry(
            "sharp_diameter_upper", "upper", n_v >= 2, sharp_diameter_upper(n_v, diam) if n_v >= 2 else None
        ),
        entry(
            "sharp_combinatorial_upper",
            "upper",
            has_pairs,
            sharp_combinatorial_upper(n_v, diam_v) if has_pairs else None,
        ),
    )
    return BoundReport(n_v, n_e, total, diam, diam_v, lambda1, entries)


def report_to_json(report: BoundReport) -> str:
    return json.dumps(report.to_json_obj(), indent=2, sort_keys=True)
