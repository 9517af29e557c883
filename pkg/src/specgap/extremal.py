"""Near-optimal pumpkin chains: one double segment, exact rational matching.

For a chain of m segments of length a with a single segment of length 2a at
position j0, there are integer multiplicities making

    sigma1 = pi / (2 * (a + delta))

an eigenfrequency whose eigenfunction decreases strictly with a single sign
change, so lambda1 = sigma1^2 approaches the extremal value (pi/(2a))^2 as
delta -> 0.  The construction splices cosine segments (up to the double
segment) with sine segments (after it), with phase shifts that are integer
multiples of theta = sigma1*delta/2.

Choosing theta with tan(theta) = 2n/(n^2-1) for an integer n makes
(sin theta, cos theta) = (2n/(n^2+1), (n^2-1)/(n^2+1)) exactly rational.
Since sigma1*a = pi/2 - 2*theta, every value entering the vertex matching
conditions is a sine or cosine of (integer)*theta plus a quarter-turn
multiple, hence exactly rational: the multiplicities, the splicing
coefficients, and the matching residuals are all computed in exact
arithmetic, with no floating point involved.

The hypothesis sigma1*delta = 2*theta < pi/8 (monotone, single-zero
eigenfunction) is equivalent to n >= 11, which is enforced.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Tuple

from .chains import PiecewiseTrig, Piece, PumpkinChain, eigenvalue
from .errors import InputError


def theta_from_n(n: int) -> Tuple[Fraction, Fraction]:
    """Exact (sin theta, cos theta) for tan(theta) = 2n/(n^2 - 1).

    Requires n >= 11 so that 2*theta < pi/8.
    """
    if isinstance(n, bool) or not isinstance(n, int):
        raise InputError("n must be an integer")
    if n < 11:
        raise InputError(f"n must be at least 11 (2*theta < pi/8), got {n}")
    return Fraction(2 * n, n * n + 1), Fraction(n * n - 1, n * n + 1)


@dataclass(frozen=True)
class ExtremalSpec:
    """Parameters of one near-optimal chain plus its derived exact data."""

    m: int
    j0: int
    n: int
    a: float
    sin_theta: Fraction
    cos_theta: Fraction

    @property
    def theta(self) -> float:
        return math.atan2(float(self.sin_theta), float(self.cos_theta))

    @property
    def delta(self) -> float:
        return 4.0 * self.a * self.theta / (math.pi - 4.0 * self.theta)

    @property
    def sigma1(self) -> float:
        return math.pi / (2.0 * (self.a + self.delta))

    @property
    def total_length(self) -> float:
        return (self.m + 1) * self.a

    @property
    def segment_lengths(self) -> tuple:
        return tuple(
            2.0 * self.a if j == self.j0 else self.a for j in range(1, self.m + 1)
        )


def build_spec(m: int, j0: int, n: int, a: float = 1.0) -> ExtremalSpec:
    """Validate parameters and derive the exact phase data."""
    if isinstance(m, bool) or not isinstance(m, int) or m < 2:
        raise InputError("m must be an integer >= 2")
    if isinstance(j0, bool) or not isinstance(j0, int) or not (1 <= j0 <= m):
        raise InputError(f"j0 must lie in [1, {m}], got {j0}")
    if not (float(a) > 0 and math.isfinite(float(a))):
        raise InputError("a must be positive and finite")
    s, c = theta_from_n(n)
    return ExtremalSpec(m, j0, n, float(a), s, c)


@dataclass(frozen=True)
class PhasePlan:
    """Per segment: cosine/sine flavor and the phase as a multiple of theta."""

    flavors: Tuple[str, ...]
    eta_coefficients: Tuple[int, ...]


def phase_plan(m: int, j0: int) -> PhasePlan:
    flavors = tuple("cos" if j <= j0 else "sin" for j in range(1, m + 1))
    coefs = []
    for j in range(1, m + 1):
        if j == 1:
            coef = 0
        elif j < m:
            coef = 1
        else:
            coef = 2
        if j == j0:
            coef *= 2
        coefs.append(coef)
    return PhasePlan(flavors, tuple(coefs))


# ---------------------------------------------------------------------------
# exact evaluation of the spliced segments at the vertices
# ---------------------------------------------------------------------------


def _multiple_angle(s: Fraction, c: Fraction, q: int):
    """(sin(q*theta), cos(q*theta)) by angle addition, exact."""
    sq, cq = Fraction(0), Fraction(1)
    for _ in range(abs(q)):
        sq, cq = sq * c + cq * s, cq * c - sq * s
    if q < 0:
        sq = -sq
    return sq, cq


def _sin_cos(spec: ExtremalSpec, quarter_turns: int, theta_units: int):
    """Exact (sin, cos) of quarter_turns*(pi/2) + theta_units*theta."""
    sq, cq = _multiple_angle(spec.sin_theta, spec.cos_theta, theta_units)
    p = quarter_turns % 4
    if p == 0:
        return sq, cq
    if p == 1:
        return cq, -sq
    if p == 2:
        return -sq, -cq
    return -cq, sq


@dataclass(frozen=True)
class VertexData:
    """Exact values of the two segment functions meeting at one vertex."""

    index: int  # vertex x_j sits between segments j-1 and j (1-based segments)
    h_left: Fraction
    dh_left: Fraction  # h'/sigma1
    h_right: Fraction
    dh_right: Fraction


def _segment_values(spec: ExtremalSpec):
    """For each segment: exact (h, h'/sigma1) at its start and end."""
    plan = phase_plan(spec.m, spec.j0)
    out = []
    for j in range(1, spec.m + 1):
        coef = plan.eta_coefficients[j - 1]
        quarter = 2 if j == spec.j0 else 1  # sigma1 * length in quarter turns
        start = (0, coef)
        end = (quarter, coef - 2 * quarter)
        values = {}
        for tag, (p, q) in (("start", start), ("end", end)):
            s, c = _sin_cos(spec, p, q)
            if plan.flavors[j - 1] == "cos":
                values[tag] = (c, -s)
            else:
                values[tag] = (s, c)
        out.append(values)
    return out


def matching_data(spec: ExtremalSpec):
    """Exact left/right values at each interior vertex x_2 .. x_m."""
    seg = _segment_values(spec)
    data = []
    for j in range(2, spec.m + 1):
        h_l, dh_l = seg[j - 2]["end"]
        h_r, dh_r = seg[j - 1]["start"]
        data.append(VertexData(j, h_l, dh_l, h_r, dh_r))
    return data


def multiplicities(spec: ExtremalSpec) -> list:
    """Minimal positive integers satisfying the vertex flux conditions.

    The conditions fix the ratios k_j / k_{j-1} exactly; denominators are
    cleared and the gcd removed, so the output is the unique minimal family.
    """
    ratios = []
    for v in matching_data(spec):
        denom = v.dh_right * v.h_left
        if v.h_right == 0 or v.h_left == 0 or v.dh_right == 0 or v.dh_left == 0:
            raise InputError("degenerate matching data; spec violates the phase bound")
        ratios.append((v.dh_left * v.h_right) / denom)
    ks = [Fraction(1)]
    for r in ratios:
        ks.append(ks[-1] * r)
    if any(k <= 0 for k in ks):
        raise InputError("matching produced a nonpositive multiplicity")
    scale = 1
    for k in ks:
        scale = scale * k.denominator // gcd(scale, k.denominator)
    ints = [int(k * scale) for k in ks]
    g = 0
    for k in ints:
        g = gcd(g, k)
    return [k // g for k in ints]


def splice_coefficients(spec: ExtremalSpec) -> list:
    """Exact amplitudes b_j with b_1 = 1, from value continuity at vertices."""
    bs = [Fraction(1)]
    for v in matching_data(spec):
        bs.append(bs[-1] * v.h_left / v.h_right)
    return bs


def matching_residuals(spec: ExtremalSpec) -> list:
    """Exact residuals of both vertex conditions; all zero by construction."""
    ks = multiplicities(spec)
    bs = splice_coefficients(spec)
    out = []
    for v in matching_data(spec):
        j = v.index
        cont = bs[j - 2] * v.h_left - bs[j - 1] * v.h_right
        flux = bs[j - 2] * ks[j - 2] * v.dh_left - bs[j - 1] * ks[j - 1] * v.dh_right
        out.append((cont, flux))
    return out


def neumann_end_values(spec: ExtremalSpec):
    """Exact h'/sigma1 at both chain ends; zero means Neumann holds exactly."""
    seg = _segment_values(spec)
    return seg[0]["start"][1], seg[-1]["end"][1]


# ---------------------------------------------------------------------------
# chain, eigenfunction, verification
# ---------------------------------------------------------------------------


def build_chain(spec: ExtremalSpec) -> PumpkinChain:
    ks = multiplicities(spec)
    return PumpkinChain.build(zip(spec.segment_lengths, ks))


def build_eigenfunction(spec: ExtremalSpec) -> PiecewiseTrig:
    """The spliced eigenfunction at frequency sigma1, normalized to 1 at x=0."""
    plan = phase_plan(spec.m, spec.j0)
    bs = splice_coefficients(spec)
    sigma = spec.sigma1
    theta = spec.theta
    pieces = []
    x = 0.0
    for j in range(1, spec.m + 1):
        length = spec.segment_lengths[j - 1]
        phase = plan.eta_coefficients[j - 1] * theta
        if plan.flavors[j - 1] == "sin":
            phase -= math.pi / 2.0  # sin(z) == cos(z - pi/2)
        pieces.append(Piece(x, x + length, float(bs[j - 1]), phase))
        x += length
    return PiecewiseTrig(sigma, tuple(pieces))


@dataclass(frozen=True)
class ExtremalReport:
    spec: ExtremalSpec
    chain: PumpkinChain
    sigma_target: float
    sigma_solver: float
    relative_gap_error: float
    index_is_one: bool
    slack: float  # (pi/(2a))^2 - lambda1, positive and -> 0 as n grows

    def to_json_obj(self) -> dict:
        return {
            "m": self.spec.m,
            "j0": self.spec.j0,
            "n": self.spec.n,
            "a": self.spec.a,
            "theta": self.spec.theta,
            "delta": self.spec.delta,
            "sin_theta": [str(self.spec.sin_theta.numerator), str(self.spec.sin_theta.denominator)],
            "cos_theta": [str(self.spec.cos_theta.numerator), str(self.spec.cos_theta.denominator)],
            "multiplicities": [str(k) for k in self.chain.multiplicities],
            "segment_lengths": [float(x) for x in self.chain.lengths],
            "sigma_target": self.sigma_target,
            "sigma_solver": self.sigma_solver,
            "lambda_target": self.sigma_target**2,
            "lambda_solver": self.sigma_solver**2,
            "relative_gap_error": self.relative_gap_error,
            "index_is_one": self.index_is_one,
            "slack": self.slack,
        }


def verify(spec: ExtremalSpec, tol: float = 1e-8) -> ExtremalReport:
    """Check the constructed chain against the independent chain solver.

    The solver's smallest eigenfrequency must equal pi/(2(a+delta)) within
    ``tol`` relative; agreement also certifies that the construction is the
    spectral gap and not a higher mode, since the solver always returns the
    first crossing.
    """
    chain = build_chain(spec)
    result = eigenvalue(chain)
    target = spec.sigma1
    rel = abs(result.lambda_ - target**2) / target**2
    return ExtremalReport(
        spec=spec,
        chain=chain,
        sigma_target=target,
        sigma_solver=result.sigma,
        relative_gap_error=rel,
        index_is_one=rel <= tol
        and abs(result.sigma - target) <= max(1e-8 * target, 10 * result.bracket_width),
        slack=(math.pi / (2 * spec.a)) ** 2 - result.lambda_,
    )


def report_to_json(report: ExtremalReport) -> str:
    return json.dumps(report.to_json_obj(), indent=2, sort_keys=True)
