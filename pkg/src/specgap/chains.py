"""Spectral theory of pumpkin chains via an exact 1-D weighted eigenproblem.

A pumpkin chain is an ordered list of segments ``(length, multiplicity)``.
Functions that depend on the longitudinal coordinate only solve the weighted
Sturm-Liouville problem ``-(rho u')' = lambda * rho * u`` on ``[0, L]`` with
the piecewise-constant weight ``rho = k_j`` on segment ``j``, Neumann ends,
and interface conditions ``u`` and ``rho u'`` continuous.  The lowest
nonzero eigenvalue of this problem is the spectral gap of the chain graph.

The solver tracks the phase of the solution pair ``(u, rho u' / sigma)``:
inside a segment the phase advances linearly at rate ``sigma``; at an
interface the second component is rescaled by the multiplicity ratio and the
phase is re-read with branch continuity.  The terminal phase is continuous
and strictly increasing in ``sigma``, so each eigenvalue is a bisection on a
monotone function.  Multiplicities are arbitrary-precision integers; the
phase representation stays well-conditioned even for ratios near ``1e10``
per interface.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Tuple, Union

from .errors import InputError, ParseError, ValidationError
from .graphs import MetricGraph, Edge, as_length

Real = Union[int, float, Fraction]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Segment:
    """One pumpkin: a length and the number of parallel edges it carries."""

    length: Real
    multiplicity: int

    def __post_init__(self) -> None:
        as_length(self.length, "segment length")
        if isinstance(self.multiplicity, bool) or not isinstance(self.multiplicity, int):
            raise InputError("multiplicity must be an integer")
        if self.multiplicity < 1:
            raise InputError("multiplicity must be at least 1")


@dataclass(frozen=True)
class PumpkinChain:
    """Ordered segments of an equilateral-pumpkin chain.

    Lengths may be floats or exact Fractions; multiplicities are unbounded
    Python integers (values like 10**20 are expected and exact).
    """

    segments: Tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise InputError("chain needs at least one segment")

    @classmethod
    def build(cls, items: Iterable) -> "PumpkinChain":
        return cls(tuple(Segment(length, int(mult)) for length, mult in items))

    @property
    def m(self) -> int:
        return len(self.segments)

    @property
    def lengths(self) -> tuple:
        return tuple(s.length for s in self.segments)

    @property
    def multiplicities(self) -> tuple:
        return tuple(s.multiplicity for s in self.segments)

    @cached_property
    def total_length(self):
        return sum(s.length for s in self.segments)

    @cached_property
    def lengths_float(self) -> tuple:
        return tuple(float(s.length) for s in self.segments)

    @cached_property
    def starts_float(self) -> tuple:
        """Cumulative segment start positions, plus the total length at the end."""
        acc = [0.0]
        for length in self.lengths_float:
            acc.append(acc[-1] + length)
        return tuple(acc)


def weight_at(chain: PumpkinChain, x: float) -> int:
    """Weight rho(x): the multiplicity of the segment containing x.

    Interface points take the left segment's value by convention; the choice
    never affects integrals.
    """
    starts = chain.starts_float
    if x < 0 or x > starts[-1]:
        raise InputError(f"x={x} outside [0, {starts[-1]}]")
    if x == 0:
        return chain.segments[0].multiplicity
    j = bisect_left(starts, x) - 1
    return chain.segments[j].multiplicity


# ---------------------------------------------------------------------------
# phase sweep and eigenvalues
# ---------------------------------------------------------------------------


def _interface_ratios(chain: PumpkinChain) -> tuple:
    ks = chain.multiplicities
    return tuple(ks[j] / ks[j + 1] for j in range(len(ks) - 1))


def _rescale_phase(psi: float, ratio: float) -> float:
    """Re-read the phase after scaling the sine component by ``ratio`` > 0.

    The vector (cos psi, sin psi) -> (cos psi, ratio * sin psi) stays within
    its quadrant, so the continuous branch is the atan2 value nearest psi.
    """
    base = math.atan2(ratio * math.sin(psi), math.cos(psi))
    return base + _TWO_PI * round((psi - base) / _TWO_PI)

def prufer_sweep(chain: PumpkinChain, sigma: float) -> float:
    """Terminal phase of the Neumann solution swept from x=0 at frequency sigma.

    Eigenvalues of index n are exactly the sigma where the terminal phase
    equals n*pi.  The returned value is continuous and strictly increasing
    in sigma, which underpins bisection.
    """
    if sigma <= 0:
        raise InputError("sigma must be positive")
    psi = 0.0
    ratios = _interface_ratios(chain)
    lengths = chain.lengths_float
    for j, length in enumerate(lengths):
        psi += sigma * length
        if j < len(ratios):
            psi = _rescale_phase(psi, ratios[j])
    return psi


@dataclass(frozen=True)
class SpectralResult:
    """A located eigenvalue: ``lambda_ = sigma**2`` at the given index."""

    sigma: float
    index: int
    bracket_width: float
    secular_residual: float

    @property
    def lambda_(self) -> float:
        return self.sigma**2


def eigenvalue(chain: PumpkinChain, index: int = 1, tol: float = 1e-12) -> SpectralResult:
    """Locate the index-th nonzero eigenvalue of the chain's 1-D problem.

    ``tol`` is an absolute bracket width on sigma.  The terminal phase is
    monotone in sigma, so the index-th eigenvalue is the unique crossing of
    ``index * pi`` and plain bisection is reliable.
    """
    if isinstance(index, bool) or not isinstance(index, int) or index < 1:
        raise InputError("index must be a positive integer")
    if not (tol > 0):
        raise InputError("tol must be positive")
    total = float(chain.total_length)
    target = index * math.pi
    hi = math.pi * (chain.m + 1) / total + 1.0
    for _ in range(200):
        if prufer_sweep(chain, hi) > target:
            break
        hi *= 2.0
    else:
        raise InputError("could not bracket the requested eigenvalue")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if prufer_sweep(chain, mid) >= target:
            hi = mid
        else:
            lo = mid
    sigma = 0.5 * (lo + hi)
    return SpectralResult(
        sigma=sigma,
        index=index,
        bracket_width=hi - lo,
        secular_residual=prufer_sweep(chain, sigma) - target,
    )


def secular_m2(
    k1: Real, k2: Real, l1: Real, l2: Real, sigma: float, convention: str = "printed"
) -> float:
    """Two-pumpkin secular function.

    ``convention="printed"`` evaluates the determinant in the form it is
    usually displayed, ``k1 sin(s l1) cos(s l2) - k2 cos(s l1) sin(s l2)``.
    That display carries a sign slip: it vanishes identically for uniform
    chains.  ``convention="flux"`` evaluates the form derived from weighted
    flux continuity (the ``-`` replaced by ``+``), whose positive roots are
    the actual eigenfrequencies; this is cross-checked against both the
    phase-sweep solver and the finite-element oracle in the tests.
    """
    if k1 <= 0 or k2 <= 0 or l1 <= 0 or l2 <= 0:
        raise InputError("parameters must be positive")
    if convention not in ("printed", "flux"):
        raise InputError("convention must be 'printed' or 'flux'")
    k1, k2, l1, l2 = float(k1), float(k2), float(l1), float(l2)
    sign = -1.0 if convention == "printed" else 1.0
    return k1 * math.sin(sigma * l1) * math.cos(sigma * l2) + sign * k2 * math.cos(
        sigma * l1
    ) * math.sin(sigma * l2)


# ---------------------------------------------------------------------------
# piecewise trigonometric functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    """b*cos(sigma*(x - start) + phase) on [start, end]; constant b if is_const."""

    start: float
    end: float
    amplitude: float
    phase: float = 0.0
    is_const: bool = False


@dataclass(frozen=True)
class PiecewiseTrig:
    """A function on [0, L] made of plateaus and single-frequency cosine arcs."""

    frequency: float
    pieces: Tuple[Piece, ...]

    @property
    def total_length(self) -> float:
        return self.pieces[-1].end

    def _piece_at(self, x: float) -> Piece:
        for p in self.pieces:
            if x <= p.end:
                return p
        return self.pieces[-1]

    def value(self, x: float) -> float:
        p = self._piece_at(x)
        if p.is_const:
            return p.amplitude
        return p.amplitude * math.cos(self.frequency * (x - p.start) + p.phase)

    def derivative(self, x: float) -> float:
        p = self._piece_at(x)
        if p.is_const:
            return 0.0
        return -p.amplitude * self.frequency * math.sin(
            self.frequency * (x - p.start) + p.phase
        )

    def values(self, xs) -> list:
        return [self.value(x) for x in xs]

    def max_amplitude(self) -> float:
        return max(abs(p.amplitude) for p in self.pieces)

    def mirrored(self) -> "PiecewiseTrig":
        """The function x -> f(L - x)."""
        total = self.total_length
        out = []
        for p in reversed(self.pieces):
            if p.is_const:
                out.append(Piece(total - p.end, total - p.start, p.amplitude, 0.0, True))
            else:
                span = p.end - p.start
                out.append(
                    Piece(
                        total - p.end,
                        total - p.start,
                        p.amplitude,
                        -(self.frequency * span + p.phase),
                        False,
                    )
                )
        return PiecewiseTrig(self.frequency, tuple(out))

    def scaled(self, factor: float) -> "PiecewiseTrig":
        return PiecewiseTrig(
            self.frequency,
            tuple(
                Piece(p.start, p.end, factor * p.amplitude, p.phase, p.is_const)
                for p in self.pieces
            ),
        )

    def continuity_defect(self) -> float:
        """Largest jump of the function value across internal piece boundaries."""
        worst = 0.0
        for a, b in zip(self.pieces, self.pieces[1:]):
            left = (
                a.amplitude
                if a.is_const
                else a.amplitude * math.cos(self.frequency * (a.end - a.start) + a.phase)
            )
            right = b.amplitude if b.is_const else b.amplitude * math.cos(b.phase)
            worst = max(worst, abs(left - right))
        return worst


@dataclass(frozen=True)
class PiecewiseLinear:
    """Sampled function interpreted as its piecewise-linear interpolant."""

    xs: Tuple[float, ...]
    ys: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise InputError("need matching xs/ys with at least two samples")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise InputError("xs must be strictly increasing")

    @property
    def total_length(self) -> float:
        return self.xs[-1]

    def value(self, x: float) -> float:
        i = min(max(bisect_left(self.xs, x), 1), len(self.xs) - 1)
        x0, x1 = self.xs[i - 1], self.xs[i]
        y0, y1 = self.ys[i - 1], self.ys[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


# ---------------------------------------------------------------------------
# closed-form integration against the weight
# ---------------------------------------------------------------------------


def _trig_integrals(piece: Piece, freq: float, a: float, b: float):
    """(int f^2, int f'^2, int f) over [a, b] inside one piece, exactly."""
    if piece.is_const:
        c = piece.amplitude
        return c * c * (b - a), 0.0, c * (b - a)
    ua = freq * (a - piece.start) + piece.phase
    ub = freq * (b - piece.start) + piece.phase
    half = 0.5 * (b - a)
    osc = (math.sin(2 * ub) - math.sin(2 * ua)) / (4 * freq)
    b2 = piece.amplitude**2
    int_f2 = b2 * (half + osc)
    int_df2 = b2 * freq**2 * (half - osc)
    int_f = piece.amplitude * (math.sin(ub) - math.sin(ua)) / freq
    return int_f2, int_df2, int_f


def _merged_breakpoints(chain: PumpkinChain, bounds: Sequence[float]) -> list:
    cuts = set(float(x) for x in chain.starts_float)
    cuts.update(float(x) for x in bounds)
    out = sorted(cuts)
    # collapse float dust so weight/piece lookups at midpoints are unambiguous
    tol = 1e-12 * max(out[-1], 1.0)
    merged = [out[0]]
    for x in out[1:]:
        if x - merged[-1] > tol:
            merged.append(x)
    return merged


def _integrate_trig(chain: PumpkinChain, f: PiecewiseTrig):
    total = chain.starts_float[-1]
    if abs(f.total_length - total) > 1e-9 * max(total, 1.0):
        raise InputError("function length does not match chain length")
    cuts = _merged_breakpoints(chain, [p.end for p in f.pieces] + [0.0])
    num = den = mean = 0.0
    for a, b in zip(cuts, cuts[1:]):
        midpoint = 0.5 * (a + b)
        k = weight_at(chain, midpoint)
        piece = f._piece_at(midpoint)
        f2, df2, f1 = _trig_integrals(piece, f.frequency, a, b)
        num += k * df2
        den += k * f2
        mean += k * f1
    return num, den, mean


def _integrate_linear(chain: PumpkinChain, f: PiecewiseLinear):
    total = chain.starts_float[-1]
    if abs(f.total_length - total) > 1e-9 * max(total, 1.0):
        raise InputError("function length does not match chain length")
    cuts = _merged_breakpoints(chain, f.xs)
    num = den = mean = 0.0
    for a, b in zip(cuts, cuts[1:]):
        midpoint = 0.5 * (a + b)
        k = weight_at(chain, midpoint)
        ya, yb = f.value(a), f.value(b)
        h = b - a
        den += k * h * (ya * ya + ya * yb + yb * yb) / 3.0
        num += k * (yb - ya) ** 2 / h
        mean += k * h * (ya + yb) / 2.0
    return num, den, mean


def _integrals(chain: PumpkinChain, f):
    if isinstance(f, PiecewiseTrig):
        return _integrate_trig(chain, f)
    if isinstance(f, PiecewiseLinear):
        return _integrate_linear(chain, f)
    raise InputError(f"unsupported function type {type(f).__name__}")


def rayleigh_quotient(chain: PumpkinChain, f) -> float:
    """int |f'|^2 rho dx / int |f|^2 rho dx with closed-form piece integrals."""
    num, den, _ = _integrals(chain, f)
    if den <= 0:
        raise InputError("Rayleigh quotient of a (numerically) zero function")
    return num / den


def weighted_integral(chain: PumpkinChain, f) -> float:
    """int f rho dx; zero for admissible trial functions of the spectral gap."""
    return _integrals(chain, f)[2]


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------


def eigenfunction(chain: PumpkinChain, result: SpectralResult) -> PiecewiseTrig:
    """Reconstruct the eigenfunction for a result of :func:`eigenvalue`.

    Normalized to value 1 at x=0 (Neumann start).  Raises if the result does
    not actually solve this chain's terminal-phase condition.
    """
    sigma = result.sigma
    target = result.index * math.pi
    residual = prufer_sweep(chain, sigma) - target
    if abs(residual) > 1e-6:
        raise InputError("result does not match this chain (terminal phase residual)")

    starts = chain.starts_float
    lengths = chain.lengths_float
    ratios = _interface_ratios(chain)
    pieces = []
    b, alpha = 1.0, 0.0
    for j, length in enumerate(lengths):
        pieces.append(Piece(starts[j], starts[j + 1], b, alpha))
        if j < len(ratios):
            end_phase = sigma * length + alpha
            comp_c = b * math.cos(end_phase)
            comp_s = ratios[j] * b * math.sin(end_phase)
            b = math.hypot(comp_c, comp_s)
            if b == 0.0:
                raise InputError("degenerate eigenfunction state at an interface")
            base = math.atan2(comp_s, comp_c)
            alpha = base + _TWO_PI * round((end_phase - base) / _TWO_PI)
    return PiecewiseTrig(sigma, tuple(pieces))


# ---------------------------------------------------------------------------
# the two closed-form trial functions behind the chain upper bound
# ---------------------------------------------------------------------------


def _weighted_plateau(chain: PumpkinChain, j_from: int, j_to: int) -> float:
    """int rho dx over segments j_from..j_to-1 (float; huge weights are fine)."""
    return sum(
        float(chain.lengths_float[j]) * chain.multiplicities[j]
        for j in range(j_from, j_to)
    )


def _longest_two(chain: PumpkinChain):
    lengths = chain.lengths_float
    j1 = max(range(chain.m), key=lambda j: (lengths[j], -j))
    rest = [j for j in range(chain.m) if j != j1]
    j2 = max(rest, key=lambda j: (lengths[j], -j)) if rest else None
    return j1, j2


def test_function_psi1(chain: PumpkinChain) -> PiecewiseTrig:
    """Half-wavelength cosine through the longest pumpkin, plateaus elsewhere.

    The two amplitudes are solved from the weighted-mean-zero condition and
    normalized to b1^2 + b2^2 = 1; the Rayleigh quotient of the result is at
    most pi^2 over the squared longest-pumpkin length.
    """
    j1, _ = _longest_two(chain)
    starts = chain.starts_float
    x1, ell1 = starts[j1], chain.lengths_float[j1]
    k1 = chain.multiplicities[j1]
    freq = math.pi / ell1

    # weighted integrals multiplying b1 and b2 in int psi1 rho dx
    coef1 = _weighted_plateau(chain, 0, j1) + k1 * ell1 / math.pi
    coef2 = -k1 * ell1 / math.pi - _weighted_plateau(chain, j1 + 1, chain.m)
    b1, b2 = -coef2, coef1
    norm = math.hypot(b1, b2)
    if norm == 0.0:
        raise ValidationError("degenerate amplitude system for psi1")
    b1, b2 = b1 / norm, b2 / norm

    pieces = []
    if x1 > 0:
        pieces.append(Piece(0.0, x1, b1, 0.0, True))
    pieces.append(Piece(x1, x1 + ell1 / 2, b1, 0.0))
    pieces.append(Piece(x1 + ell1 / 2, x1 + ell1, b2, math.pi / 2))
    if x1 + ell1 < starts[-1]:
        pieces.append(Piece(x1 + ell1, starts[-1], -b2, 0.0, True))
    return PiecewiseTrig(freq, tuple(pieces))


def _psi2_forward(chain: PumpkinChain, j1: int, j2: int) -> PiecewiseTrig:
    starts = chain.starts_float
    x1 = starts[j1]
    x2 = starts[j2]
    ell2 = chain.lengths_float[j2]
    k1 = chain.multiplicities[j1]
    k2 = chain.multiplicities[j2]
    freq = math.pi / (2 * ell2)

    coef1 = _weighted_plateau(chain, 0, j1) + k1 * 2 * ell2 / math.pi
    coef2 = k2 * 2 * ell2 / math.pi + _weighted_plateau(chain, j2 + 1, chain.m)
    b1, b2 = coef2, coef1
    norm = math.hypot(b1, b2)
    b1, b2 = b1 / norm, b2 / norm

    pieces = []
    if x1 > 0:
        pieces.append(Piece(0.0, x1, b1, 0.0, True))
    pieces.append(Piece(x1, x1 + ell2, b1, 0.0))
    if x2 > x1 + ell2:
        pieces.append(Piece(x1 + ell2, x2, 0.0, 0.0, True))
    # -b2*sin(freq*(x - x2)) == b2*cos(freq*(x - x2) + pi/2)
    pieces.append(Piece(x2, x2 + ell2, b2, math.pi / 2))
    if x2 + ell2 < starts[-1]:
        pieces.append(Piece(x2 + ell2, starts[-1], -b2, 0.0, True))
    return PiecewiseTrig(freq, tuple(pieces))


def test_function_psi2(chain: PumpkinChain) -> PiecewiseTrig:
    """Quarter waves through the two longest pumpkins, zero plateau between.

    Needs at least two segments.  When the longest pumpkin comes after the
    second-longest, the construction is mirrored.  The Rayleigh quotient is
    at most pi^2 / (4 * ell2^2) with ell2 the second-longest length.
    """
    if chain.m < 2:
        raise InputError("psi2 needs a chain with at least two segments")
    j1, j2 = _longest_two(chain)
    if j1 < j2:
        return _psi2_forward(chain, j1, j2)
    reversed_chain = PumpkinChain(tuple(reversed(chain.segments)))
    r1, r2 = _longest_two(reversed_chain)
    psi = _psi2_forward(reversed_chain, r1, r2).mirrored()
    if psi.value(0.0) < 0:
        psi = psi.scaled(-1.0)
    return psi


# ---------------------------------------------------------------------------
# conversions and JSON
# ---------------------------------------------------------------------------


def as_metric_graph(chain: PumpkinChain, max_edges: int = 10000) -> MetricGraph:
    """Materialize the chain as a metric multigraph (small multiplicities only)."""
    total = sum(chain.multiplicities)
    if total > max_edges:
        raise InputError(
            f"chain expands to {total} edges, above the limit of {max_edges}"
        )
    vertices = [f"c{j}" for j in range(chain.m + 1)]
    edges = []
    for j, seg in enumerate(chain.segments):
        for i in range(seg.multiplicity):
            edges.append(
                Edge(f"p{j}e{i}", vertices[j], vertices[j + 1], Fraction(seg.length))
            )
    return MetricGraph(frozenset(vertices), tuple(edges))


def chain_to_json_obj(chain: PumpkinChain) -> dict:
    return {
        "segments": [
            {"length": float(s.length), "multiplicity": str(s.multiplicity)}
            for s in chain.segments
        ]
    }


def chain_from_json_obj(obj) -> PumpkinChain:
    if not isinstance(obj, Mapping) or "segments" not in obj:
        raise ParseError('chain document needs a "segments" field')
    segs = obj["segments"]
    if not isinstance(segs, list) or not segs:
        raise ParseError('"segments" must be a nonempty list')
    out = []
    for i, rec in enumerate(segs):
        if not isinstance(rec, Mapping) or "length" not in rec or "multiplicity" not in rec:
            raise ParseError(f'segments[{i}]: needs "length" and "multiplicity"')
        length = rec["length"]
        if not isinstance(length, (int, float)) or isinstance(length, bool):
            raise ParseError(f'segments[{i}]: "length" must be a number')
        mult = rec["multiplicity"]
        if isinstance(mult, str):
            if not mult.isdigit():
                raise ParseError(f'segments[{i}]: multiplicity string must be decimal digits')
            mult = int(mult)
        elif not isinstance(mult, int) or isinstance(mult, bool):
            raise ParseError(f'segments[{i}]: multiplicity must be a decimal string or integer')
        out.append(Segment(length, mult))
    return PumpkinChain(tuple(out))


def read_chain(path) -> PumpkinChain:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return chain_from_json_obj(obj)


def write_chain(chain: PumpkinChain, path) -> None:
    Path(path).write_text(json.dumps(chain_to_json_obj(chain), indent=2, sort_keys=True) + "\n")
