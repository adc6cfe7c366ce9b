"""Alternating-maximization capacity solver with certified stopping.

Each iteration keeps two sound bounds around the capacity of the channel:

* a lower bound, the low end of a certified enclosure of the mutual
  information of the current iterate, and
* an upper bound, the high end of an enclosure of the largest per-input
  relative entropy against the current output law (the classical dual
  bound, valid for any output distribution).

The run stops once the gap between the bounds drops below the requested
``2**-target_M``.  The capacity value is certified; the iterate itself is
deliberately not.  Its diagnostics expose only observable quantities (the
remaining capacity gap and the movement of the last step) and carry an
explicit uncertified flag: no bound on the distance to an optimal input
distribution is ever reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .channel import Channel, DimensionError, Distribution
from .exactnum import (
    DomainError,
    Enclosure,
    enc_exp2,
    enc_log2,
    format_rational,
)

__all__ = [
    "CapacityCertificate",
    "OptimizerDiagnostics",
    "ba_step",
    "capacity_certified",
    "optimizer_heuristic",
]


@dataclass(frozen=True)
class CapacityCertificate:
    """Certified two-sided capacity bracket plus the final (uncertified) iterate."""

    lower: Fraction
    upper: Fraction
    iterate: Distribution
    iterations: int
    target_M: int
    converged: bool

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise DomainError("certificate bounds are inverted")

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def to_json(self) -> dict:
        return {
            "lower": format_rational(self.lower),
            "upper": format_rational(self.upper),
            "iterations": self.iterations,
            "target_M": self.target_M,
            "converged": self.converged,
            "iterate": self.iterate.to_json(),
        }


@dataclass(frozen=True)
class OptimizerDiagnostics:
    """Observable run statistics for the heuristic optimizer output.

    ``certified`` is always False: the capacity gap says nothing about the
    distance between the iterate and an optimal input distribution, and no
    field for such a bound exists.
    """

    capacity_gap: Fraction
    last_step_l1: Fraction
    iterations: int
    certified: bool = False

    def to_json(self) -> dict:
        return {
            "capacity_gap": format_rational(self.capacity_gap),
            "last_step_l1": format_rational(self.last_step_l1),
            "iterations": self.iterations,
            "certified": self.certified,
        }


def _row_log_terms(W: Channel, precision: int) -> list[Enclosure]:
    """Per-row enclosures of sum_y W(y|x) * log2 W(y|x); constant over a run."""
    result = []
    for row in W.rows:
        lo = Fraction(0)
        hi = Fraction(0)
        for w in row:
            if w == 0:
                continue
            term = enc_log2(Enclosure.point(w), precision + 1).scale(w)
            lo += term.lo
            hi += term.hi
        result.append(Enclosure(lo, hi))
    return result


def _row_divergences(
    p: Distribution,
    W: Channel,
    precision: int,
    row_terms: Sequence[Enclosure] | None = None,
) -> list[Enclosure]:
    """Enclosures of D(W(.|x) || q_p) in bits for every input x.

    Split as sum_y W log2 W minus sum_y W log2 q_p, so only the output-law
    logarithms need fresh kernel evaluations each iteration.  q_p(y) is
    exact, and q_p(y) > 0 for every output any row sends mass to whenever
    the input distribution is strictly positive, so every evaluated log
    argument is a positive rational.
    """
    if row_terms is None:
        row_terms = _row_log_terms(W, precision)
    q = W.output_distribution(p)
    q_logs = [
        enc_log2(Enclosure.point(qy), precision + 1) if qy > 0 else None
        for qy in q
    ]
    result = []
    for x in range(W.num_inputs):
        lo = row_terms[x].lo
        hi = row_terms[x].hi
        for y in range(W.num_outputs):
            w = W.rows[x][y]
            if w == 0:
                continue
            qe = q_logs[y]
            lo -= w * qe.hi
            hi -= w * qe.lo
        result.append(Enclosure(lo, hi))
    return result


def _snap_distribution(weights: Sequence[Fraction], bits: int) -> Distribution:
    """Round positive weights to a strictly positive distribution on the
    dyadic grid with denominator 2**bits.

    Largest-remainder rounding with index tie-breaks keeps the result
    deterministic; weights that are already grid-exact pass through
    unchanged.  Bounding the denominator stops iterate size from growing
    with the iteration count.
    """
    scale = 1 << bits
    total = sum(weights)
    raw = [w * scale / total for w in weights]
    cells = [max(int(r), 1) for r in raw]
    deficit = scale - sum(cells)
    if deficit > 0:
        by_remainder = sorted(
            range(len(raw)), key=lambda x: (raw[x] - int(raw[x]), -x), reverse=True
        )
        i = 0
        while deficit > 0:
            cells[by_remainder[i % len(cells)]] += 1
            deficit -= 1
            i += 1
    elif deficit < 0:
        by_size = sorted(range(len(cells)), key=lambda x: (cells[x], -x), reverse=True)
        i = 0
        while deficit < 0:
            x = by_size[i % len(cells)]
            if cells[x] > 1:
                cells[x] -= 1
                deficit += 1
            i += 1
    return Distribution([Fraction(c, scale) for c in cells])


def _reweight(
    p: Distribution, divergences: Sequence[Enclosure], precision: int
) -> Distribution:
    """One alternating-maximization update with controlled rounding.

    The exponential weights p(x) * 2**D_x are evaluated as enclosures and
    their midpoints are renormalized onto a bounded dyadic grid.  The
    perturbation this introduces is below 2**-precision in l1 and is folded
    into the certificate automatically, because both capacity bounds are
    re-evaluated on the rounded iterate.
    """
    weights = []
    for x, d in enumerate(divergences):
        growth = enc_exp2(d, precision)
        weights.append(p[x] * growth.midpoint)
    return _snap_distribution(weights, precision + 8)


def ba_step(p: Distribution, W: Channel, precision: int) -> Distribution:
    """Single alternating-maximization step from a strictly positive iterate."""
    if len(p) != W.num_inputs:
        raise DimensionError("input distribution does not match channel")
    if any(px == 0 for px in p.probs):
        raise DomainError("iteration requires strictly positive input mass")
    return _reweight(p, _row_divergences(p, W, precision), precision)


def _bounds(
    p: Distribution, divergences: Sequence[Enclosure]
) -> tuple[Fraction, Fraction]:
    """Certified (lower, upper) capacity bounds from one iterate's divergences."""
    lower = sum((d.lo * p[x] for x, d in enumerate(divergences)), Fraction(0))
    upper = max(d.hi for d in divergences)
    return lower, upper


def capacity_certified(
    W: Channel, target_M: int, max_iter: int
) -> CapacityCertificate:
    """Capacity of ``W`` bracketed to width below ``2**-target_M``.

    Starts from the uniform distribution, which keeps every input alive and
    every divergence defined.  If the gap does not close within ``max_iter``
    steps, the bracket computed so far is returned with ``converged=False``;
    the bounds stay sound either way.
    """
    if target_M < 1:
        raise DomainError("target_M must be at least 1")
    if max_iter < 1:
        raise DomainError("max_iter must be at least 1")
    precision = target_M + 6
    tolerance = Fraction(1, 1 << target_M)
    p = Distribution.uniform(W.num_inputs)
    row_terms = _row_log_terms(W, precision)
    lower = Fraction(0)
    upper = Fraction(0)
    for iteration in range(1, max_iter + 1):
        divergences = _row_divergences(p, W, precision, row_terms)
        lower, upper = _bounds(p, divergences)
        if upper - lower < tolerance:
            return CapacityCertificate(
                lower=lower,
                upper=upper,
                iterate=p,
                iterations=iteration,
                target_M=target_M,
                converged=True,
            )
        p = _reweight(p, divergences, precision)
    return CapacityCertificate(
        lower=lower,
        upper=upper,
        iterate=p,
        iterations=max_iter,
        target_M=target_M,
        converged=False,
    )


def optimizer_heuristic(
    W: Channel, iterations: int, precision: int
) -> tuple[Distribution, OptimizerDiagnostics]:
    """Iterate for a fixed budget and return the final input distribution.

    The output is explicitly uncertified as an optimizer.  The diagnostics
    report the certified capacity gap at exit and the l1 movement of the last
    step; neither quantity bounds the distance to the optimizer set.
    """
    if iterations < 1:
        raise DomainError("iterations must be at least 1")
    p = Distribution.uniform(W.num_inputs)
    row_terms = _row_log_terms(W, precision)
    previous = p
    for _ in range(iterations):
        previous = p
        p = _reweight(p, _row_divergences(p, W, precision, row_terms), precision)
    divergences = _row_divergences(p, W, precision, row_terms)
    lower, upper = _bounds(p, divergences)
    diagnostics = OptimizerDiagnostics(
        capacity_gap=upper - lower,
        last_step_l1=p.l1_distance(previous),
        iterations=iterations,
    )
    return p, diagnostics
