"""Brute-force ground truth on desk-scale channels.

Exhaustive simplex-grid maximization of mutual information, with two
different slack quantities that are easy to conflate:

* ``delta``, a sound modulus-of-continuity bound turning the grid maximum
  into a two-sided capacity bracket.  It has to cover the worst case at the
  simplex boundary (where the entropy gradient is unbounded), so it decays
  like (|X|/d) * log(d) rather than linearly.
* the probe slack, the value resolution of the grid at an entropy peak
  (1 - h2(1/2 - 1/d)).  It is quadratic in 1/d and governs which neighbors
  of an argmax the optimizer-set probe keeps.

Grid evaluation is embarrassingly parallel over points; results are merged
in sorted point order so the output never depends on scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .channel import (
    Channel,
    Distribution,
    binary_entropy,
    mutual_information,
    tv_distance,
    w1,
    w2,
)
from .exactnum import DomainError, Enclosure, enc_log2, format_rational

__all__ = [
    "GridResult",
    "grid_capacity",
    "optimizer_set_probe",
    "instability_report",
    "capacity_slack",
    "grid_value_resolution",
    "MAX_GRID_INPUTS",
    "MAX_GRID_DENOMINATOR",
]

MAX_GRID_INPUTS = 4
MAX_GRID_DENOMINATOR = 128


@dataclass(frozen=True)
class GridResult:
    """Grid maximum of I(., W) with the full set of near-maximal points.

    ``best_value`` encloses the maximum over grid points; adding ``delta``
    to its upper end gives a certified upper bound on the capacity itself.
    ``best_points`` lists every grid point whose enclosure overlaps the
    maximum (no arbitrary tie-breaking).
    """

    best_value: Enclosure
    best_points: tuple[Distribution, ...]
    resolution: Fraction
    delta: Fraction

    def to_json(self) -> dict:
        return {
            "best_value": self.best_value.to_json(),
            "best_points": [p.to_json() for p in self.best_points],
            "resolution": format_rational(self.resolution),
            "delta": format_rational(self.delta),
        }


def _grid_points(n: int, d: int) -> Iterator[tuple[Fraction, ...]]:
    """All probability vectors on n symbols with entries k/d, ascending order."""

    def rec(prefix: list[int], remaining: int, slots: int):
        if slots == 1:
            yield tuple(prefix + [remaining])
            return
        for k in range(remaining + 1):
            yield from rec(prefix + [k], remaining - k, slots - 1)

    for cells in rec([], d, n):
        yield tuple(Fraction(k, d) for k in cells)


def capacity_slack(num_inputs: int, num_outputs: int, d: int) -> Fraction:
    """Sound bound on max |I(p) - I(p')| over l1 balls of the grid's covering
    radius, valid for every channel of the given shape.

    Splits I into the output entropy and the input-weighted row entropies.
    The output part uses the sharp binary/alphabet entropy continuity bound,
    which stays valid at the simplex boundary where no Lipschitz constant
    exists; the row part is bounded by log2 of the output alphabet.
    """
    eps = Fraction(num_inputs, 2 * d)
    t = eps / 2
    slack = binary_entropy(min(t, Fraction(1, 2)), 20).hi
    if num_outputs > 2:
        slack += t * enc_log2(Enclosure.point(num_outputs - 1), 20).hi
        slack += eps * enc_log2(Enclosure.point(num_outputs), 20).hi
    else:
        slack += eps  # log2(2) == 1
    return slack


def grid_value_resolution(d: int) -> Fraction:
    """Upper bound on the value drop over one grid step at an entropy peak."""
    return 1 - binary_entropy(Fraction(1, 2) - Fraction(1, d), 30).lo


def _check_grid_args(W: Channel, d: int, allow_large: bool) -> None:
    if d < 2:
        raise DomainError("grid denominator must be at least 2")
    if not allow_large:
        if W.num_inputs > MAX_GRID_INPUTS:
            raise DomainError(
                f"refusing exhaustive search over {W.num_inputs} inputs "
                f"(limit {MAX_GRID_INPUTS}; pass allow_large=True to override)"
            )
        if d > MAX_GRID_DENOMINATOR:
            raise DomainError(
                f"refusing grid denominator {d} "
                f"(limit {MAX_GRID_DENOMINATOR}; pass allow_large=True to override)"
            )


def _evaluate_grid(
    W: Channel, d: int, precision: int, threads: int
) -> list[tuple[tuple[Fraction, ...], Enclosure]]:
    points = list(_grid_points(W.num_inputs, d))

    def evaluate(point):
        return point, mutual_information(Distribution(point), W, precision)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(evaluate, points))
    return [evaluate(point) for point in points]


def grid_capacity(
    W: Channel,
    d: int,
    precision: int,
    threads: int = 1,
    allow_large: bool = False,
) -> GridResult:
    """Exhaustive mutual-information maximization over the grid of
    denominator-d rational distributions."""
    _check_grid_args(W, d, allow_large)
    evaluated = _evaluate_grid(W, d, precision, threads)
    best_lo = max(enc.lo for _, enc in evaluated)
    best_hi = max(enc.hi for _, enc in evaluated)
    winners = tuple(
        Distribution(point)
        for point, enc in evaluated
        if enc.hi >= best_lo
    )
    return GridResult(
        best_value=Enclosure(best_lo, best_hi),
        best_points=winners,
        resolution=Fraction(1, d),
        delta=capacity_slack(W.num_inputs, W.num_outputs, d),
    )


def optimizer_set_probe(
    W: Channel,
    d: int,
    tol_M: int,
    threads: int = 1,
    allow_large: bool = False,
) -> list[Distribution]:
    """Grid points whose mutual information sits within the tolerance plus
    one grid-step of value resolution of the grid maximum.

    For channels whose optimizer set is a segment, this traces the segment
    at grid resolution; for channels with a unique optimizer it returns the
    cluster around that point.
    """
    _check_grid_args(W, d, allow_large)
    evaluated = _evaluate_grid(W, d, tol_M, threads)
    best_lo = max(enc.lo for _, enc in evaluated)
    threshold = best_lo - Fraction(1, 1 << tol_M) - grid_value_resolution(d)
    return [
        Distribution(point)
        for point, enc in evaluated
        if enc.hi >= threshold
    ]


def _argmax_representative(result: GridResult) -> Distribution:
    """Deterministic representative: the lexicographically smallest winner."""
    return min(result.best_points, key=lambda p: p.probs)


@dataclass(frozen=True)
class InstabilityRow:
    mu: Fraction
    tv: Fraction
    argmax_l1: Fraction


def instability_report(
    t_max: int, d: int = 64, precision: int = 25, threads: int = 1
) -> list[InstabilityRow]:
    """Optimizer instability against vanishing channel perturbation.

    For mu = 2**-t the two perturbed gadgets approach each other in channel
    distance (the tv column is exactly 2*mu) while their grid argmaxes stay
    an l1 distance of about 1 apart.
    """
    if t_max < 1:
        raise DomainError("t_max must be at least 1")
    rows = []
    for t in range(1, t_max + 1):
        mu = Fraction(1, 1 << t)
        a = w1(mu)
        b = w2(mu)
        pa = _argmax_representative(grid_capacity(a, d, precision, threads))
        pb = _argmax_representative(grid_capacity(b, d, precision, threads))
        rows.append(
            InstabilityRow(mu=mu, tv=tv_distance(a, b), argmax_l1=pa.l1_distance(pb))
        )
    return rows


def instability_csv(rows: Sequence[InstabilityRow]) -> str:
    lines = ["mu,tv_distance,argmax_l1_distance"]
    for row in rows:
        lines.append(
            f"{format_rational(row.mu)},{format_rational(row.tv)},"
            f"{format_rational(row.argmax_l1)}"
        )
    return "\n".join(lines) + "\n"
