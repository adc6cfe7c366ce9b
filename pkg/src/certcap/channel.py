"""Channels, input distributions, and certified entropic functionals.

A channel is stored row-stochastically: ``rows[x][y]`` is the probability of
output ``y`` given input ``x``, as an exact rational.  The gadget family used
by the demonstrators lives here too: a three-input, two-output base channel
whose optimizer set is a whole segment of the simplex, a twin with the
complementary segment, and the two perturbed families that single out one
endpoint each.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exactnum import DomainError, Enclosure, enc_log2, format_rational, parse_rational

__all__ = [
    "DimensionError",
    "Distribution",
    "Channel",
    "binary_entropy",
    "mutual_information",
    "tv_distance",
    "gadget",
    "wstar",
    "w_hat",
    "w1",
    "w2",
    "mix",
    "embed",
    "project_optimizer",
    "gadget_optimizer",
    "OPTIMIZER_SEGMENT_1",
    "OPTIMIZER_SEGMENT_2",
]


class DimensionError(ValueError):
    """Shapes of the supplied objects do not match."""


def _as_fractions(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


@dataclass(frozen=True)
class Distribution:
    """Probability vector with exact rational entries summing to exactly 1."""

    probs: tuple[Fraction, ...]

    def __init__(self, probs: Iterable):
        object.__setattr__(self, "probs", _as_fractions(probs))
        if not self.probs:
            raise DimensionError("distribution needs at least one entry")
        if any(p < 0 for p in self.probs):
            raise DomainError("negative probability")
        if sum(self.probs) != 1:
            raise DomainError("probabilities must sum to exactly 1")

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, x: int) -> Fraction:
        return self.probs[x]

    def l1_distance(self, other: "Distribution") -> Fraction:
        if len(other) != len(self):
            raise DimensionError("distributions of different length")
        return sum(abs(a - b) for a, b in zip(self.probs, other.probs))

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls([Fraction(1, n)] * n)

    def to_json(self) -> list[str]:
        return [format_rational(p) for p in self.probs]

    def to_csv_row(self) -> str:
        return ",".join(format_rational(p) for p in self.probs)


@dataclass(frozen=True)
class Channel:
    """Row-stochastic matrix of exact rationals; ``rows[x][y]`` = P(y | x)."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __init__(self, rows: Iterable[Iterable]):
        frozen = tuple(_as_fractions(row) for row in rows)
        object.__setattr__(self, "rows", frozen)
        if not frozen or not frozen[0]:
            raise DimensionError("channel needs at least one input and output")
        width = len(frozen[0])
        for x, row in enumerate(frozen):
            if len(row) != width:
                raise DimensionError(f"row {x} has length {len(row)}, expected {width}")
            if any(w < 0 for w in row):
                raise DomainError(f"negative entry in row {x}")
            if sum(row) != 1:
                raise DomainError(f"row {x} does not sum to exactly 1")

    @property
    def num_inputs(self) -> int:
        return len(self.rows)

    @property
    def num_outputs(self) -> int:
        return len(self.rows[0])

    def output_distribution(self, p: Distribution) -> tuple[Fraction, ...]:
        """Exact output law q(y) = sum_x p(x) W(y|x)."""
        if len(p) != self.num_inputs:
            raise DimensionError("input distribution does not match channel")
        return tuple(
            sum(p[x] * self.rows[x][y] for x in range(self.num_inputs))
            for y in range(self.num_outputs)
        )

    def to_json(self) -> dict:
        return {
            "x": self.num_inputs,
            "y": self.num_outputs,
            "rows": [[format_rational(w) for w in row] for row in self.rows],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Channel":
        try:
            rows = payload["rows"]
        except (TypeError, KeyError) as exc:
            raise DimensionError("channel JSON needs a 'rows' field") from exc
        parsed = [[parse_rational(cell) for cell in row] for row in rows]
        channel = cls(parsed)
        if "x" in payload and payload["x"] != channel.num_inputs:
            raise DimensionError("declared input count does not match rows")
        if "y" in payload and payload["y"] != channel.num_outputs:
            raise DimensionError("declared output count does not match rows")
        return channel


# ---------------------------------------------------------------------------
# Entropic functionals
# ---------------------------------------------------------------------------


def binary_entropy(p: Fraction, precision: int) -> Enclosure:
    """Certified enclosure of -p*log2(p) - (1-p)*log2(1-p) on [0, 1].

    The endpoints use the 0*log(0) = 0 convention and return the exact point
    [0, 0]; interior rationals get an interval of width below 2**-precision.
    """
    p = Fraction(p)
    if p < 0 or p > 1:
        raise DomainError("binary entropy needs p in [0, 1]")
    if p == 0 or p == 1:
        return Enclosure.point(0)
    log_p = enc_log2(Enclosure.point(p), precision + 2)
    log_1p = enc_log2(Enclosure.point(1 - p), precision + 2)
    return -(log_p.scale(p) + log_1p.scale(1 - p))


def _klrow(
    row: Sequence[Fraction], q: Sequence[Fraction], precision: int
) -> Enclosure:
    """Enclosure of sum_y row[y] * log2(row[y]/q[y]), zero terms skipped.

    Every surviving term has q[y] >= some positive input mass times row[y],
    so q[y] > 0 whenever row[y] > 0 and the log argument is a positive exact
    rational.  Term weights sum to at most one, so per-term precision + 1
    keeps the total width below 2**-precision.
    """
    lo = Fraction(0)
    hi = Fraction(0)
    for w, qy in zip(row, q):
        if w == 0:
            continue
        term = enc_log2(Enclosure.point(w / qy), precision + 1).scale(w)
        lo += term.lo
        hi += term.hi
    return Enclosure(lo, hi)


def mutual_information(p: Distribution, W: Channel, precision: int) -> Enclosure:
    """Certified enclosure of I(p, W) in bits, width below 2**-precision.

    Terms with p(x) = 0 or W(y|x) = 0 contribute exactly zero.
    """
    if len(p) != W.num_inputs:
        raise DimensionError("input distribution does not match channel")
    q = W.output_distribution(p)
    lo = Fraction(0)
    hi = Fraction(0)
    for x in range(W.num_inputs):
        if p[x] == 0:
            continue
        term = _klrow(W.rows[x], q, precision + 1).scale(p[x])
        lo += term.lo
        hi += term.hi
    return Enclosure(lo, hi)


def tv_distance(a: Channel, b: Channel) -> Fraction:
    """Exact channel distance: max over inputs of the l1 row distance."""
    if (a.num_inputs, a.num_outputs) != (b.num_inputs, b.num_outputs):
        raise DimensionError("channels of different shape")
    return max(
        sum(abs(wa - wb) for wa, wb in zip(ra, rb))
        for ra, rb in zip(a.rows, b.rows)
    )


# ---------------------------------------------------------------------------
# Gadget family (3 inputs, 2 outputs)
# ---------------------------------------------------------------------------

OPTIMIZER_SEGMENT_1 = Distribution([Fraction(1, 2), Fraction(1, 2), Fraction(0)])
OPTIMIZER_SEGMENT_2 = Distribution([Fraction(1, 2), Fraction(0), Fraction(1, 2)])


def wstar() -> Channel:
    """Base gadget: inputs 2 and 3 are output-identical, so the optimizer
    set is the whole segment p1 = 1/2."""
    return Channel([[1, 0], [0, 1], [0, 1]])


def w_hat() -> Channel:
    """Twin gadget with inputs 1 and 3 output-identical (segment p2 = 1/2)."""
    return Channel([[1, 0], [0, 1], [1, 0]])


def mix(a: Channel, b: Channel, mu: Fraction) -> Channel:
    """Entrywise convex combination (1 - mu) * a + mu * b, exact."""
    mu = Fraction(mu)
    if mu < 0 or mu > 1:
        raise DomainError("mixing weight must lie in [0, 1]")
    if (a.num_inputs, a.num_outputs) != (b.num_inputs, b.num_outputs):
        raise DimensionError("channels of different shape")
    return Channel(
        [
            [(1 - mu) * wa + mu * wb for wa, wb in zip(ra, rb)]
            for ra, rb in zip(a.rows, b.rows)
        ]
    )


def w1(mu: Fraction) -> Channel:
    """Perturbed gadget with the unique optimizer (1/2, 1/2, 0) for mu in (0,1)."""
    return mix(wstar(), w_hat(), mu)


def w2(mu: Fraction) -> Channel:
    """Mirror-perturbed gadget with the unique optimizer (1/2, 0, 1/2)."""
    mu = Fraction(mu)
    if mu < 0 or mu > 1:
        raise DomainError("mixing weight must lie in [0, 1]")
    return Channel([[1, 0], [mu, 1 - mu], [0, 1]])


_GADGETS = {"wstar": wstar, "what": w_hat}


def gadget(kind: str, mu: Fraction | None = None) -> Channel:
    """Construct a gadget channel by kind: wstar, what, w1, or w2.

    The parameterized kinds require ``mu`` in [0, 1].
    """
    kind = kind.lower()
    if kind in _GADGETS:
        return _GADGETS[kind]()
    if kind in ("w1", "w2"):
        if mu is None:
            raise DomainError(f"gadget {kind} needs a mixing weight")
        return w1(mu) if kind == "w1" else w2(mu)
    raise DomainError(f"unknown gadget kind {kind!r}")


def gadget_optimizer(W: Channel) -> Distribution:
    """Closed-form optimal input distribution for the gadget family.

    Returns the unique optimizer for the perturbed gadgets, the midpoint of
    the optimizer segment for the two unperturbed ones, and refuses any other
    channel.  Used by the halting-race demonstrators as the stand-in for a
    routine claiming to compute optimizers everywhere.
    """
    if (W.num_inputs, W.num_outputs) != (3, 2):
        raise DomainError("gadget optimizer only covers 3x2 gadget channels")
    if W == wstar():
        return Distribution([Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)])
    if W == w_hat():
        return Distribution([Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)])
    first, second, third = W.rows
    if first == (Fraction(1), Fraction(0)) and second == (Fraction(0), Fraction(1)):
        mu = third[0]
        if 0 < mu < 1 and third == (mu, 1 - mu):
            return OPTIMIZER_SEGMENT_1
    if first == (Fraction(1), Fraction(0)) and third == (Fraction(0), Fraction(1)):
        mu = second[0]
        if 0 < mu < 1 and second == (mu, 1 - mu):
            return OPTIMIZER_SEGMENT_2
    raise DomainError("channel is not a member of the gadget family")


# ---------------------------------------------------------------------------
# Alphabet embedding
# ---------------------------------------------------------------------------


def embed(small: Channel, x_size: int, y_size: int) -> Channel:
    """Embed a 3x2 channel into an |X| x |Y| channel.

    The first three inputs keep their rows (padded with zero columns), and
    every additional input duplicates the first row, so the embedded channel
    carries exactly the information structure of the small one.
    """
    if (small.num_inputs, small.num_outputs) != (3, 2):
        raise DimensionError("embedding starts from a 3x2 channel")
    if x_size < 3 or y_size < 2:
        raise DimensionError("embedding must not shrink the alphabets")
    pad = (Fraction(0),) * (y_size - 2)
    rows = [small.rows[x] + pad for x in range(3)]
    rows.extend(rows[0] for _ in range(x_size - 3))
    return Channel(rows)


def project_optimizer(p_big: Distribution, x_size: int) -> Distribution:
    """Fold an embedded-channel distribution back onto three symbols.

    All mass on the duplicated inputs (4 and up) is added to symbol 1;
    symbols 2 and 3 keep their mass.
    """
    if len(p_big) < 3:
        raise DimensionError("need at least three symbols to project")
    if len(p_big) != x_size:
        raise DimensionError("distribution length does not match x_size")
    folded = p_big[0] + sum(p_big.probs[3:])
    return Distribution([folded, p_big[1], p_big[2]])
