"""Bounded Turing-machine interpretation and the halting-race demonstrators.

Machines are deterministic single-tape machines with a designated start and
halt state; inputs are non-negative integers written in unary.  From a
machine and an input the module builds a computable double sequence of
gadget channels whose limit depends on whether the machine halts: the
channel sequence converges effectively no matter what, but the limit's
unique optimizer jumps by a full unit of l1 distance between the halting
and non-halting case.

The demonstrators run the resulting race at desk scale.  Two logical
machines are interleaved deterministically, one simulation step of the
subject machine per round: the first wins as soon as the subject halts, the
second wins if it can soundly confirm that the optimizer displacement is
below threshold.  Confirmation needs the limit channels, which the second
machine may only use once the subject's behaviour is resolved within the
current round budget (halting observed, or a configuration repeat proving a
loop).  A machine that neither halts nor cycles within budget yields an
honest BudgetExhausted: the demonstrators exhibit the mechanics of the
construction, they are not a halting oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .channel import Channel, Distribution, wstar, w1, w2
from .exactnum import (
    CompareResult,
    DomainError,
    Enclosure,
    compare_below,
    format_rational,
)

__all__ = [
    "MachineFormatError",
    "TuringMachine",
    "RunOutcome",
    "tm_run_bounded",
    "HaltingStatus",
    "resolve_status",
    "mixing_denominator",
    "stage_channel",
    "limit_channel",
    "effective_convergence_check",
    "ConvergenceReport",
    "Verdict",
    "DeciderResult",
    "halting_decider_via_optimizer",
    "approx_hardness_demo",
    "fixture_names",
    "load_fixture",
    "fixture_text",
]

BLANK_DEFAULT = "_"
INPUT_SYMBOL = "1"


class MachineFormatError(ValueError):
    """The machine description is malformed; raised at load time only."""


@dataclass(frozen=True)
class TuringMachine:
    """Deterministic single-tape machine.

    ``transitions`` maps (state, symbol) to (state, symbol, move) with move
    L or R.  Every non-halt state must have a transition for every tape
    symbol, so a run can only stop by entering the halt state; the halt
    state has no outgoing transitions.
    """

    start: str
    halt: str
    blank: str
    transitions: Mapping[tuple[str, str], tuple[str, str, str]]

    def __post_init__(self) -> None:
        states = {self.start, self.halt}
        symbols = {self.blank, INPUT_SYMBOL}
        for (state, symbol), (nstate, nsymbol, move) in self.transitions.items():
            states.update((state, nstate))
            symbols.update((symbol, nsymbol))
            if move not in ("L", "R"):
                raise MachineFormatError(f"move must be L or R, got {move!r}")
        for (state, _symbol) in self.transitions:
            if state == self.halt:
                raise MachineFormatError("halt state must have no transitions")
        for state in states:
            if state == self.halt:
                continue
            for symbol in symbols:
                if (state, symbol) not in self.transitions:
                    raise MachineFormatError(
                        f"state {state!r} lacks a transition for symbol {symbol!r}"
                    )

    @classmethod
    def from_text(cls, text: str) -> "TuringMachine":
        """Parse the fixture format: header lines ``start:``/``halt:`` and
        optional ``blank:``, then one ``state symbol -> state symbol L|R``
        line per transition.  ``#`` starts a comment."""
        start = halt = None
        blank = BLANK_DEFAULT
        transitions: dict[tuple[str, str], tuple[str, str, str]] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" in line and "->" not in line:
                key, _, value = line.partition(":")
                key = key.strip().lower()
                value = value.strip()
                if key == "start":
                    start = value
                elif key == "halt":
                    halt = value
                elif key == "blank":
                    blank = value
                else:
                    raise MachineFormatError(f"line {lineno}: unknown header {key!r}")
                continue
            if "->" not in line:
                raise MachineFormatError(f"line {lineno}: expected a transition")
            left, _, right = line.partition("->")
            lparts = left.split()
            rparts = right.split()
            if len(lparts) != 2 or len(rparts) != 3:
                raise MachineFormatError(f"line {lineno}: malformed transition")
            key = (lparts[0], lparts[1])
            if key in transitions:
                raise MachineFormatError(
                    f"line {lineno}: duplicate transition for {key}"
                )
            transitions[key] = (rparts[0], rparts[1], rparts[2])
        if start is None or halt is None:
            raise MachineFormatError("missing start or halt header")
        return cls(start=start, halt=halt, blank=blank, transitions=transitions)

    def to_text(self) -> str:
        lines = [f"start: {self.start}", f"halt: {self.halt}", f"blank: {self.blank}"]
        for (state, symbol), (nstate, nsymbol, move) in sorted(self.transitions.items()):
            lines.append(f"{state} {symbol} -> {nstate} {nsymbol} {move}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunOutcome:
    """Result of a bounded simulation: whether the halt state was reached,
    and after how many applied transitions (the budget itself if not)."""

    halted: bool
    steps: int


_SEEN_CAP = 100_000  # beyond this, cycle detection degrades to "unknown"


class _Run:
    """Incremental simulator with configuration-repeat detection."""

    def __init__(self, tm: TuringMachine, input_value: int):
        if input_value < 0:
            raise DomainError("machine input must be a non-negative integer")
        self.tm = tm
        self.tape: dict[int, str] = {i: INPUT_SYMBOL for i in range(input_value)}
        self.head = 0
        self.state = tm.start
        self.steps = 0
        self.seen: set[tuple] = set()
        self.cycle_at: int | None = None
        self._remember()

    def _snapshot(self) -> tuple:
        cells = tuple(sorted(self.tape.items()))
        return (self.state, self.head, cells)

    def _remember(self) -> None:
        if len(self.seen) >= _SEEN_CAP:
            return
        snap = self._snapshot()
        if snap in self.seen:
            self.cycle_at = self.steps
        else:
            self.seen.add(snap)

    @property
    def halted(self) -> bool:
        return self.state == self.tm.halt

    def step(self) -> None:
        """Apply one transition; no-op once halted."""
        if self.halted:
            return
        symbol = self.tape.get(self.head, self.tm.blank)
        nstate, nsymbol, move = self.tm.transitions[(self.state, symbol)]
        if nsymbol == self.tm.blank:
            self.tape.pop(self.head, None)
        else:
            self.tape[self.head] = nsymbol
        self.head += 1 if move == "R" else -1
        self.state = nstate
        self.steps += 1
        if not self.halted and self.cycle_at is None:
            self._remember()


def tm_run_bounded(tm: TuringMachine, k: int, n: int) -> RunOutcome:
    """Simulate ``tm`` on unary input ``k`` for at most ``n`` steps."""
    if n < 0:
        raise DomainError("step budget must be non-negative")
    run = _Run(tm, k)
    while not run.halted and run.steps < n:
        run.step()
    return RunOutcome(halted=run.halted, steps=run.steps if run.halted else n)


class HaltingStatus(enum.Enum):
    HALTS = "halts"
    LOOPS = "loops"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ResolvedStatus:
    status: HaltingStatus
    steps: int | None = None  # halting time, or the step of the detected repeat


def resolve_status(tm: TuringMachine, k: int, bound: int) -> ResolvedStatus:
    """Resolve halting behaviour within a step bound.

    LOOPS is only reported on an exact configuration repeat, which proves
    non-termination; anything unresolved within the bound stays UNKNOWN.
    """
    run = _Run(tm, k)
    while run.steps < bound:
        if run.halted:
            return ResolvedStatus(HaltingStatus.HALTS, run.steps)
        if run.cycle_at is not None:
            return ResolvedStatus(HaltingStatus.LOOPS, run.cycle_at)
        run.step()
    if run.halted:
        return ResolvedStatus(HaltingStatus.HALTS, run.steps)
    if run.cycle_at is not None:
        return ResolvedStatus(HaltingStatus.LOOPS, run.cycle_at)
    return ResolvedStatus(HaltingStatus.UNKNOWN)


# ---------------------------------------------------------------------------
# Channel double sequence
# ---------------------------------------------------------------------------


def mixing_denominator(tm: TuringMachine, l: int, n: int) -> int:
    """2**(s+2) if the machine halts on input l within n steps (at step s),
    else 2**(n+2).  Total by construction."""
    if l < 0 or n < 0:
        raise DomainError("input and budget must be non-negative")
    outcome = tm_run_bounded(tm, l, n)
    exponent = outcome.steps + 2 if outcome.halted else n + 2
    return 1 << exponent


def _split_index(k: int) -> tuple[bool, int]:
    if k < 1:
        raise DomainError("sequence index k must be at least 1")
    if k % 2 == 1:
        return True, (k + 1) // 2  # odd: k = 2l - 1
    return False, k // 2  # even: k = 2l


def stage_channel(tm: TuringMachine, k: int, n: int) -> Channel:
    """Stage-n member of the channel double sequence for index k.

    Odd k perturbs toward the first optimizer endpoint, even k toward the
    second; the perturbation weight is 1 over the mixing denominator of
    l = ceil(k/2) at budget n.
    """
    odd, l = _split_index(k)
    mu = Fraction(1, mixing_denominator(tm, l, n))
    return w1(mu) if odd else w2(mu)


def limit_channel(tm: TuringMachine, k: int, budget: int) -> tuple[Channel, bool]:
    """Limit of the stage channels, when it is knowable within the budget.

    If halting resolves within ``budget`` steps the true limit is returned
    with ``resolved=True``; otherwise the current hypothesis (the unperturbed
    base gadget) is returned with ``resolved=False``, honestly flagging that
    the true limit is unknowable within this budget.
    """
    odd, l = _split_index(k)
    outcome = tm_run_bounded(tm, l, budget)
    if outcome.halted:
        mu = Fraction(1, 1 << (outcome.steps + 2))
        return (w1(mu) if odd else w2(mu)), True
    return wstar(), False


def _true_limit(tm: TuringMachine, k: int, bound: int) -> Channel:
    """Limit channel from a resolved halting status; raises when unresolved."""
    odd, l = _split_index(k)
    resolved = resolve_status(tm, l, bound)
    if resolved.status is HaltingStatus.HALTS:
        mu = Fraction(1, 1 << (resolved.steps + 2))
        return w1(mu) if odd else w2(mu)
    if resolved.status is HaltingStatus.LOOPS:
        return wstar()
    raise DomainError(
        f"halting status of input {l} unresolved within {bound} steps; "
        "effective-convergence checks need fixture machines with known status"
    )


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    distance: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.distance < self.bound


@dataclass(frozen=True)
class ConvergenceReport:
    k: int
    rows: tuple[ConvergenceRow, ...]

    @property
    def all_hold(self) -> bool:
        return all(row.holds for row in self.rows)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "all_hold": self.all_hold,
            "rows": [
                {
                    "n": row.n,
                    "distance": format_rational(row.distance),
                    "bound": format_rational(row.bound),
                    "holds": row.holds,
                }
                for row in self.rows
            ],
        }


def effective_convergence_check(
    tm: TuringMachine, k: int, n_max: int, status_bound: int = 10_000
) -> ConvergenceReport:
    """Check that the stage channels approach the true limit at rate 2**-n.

    Requires the machine's halting status on the derived input to be
    resolvable (fixture machines); an unresolvable machine is a
    configuration error, not a failed check.
    """
    from .channel import tv_distance

    limit = _true_limit(tm, k, status_bound)
    rows = []
    for n in range(n_max + 1):
        distance = tv_distance(limit, stage_channel(tm, k, n))
        rows.append(ConvergenceRow(n=n, distance=distance, bound=Fraction(1, 1 << n)))
    return ConvergenceReport(k=k, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Halting-race demonstrators
# ---------------------------------------------------------------------------


class Verdict(enum.Enum):
    IN_A = "InA"
    NOT_IN_A = "NotInA"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass(frozen=True)
class DeciderResult:
    l: int
    verdict: Verdict
    rounds: int
    r_value: Enclosure
    threshold: Fraction

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "verdict": self.verdict.value,
            "rounds": self.rounds,
            "r_value": self.r_value.to_json(),
            "threshold": format_rational(self.threshold),
        }


def _race(
    tm: TuringMachine,
    l: int,
    displacement: Callable[[Channel, Channel], Fraction],
    threshold: Fraction,
    step_budget: int,
) -> DeciderResult:
    """Deterministic interleaving of the subject machine against the
    below-threshold test on the optimizer displacement.

    One subject step per round.  The subject machine is checked first, so a
    halt always wins the round it occurs in.  The displacement is evaluated
    once the subject's behaviour is resolved (halt, or a proven cycle with
    the base gadget as limit); its below-threshold test is sound, so a
    displacement at or above the threshold can never be confirmed below it.
    """
    if step_budget < 1:
        raise DomainError("step budget must be at least 1")
    run = _Run(tm, l)
    unknown = Enclosure(Fraction(0), Fraction(2))  # trivial l1 bounds
    r_value: Enclosure | None = None
    for round_no in range(1, step_budget + 1):
        run.step()
        if run.halted:
            mu = Fraction(1, 1 << (run.steps + 2))
            r = displacement(w1(mu), w2(mu))
            return DeciderResult(
                l=l,
                verdict=Verdict.IN_A,
                rounds=round_no,
                r_value=Enclosure.point(r),
                threshold=threshold,
            )
        if run.cycle_at is not None and r_value is None:
            base = wstar()
            r = displacement(base, base)
            r_value = Enclosure.point(r)
            if compare_below(r_value, threshold, 0) is CompareResult.CONFIRMED_BELOW:
                return DeciderResult(
                    l=l,
                    verdict=Verdict.NOT_IN_A,
                    rounds=round_no,
                    r_value=r_value,
                    threshold=threshold,
                )
            # value not confirmably below threshold: the comparison machine
            # never stops, so only the subject machine can still win
    return DeciderResult(
        l=l,
        verdict=Verdict.BUDGET_EXHAUSTED,
        rounds=step_budget,
        r_value=r_value if r_value is not None else unknown,
        threshold=threshold,
    )


def halting_decider_via_optimizer(
    tm: TuringMachine,
    l: int,
    optimizer: Callable[[Channel], Distribution],
    step_budget: int,
) -> DeciderResult:
    """Race a supplied total optimizer routine against the subject machine.

    With an optimizer that is exact on the gadget family this classifies
    every resolvable fixture: halting inputs make the displacement of the
    two limit optimizers at least 1/2, looping inputs make it exactly 0.
    The reference value is the optimizer's own output on the base gadget.
    """
    reference = optimizer(wstar())

    def displacement(odd_limit: Channel, even_limit: Channel) -> Fraction:
        return max(
            optimizer(odd_limit).l1_distance(reference),
            optimizer(even_limit).l1_distance(reference),
        )

    return _race(tm, l, displacement, Fraction(1, 4), step_budget)


def approx_hardness_demo(
    tm: TuringMachine,
    l: int,
    approx: Callable[[Channel], Distribution],
    alpha: Fraction,
    step_budget: int,
) -> DeciderResult:
    """Same race for a routine claiming l1 accuracy alpha < 1/2.

    The threshold becomes (1 - 2*alpha)/2: even an approximate routine this
    accurate would separate the halting from the non-halting case.
    """
    alpha = Fraction(alpha)
    if alpha >= Fraction(1, 2):
        raise DomainError("claimed accuracy must satisfy alpha < 1/2")
    if alpha < 0:
        raise DomainError("claimed accuracy must be non-negative")
    reference = approx(wstar())

    def displacement(odd_limit: Channel, even_limit: Channel) -> Fraction:
        return max(
            approx(even_limit).l1_distance(reference),
            reference.l1_distance(approx(odd_limit)),
        )

    threshold = (1 - 2 * alpha) / 2
    return _race(tm, l, displacement, threshold, step_budget)


# ---------------------------------------------------------------------------
# Fixture suite
# ---------------------------------------------------------------------------


def fixture_names() -> list[str]:
    """Names of the packaged fixture machines, halting ones first."""
    return [
        "halt0",
        "clock3",
        "clock4",
        "scan",
        "clock25",
        "bounce2",
        "bounce4",
        "bounce6",
        "marker_bounce",
        "erase_bounce",
    ]


def fixture_text(name: str) -> str:
    """Raw fixture file contents."""
    from importlib import resources

    if name not in fixture_names():
        raise DomainError(f"unknown fixture {name!r}")
    return (
        resources.files("certcap.fixtures").joinpath(f"{name}.tm").read_text()
    )


def load_fixture(name: str) -> TuringMachine:
    return TuringMachine.from_text(fixture_text(name))
