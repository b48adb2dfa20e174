"""Shared domain types for criteria, ordinal scales and estimate vectors.

Everything downstream (ranking, selection, synthesis) works on exact
rational estimates; min-max normalization and the componentwise dominance
relation defined here are the two primitives every solver shares.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence, TypeVar, Union

Number = Union[int, float, Fraction]

#: comparison tolerance wherever real (float) arithmetic is unavoidable
TOLERANCE = 1e-9

T = TypeVar("T")


class ValidationError(ValueError):
    """An input violates a structural invariant."""


class GuardExceeded(RuntimeError):
    """An instance exceeds an enumeration or table-size guard."""


class InfeasibleError(RuntimeError):
    """The constraints admit no solution at all."""


def guard_limit(default: int) -> int:
    """Guard threshold, overridable through the HMMD_KIT_GUARD env variable."""
    raw = os.environ.get("HMMD_KIT_GUARD")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"HMMD_KIT_GUARD must be an integer, got {raw!r}") from exc


def as_frac(x: Number | str) -> Fraction:
    """Coerce a number to an exact Fraction.

    Floats go through their shortest decimal repr, so 0.1 becomes 1/10
    rather than the binary expansion. Strings accept "p/q" and decimal
    forms.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ValidationError(f"expected a number, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValidationError(f"expected a finite number, got {x!r}")
        return Fraction(str(x))
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a number: {x!r}") from exc
    raise ValidationError(f"not a number: {x!r}")


class Best(Enum):
    """Which end of an ordinal scale is the good one."""

    HIGH = "high"
    LOW = "low"


@dataclass(frozen=True)
class OrdinalScale:
    lo: int
    hi: int
    best: Best

    def __post_init__(self) -> None:
        if not isinstance(self.lo, int) or not isinstance(self.hi, int):
            raise ValidationError("scale bounds must be integers")
        if self.lo > self.hi:
            raise ValidationError(f"scale bounds out of order: [{self.lo}, {self.hi}]")

    def contains(self, value: int) -> bool:
        return self.lo <= value <= self.hi

    @property
    def best_value(self) -> int:
        return self.hi if self.best is Best.HIGH else self.lo


class Direction(Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"


@dataclass(frozen=True)
class Criterion:
    id: str
    direction: Direction = Direction.MAXIMIZE
    weight: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if not self.id or not isinstance(self.id, str):
            raise ValidationError("criterion id must be a non-empty string")
        object.__setattr__(self, "weight", as_frac(self.weight))
        if self.weight < 0:
            raise ValidationError(f"criterion {self.id!r}: weight must be nonnegative")


@dataclass(frozen=True)
class CriteriaFrame:
    """An ordered, non-empty set of criteria with weights normalized to sum 1."""

    criteria: tuple[Criterion, ...]

    def __post_init__(self) -> None:
        crits = tuple(self.criteria)
        if not crits:
            raise ValidationError("a criteria frame needs at least one criterion")
        ids = [c.id for c in crits]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate criterion ids: {ids}")
        total = sum((c.weight for c in crits), Fraction(0))
        if total == 0:
            raise ValidationError("criterion weights must not all be zero")
        if total != 1:
            crits = tuple(
                Criterion(c.id, c.direction, c.weight / total) for c in crits
            )
        object.__setattr__(self, "criteria", crits)

    def __len__(self) -> int:
        return len(self.criteria)

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(c.weight for c in self.criteria)

    @property
    def directions(self) -> tuple[Direction, ...]:
        return tuple(c.direction for c in self.criteria)


def equal_weight_frame(k: int, prefix: str = "c") -> CriteriaFrame:
    """Frame of k maximized criteria with equal weights."""
    if k < 1:
        raise ValidationError("a frame needs at least one criterion")
    return CriteriaFrame(tuple(Criterion(f"{prefix}{i + 1}") for i in range(k)))


@dataclass(frozen=True)
class EstimateVector:
    """One estimate per criterion of the governing frame."""

    values: tuple[Fraction, ...]

    def __init__(self, values: Iterable[Number | str]) -> None:
        object.__setattr__(self, "values", tuple(as_frac(v) for v in values))
        if not self.values:
            raise ValidationError("an estimate vector must not be empty")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, k: int) -> Fraction:
        return self.values[k]

    def conforms(self, frame: CriteriaFrame) -> bool:
        return len(self.values) == len(frame)


def check_rows(frame: CriteriaFrame, rows: Sequence[EstimateVector]) -> None:
    if not rows:
        raise ValidationError("empty row set")
    for i, row in enumerate(rows):
        if not row.conforms(frame):
            raise ValidationError(
                f"row {i} has {len(row)} values, frame has {len(frame)} criteria"
            )


def normalize_estimates(
    frame: CriteriaFrame, rows: Sequence[EstimateVector]
) -> list[EstimateVector]:
    """Min-max rescale each criterion over the rows to canonical [0, 1] form.

    Minimized criteria are flipped so 1 is always best; a criterion that is
    constant across the rows maps to 1/2 for every row (neutral, so it never
    biases a utility sum).
    """
    check_rows(frame, rows)
    cols = list(zip(*(row.values for row in rows)))
    out_cols: list[list[Fraction]] = []
    for k, direction in enumerate(frame.directions):
        lo, hi = min(cols[k]), max(cols[k])
        if lo == hi:
            out_cols.append([Fraction(1, 2)] * len(rows))
        elif direction is Direction.MAXIMIZE:
            out_cols.append([(v - lo) / (hi - lo) for v in cols[k]])
        else:
            out_cols.append([(hi - v) / (hi - lo) for v in cols[k]])
    return [EstimateVector(vals) for vals in zip(*out_cols)]


def dominates(a: EstimateVector, b: EstimateVector) -> bool:
    """Strict componentwise dominance on canonical (larger-is-better) vectors."""
    if len(a) != len(b):
        raise ValidationError(f"vector length mismatch: {len(a)} vs {len(b)}")
    ge_all = all(x >= y for x, y in zip(a, b))
    return ge_all and any(x > y for x, y in zip(a, b))


def non_dominated(items: Sequence[T], dom: Callable[[T, T], bool]) -> list[T]:
    """Items not strictly dominated by any other, in input order."""
    return [
        a
        for i, a in enumerate(items)
        if not any(dom(b, a) for j, b in enumerate(items) if j != i)
    ]


def pareto_layers(items: Sequence[T], dom: Callable[[T, T], bool]) -> list[int]:
    """1-based layer index per item: peel the non-dominated set repeatedly."""
    n = len(items)
    layer = [0] * n
    remaining = list(range(n))
    current = 1
    while remaining:
        front = [
            i
            for i in remaining
            if not any(dom(items[j], items[i]) for j in remaining if j != i)
        ]
        if not front:  # cannot happen for a strict partial order
            raise ValidationError("dominance relation admits a cycle")
        for i in front:
            layer[i] = current
        remaining = [i for i in remaining if i not in set(front)]
        current += 1
    return layer
