"""Symmetric TSP heuristics: nearest-neighbor construction, 2-opt
improvement, and a brute-force oracle for small instances."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .core import GuardExceeded, Number, ValidationError, guard_limit

BRUTE_FORCE_GUARD = 10


@dataclass(frozen=True)
class TspInstance:
    ids: tuple[str, ...]
    dist: tuple[tuple[Number, ...], ...]

    def __post_init__(self) -> None:
        ids = tuple(self.ids)
        object.__setattr__(self, "ids", ids)
        d = tuple(tuple(row) for row in self.dist)
        object.__setattr__(self, "dist", d)
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate city ids")
        n = len(ids)
        if len(d) != n or any(len(row) != n for row in d):
            raise ValidationError(f"distance matrix must be {n}x{n}")
        for i in range(n):
            if d[i][i] != 0:
                raise ValidationError(f"diagonal entry [{i}][{i}] must be 0")
            for j in range(n):
                if d[i][j] < 0:
                    raise ValidationError(f"negative distance [{i}][{j}]")
                if d[i][j] != d[j][i]:
                    raise ValidationError("distance matrix must be symmetric")

    def d(self, a: int, b: int) -> Number:
        return self.dist[a][b]


@dataclass(frozen=True)
class Tour:
    order: tuple[str, ...]
    length: Number


def _require_cities(inst: TspInstance) -> None:
    if len(inst.ids) < 3:
        raise ValidationError("a tour needs at least 3 cities")


def tour_length(inst: TspInstance, order: list[int]) -> Number:
    n = len(order)
    return sum(inst.dist[order[i]][order[(i + 1) % n]] for i in range(n))


def _as_tour(inst: TspInstance, order: list[int]) -> Tour:
    return Tour(
        order=tuple(inst.ids[i] for i in order),
        length=tour_length(inst, order),
    )


def _indices(inst: TspInstance, tour: Tour) -> list[int]:
    if sorted(tour.order) != sorted(inst.ids):
        raise ValidationError("tour is not a permutation of the instance cities")
    return [inst.ids.index(c) for c in tour.order]


def tsp_nearest_neighbor(inst: TspInstance, start: str) -> Tour:
    """Repeatedly visit the closest unvisited city; ties break on id."""
    _require_cities(inst)
    if start not in inst.ids:
        raise ValidationError(f"unknown start city {start!r}")
    current = inst.ids.index(start)
    order = [current]
    unvisited = set(range(len(inst.ids))) - {current}
    while unvisited:
        current = min(unvisited, key=lambda j: (inst.dist[current][j], inst.ids[j]))
        order.append(current)
        unvisited.remove(current)
    return _as_tour(inst, order)


def tsp_two_opt(inst: TspInstance, initial: Tour) -> Tour:
    """First-improvement 2-opt edge exchanges until no move improves.

    Scans segment endpoints i < j by position and restarts after every
    applied move, so the outcome is deterministic.
    """
    _require_cities(inst)
    order = _indices(inst, initial)
    n = len(order)
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                if j - i + 1 >= n - 1:
                    continue  # mirror of the whole cycle, not a real move
                a, b = order[i - 1], order[i]
                c, e = order[j], order[(j + 1) % n]
                delta = (
                    inst.dist[a][c] + inst.dist[b][e]
                    - inst.dist[a][b] - inst.dist[c][e]
                )
                if isinstance(delta, Fraction):
                    improving = delta < 0
                else:
                    improving = delta < -1e-12  # float-noise guard
                if improving:
                    order[i : j + 1] = reversed(order[i : j + 1])
                    improved = True
                    break
            if improved:
                break
    return _as_tour(inst, order)


def tsp_brute_force(inst: TspInstance) -> Tour:
    """Exact optimum by enumerating (n-1)!/2 distinct cycles."""
    _require_cities(inst)
    n = len(inst.ids)
    limit = guard_limit(BRUTE_FORCE_GUARD)
    if n > limit:
        raise GuardExceeded(f"{n} cities exceeds brute-force guard {limit}")
    rest = list(range(1, n))
    dist = inst.dist
    best_len: Number | None = None
    best_order: list[int] | None = None
    for perm in itertools.permutations(rest):
        if perm[0] > perm[-1]:
            continue  # each cycle and its reversal count once
        total = dist[0][perm[0]]
        prev = perm[0]
        for k in range(1, n - 1):
            total += dist[prev][perm[k]]
            if best_len is not None and total >= best_len:
                break
            prev = perm[k]
        else:
            total += dist[prev][0]
            if best_len is None or total < best_len:
                best_len = total
                best_order = [0, *perm]
    return _as_tour(inst, best_order)
