"""Behavioral descriptors, fitness factors, and archive binning.

Descriptors: leniency (fraction of enemy-free rooms) and exploration
coefficient (mean normalized flood-fill coverage over the reference pairs).
Fitness total = f_goal - f_es + f_std, minimized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import analysis
from .decoder import LevelGrid, decode, resolve_goal
from .model import IndividualTree

BinIndex = tuple[int, int]  # (leniency bin 0..4, exploration bin 0..4)


@dataclass(frozen=True)
class GenerationGoals:
    rooms: int
    keys: int
    locks: int
    enemies: int
    linear_coefficient: float

    def __post_init__(self) -> None:
        if self.rooms < 1:
            raise ValueError("at least one room required")
        if min(self.keys, self.locks, self.enemies) < 0:
            raise ValueError("counts must be non-negative")
        if self.linear_coefficient < 1.0:
            raise ValueError("linear coefficient is at least 1")

    @property
    def label(self) -> str:
        lc = self.linear_coefficient
        lc_text = f"{lc:g}"
        return f"{self.rooms}-{self.keys}-{self.locks}-{self.enemies}-{lc_text}"


@dataclass(frozen=True)
class DescriptorPair:
    leniency: float
    exploration: float


@dataclass(frozen=True)
class FitnessBreakdown:
    f_goal: float
    f_es: float
    f_std: float

    @property
    def total(self) -> float:
        return self.f_goal - self.f_es + self.f_std


def leniency(grid: LevelGrid) -> float:
    safe = sum(1 for room in grid.rooms.values() if room.enemies == 0)
    return safe / grid.room_count()


def exploration(grid: LevelGrid) -> float:
    total = grid.room_count()
    pairs = analysis.reference_pairs(grid)
    coverage = [analysis.flood_fill_coverage(grid, r_s, r_g) / total
                for r_s, r_g in pairs]
    return sum(coverage) / len(coverage)


def f_goal(grid: LevelGrid, goals: GenerationGoals) -> float:
    """Distance of the level from the designer goals, plus penalties for
    rooms the mission never needs and locks off the critical path."""
    l_rooms = grid.room_count()
    l_keys = sum(1 for r in grid.rooms.values() if r.room_type.is_key)
    l_locks = sum(1 for r in grid.rooms.values() if r.room_type.is_locked)
    l_lc = analysis.linear_coefficient(grid)
    return (abs(goals.rooms - l_rooms)
            + abs(goals.keys - l_keys)
            + abs(goals.locks - l_locks)
            + abs(goals.linear_coefficient - l_lc)
            + (l_rooms - analysis.needed_rooms(grid))
            + (l_locks - analysis.needed_locks(grid)))


def f_es(grid: LevelGrid) -> float:
    """Enemy sparsity: mean squared distance of enemies from their centroid.

    Each enemy sits at its room's grid coordinate. 0 for enemy-free levels.
    """
    positions: list[tuple[int, int]] = []
    for pos, room in grid.rooms.items():
        positions.extend([pos] * room.enemies)
    if not positions:
        return 0.0
    n = len(positions)
    mx = sum(p[0] for p in positions) / n
    my = sum(p[1] for p in positions) / n
    return sum((p[0] - mx) ** 2 + (p[1] - my) ** 2 for p in positions) / n


def f_std(grid: LevelGrid) -> float:
    """Standard deviation of per-room enemy counts, start and goal excluded."""
    if grid.goal is None:
        raise ValueError("grid has no resolved goal")
    counts = [room.enemies for pos, room in grid.rooms.items()
              if pos not in (grid.start, grid.goal)]
    n_eligible = len(counts)
    if n_eligible < 1:
        return 0.0
    mean = sum(counts) / n_eligible
    return math.sqrt(sum((c - mean) ** 2 for c in counts) / n_eligible)


def evaluate(tree: IndividualTree,
             goals: GenerationGoals) -> tuple[FitnessBreakdown, DescriptorPair]:
    """Decode, resolve the goal, and compute all fitness and descriptor
    terms. Results are cached on the individual."""
    grid, _pruned = decode(tree)
    resolve_goal(grid, tree)
    breakdown = FitnessBreakdown(f_goal=f_goal(grid, goals),
                                 f_es=f_es(grid),
                                 f_std=f_std(grid))
    descriptors = DescriptorPair(leniency=leniency(grid),
                                 exploration=exploration(grid))
    tree.cached_fitness = breakdown
    tree.cached_descriptors = descriptors
    return breakdown, descriptors


# literal bounds (not lo + 0.1 arithmetic) so the intervals partition the
# float line exactly, with no gap or overlap at the seams
_LENIENCY_BINS = [(0.5, 0.6), (0.4, 0.5), (0.3, 0.4), (0.2, 0.3), (0.1, 0.2)]
_EXPLORATION_BINS = [(0.5, 0.6), (0.6, 0.7), (0.7, 0.8), (0.8, 0.9), (0.9, 1.0)]


def _leniency_bin(value: float) -> Optional[int]:
    if value == 0.6:  # outer boundary of the first bin is closed
        return 0
    for i, (lo, hi) in enumerate(_LENIENCY_BINS):
        if lo <= value < hi:
            return i
    return None


def _exploration_bin(value: float) -> Optional[int]:
    if value == 1.0:
        return 4
    for i, (lo, hi) in enumerate(_EXPLORATION_BINS):
        if lo <= value < hi:
            return i
    return None


def bin_descriptors(d: DescriptorPair) -> Optional[BinIndex]:
    """Map descriptors to a 5x5 cell, or None when out of range.

    Leniency rows descend from [0.5, 0.6] (closed at 0.6); exploration
    columns ascend from [0.5, 0.6) up to [0.9, 1.0].
    """
    row = _leniency_bin(d.leniency)
    col = _exploration_bin(d.exploration)
    if row is None or col is None:
        return None
    return (row, col)
