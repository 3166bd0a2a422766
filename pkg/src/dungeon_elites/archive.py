"""5x5 MAP-Elites archive keyed by (leniency bin, exploration bin)."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import EmptyArchive
from .fitness import BinIndex, DescriptorPair, FitnessBreakdown, bin_descriptors
from .model import IndividualTree

ROWS = 5
COLS = 5


class OfferOutcome(Enum):
    INSERTED = "inserted"
    REPLACED = "replaced"
    REJECTED_WORSE = "rejected_worse"
    OUT_OF_RANGE = "out_of_range"


@dataclass
class Elite:
    tree: IndividualTree
    fitness: FitnessBreakdown
    descriptors: DescriptorPair


@dataclass
class InsertionStats:
    attempts: int = 0
    inserts: int = 0
    replacements: int = 0
    out_of_range: int = 0
    rejected: int = 0


@dataclass
class ElitesArchive:
    cells: list[list[Optional[Elite]]] = field(
        default_factory=lambda: [[None] * COLS for _ in range(ROWS)])
    stats: InsertionStats = field(default_factory=InsertionStats)

    def cell(self, index: BinIndex) -> Optional[Elite]:
        return self.cells[index[0]][index[1]]

    def occupied_count(self) -> int:
        return sum(1 for row in self.cells for e in row if e is not None)

    def occupied_cells(self) -> list[tuple[BinIndex, Elite]]:
        """Occupied cells in row-major order (L1..L5, E1..E5)."""
        return [((r, c), self.cells[r][c])
                for r in range(ROWS) for c in range(COLS)
                if self.cells[r][c] is not None]

    def best_total(self) -> float:
        occupied = self.occupied_cells()
        if not occupied:
            raise EmptyArchive("no elites yet")
        return min(e.fitness.total for _idx, e in occupied)

    def offer(self, tree: IndividualTree, fitness: FitnessBreakdown,
              descriptors: DescriptorPair) -> OfferOutcome:
        """Insert into the matching cell; a strictly lower total replaces
        the incumbent, ties keep it."""
        self.stats.attempts += 1
        index = bin_descriptors(descriptors)
        if index is None:
            self.stats.out_of_range += 1
            return OfferOutcome.OUT_OF_RANGE
        incumbent = self.cells[index[0]][index[1]]
        if incumbent is None:
            self.cells[index[0]][index[1]] = Elite(tree, fitness, descriptors)
            self.stats.inserts += 1
            return OfferOutcome.INSERTED
        if fitness.total < incumbent.fitness.total:
            self.cells[index[0]][index[1]] = Elite(tree, fitness, descriptors)
            self.stats.replacements += 1
            return OfferOutcome.REPLACED
        self.stats.rejected += 1
        return OfferOutcome.REJECTED_WORSE

    def sample_parent(self, rng: random.Random) -> IndividualTree:
        """Size-2 tournament over occupied cells, sampled with replacement.

        Returns a copy so variation operators never touch archived elites.
        """
        occupied = self.occupied_cells()
        if not occupied:
            raise EmptyArchive("cannot select from an empty archive")
        _idx_a, a = occupied[rng.randrange(len(occupied))]
        _idx_b, b = occupied[rng.randrange(len(occupied))]
        winner = a if a.fitness.total <= b.fitness.total else b
        return winner.tree.clone()
