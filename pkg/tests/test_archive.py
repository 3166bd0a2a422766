import random

import pytest

from conftest import chain
from dungeon_elites.archive import ElitesArchive, OfferOutcome
from dungeon_elites.errors import EmptyArchive
from dungeon_elites.fitness import DescriptorPair, FitnessBreakdown


def elite_args(total=0.0, leniency=0.55, exploration=0.55, label=""):
    tree, _ = chain(3, lock_last=True)
    tree.rng_seed_lineage = label
    return tree, FitnessBreakdown(total, 0.0, 0.0), \
        DescriptorPair(leniency, exploration)


class TestOffer:
    def test_insert_into_empty_cell(self):
        archive = ElitesArchive()
        assert archive.offer(*elite_args()) is OfferOutcome.INSERTED
        assert archive.occupied_count() == 1
        assert archive.stats.inserts == 1

    def test_better_replaces(self):
        archive = ElitesArchive()
        archive.offer(*elite_args(total=1.0))
        assert archive.offer(*elite_args(total=0.5)) is OfferOutcome.REPLACED
        assert archive.cell((0, 0)).fitness.total == 0.5
        assert archive.stats.replacements == 1

    def test_tie_keeps_incumbent(self):
        archive = ElitesArchive()
        archive.offer(*elite_args(total=1.0, label="first"))
        outcome = archive.offer(*elite_args(total=1.0, label="second"))
        assert outcome is OfferOutcome.REJECTED_WORSE
        assert archive.cell((0, 0)).tree.rng_seed_lineage == "first"

    def test_out_of_range_discarded(self):
        archive = ElitesArchive()
        outcome = archive.offer(*elite_args(leniency=0.95))
        assert outcome is OfferOutcome.OUT_OF_RANGE
        assert archive.occupied_count() == 0
        assert archive.stats.out_of_range == 1

    def test_rejection_does_not_mutate_incumbent(self):
        archive = ElitesArchive()
        archive.offer(*elite_args(total=0.5, label="keep"))
        before = archive.cell((0, 0))
        archive.offer(*elite_args(total=9.0))
        assert archive.cell((0, 0)) is before

    def test_stats_track_attempts(self):
        archive = ElitesArchive()
        archive.offer(*elite_args(total=1.0))
        archive.offer(*elite_args(total=0.1))
        archive.offer(*elite_args(total=5.0))
        archive.offer(*elite_args(leniency=2.0))
        stats = archive.stats
        assert stats.attempts == 4
        assert (stats.inserts, stats.replacements, stats.rejected,
                stats.out_of_range) == (1, 1, 1, 1)


class TestOccupiedCells:
    def test_empty(self):
        assert ElitesArchive().occupied_cells() == []

    def test_single(self):
        archive = ElitesArchive()
        archive.offer(*elite_args(leniency=0.45, exploration=0.65))
        [(index, _elite)] = archive.occupied_cells()
        assert index == (1, 1)

    def test_row_major_order(self):
        archive = ElitesArchive()
        for row in range(5):
            for col in range(5):
                archive.offer(*elite_args(leniency=0.55 - 0.1 * row,
                                          exploration=0.55 + 0.1 * col))
        indices = [index for index, _ in archive.occupied_cells()]
        assert indices == [(r, c) for r in range(5) for c in range(5)]
        assert archive.occupied_count() == 25

    def test_best_total_empty_raises(self):
        with pytest.raises(EmptyArchive):
            ElitesArchive().best_total()


class TestSampleParent:
    def test_empty_archive_raises(self):
        with pytest.raises(EmptyArchive):
            ElitesArchive().sample_parent(random.Random(0))

    def test_single_cell_forced_choice(self):
        archive = ElitesArchive()
        archive.offer(*elite_args(label="only"))
        parent = archive.sample_parent(random.Random(0))
        assert parent.rng_seed_lineage == "only"
        assert parent is not archive.cell((0, 0)).tree  # a copy, not the elite

    def test_better_always_beats_worse_when_drawn(self):
        archive = ElitesArchive()
        archive.offer(*elite_args(total=0.2, leniency=0.55, label="better"))
        archive.offer(*elite_args(total=5.0, leniency=0.45, label="worse"))
        # occupied_cells is row-major: index 0 = better (L1), 1 = worse (L2)
        rng = random.Random(7)
        shadow = random.Random(7)
        for _ in range(2000):
            parent = archive.sample_parent(rng)
            drawn = {shadow.randrange(2), shadow.randrange(2)}
            if 0 in drawn:
                assert parent.rng_seed_lineage == "better"
            else:
                assert parent.rng_seed_lineage == "worse"

    def test_tie_goes_to_first_drawn(self):
        archive = ElitesArchive()
        archive.offer(*elite_args(total=1.0, leniency=0.55, label="a"))
        archive.offer(*elite_args(total=1.0, leniency=0.45, label="b"))
        rng = random.Random(11)
        shadow = random.Random(11)
        for _ in range(500):
            parent = archive.sample_parent(rng)
            first = shadow.randrange(2)
            shadow.randrange(2)
            assert parent.rng_seed_lineage == ("a", "b")[first]
