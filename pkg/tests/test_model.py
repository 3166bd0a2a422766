import pytest

from conftest import attach, chain, figure_level
from dungeon_elites.errors import CannotDetachRoot, UnpairedKeyOrLock
from dungeon_elites.model import (Direction, IndividualTree, RoomType,
                                  collect_lock_key_pairs, detach_branch,
                                  traverse_breadth_first)


class TestRoomType:
    def test_normal_carries_no_pair_id(self):
        with pytest.raises(ValueError):
            RoomType(RoomType.normal().kind, pair_id=1)

    @pytest.mark.parametrize("bad", [0, -1, None])
    def test_key_and_lock_need_positive_id(self, bad):
        with pytest.raises(ValueError):
            RoomType.key(bad)
        with pytest.raises(ValueError):
            RoomType.locked(bad)

    def test_kind_predicates(self):
        assert RoomType.normal().is_normal
        assert RoomType.key(2).is_key
        assert RoomType.locked(3).is_locked
        assert not RoomType.key(2).is_locked


class TestRoomNode:
    def test_at_most_one_child_per_direction(self):
        tree = IndividualTree.single_room()
        attach(tree, tree.root, Direction.DOWN)
        with pytest.raises(ValueError):
            attach(tree, tree.root, Direction.DOWN)

    def test_three_children_max(self):
        tree = IndividualTree.single_room()
        for direction in Direction:
            attach(tree, tree.root, direction)
        assert tree.root.free_directions() == []

    def test_child_in(self):
        tree = IndividualTree.single_room()
        child = attach(tree, tree.root, Direction.LEFT)
        assert tree.root.child_in(Direction.LEFT) is child
        assert tree.root.child_in(Direction.RIGHT) is None


class TestBreadthFirst:
    def test_single_root(self):
        tree = IndividualTree.single_room()
        assert traverse_breadth_first(tree) == [tree.root]

    def test_chain(self):
        tree, nodes = chain(3)
        assert traverse_breadth_first(tree) == nodes

    def test_figure_tree_level_order(self):
        tree, n = figure_level()
        expected = [n["s"], n["d1"], n["l1"], n["r1"], n["d2"], n["r2"],
                    n["rd"], n["rl"], n["rr"], n["r3"], n["l2"]]
        assert traverse_breadth_first(tree) == expected

    def test_visits_each_node_once(self):
        tree, _ = figure_level()
        order = traverse_breadth_first(tree)
        assert len(order) == tree.node_count()
        assert len({node.node_id for node in order}) == len(order)


class TestLockKeyPairs:
    def test_no_pairs(self):
        tree, _ = chain(4)
        assert collect_lock_key_pairs(tree) == set()

    def test_figure_tree_pairs(self):
        tree, n = figure_level()
        assert collect_lock_key_pairs(tree) == {
            (n["rr"].node_id, n["l1"].node_id, 1),
            (n["r2"].node_id, n["l2"].node_id, 2),
        }

    def test_orphan_key_raises(self):
        tree, nodes = chain(3)
        nodes[1].room_type = RoomType.key(3)
        with pytest.raises(UnpairedKeyOrLock):
            collect_lock_key_pairs(tree)

    def test_duplicate_key_raises(self):
        tree, nodes = chain(4)
        nodes[1].room_type = RoomType.key(1)
        nodes[2].room_type = RoomType.key(1)
        nodes[3].room_type = RoomType.locked(1)
        with pytest.raises(UnpairedKeyOrLock):
            collect_lock_key_pairs(tree)

    def test_pair_count_matches_room_counts(self):
        tree, _ = figure_level()
        keys = sum(1 for x in tree.nodes_preorder() if x.room_type.is_key)
        locks = sum(1 for x in tree.nodes_preorder() if x.room_type.is_locked)
        assert keys == locks == len(collect_lock_key_pairs(tree))


class TestDetachBranch:
    def test_detach_leaf(self):
        tree, nodes = chain(3)
        out = detach_branch(tree, nodes[2].node_id)
        assert out.node_count() == 2
        assert tree.node_count() == 3  # original untouched

    def test_detach_subtree_removes_whole_branch(self):
        tree, n = figure_level()
        out = detach_branch(tree, n["r1"].node_id)
        assert out.node_count() == 11 - 4  # r1, rd, rl, rr gone
        assert out.find(n["rr"].node_id) is None

    def test_detach_root_raises(self):
        tree, _ = chain(2)
        with pytest.raises(CannotDetachRoot):
            detach_branch(tree, tree.root.node_id)

    def test_detach_can_break_pairing(self):
        tree, n = figure_level()
        out = detach_branch(tree, n["r1"].node_id)  # removes key 1
        with pytest.raises(UnpairedKeyOrLock):
            collect_lock_key_pairs(out)


class TestIndividualTree:
    def test_fresh_ids_are_monotone_and_unique(self):
        tree, _ = figure_level()
        ids = [node.node_id for node in tree.nodes_preorder()]
        assert len(set(ids)) == len(ids)
        assert tree.fresh_node_id() > max(ids)

    def test_depth_and_path(self):
        tree, n = figure_level()
        assert tree.depth_of(n["s"].node_id) == 0
        assert tree.depth_of(n["l2"].node_id) == 4
        assert tree.path_from_root(n["l2"].node_id) == [
            n["s"].node_id, n["d1"].node_id, n["d2"].node_id,
            n["r3"].node_id, n["l2"].node_id]

    def test_parent_of(self):
        tree, n = figure_level()
        assert tree.parent_of(n["r2"].node_id) is n["l1"]
        assert tree.parent_of(tree.root.node_id) is None

    def test_clone_preserves_structure_and_counters(self):
        tree, _ = figure_level()
        dup = tree.clone()
        assert [x.node_id for x in dup.nodes_preorder()] == \
               [x.node_id for x in tree.nodes_preorder()]
        assert dup.next_node_id == tree.next_node_id
        assert dup.next_pair_id == tree.next_pair_id

    def test_clone_is_independent(self):
        tree, n = figure_level()
        dup = tree.clone()
        dup.find(n["d1"].node_id).enemies = 7
        dup.find(n["d1"].node_id).children.clear()
        assert n["d1"].enemies == 0
        assert len(n["d1"].children) == 1
