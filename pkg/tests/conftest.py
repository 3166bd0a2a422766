import random

import pytest

from dungeon_elites.model import Direction, IndividualTree, RoomNode, RoomType


def attach(tree, parent, direction, room_type=None, enemies=0):
    node = RoomNode(node_id=tree.fresh_node_id(),
                    direction_from_parent=direction,
                    room_type=room_type or RoomType.normal(),
                    enemies=enemies)
    parent.add_child(node)
    return node


def figure_level():
    """The handcrafted 11-room reference level.

    Start room with three children (down, left behind lock 1, right); the
    right branch fans out into three rooms including key 1; the down branch
    runs deep to lock 2 (the goal); key 2 sits past lock 1.
    Returns the tree plus a dict of named nodes.
    """
    tree = IndividualTree.single_room()
    s = tree.root
    d1 = attach(tree, s, Direction.DOWN)
    l1 = attach(tree, s, Direction.LEFT, RoomType.locked(1))
    r1 = attach(tree, s, Direction.RIGHT)
    rd = attach(tree, r1, Direction.DOWN)
    rl = attach(tree, r1, Direction.LEFT)
    rr = attach(tree, r1, Direction.RIGHT, RoomType.key(1))
    d2 = attach(tree, d1, Direction.DOWN)
    r2 = attach(tree, l1, Direction.RIGHT, RoomType.key(2))
    r3 = attach(tree, d2, Direction.RIGHT)
    l2 = attach(tree, r3, Direction.LEFT, RoomType.locked(2))
    tree.next_pair_id = 3
    names = {"s": s, "d1": d1, "l1": l1, "r1": r1, "rd": rd, "rl": rl,
             "rr": rr, "d2": d2, "r2": r2, "r3": r3, "l2": l2}
    return tree, names


FIGURE_ROOM_CELLS = {(0, 0), (-2, 0), (0, 2), (2, 0), (-2, -2), (-4, 0),
                     (-2, 2), (2, 2), (0, 4), (-2, 4), (-2, 6)}
FIGURE_CORRIDOR_CELLS = {(-1, 0), (0, 1), (1, 0), (-3, 0), (-2, 1), (-2, -1),
                         (0, 3), (2, 1), (-1, 4), (-2, 5)}


@pytest.fixture
def fig_tree():
    tree, _names = figure_level()
    return tree


@pytest.fixture
def fig_named():
    return figure_level()


def chain(length, lock_last=False, key_at=None):
    """A straight downward path of `length` rooms; optionally the last room
    is locked (pair 1) with the key at index `key_at`."""
    tree = IndividualTree.single_room()
    node = tree.root
    nodes = [node]
    for _ in range(length - 1):
        node = attach(tree, node, Direction.DOWN)
        nodes.append(node)
    if lock_last:
        nodes[-1].room_type = RoomType.locked(1)
        nodes[key_at if key_at is not None else 0].room_type = RoomType.key(1)
        tree.next_pair_id = 2
    return tree, nodes


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {number}: {status} - {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_tree(seed, size=12, with_pairs=True, with_enemies=True):
    """Small random valid individual for property tests."""
    from dungeon_elites.evolution import random_individual
    from dungeon_elites.fitness import GenerationGoals

    rng = random.Random(seed)
    pairs = rng.randint(1, 3) if with_pairs else 0
    enemies = rng.randint(0, 15) if with_enemies else 0
    goals = GenerationGoals(rooms=rng.randint(4, size), keys=pairs,
                            locks=pairs, enemies=enemies,
                            linear_coefficient=1.5)
    return random_individual(goals, rng), goals
