"""Genotype-to-phenotype translation.

Places the room tree onto a sparse 2D grid. Rooms land on even/even
coordinates, corridors on the cell in between. The root sits at (0, 0)
heading south; a child's heading is its parent's heading rotated clockwise
for RIGHT, counterclockwise for LEFT, unchanged for DOWN. Branches whose
placement would overlap an occupied cell are pruned from the tree
(first placed wins).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import NoLockedRoom
from .model import Direction, IndividualTree, RoomType, _detach_in_place

GridCoord = tuple[int, int]


class Heading(Enum):
    """Travel direction from parent into a room; y grows southward."""

    NORTH = (0, -1)
    EAST = (1, 0)
    SOUTH = (0, 1)
    WEST = (-1, 0)


_CLOCKWISE = {Heading.NORTH: Heading.EAST, Heading.EAST: Heading.SOUTH,
              Heading.SOUTH: Heading.WEST, Heading.WEST: Heading.NORTH}
_COUNTERCLOCKWISE = {v: k for k, v in _CLOCKWISE.items()}
# plain-tuple steps; Enum .value lookups are too hot for the inner loops
_STEP = {h: h.value for h in Heading}
_SCAN_ORDER = ((0, -1), (1, 0), (0, 1), (-1, 0))  # N, E, S, W


@dataclass
class PlacedRoom:
    node_id: int
    room_type: RoomType
    enemies: int


@dataclass
class PlacedCorridor:
    lock_id: Optional[int] = None


@dataclass
class LevelGrid:
    rooms: dict[GridCoord, PlacedRoom] = field(default_factory=dict)
    corridors: dict[GridCoord, PlacedCorridor] = field(default_factory=dict)
    start: GridCoord = (0, 0)
    goal: Optional[GridCoord] = None
    # node ids in depth-first placement order; fixes the player-simulation
    # child order without needing the tree at analysis time
    placement_order: list[int] = field(default_factory=list)
    _adjacency: Optional[dict] = field(default=None, repr=False, compare=False)

    def position_of(self, node_id: int) -> GridCoord:
        for pos, room in self.rooms.items():
            if room.node_id == node_id:
                return pos
        raise KeyError(f"node {node_id} is not placed")

    def adjacency(self) -> dict[GridCoord, list[tuple[GridCoord, GridCoord]]]:
        """pos -> [(neighbor room, connecting corridor)] in N, E, S, W order.

        Geometry only; cached. Lock state is read per query so room-type
        repairs stay visible.
        """
        if self._adjacency is None:
            adj: dict[GridCoord, list[tuple[GridCoord, GridCoord]]] = {}
            for (x, y) in self.rooms:
                entries = []
                for dx, dy in _SCAN_ORDER:
                    corridor = (x + dx, y + dy)
                    room = (x + 2 * dx, y + 2 * dy)
                    if corridor in self.corridors and room in self.rooms:
                        entries.append((room, corridor))
                adj[(x, y)] = entries
            self._adjacency = adj
        return self._adjacency

    def neighbors(self, pos: GridCoord) -> list[tuple[GridCoord, Optional[int]]]:
        """Adjacent rooms reachable through a corridor, with the corridor's
        lock id. Deterministic N, E, S, W order."""
        corridors = self.corridors
        return [(room, corridors[corridor].lock_id)
                for room, corridor in self.adjacency()[pos]]

    def room_count(self) -> int:
        return len(self.rooms)


def child_placement(parent_pos: GridCoord, parent_heading: Heading,
                    direction: Direction) -> tuple[GridCoord, GridCoord, Heading]:
    """Corridor cell, room cell, and heading for a child hung in `direction`."""
    if direction is Direction.RIGHT:
        heading = _CLOCKWISE[parent_heading]
    elif direction is Direction.LEFT:
        heading = _COUNTERCLOCKWISE[parent_heading]
    else:
        heading = parent_heading
    dx, dy = _STEP[heading]
    corridor = (parent_pos[0] + dx, parent_pos[1] + dy)
    room = (parent_pos[0] + 2 * dx, parent_pos[1] + 2 * dy)
    return corridor, room, heading


def decode(tree: IndividualTree) -> tuple[LevelGrid, IndividualTree]:
    """Place the tree on the grid, pruning branches that would overlap.

    Returns the grid (goal unresolved) and the pruned tree. Pruning is
    deterministic: depth-first pre-order in stored child order, first
    placed wins.
    """
    pruned = tree.clone()
    grid = LevelGrid()
    root = pruned.root
    grid.rooms[(0, 0)] = PlacedRoom(root.node_id, root.room_type, root.enemies)
    grid.placement_order.append(root.node_id)

    # stack of (node, position, heading); children pushed in reverse so the
    # first stored child is placed first
    stack = [(child, (0, 0), Heading.SOUTH) for child in reversed(root.children)]
    while stack:
        node, parent_pos, parent_heading = stack.pop()
        corridor, room, heading = child_placement(
            parent_pos, parent_heading, node.direction_from_parent)
        if room in grid.rooms or corridor in grid.corridors:
            _detach_in_place(pruned, node.node_id)
            continue
        lock_id = node.room_type.pair_id if node.room_type.is_locked else None
        grid.corridors[corridor] = PlacedCorridor(lock_id)
        grid.rooms[room] = PlacedRoom(node.node_id, node.room_type, node.enemies)
        grid.placement_order.append(node.node_id)
        stack.extend((child, room, heading) for child in reversed(node.children))
    return grid, pruned


def resolve_goal(grid: LevelGrid, tree: IndividualTree) -> GridCoord:
    """Pick the goal: the deepest locked room (ties to the lowest node id).

    Sets grid.goal and zeroes that room's enemies.
    """
    placed_ids = {room.node_id for room in grid.rooms.values()}
    candidates = [
        (tree.depth_of(node.node_id), node.node_id)
        for node in tree.nodes_preorder()
        if node.room_type.is_locked and node.node_id in placed_ids
    ]
    if not candidates:
        raise NoLockedRoom("goal resolution needs at least one locked room")
    best = max(candidates, key=lambda c: (c[0], -c[1]))
    goal_pos = grid.position_of(best[1])
    grid.goal = goal_pos
    grid.rooms[goal_pos].enemies = 0
    return goal_pos
