"""Mission and layout analysis over decoded grids.

All functions are read-only over the grid and deterministic: room adjacency
is always scanned in N, E, S, W order and tie-breaks use node ids.
"""

from __future__ import annotations

import heapq
from collections import deque

from .decoder import GridCoord, LevelGrid
from .errors import DegenerateLevel


def reference_pairs(grid: LevelGrid) -> list[tuple[GridCoord, GridCoord]]:
    """(start, goal) plus one (key room, locked room) pair per shared id.

    Only pairs with both ends placed are returned; sorted by shared id so
    the order is stable.
    """
    if grid.goal is None:
        raise ValueError("grid has no resolved goal")
    keys: dict[int, GridCoord] = {}
    locks: dict[int, GridCoord] = {}
    for pos, room in grid.rooms.items():
        if room.room_type.is_key:
            keys[room.room_type.pair_id] = pos
        elif room.room_type.is_locked:
            locks[room.room_type.pair_id] = pos
    pairs = [(grid.start, grid.goal)]
    for pair_id in sorted(keys.keys() & locks.keys()):
        pairs.append((keys[pair_id], locks[pair_id]))
    return pairs


def reachable_with_keys(grid: LevelGrid,
                        blocked_locks: frozenset[int] = frozenset()) -> set[GridCoord]:
    """Fixpoint reachability from the start: locked corridors open once their
    key room has been reached. Locks in `blocked_locks` never open."""
    held: set[int] = set()
    reached: set[GridCoord] = set()
    frontier = [grid.start]
    deferred: dict[int, list[GridCoord]] = {}
    while frontier:
        pos = frontier.pop()
        if pos in reached:
            continue
        reached.add(pos)
        room = grid.rooms[pos]
        if room.room_type.is_key:
            held.add(room.room_type.pair_id)
            frontier.extend(deferred.pop(room.room_type.pair_id, []))
        for nxt, lock_id in grid.neighbors(pos):
            if nxt in reached:
                continue
            if lock_id in blocked_locks:
                continue
            if lock_id is not None and lock_id not in held:
                deferred.setdefault(lock_id, []).append(nxt)
            else:
                frontier.append(nxt)
    return reached


def is_solvable(grid: LevelGrid) -> bool:
    """True iff the goal is reachable, collecting keys along the way."""
    if grid.goal is None:
        raise ValueError("grid has no resolved goal")
    return grid.goal in reachable_with_keys(grid)


def is_fully_openable(grid: LevelGrid) -> bool:
    """True iff every placed room is reachable, i.e. every lock can open.

    Stronger than goal solvability; the repair pipeline targets this so any
    later goal choice stays solvable.
    """
    return len(reachable_with_keys(grid)) == grid.room_count()


def flood_fill_coverage(grid: LevelGrid, r_s: GridCoord, r_g: GridCoord) -> int:
    """Rooms dequeued by a BFS wave from r_s, stopping when r_g is dequeued.

    Lock state is ignored; endpoints are counted.
    """
    if r_s not in grid.rooms or r_g not in grid.rooms:
        raise KeyError("reference rooms must be placed")
    seen = {r_s}
    queue = deque([r_s])
    dequeued = 0
    while queue:
        pos = queue.popleft()
        dequeued += 1
        if pos == r_g:
            return dequeued
        for nxt, _lock in grid.neighbors(pos):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    raise ValueError("goal room was never reached; grid is disconnected")


def needed_locks(grid: LevelGrid) -> int:
    """Locked corridors on the A* shortest start-to-goal path.

    Uniform step cost, Manhattan heuristic, locks treated as passable.
    """
    if grid.goal is None:
        raise ValueError("grid has no resolved goal")
    start, goal = grid.start, grid.goal

    def h(pos: GridCoord) -> int:
        return (abs(pos[0] - goal[0]) + abs(pos[1] - goal[1])) // 2

    counter = 0
    open_heap = [(h(start), 0, 0, start)]
    came_from: dict[GridCoord, GridCoord] = {}
    g_cost = {start: 0}
    closed: set[GridCoord] = set()
    while open_heap:
        _f, _tie, g, pos = heapq.heappop(open_heap)
        if pos in closed:
            continue
        if pos == goal:
            break
        closed.add(pos)
        for nxt, _lock in grid.neighbors(pos):
            ng = g + 1
            if ng < g_cost.get(nxt, float("inf")):
                g_cost[nxt] = ng
                came_from[nxt] = pos
                counter += 1
                heapq.heappush(open_heap, (ng + h(nxt), counter, ng, nxt))
    else:
        raise ValueError("goal unreachable; grid is disconnected")

    locks = 0
    pos = goal
    while pos != start:
        prev = came_from[pos]
        corridor = ((pos[0] + prev[0]) // 2, (pos[1] + prev[1]) // 2)
        if grid.corridors[corridor].lock_id is not None:
            locks += 1
        pos = prev
    return locks


def needed_rooms(grid: LevelGrid) -> int:
    """Rooms a depth-first player visits before first entering the goal.

    The player explores children in placement order, collects keys, and
    defers locked corridors until the matching key is held; deferred edges
    are retried after each new key.
    """
    if grid.goal is None:
        raise ValueError("grid has no resolved goal")
    order = {node_id: i for i, node_id in enumerate(grid.placement_order)}
    held: set[int] = set()
    visited: set[GridCoord] = set()
    deferred: list[tuple[int, GridCoord]] = []  # (lock_id, room)
    stack = [grid.start]
    while stack:
        pos = stack.pop()
        if pos in visited:
            continue
        visited.add(pos)
        room = grid.rooms[pos]
        if pos == grid.goal:
            return len(visited)
        if room.room_type.is_key and room.room_type.pair_id not in held:
            held.add(room.room_type.pair_id)
            still = [(lid, rm) for lid, rm in deferred if lid not in held]
            opened = [rm for lid, rm in deferred if lid in held]
            deferred = still
            stack.extend(opened)
        nxt_rooms = [(order[grid.rooms[nxt].node_id], nxt, lock)
                     for nxt, lock in grid.neighbors(pos) if nxt not in visited]
        # push in reverse placement order so the earliest-placed child pops first
        for _i, nxt, lock in sorted(nxt_rooms, reverse=True):
            if lock is not None and lock not in held:
                deferred.append((lock, nxt))
            else:
                stack.append(nxt)
    raise ValueError("goal never entered; level unsolvable")


def linear_coefficient(grid: LevelGrid) -> float:
    """Mean child count over rooms that have at least one child.

    1.0 for a pure path, larger for bushier layouts.
    """
    if grid.room_count() < 2:
        raise DegenerateLevel("linearity needs at least two rooms")
    counts = []
    for pos in grid.rooms:
        degree = len(grid.neighbors(pos))
        children = degree if pos == grid.start else degree - 1
        if children >= 1:
            counts.append(children)
    return sum(counts) / len(counts)
