"""Evolutionary loop: initialization, variation operators, repairs, and the
time-budgeted MAP-Elites run.

All randomness flows through one `random.Random` owned by the run, so a
fixed seed reproduces the whole run bit-for-bit (in max-generations mode).
Operators mutate the tree they are given and return it; callers only ever
pass exclusively owned trees (archive parents are copies).
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .analysis import is_fully_openable, reachable_with_keys
from .archive import ElitesArchive, OfferOutcome
from .decoder import Heading, child_placement, decode, resolve_goal
from .errors import (DegenerateLevel, DungeonError, InitExhausted,
                     NoEligibleRoom)
from .fitness import DescriptorPair, FitnessBreakdown, GenerationGoals, evaluate
from .model import (IndividualTree, RoomNode, RoomType,
                    traverse_breadth_first)

OfferObserver = Callable[
    [IndividualTree, FitnessBreakdown, DescriptorPair, OfferOutcome], None]


@dataclass
class EvolutionConfig:
    initial_population: int = 25
    intermediate_population: int = 100
    mutation_rate: float = 0.15
    pair_add_remove_split: float = 0.5
    tournament_size: int = 2
    time_budget: Optional[float] = 60.0
    max_generations: Optional[int] = None
    rng_seed: int = 0
    init_attempt_cap: int = 200

    def __post_init__(self) -> None:
        if self.time_budget is None and self.max_generations is None:
            raise ValueError("set a time budget or a generation cap")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation rate is a probability")


@dataclass
class GenerationStats:
    generation: int
    best: float
    mean: float
    worst: float
    occupied: int
    cell_totals: list[Optional[float]]  # row-major, length 25


@dataclass
class ConvergenceLog:
    entries: list[GenerationStats] = field(default_factory=list)
    init_attempts: int = 0
    evaluations: int = 0


def _snapshot(archive: ElitesArchive, generation: int) -> GenerationStats:
    totals = [e.fitness.total for _idx, e in archive.occupied_cells()]
    cell_totals: list[Optional[float]] = []
    for row in archive.cells:
        cell_totals.extend(None if e is None else e.fitness.total for e in row)
    return GenerationStats(generation=generation,
                           best=min(totals),
                           mean=sum(totals) / len(totals),
                           worst=max(totals),
                           occupied=len(totals),
                           cell_totals=cell_totals)


def _grown_tree(goals: GenerationGoals, rng: random.Random,
                attempt_cap: int) -> IndividualTree:
    """Grow an overlap-free tree of normal rooms toward the target size."""
    tree = IndividualTree.single_room()
    positions = {tree.root.node_id: ((0, 0), Heading.SOUTH)}
    occupied = {(0, 0)}
    nodes = [tree.root]
    failures = 0
    while len(nodes) < goals.rooms and failures < attempt_cap:
        candidates = [n for n in nodes if n.free_directions()]
        if not candidates:
            break
        parent = candidates[rng.randrange(len(candidates))]
        direction = rng.choice(parent.free_directions())
        pos, heading = positions[parent.node_id]
        corridor, room, child_heading = child_placement(pos, heading, direction)
        if corridor in occupied or room in occupied:
            failures += 1
            continue
        child = RoomNode(node_id=tree.fresh_node_id(),
                         direction_from_parent=direction)
        parent.add_child(child)
        positions[child.node_id] = (room, child_heading)
        occupied.update((corridor, room))
        nodes.append(child)
    return tree


def random_individual(goals: GenerationGoals, rng: random.Random,
                      attempt_cap: int = 200) -> IndividualTree:
    """Random solvable level: grown tree, paired keys/locks, enemies spread
    over non-start, non-goal rooms.

    Raises InitExhausted when no solvable key/lock assignment is found.
    """
    tree = _grown_tree(goals, rng, attempt_cap)
    non_root = [n for n in tree.nodes_preorder() if n is not tree.root]
    n_pairs = min(goals.keys, goals.locks, len(non_root) // 2)

    if n_pairs > 0:
        view = _GridView(tree)
        placed = False
        for _attempt in range(attempt_cap):
            hosts = rng.sample(non_root, 2 * n_pairs)
            for i in range(n_pairs):
                view.set_type(hosts[i], RoomType.key(i + 1))
                view.set_type(hosts[n_pairs + i], RoomType.locked(i + 1))
            tree.next_pair_id = n_pairs + 1
            if view.openable():
                placed = True
                break
            for host in hosts:
                view.set_type(host, RoomType.normal())
        if not placed:
            raise InitExhausted(
                f"no solvable assignment of {n_pairs} pairs in {attempt_cap} tries")

    ensure_lock_exists(tree, rng)

    grid, _ = decode(tree)
    goal_pos = resolve_goal(grid, tree)
    goal_id = grid.rooms[goal_pos].node_id
    eligible = [n for n in tree.nodes_preorder()
                if n is not tree.root and n.node_id != goal_id]
    if eligible:
        for _ in range(goals.enemies):
            rng.choice(eligible).enemies += 1
    tree.invalidate_caches()
    return tree


def ensure_lock_exists(tree: IndividualTree, rng: random.Random) -> IndividualTree:
    """Guarantee at least one lock-key pair so the goal room is computable.

    No-op when a lock already exists. If the level has stray keys but no
    lock, one key is removed first. The key is hosted outside the locked
    subtree (falling back to the start room on two-room levels).
    """
    nodes = list(tree.nodes_preorder())
    if any(n.room_type.is_locked for n in nodes):
        return tree
    if len(nodes) < 2:
        raise NoEligibleRoom("a lock needs a non-start room to live in")

    key_rooms = [n for n in nodes if n.room_type.is_key]
    if key_rooms:
        rng.choice(key_rooms).room_type = RoomType.normal()

    lock_candidates = [n for n in nodes
                       if n is not tree.root and n.room_type.is_normal]
    if not lock_candidates:
        raise NoEligibleRoom("no normal room can host the lock")
    rng.shuffle(lock_candidates)
    for lock_host in lock_candidates:
        subtree_ids = {n.node_id for n in _subtree_nodes(lock_host)}
        key_candidates = [n for n in nodes
                          if n.room_type.is_normal and n is not lock_host
                          and n.node_id not in subtree_ids and n is not tree.root]
        if not key_candidates:
            # two-room levels: the start room is the only possible key host
            key_candidates = [n for n in nodes
                              if n.room_type.is_normal and n is not lock_host
                              and n.node_id not in subtree_ids]
        if key_candidates:
            pair_id = tree.fresh_pair_id()
            lock_host.room_type = RoomType.locked(pair_id)
            rng.choice(key_candidates).room_type = RoomType.key(pair_id)
            tree.invalidate_caches()
            return tree
    raise NoEligibleRoom("no room can host the key")


def _subtree_nodes(node: RoomNode) -> list[RoomNode]:
    out = []
    stack = [node]
    while stack:
        n = stack.pop()
        out.append(n)
        stack.extend(n.children)
    return out


def crossover(parent_a: IndividualTree, parent_b: IndividualTree,
              rng: random.Random) -> tuple[IndividualTree, IndividualTree]:
    """Swap one uniformly chosen non-root subtree between the parents.

    Each offspring is re-decoded (pruning overlaps) and lock/key repaired.
    Single-node parents yield plain copies.
    """
    cut_a = _pick_cut(parent_a, rng)
    cut_b = _pick_cut(parent_b, rng)
    if cut_a is None or cut_b is None:
        return parent_a.clone(), parent_b.clone()
    sub_a = parent_a.find(cut_a)
    sub_b = parent_b.find(cut_b)
    child_a = _with_replaced_subtree(parent_a, cut_a, sub_b)
    child_b = _with_replaced_subtree(parent_b, cut_b, sub_a)
    out = []
    for child in (child_a, child_b):
        _grid, pruned = decode(child)
        repair_lock_keys(pruned, rng)
        out.append(pruned)
    return out[0], out[1]


def _pick_cut(tree: IndividualTree, rng: random.Random) -> Optional[int]:
    non_root = [n.node_id for n in tree.nodes_preorder() if n is not tree.root]
    if not non_root:
        return None
    return non_root[rng.randrange(len(non_root))]


def _with_replaced_subtree(host: IndividualTree, cut_id: int,
                           incoming: RoomNode) -> IndividualTree:
    """Clone host, replacing the cut subtree with a re-identified copy of
    `incoming` in the same direction slot."""
    child = host.clone()
    parent = child.parent_of(cut_id)
    slot = next(c for c in parent.children if c.node_id == cut_id)
    graft = _reidentified_copy(incoming, child)
    graft.direction_from_parent = slot.direction_from_parent
    parent.children[parent.children.index(slot)] = graft
    child.invalidate_caches()
    return child


def _reidentified_copy(subtree: RoomNode, host: IndividualTree) -> RoomNode:
    """Copy a foreign subtree, taking fresh node ids and pair ids from the
    host so ids never collide. Pairs wholly inside the subtree stay bound."""
    pair_map: dict[int, int] = {}

    def remap(rt: RoomType) -> RoomType:
        if rt.is_normal:
            return rt
        if rt.pair_id not in pair_map:
            pair_map[rt.pair_id] = host.fresh_pair_id()
        make = RoomType.key if rt.is_key else RoomType.locked
        return make(pair_map[rt.pair_id])

    def copy_node(node: RoomNode) -> RoomNode:
        dup = RoomNode(node_id=host.fresh_node_id(),
                       room_type=remap(node.room_type),
                       direction_from_parent=node.direction_from_parent,
                       enemies=node.enemies)
        dup.children = [copy_node(c) for c in node.children]
        return dup

    return copy_node(subtree)


class _GridView:
    """A pruned tree plus its decoded grid, kept in sync through room-type
    edits. Type changes never move rooms, so one decode serves a whole
    repair pass."""

    def __init__(self, tree: IndividualTree):
        self.tree = tree
        self.grid, _ = decode(tree)
        self.pos_by_node = {room.node_id: pos
                            for pos, room in self.grid.rooms.items()}
        # corridor entering each non-root room
        self.corridor_of: dict[int, tuple[int, int]] = {}
        for node in tree.nodes_preorder():
            for child in node.children:
                p = self.pos_by_node[node.node_id]
                c = self.pos_by_node[child.node_id]
                self.corridor_of[child.node_id] = ((p[0] + c[0]) // 2,
                                                   (p[1] + c[1]) // 2)

    def set_type(self, node: RoomNode, room_type: RoomType) -> None:
        node.room_type = room_type
        self.grid.rooms[self.pos_by_node[node.node_id]].room_type = room_type
        corridor = self.corridor_of.get(node.node_id)
        if corridor is not None:
            self.grid.corridors[corridor].lock_id = (
                room_type.pair_id if room_type.is_locked else None)

    def openable(self) -> bool:
        return is_fully_openable(self.grid)


def repair_lock_keys(tree: IndividualTree, rng: random.Random) -> IndividualTree:
    """Restore the key/lock bijection and full openability.

    Orphan keys get a new lock off their root path; orphan locks get a new
    key in the region reachable without that lock. Elements that cannot be
    re-paired (or pairs that deadlock the level) revert to normal rooms.
    Expects an already-pruned tree.
    """
    keys: dict[int, list[RoomNode]] = {}
    locks: dict[int, list[RoomNode]] = {}
    for node in tree.nodes_preorder():
        if node.room_type.is_key:
            keys.setdefault(node.room_type.pair_id, []).append(node)
        elif node.room_type.is_locked:
            locks.setdefault(node.room_type.pair_id, []).append(node)

    view = _GridView(tree)
    orphan_keys: list[RoomNode] = []
    orphan_locks: list[RoomNode] = []
    for pair_id in sorted(set(keys) | set(locks)):
        key_nodes = sorted(keys.get(pair_id, []), key=lambda n: n.node_id)
        lock_nodes = sorted(locks.get(pair_id, []), key=lambda n: n.node_id)
        # keep at most one of each; duplicates re-pair under fresh ids
        for extra in key_nodes[1:]:
            view.set_type(extra, RoomType.key(tree.fresh_pair_id()))
            orphan_keys.append(extra)
        for extra in lock_nodes[1:]:
            view.set_type(extra, RoomType.locked(tree.fresh_pair_id()))
            orphan_locks.append(extra)
        if key_nodes and not lock_nodes:
            orphan_keys.append(key_nodes[0])
        elif lock_nodes and not key_nodes:
            orphan_locks.append(lock_nodes[0])

    for key_node in sorted(orphan_keys, key=lambda n: n.node_id):
        _host_lock_for(view, key_node, rng)
    for lock_node in sorted(orphan_locks, key=lambda n: n.node_id):
        _host_key_for(view, lock_node, rng)

    _break_deadlocks(view)
    tree.invalidate_caches()
    return tree


def _host_lock_for(view: _GridView, key_node: RoomNode,
                   rng: random.Random) -> None:
    tree = view.tree
    root_path = set(tree.path_from_root(key_node.node_id))
    candidates = [n for n in tree.nodes_preorder()
                  if n.room_type.is_normal and n is not tree.root
                  and n.node_id not in root_path]
    rng.shuffle(candidates)
    for host in candidates:
        view.set_type(host, RoomType.locked(key_node.room_type.pair_id))
        if view.openable():
            return
        view.set_type(host, RoomType.normal())
    view.set_type(key_node, RoomType.normal())


def _host_key_for(view: _GridView, lock_node: RoomNode,
                  rng: random.Random) -> None:
    tree = view.tree
    lock_id = lock_node.room_type.pair_id
    reachable = reachable_with_keys(view.grid,
                                    blocked_locks=frozenset({lock_id}))
    reachable_ids = {view.grid.rooms[pos].node_id for pos in reachable}
    candidates = [n for n in tree.nodes_preorder()
                  if n.room_type.is_normal and n is not tree.root
                  and n.node_id in reachable_ids]
    rng.shuffle(candidates)
    for host in candidates:
        view.set_type(host, RoomType.key(lock_id))
        if view.openable():
            return
        view.set_type(host, RoomType.normal())
    view.set_type(lock_node, RoomType.normal())


def _break_deadlocks(view: _GridView) -> None:
    """Revert pairs whose lock can never open until every room is reachable."""
    while True:
        grid = view.grid
        reached = reachable_with_keys(grid)
        if len(reached) == grid.room_count():
            return
        reached_keys = {grid.rooms[pos].room_type.pair_id for pos in reached
                        if grid.rooms[pos].room_type.is_key}
        dead_ids = {room.room_type.pair_id for room in grid.rooms.values()
                    if room.room_type.is_locked
                    and room.room_type.pair_id not in reached_keys}
        if not dead_ids:
            return
        for node in view.tree.nodes_preorder():
            if not node.room_type.is_normal and node.room_type.pair_id in dead_ids:
                view.set_type(node, RoomType.normal())


def mutate(tree: IndividualTree, rng: random.Random,
           pair_add_remove_split: float = 0.5) -> IndividualTree:
    """Add or remove one lock-key pair (50/50), then transfer enemies once.

    Adding walks the tree breadth-first: the key lands on a normal room,
    the lock on a normal room strictly later in that order. If the chosen
    action is impossible the other is tried; if both are, only the enemy
    transfer happens.
    """
    actions = [_mutate_add_pair, _mutate_remove_pair]
    if rng.random() >= pair_add_remove_split:
        actions.reverse()
    if not actions[0](tree, rng):
        actions[1](tree, rng)
    enemy_transfer(tree, rng)
    tree.invalidate_caches()
    return tree


def _mutate_add_pair(tree: IndividualTree, rng: random.Random) -> bool:
    bfs = traverse_breadth_first(tree)
    normal_idx = [i for i, n in enumerate(bfs)
                  if n.room_type.is_normal and n is not tree.root]
    eligible_keys = [i for i in normal_idx if any(j > i for j in normal_idx)]
    if not eligible_keys:
        return False
    key_i = rng.choice(eligible_keys)
    lock_i = rng.choice([i for i in normal_idx if i > key_i])
    pair_id = tree.fresh_pair_id()
    bfs[key_i].room_type = RoomType.key(pair_id)
    bfs[lock_i].room_type = RoomType.locked(pair_id)
    return True


def _mutate_remove_pair(tree: IndividualTree, rng: random.Random) -> bool:
    key_rooms = [n for n in tree.nodes_preorder() if n.room_type.is_key]
    if not key_rooms:
        return False
    key_node = rng.choice(key_rooms)
    pair_id = key_node.room_type.pair_id
    for node in tree.nodes_preorder():
        if not node.room_type.is_normal and node.room_type.pair_id == pair_id:
            node.room_type = RoomType.normal()
    return True


def enemy_transfer(tree: IndividualTree, rng: random.Random) -> IndividualTree:
    """Move a random share of enemies between two random distinct rooms.

    An empty transferer swaps roles with a non-empty receiver; two empty
    rooms mean nothing happens. The total enemy count is conserved.
    """
    nodes = list(tree.nodes_preorder())
    if len(nodes) < 2:
        return tree
    transferer, receiver = rng.sample(nodes, 2)
    if transferer.enemies == 0 and receiver.enemies == 0:
        return tree
    if transferer.enemies == 0:
        transferer, receiver = receiver, transferer
    moved = rng.randint(1, transferer.enemies)
    transferer.enemies -= moved
    receiver.enemies += moved
    tree.invalidate_caches()
    return tree


def repair_enemies(tree: IndividualTree, goals: GenerationGoals,
                   rng: random.Random, goal_node_id: int) -> IndividualTree:
    """Clear start/goal enemies and rebalance the total to the goal count.

    Excess leaves the fullest rooms first; deficit tops up the non-empty
    room with the fewest (ties to the lowest node id), falling back to a
    random eligible room when all are empty.
    """
    tree.root.enemies = 0
    goal_node = tree.find(goal_node_id)
    if goal_node is not None:
        goal_node.enemies = 0
    eligible = [n for n in tree.nodes_preorder()
                if n is not tree.root and n.node_id != goal_node_id]
    if not eligible:
        return tree
    total = sum(n.enemies for n in eligible)
    while total > goals.enemies:
        fullest = max(eligible, key=lambda n: (n.enemies, -n.node_id))
        fullest.enemies -= 1
        total -= 1
    while total < goals.enemies:
        non_empty = [n for n in eligible if n.enemies > 0]
        if non_empty:
            target = min(non_empty, key=lambda n: (n.enemies, n.node_id))
        else:
            target = rng.choice(eligible)
        target.enemies += 1
        total += 1
    tree.invalidate_caches()
    return tree


def finalize(tree: IndividualTree, goals: GenerationGoals,
             rng: random.Random) -> IndividualTree:
    """Full post-variation repair pipeline: prune, re-pair locks, guarantee
    a goal lock, and rebalance enemies."""
    _grid, tree = decode(tree)
    repair_lock_keys(tree, rng)
    ensure_lock_exists(tree, rng)
    grid, _ = decode(tree)
    goal_pos = resolve_goal(grid, tree)
    repair_enemies(tree, goals, rng, grid.rooms[goal_pos].node_id)
    if sum(n.enemies for n in tree.nodes_preorder()) != goals.enemies:
        # start and goal stay enemy-free, so a level without a third room
        # can never carry the requested enemies; drop it
        raise DegenerateLevel(
            f"no room can host the {goals.enemies} requested enemies")
    return tree


def run(goals: GenerationGoals, config: EvolutionConfig,
        offer_observer: Optional[OfferObserver] = None,
        ) -> tuple[ElitesArchive, ConvergenceLog]:
    """MAP-Elites loop: seeded initialization, then generations of 100
    crossover offspring until the time budget or generation cap is hit."""
    rng = random.Random(config.rng_seed)
    archive = ElitesArchive()
    log = ConvergenceLog()
    started = time.monotonic()

    attempts = 0
    while (archive.occupied_count() < config.initial_population
           and attempts < config.init_attempt_cap):
        attempts += 1
        try:
            individual = random_individual(goals, rng, config.init_attempt_cap)
            individual = finalize(individual, goals, rng)
        except DungeonError:
            continue
        breakdown, descriptors = evaluate(individual, goals)
        log.evaluations += 1
        outcome = archive.offer(individual, breakdown, descriptors)
        if offer_observer is not None:
            offer_observer(individual, breakdown, descriptors, outcome)
    log.init_attempts = attempts
    if archive.occupied_count() == 0:
        raise InitExhausted(
            f"initialization produced no archive entry in {attempts} attempts")
    log.entries.append(_snapshot(archive, generation=0))

    generation = 0
    while True:
        if (config.max_generations is not None
                and generation >= config.max_generations):
            break
        if (config.time_budget is not None
                and time.monotonic() - started >= config.time_budget):
            break
        generation += 1
        offspring: list[IndividualTree] = []
        while len(offspring) < config.intermediate_population:
            parent_a = archive.sample_parent(rng)
            parent_b = archive.sample_parent(rng)
            for child in crossover(parent_a, parent_b, rng):
                if len(offspring) >= config.intermediate_population:
                    break
                if rng.random() < config.mutation_rate:
                    mutate(child, rng, config.pair_add_remove_split)
                offspring.append(child)
        for child in offspring:
            try:
                child = finalize(child, goals, rng)
            except DungeonError:
                continue
            breakdown, descriptors = evaluate(child, goals)
            log.evaluations += 1
            outcome = archive.offer(child, breakdown, descriptors)
            if offer_observer is not None:
                offer_observer(child, breakdown, descriptors, outcome)
        log.entries.append(_snapshot(archive, generation))
    return archive, log
