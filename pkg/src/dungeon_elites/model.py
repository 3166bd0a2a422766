"""Genotype model: the room tree, lock/key pairing, and basic traversals.

A level is encoded as a tree of rooms. Every non-root room hangs off its
parent in one of three relative directions (right, down, left -- the parent
is always "north" of the child). Rooms may carry a key or a locked door,
bound together by a shared id, plus a per-room enemy count.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

from .errors import CannotDetachRoot, UnpairedKeyOrLock


class Direction(Enum):
    RIGHT = "right"
    DOWN = "down"
    LEFT = "left"


class RoomKind(Enum):
    NORMAL = "normal"
    KEY = "key"
    LOCKED = "locked"


@dataclass(frozen=True)
class RoomType:
    """A room is normal, holds one key, or sits behind one locked door."""

    kind: RoomKind
    pair_id: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind is RoomKind.NORMAL:
            if self.pair_id is not None:
                raise ValueError("normal rooms carry no pair id")
        elif self.pair_id is None or self.pair_id <= 0:
            raise ValueError("key/locked rooms need a positive pair id")

    @staticmethod
    def normal() -> "RoomType":
        return RoomType(RoomKind.NORMAL)

    @staticmethod
    def key(pair_id: int) -> "RoomType":
        return RoomType(RoomKind.KEY, pair_id)

    @staticmethod
    def locked(pair_id: int) -> "RoomType":
        return RoomType(RoomKind.LOCKED, pair_id)

    @property
    def is_key(self) -> bool:
        return self.kind is RoomKind.KEY

    @property
    def is_locked(self) -> bool:
        return self.kind is RoomKind.LOCKED

    @property
    def is_normal(self) -> bool:
        return self.kind is RoomKind.NORMAL


@dataclass
class RoomNode:
    node_id: int
    room_type: RoomType = field(default_factory=RoomType.normal)
    direction_from_parent: Optional[Direction] = None
    enemies: int = 0
    children: list["RoomNode"] = field(default_factory=list)

    def child_in(self, direction: Direction) -> Optional["RoomNode"]:
        for child in self.children:
            if child.direction_from_parent is direction:
                return child
        return None

    def free_directions(self) -> list[Direction]:
        used = {c.direction_from_parent for c in self.children}
        return [d for d in Direction if d not in used]

    def add_child(self, child: "RoomNode") -> None:
        if child.direction_from_parent is None:
            raise ValueError("non-root nodes need a direction")
        if self.child_in(child.direction_from_parent) is not None:
            raise ValueError(f"direction {child.direction_from_parent} already taken")
        self.children.append(child)


@dataclass
class IndividualTree:
    """One individual: a room tree plus bookkeeping for ids and caches."""

    root: RoomNode
    next_node_id: int = 1
    next_pair_id: int = 1
    rng_seed_lineage: str = ""
    cached_fitness: object = None
    cached_descriptors: object = None

    @staticmethod
    def single_room(lineage: str = "") -> "IndividualTree":
        return IndividualTree(root=RoomNode(node_id=0), next_node_id=1,
                              rng_seed_lineage=lineage)

    def fresh_node_id(self) -> int:
        nid = self.next_node_id
        self.next_node_id += 1
        return nid

    def fresh_pair_id(self) -> int:
        pid = self.next_pair_id
        self.next_pair_id += 1
        return pid

    def nodes_preorder(self) -> Iterator[RoomNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def node_count(self) -> int:
        return sum(1 for _ in self.nodes_preorder())

    def find(self, node_id: int) -> Optional[RoomNode]:
        for node in self.nodes_preorder():
            if node.node_id == node_id:
                return node
        return None

    def parent_of(self, node_id: int) -> Optional[RoomNode]:
        for node in self.nodes_preorder():
            for child in node.children:
                if child.node_id == node_id:
                    return node
        return None

    def depth_of(self, node_id: int) -> int:
        """Edge distance from the root; raises KeyError for unknown ids."""
        depths = {self.root.node_id: 0}
        for node in self.nodes_preorder():
            for child in node.children:
                depths[child.node_id] = depths[node.node_id] + 1
        return depths[node_id]

    def path_from_root(self, node_id: int) -> list[int]:
        """Node ids on the root-to-node path, inclusive on both ends."""
        parents: dict[int, int] = {}
        for node in self.nodes_preorder():
            for child in node.children:
                parents[child.node_id] = node.node_id
        path = [node_id]
        while path[-1] != self.root.node_id:
            path.append(parents[path[-1]])
        path.reverse()
        return path

    def clone(self) -> "IndividualTree":
        """Deep copy preserving node ids and id counters."""

        def copy_node(node: RoomNode) -> RoomNode:
            dup = RoomNode(node_id=node.node_id,
                           room_type=node.room_type,
                           direction_from_parent=node.direction_from_parent,
                           enemies=node.enemies)
            dup.children = [copy_node(c) for c in node.children]
            return dup

        return IndividualTree(root=copy_node(self.root),
                              next_node_id=self.next_node_id,
                              next_pair_id=self.next_pair_id,
                              rng_seed_lineage=self.rng_seed_lineage)

    def invalidate_caches(self) -> None:
        self.cached_fitness = None
        self.cached_descriptors = None


def traverse_breadth_first(tree: IndividualTree) -> list[RoomNode]:
    """All nodes level by level, children in stored order."""
    order: list[RoomNode] = []
    queue = deque([tree.root])
    while queue:
        node = queue.popleft()
        order.append(node)
        queue.extend(node.children)
    return order


def collect_lock_key_pairs(tree: IndividualTree) -> set[tuple[int, int, int]]:
    """(key node id, lock node id, shared id) triples for every pair.

    Raises UnpairedKeyOrLock if any shared id is missing its partner or is
    used more than once on either side.
    """
    keys: dict[int, list[int]] = {}
    locks: dict[int, list[int]] = {}
    for node in tree.nodes_preorder():
        if node.room_type.is_key:
            keys.setdefault(node.room_type.pair_id, []).append(node.node_id)
        elif node.room_type.is_locked:
            locks.setdefault(node.room_type.pair_id, []).append(node.node_id)
    if set(keys) != set(locks):
        raise UnpairedKeyOrLock(
            f"key ids {sorted(keys)} do not match lock ids {sorted(locks)}")
    pairs: set[tuple[int, int, int]] = set()
    for pair_id, key_nodes in keys.items():
        lock_nodes = locks[pair_id]
        if len(key_nodes) != 1 or len(lock_nodes) != 1:
            raise UnpairedKeyOrLock(f"shared id {pair_id} is not a bijection")
        pairs.add((key_nodes[0], lock_nodes[0], pair_id))
    return pairs


def detach_branch(tree: IndividualTree, node_id: int) -> IndividualTree:
    """Remove a node and its whole subtree; returns a new tree.

    Lock/key pairing may be broken afterwards -- callers are expected to run
    the repair step before evaluating the result.
    """
    if node_id == tree.root.node_id:
        raise CannotDetachRoot("the start room cannot be removed")
    out = tree.clone()
    _detach_in_place(out, node_id)
    return out


def _detach_in_place(tree: IndividualTree, node_id: int) -> None:
    if node_id == tree.root.node_id:
        raise CannotDetachRoot("the start room cannot be removed")
    parent = tree.parent_of(node_id)
    if parent is None:
        raise KeyError(f"no node with id {node_id}")
    parent.children = [c for c in parent.children if c.node_id != node_id]
    tree.invalidate_caches()
