"""Level and archive-manifest serialization.

Levels are stored as JSON documents that round-trip losslessly: parsing a
serialized level reproduces the identical grid, descriptors, and fitness.
Rooms are listed in placement order so player-simulation metrics recompute
exactly. All JSON is emitted with sorted keys and no timestamps, so equal
inputs serialize to equal bytes.
"""

from __future__ import annotations

import json
from typing import Any

from .archive import ElitesArchive
from .decoder import LevelGrid, PlacedCorridor, PlacedRoom
from .fitness import DescriptorPair, FitnessBreakdown, GenerationGoals

SCHEMA_VERSION = 1


class LevelParseError(ValueError):
    pass


def level_document(grid: LevelGrid, descriptors: DescriptorPair,
                   fitness: FitnessBreakdown, goals: GenerationGoals,
                   rng_seed: int) -> dict[str, Any]:
    rooms = []
    pos_by_node = {room.node_id: pos for pos, room in grid.rooms.items()}
    for node_id in grid.placement_order:
        pos = pos_by_node[node_id]
        room = grid.rooms[pos]
        entry: dict[str, Any] = {
            "x": pos[0], "y": pos[1],
            "node_id": node_id,
            "type": room.room_type.kind.value,
            "enemies": room.enemies,
            "is_start": pos == grid.start,
            "is_goal": pos == grid.goal,
        }
        if room.room_type.is_key:
            entry["key_id"] = room.room_type.pair_id
        elif room.room_type.is_locked:
            entry["lock_id"] = room.room_type.pair_id
        rooms.append(entry)
    corridors = []
    for pos in sorted(grid.corridors):
        entry = {"x": pos[0], "y": pos[1]}
        if grid.corridors[pos].lock_id is not None:
            entry["lock_id"] = grid.corridors[pos].lock_id
        corridors.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "goals": {
            "rooms": goals.rooms, "keys": goals.keys, "locks": goals.locks,
            "enemies": goals.enemies,
            "linear_coefficient": goals.linear_coefficient,
        },
        "rng_seed": rng_seed,
        "rooms": rooms,
        "corridors": corridors,
        "descriptors": {"leniency": descriptors.leniency,
                        "exploration": descriptors.exploration},
        "fitness": {"f_goal": fitness.f_goal, "f_es": fitness.f_es,
                    "f_std": fitness.f_std, "total": fitness.total},
    }


def parse_level_document(doc: dict[str, Any],
                         ) -> tuple[LevelGrid, DescriptorPair,
                                    FitnessBreakdown, GenerationGoals, int]:
    from .model import RoomType

    try:
        if doc["schema_version"] != SCHEMA_VERSION:
            raise LevelParseError(
                f"unsupported schema version {doc['schema_version']}")
        goals = GenerationGoals(rooms=doc["goals"]["rooms"],
                                keys=doc["goals"]["keys"],
                                locks=doc["goals"]["locks"],
                                enemies=doc["goals"]["enemies"],
                                linear_coefficient=doc["goals"]["linear_coefficient"])
        grid = LevelGrid()
        goal = None
        for entry in doc["rooms"]:
            pos = (entry["x"], entry["y"])
            kind = entry["type"]
            if kind == "key":
                room_type = RoomType.key(entry["key_id"])
            elif kind == "locked":
                room_type = RoomType.locked(entry["lock_id"])
            else:
                room_type = RoomType.normal()
            grid.rooms[pos] = PlacedRoom(node_id=entry["node_id"],
                                         room_type=room_type,
                                         enemies=entry["enemies"])
            grid.placement_order.append(entry["node_id"])
            if entry["is_start"]:
                grid.start = pos
            if entry["is_goal"]:
                goal = pos
        grid.goal = goal
        for entry in doc["corridors"]:
            grid.corridors[(entry["x"], entry["y"])] = PlacedCorridor(
                lock_id=entry.get("lock_id"))
        descriptors = DescriptorPair(leniency=doc["descriptors"]["leniency"],
                                     exploration=doc["descriptors"]["exploration"])
        fitness = FitnessBreakdown(f_goal=doc["fitness"]["f_goal"],
                                   f_es=doc["fitness"]["f_es"],
                                   f_std=doc["fitness"]["f_std"])
        return grid, descriptors, fitness, goals, doc["rng_seed"]
    except (KeyError, TypeError) as exc:
        raise LevelParseError(f"malformed level document: {exc}") from exc


def dump_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_level(path: str) -> tuple[LevelGrid, DescriptorPair,
                                   FitnessBreakdown, GenerationGoals, int]:
    with open(path, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise LevelParseError(f"not valid JSON: {exc}") from exc
    return parse_level_document(doc)


def cell_label(row: int, col: int) -> str:
    return f"L{row + 1}-E{col + 1}"


def archive_manifest(archive: ElitesArchive, goals: GenerationGoals,
                     rng_seed: int, generations: int,
                     evaluations: int) -> dict[str, Any]:
    """Deterministic summary of a finished run; equal runs give equal bytes."""
    cells = []
    for (row, col), elite in archive.occupied_cells():
        cells.append({
            "cell": [row, col],
            "label": cell_label(row, col),
            "level_file": f"level_{cell_label(row, col)}.json",
            "fitness": {"f_goal": elite.fitness.f_goal,
                        "f_es": elite.fitness.f_es,
                        "f_std": elite.fitness.f_std,
                        "total": elite.fitness.total},
            "descriptors": {"leniency": elite.descriptors.leniency,
                            "exploration": elite.descriptors.exploration},
        })
    stats = archive.stats
    return {
        "schema_version": SCHEMA_VERSION,
        "goals": {
            "rooms": goals.rooms, "keys": goals.keys, "locks": goals.locks,
            "enemies": goals.enemies,
            "linear_coefficient": goals.linear_coefficient,
        },
        "rng_seed": rng_seed,
        "generations": generations,
        "evaluations": evaluations,
        "occupied": len(cells),
        "cells": cells,
        "insertion_stats": {"attempts": stats.attempts,
                            "inserts": stats.inserts,
                            "replacements": stats.replacements,
                            "out_of_range": stats.out_of_range,
                            "rejected": stats.rejected},
    }
