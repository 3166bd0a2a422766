"""Command line entry points: generate, render, experiment, validate."""

from __future__ import annotations

import argparse
import os
import sys

from . import analysis, experiment, fitness
from .decoder import decode, resolve_goal
from .errors import DungeonError
from .evolution import EvolutionConfig, run
from .fitness import GenerationGoals
from .levels import (LevelParseError, archive_manifest, cell_label, dump_json,
                     level_document, load_level)
from .render import render_svg, render_text


def parse_preset(text: str) -> GenerationGoals:
    """Parse the hyphenated rooms-keys-locks-enemies-lc form, e.g. 20-4-4-30-2."""
    parts = text.split("-")
    if len(parts) != 5:
        raise argparse.ArgumentTypeError(
            f"preset needs 5 hyphenated fields, got {text!r}")
    try:
        return GenerationGoals(rooms=int(parts[0]), keys=int(parts[1]),
                               locks=int(parts[2]), enemies=int(parts[3]),
                               linear_coefficient=float(parts[4]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_goal_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", type=parse_preset,
                        help="rooms-keys-locks-enemies-lc shorthand")
    parser.add_argument("--rooms", type=int)
    parser.add_argument("--keys", type=int)
    parser.add_argument("--locks", type=int)
    parser.add_argument("--enemies", type=int)
    parser.add_argument("--lc", type=float, help="target linear coefficient")


def _goals_from(args: argparse.Namespace) -> GenerationGoals:
    if args.preset is not None:
        return args.preset
    missing = [name for name in ("rooms", "keys", "locks", "enemies", "lc")
               if getattr(args, name) is None]
    if missing:
        raise SystemExit(f"missing goal flags: {', '.join('--' + m for m in missing)} "
                         "(or use --preset)")
    return GenerationGoals(rooms=args.rooms, keys=args.keys, locks=args.locks,
                           enemies=args.enemies, linear_coefficient=args.lc)


def _config_from(args: argparse.Namespace) -> EvolutionConfig:
    time_budget = args.time
    max_generations = args.generations
    if time_budget is None and max_generations is None:
        time_budget = 60.0
    return EvolutionConfig(time_budget=time_budget,
                           max_generations=max_generations,
                           rng_seed=args.seed)


def cmd_generate(args: argparse.Namespace) -> int:
    goals = _goals_from(args)
    config = _config_from(args)
    try:
        archive, log = run(goals, config)
    except DungeonError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return 1
    try:
        os.makedirs(args.out, exist_ok=True)
        for (row, col), elite in archive.occupied_cells():
            grid, _ = decode(elite.tree)
            resolve_goal(grid, elite.tree)
            doc = level_document(grid, elite.descriptors, elite.fitness,
                                 goals, config.rng_seed)
            path = os.path.join(args.out, f"level_{cell_label(row, col)}.json")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(dump_json(doc))
        manifest = archive_manifest(archive, goals, config.rng_seed,
                                    generations=log.entries[-1].generation,
                                    evaluations=log.evaluations)
        with open(os.path.join(args.out, "manifest.json"), "w",
                  encoding="utf-8") as handle:
            handle.write(dump_json(manifest))
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return 1
    print(f"{archive.occupied_count()}/25 cells occupied after "
          f"{log.entries[-1].generation} generations "
          f"({log.evaluations} evaluations); levels in {args.out}")
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    try:
        grid, _descriptors, _fitness, _goals, _seed = load_level(args.level)
    except (OSError, LevelParseError) as exc:
        print(f"cannot read level: {exc}", file=sys.stderr)
        return 1
    rendered = render_text(grid) if args.format == "text" else render_svg(grid)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(rendered)
    else:
        sys.stdout.write(rendered)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    sets = args.sets
    config = _config_from(args)
    os.makedirs(args.out, exist_ok=True)
    for set_index, goals in enumerate(sets):
        results = experiment.run_set(goals, args.runs, config, args.seed,
                                     set_index=set_index, workers=args.workers)
        report = experiment.aggregate(goals.label, results)
        prefix = os.path.join(args.out, goals.label)
        experiment.write_cell_csv(report, prefix + "_cells.csv")
        experiment.write_occupancy_csv(report, prefix + "_occupancy.csv")
        experiment.write_convergence_csv(report, prefix + "_convergence.csv")
        sys.stdout.write(experiment.summary_table(report))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        grid, descriptors, breakdown, goals, _seed = load_level(args.level)
    except (OSError, LevelParseError) as exc:
        print(f"cannot read level: {exc}", file=sys.stderr)
        return 1
    failures = validate_grid(grid, descriptors, breakdown, goals)
    for failure in failures:
        print(f"FAIL: {failure}")
    if failures:
        return 1
    print("ok")
    return 0


def validate_grid(grid, descriptors, breakdown, goals) -> list[str]:
    """Re-run every structural and numeric invariant on a parsed level."""
    failures: list[str] = []
    if grid.start != (0, 0):
        failures.append(f"start is {grid.start}, expected (0, 0)")
    for pos in grid.rooms:
        if pos[0] % 2 or pos[1] % 2:
            failures.append(f"room at {pos} breaks even-coordinate parity")
    for pos in grid.corridors:
        if (pos[0] % 2) == (pos[1] % 2):
            failures.append(f"corridor at {pos} breaks parity")
    for (x, y) in grid.corridors:
        sides = ([(x - 1, y), (x + 1, y)] if x % 2 else [(x, y - 1), (x, y + 1)])
        if not all(side in grid.rooms for side in sides):
            failures.append(f"corridor at {(x, y)} not between two rooms")
    if grid.goal is None:
        failures.append("no goal room")
    else:
        if grid.rooms[grid.goal].enemies != 0:
            failures.append("goal room holds enemies")
        if grid.goal == grid.start:
            failures.append("goal equals start")
    if grid.rooms[grid.start].enemies != 0:
        failures.append("start room holds enemies")

    keys: dict[int, int] = {}
    locks: dict[int, int] = {}
    for room in grid.rooms.values():
        if room.room_type.is_key:
            keys[room.room_type.pair_id] = keys.get(room.room_type.pair_id, 0) + 1
        elif room.room_type.is_locked:
            locks[room.room_type.pair_id] = locks.get(room.room_type.pair_id, 0) + 1
    if keys != locks or any(count != 1 for count in keys.values()):
        failures.append(f"key/lock pairing broken: keys {keys}, locks {locks}")

    total_enemies = sum(room.enemies for room in grid.rooms.values())
    if total_enemies != goals.enemies:
        failures.append(f"enemy total {total_enemies} != goal {goals.enemies}")

    if grid.goal is not None and not failures:
        if not analysis.is_solvable(grid):
            failures.append("level is unsolvable")
        recomputed = fitness.FitnessBreakdown(
            f_goal=fitness.f_goal(grid, goals),
            f_es=fitness.f_es(grid),
            f_std=fitness.f_std(grid))
        fresh = fitness.DescriptorPair(leniency=fitness.leniency(grid),
                                       exploration=fitness.exploration(grid))
        for name, stored, live in (
                ("f_goal", breakdown.f_goal, recomputed.f_goal),
                ("f_es", breakdown.f_es, recomputed.f_es),
                ("f_std", breakdown.f_std, recomputed.f_std),
                ("leniency", descriptors.leniency, fresh.leniency),
                ("exploration", descriptors.exploration, fresh.exploration)):
            if abs(stored - live) > 1e-9:
                failures.append(f"stale {name}: stored {stored}, recomputed {live}")
    return failures


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dungeon-elites",
        description="Quality-diversity dungeon generator over a 5x5 "
                    "leniency/exploration archive.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="evolve an archive and write levels")
    _add_goal_args(gen)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--time", type=float, help="time budget in seconds")
    gen.add_argument("--generations", type=int, help="generation cap")
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_generate)

    ren = sub.add_parser("render", help="render a level document")
    ren.add_argument("level", help="level JSON path")
    ren.add_argument("--format", choices=("text", "svg"), default="text")
    ren.add_argument("--out", help="output file (default stdout)")
    ren.set_defaults(func=cmd_render)

    exp = sub.add_parser("experiment", help="batch runs with aggregates")
    exp.add_argument("--sets", type=parse_preset, nargs="+", required=True,
                     help="parameter sets, e.g. 20-4-4-30-2")
    exp.add_argument("--runs", type=int, default=30)
    exp.add_argument("--seed", type=int, default=0, help="master seed")
    exp.add_argument("--time", type=float)
    exp.add_argument("--generations", type=int)
    exp.add_argument("--workers", type=int)
    exp.add_argument("--out", required=True)
    exp.set_defaults(func=cmd_experiment)

    val = sub.add_parser("validate", help="re-check a level document")
    val.add_argument("level")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
