import json
import os
import random

import pytest

from conftest import chain, random_tree
from dungeon_elites.cli import main, parse_preset, validate_grid
from dungeon_elites.decoder import decode, resolve_goal
from dungeon_elites.fitness import (DescriptorPair, FitnessBreakdown,
                                    GenerationGoals, evaluate)
from dungeon_elites.levels import (LevelParseError, cell_label, dump_json,
                                   level_document, parse_level_document)
from dungeon_elites.render import render_svg, render_text


def evaluated_level(seed=0):
    tree, goals = random_tree(seed)
    breakdown, descriptors = evaluate(tree, goals)
    grid, pruned = decode(tree)
    resolve_goal(grid, pruned)
    return grid, descriptors, breakdown, goals


class TestLevelDocument:
    def test_round_trip_identity(self):
        for seed in range(10):
            grid, descriptors, breakdown, goals = evaluated_level(seed)
            doc = level_document(grid, descriptors, breakdown, goals, seed)
            grid2, d2, f2, g2, seed2 = parse_level_document(
                json.loads(dump_json(doc)))
            assert grid2.rooms == grid.rooms
            assert grid2.corridors == grid.corridors
            assert grid2.start == grid.start
            assert grid2.goal == grid.goal
            assert grid2.placement_order == grid.placement_order
            assert d2 == descriptors
            assert f2 == breakdown
            assert g2 == goals
            assert seed2 == seed

    def test_serialized_bytes_deterministic(self):
        grid, descriptors, breakdown, goals = evaluated_level(3)
        doc_a = level_document(grid, descriptors, breakdown, goals, 3)
        doc_b = level_document(grid, descriptors, breakdown, goals, 3)
        assert dump_json(doc_a) == dump_json(doc_b)

    def test_total_stored(self):
        grid, descriptors, breakdown, goals = evaluated_level(1)
        doc = level_document(grid, descriptors, breakdown, goals, 1)
        assert doc["fitness"]["total"] == pytest.approx(breakdown.total)

    def test_bad_schema_version(self):
        grid, descriptors, breakdown, goals = evaluated_level(0)
        doc = level_document(grid, descriptors, breakdown, goals, 0)
        doc["schema_version"] = 99
        with pytest.raises(LevelParseError):
            parse_level_document(doc)

    def test_missing_field(self):
        grid, descriptors, breakdown, goals = evaluated_level(0)
        doc = level_document(grid, descriptors, breakdown, goals, 0)
        del doc["rooms"]
        with pytest.raises(LevelParseError):
            parse_level_document(doc)

    def test_cell_label(self):
        assert cell_label(0, 0) == "L1-E1"
        assert cell_label(4, 2) == "L5-E3"


class TestRenderText:
    def test_figure_occupancy_pattern(self, fig_tree):
        grid, pruned = decode(fig_tree)
        resolve_goal(grid, pruned)
        text = render_text(grid)
        lines = text.splitlines()
        filled = sum(1 for line in lines for cell in
                     [line[i:i + 3] for i in range(0, len(line), 3)]
                     if cell.strip())
        assert filled == 21  # 11 rooms + 10 corridors
        assert "S" in text and "G" in text
        assert "k1 " in text or "k1" in text
        assert "|2|" in text

    def test_single_room(self):
        grid, _ = decode(chain(1)[0])
        assert render_text(grid).strip() == "S"

    def test_enemy_digits(self):
        tree, nodes = chain(3, lock_last=True)
        nodes[1].enemies = 4
        grid, pruned = decode(tree)
        resolve_goal(grid, pruned)
        assert "4" in render_text(grid)


class TestRenderSvg:
    def test_well_formed_and_marks_features(self, fig_tree):
        grid, pruned = decode(fig_tree)
        resolve_goal(grid, pruned)
        svg = render_svg(grid)
        assert svg.startswith("<svg") or svg.startswith("<?xml")
        assert "</svg>" in svg
        assert svg.count("<rect") >= 21
        assert "<circle" in svg  # key markers


class TestValidateGrid:
    def test_fresh_level_passes(self):
        for seed in range(5):
            grid, descriptors, breakdown, goals = evaluated_level(seed)
            assert validate_grid(grid, descriptors, breakdown, goals) == []

    def test_enemy_in_goal_detected(self):
        grid, descriptors, breakdown, goals = evaluated_level(0)
        grid.rooms[grid.goal].enemies = 2
        failures = validate_grid(grid, descriptors, breakdown, goals)
        assert any("goal" in f for f in failures)

    def test_stale_fitness_detected(self):
        grid, descriptors, breakdown, goals = evaluated_level(0)
        stale = FitnessBreakdown(breakdown.f_goal + 1.0, breakdown.f_es,
                                 breakdown.f_std)
        failures = validate_grid(grid, descriptors, stale, goals)
        assert any("f_goal" in f for f in failures)

    def test_stale_descriptor_detected(self):
        grid, descriptors, breakdown, goals = evaluated_level(0)
        stale = DescriptorPair(descriptors.leniency,
                               min(1.0, descriptors.exploration + 0.01))
        failures = validate_grid(grid, descriptors=stale, breakdown=breakdown,
                                 goals=goals)
        assert any("exploration" in f for f in failures)

    def test_broken_pairing_detected(self):
        grid, descriptors, breakdown, goals = evaluated_level(0)
        key_pos = next(pos for pos, r in grid.rooms.items()
                       if r.room_type.is_key)
        from dungeon_elites.model import RoomType
        grid.rooms[key_pos].room_type = RoomType.normal()
        failures = validate_grid(grid, descriptors, breakdown, goals)
        assert any("pairing" in f for f in failures)


class TestPresetParsing:
    def test_standard_presets(self):
        goals = parse_preset("20-4-4-30-2")
        assert goals == GenerationGoals(20, 4, 4, 30, 2.0)
        assert parse_preset("30-6-6-50-1.5").linear_coefficient == 1.5

    def test_malformed(self):
        import argparse
        with pytest.raises(argparse.ArgumentTypeError):
            parse_preset("20-4-4")
        with pytest.raises(argparse.ArgumentTypeError):
            parse_preset("a-b-c-d-e")


class TestCli:
    def test_generate_render_validate_pipeline(self, tmp_path):
        out = tmp_path / "levels"
        assert main(["generate", "--preset", "10-2-2-10-1.5", "--seed", "1",
                     "--generations", "2", "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["occupied"] == len(manifest["cells"]) > 0
        level_file = out / manifest["cells"][0]["level_file"]
        assert level_file.exists()

        assert main(["render", str(level_file)]) == 0
        svg_path = tmp_path / "level.svg"
        assert main(["render", str(level_file), "--format", "svg",
                     "--out", str(svg_path)]) == 0
        assert svg_path.read_text().startswith("<")

        assert main(["validate", str(level_file)]) == 0

    def test_generate_same_seed_same_files(self, tmp_path):
        args = ["generate", "--preset", "8-1-1-6-1", "--seed", "5",
                "--generations", "2"]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b")])
        files_a = sorted(os.listdir(tmp_path / "a"))
        assert files_a == sorted(os.listdir(tmp_path / "b"))
        for name in files_a:
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()

    def test_render_malformed_json_fails(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["render", str(bad)]) == 1
        assert main(["validate", str(bad)]) == 1

    def test_validate_rejects_tampered_level(self, tmp_path):
        out = tmp_path / "levels"
        main(["generate", "--preset", "10-2-2-10-1.5", "--seed", "2",
              "--generations", "2", "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        level_file = out / manifest["cells"][0]["level_file"]
        doc = json.loads(level_file.read_text())
        victim = next(r for r in doc["rooms"] if r["is_goal"])
        victim["enemies"] = 3
        level_file.write_text(json.dumps(doc))
        assert main(["validate", str(level_file)]) == 1

    def test_experiment_writes_csvs(self, tmp_path):
        out = tmp_path / "exp"
        assert main(["experiment", "--sets", "8-1-1-6-1", "--runs", "2",
                     "--seed", "0", "--generations", "2", "--workers", "1",
                     "--out", str(out)]) == 0
        names = os.listdir(out)
        assert "8-1-1-6-1_cells.csv" in names
        assert "8-1-1-6-1_occupancy.csv" in names
        assert "8-1-1-6-1_convergence.csv" in names

    def test_generate_unwritable_path_fails(self, tmp_path):
        target = tmp_path / "file"
        target.write_text("x")
        # a file where the directory should go -> makedirs fails
        assert main(["generate", "--preset", "8-1-1-6-1", "--seed", "0",
                     "--generations", "1", "--out", str(target)]) == 1

    def test_missing_goal_flags_rejected(self):
        with pytest.raises(SystemExit):
            main(["generate", "--rooms", "5", "--seed", "0",
                  "--generations", "1", "--out", "/tmp/x"])


class TestExperimentHarness:
    def test_derive_seed_is_stable_and_distinct(self):
        from dungeon_elites.experiment import derive_seed
        seeds = {derive_seed(0, s, r) for s in range(6) for r in range(30)}
        assert len(seeds) == 180
        assert derive_seed(42, 1, 2) == derive_seed(42, 1, 2)

    def test_aggregate_reproducible(self):
        from dungeon_elites.evolution import EvolutionConfig
        from dungeon_elites.experiment import aggregate, run_set
        config = EvolutionConfig(time_budget=None, max_generations=2,
                                 initial_population=5,
                                 intermediate_population=10)
        goals = GenerationGoals(8, 1, 1, 6, 1.0)
        results_a = run_set(goals, 2, config, master_seed=0, workers=1)
        results_b = run_set(goals, 2, config, master_seed=0, workers=1)
        report_a = aggregate(goals.label, results_a)
        report_b = aggregate(goals.label, results_b)
        assert report_a.cells == report_b.cells
        assert report_a.convergence == report_b.convergence
