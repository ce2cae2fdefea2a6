from pathlib import Path

import pytest
import yaml

from tracksim.errors import ScenarioError
from tracksim.scenario import load_scenario, scenario_from_dict

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def minimal_doc():
    return {
        "workspace": {"xmin": -10, "ymin": -10, "xmax": 10, "ymax": 10},
        "dt": 0.1,
        "u_max": 1.0,
        "seed": 1,
        "robots": [{"id": 1, "start": [0, 0], "capacity": 1}],
        "targets": [{"id": 1, "start": [1, 1], "velocity": [0.1, 0]}],
        "zones": [
            {
                "id": 1,
                "kind": "sensing",
                "center": [3, 3],
                "radius": 1.0,
                "p_max": 0.5,
                "attack_duration": 10,
            }
        ],
    }


class TestLoader:
    def test_minimal_document_with_defaults(self):
        s = scenario_from_dict(minimal_doc())
        assert s.cadence_action == 2 and s.cadence_task == 10
        assert s.sensor.sigma0 == 0.1 and s.sensor.max_range == 5.0
        assert s.weights.as_tuple() == (1.0, 1.0, 1.0, 1.0)
        assert s.history_window == 5
        assert s.safety_margin == 0.2

    def test_shipped_scenarios_load(self):
        for name in ("ablation.yaml", "demo.yaml"):
            s = load_scenario(SCENARIO_DIR / name)
            assert s.robots and s.targets

    def test_ablation_scenario_matches_comparison_setup(self):
        s = load_scenario(SCENARIO_DIR / "ablation.yaml")
        assert len(s.robots) == 2
        assert len(s.targets) == 4
        kinds = sorted(z.kind for z in s.zones)
        assert kinds == ["communication", "sensing", "sensing"]
        vx = [t.velocity[0] for t in s.targets]
        assert all(v > 0 for v in vx) and len(set(vx)) == len(vx)
        assert s.mean_capacity == 2.0

    def test_unknown_top_level_field_rejected(self):
        doc = minimal_doc()
        doc["gravity"] = 9.8
        with pytest.raises(ScenarioError, match="gravity"):
            scenario_from_dict(doc)

    def test_unknown_nested_field_rejected(self):
        doc = minimal_doc()
        doc["robots"][0]["color"] = "red"
        with pytest.raises(ScenarioError, match="color"):
            scenario_from_dict(doc)

    def test_missing_required_field(self):
        doc = minimal_doc()
        del doc["u_max"]
        with pytest.raises(ScenarioError, match="u_max"):
            scenario_from_dict(doc)

    def test_duplicate_ids_rejected(self):
        doc = minimal_doc()
        doc["robots"].append({"id": 1, "start": [1, 0], "capacity": 1})
        with pytest.raises(ScenarioError, match="duplicate"):
            scenario_from_dict(doc)

    def test_start_outside_workspace_rejected(self):
        doc = minimal_doc()
        doc["robots"][0]["start"] = [99, 0]
        with pytest.raises(ScenarioError, match="outside"):
            scenario_from_dict(doc)

    def test_known_zones_must_exist(self):
        doc = minimal_doc()
        doc["robots"][0]["known_zones"] = [9]
        with pytest.raises(ScenarioError, match="known_zones"):
            scenario_from_dict(doc)

    def test_known_zones_default_to_all(self):
        s = scenario_from_dict(minimal_doc())
        assert s.robots[0].known_zones == frozenset({1})

    def test_cadence_ranges_enforced(self):
        doc = minimal_doc()
        doc["cadence_action"] = 5
        with pytest.raises(ScenarioError, match="cadence_action"):
            scenario_from_dict(doc)
        doc = minimal_doc()
        doc["cadence_task"] = 4
        with pytest.raises(ScenarioError, match="cadence_task"):
            scenario_from_dict(doc)

    def test_invalid_zone_parameters(self):
        doc = minimal_doc()
        doc["zones"][0]["p_max"] = 1.2
        with pytest.raises(ScenarioError):
            scenario_from_dict(doc)

    def test_with_seed_override(self):
        s = scenario_from_dict(minimal_doc())
        assert s.with_seed(99).world.rng_seed == 99
        assert s.world.rng_seed == 1

    def test_yaml_syntax_error_becomes_scenario_error(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("workspace: [unclosed")
        with pytest.raises(ScenarioError):
            load_scenario(bad)

    def test_roundtrip_preserves_document(self, tmp_path):
        doc = minimal_doc()
        path = tmp_path / "s.yaml"
        path.write_text(yaml.safe_dump(doc))
        s = load_scenario(path)
        assert s.world.dt == 0.1
        assert s.robots[0].capacity == 1
