import json
import math
import os
import tempfile

import pytest

import te_sim


def script():
    return {
        "id": "smoke",
        "scores": [
            {"prompt": "Q:", "continuation": "yes", "mass": 0.30},
            {"prompt": "Q:", "continuation": "no", "mass": 0.10},
        ],
    }


def test_scored_choice_renormalizes():
    out = te_sim.evaluate_choice(script(), "Q:", ["yes", "no"])
    assert out["probabilities"] == pytest.approx([0.75, 0.25], abs=1e-12)
    assert out["validity_rate"] == pytest.approx(0.40, abs=1e-12)
    assert out["mode"] == "scored"


def test_parse_estimate():
    assert te_sim.parse_estimate("1,064]") == 1064
    assert te_sim.parse_estimate("1064") is None


def test_stats_match_python():
    xs = [3.0, 1.0, 4.0, 1.0, 5.0]
    assert te_sim.mean(xs) == pytest.approx(sum(xs) / len(xs))
    var = sum((x - 2.8) ** 2 for x in xs) / (len(xs) - 1)
    assert te_sim.sem(xs) == pytest.approx(math.sqrt(var / len(xs)))
    assert te_sim.median_iqr(xs)["median"] == 3.0


def test_errors_carry_codes():
    with pytest.raises(te_sim.TeError) as info:
        te_sim.pearson([1.0], [1.0, 2.0])
    assert info.value.code == "LengthMismatch"


def test_pairing_size():
    pairs = te_sim.ug_pairing(seed=1)
    assert len(pairs) == 10000
    assert pairs == te_sim.ug_pairing(seed=1)


def test_validate_then_run():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = {"experiment": "ultimatum", "seed": 5, "limit": 3, "output_dir": tmp}
        res = te_sim.validate(cfg)
        assert res["exit_code"] == 0
        assert te_sim.validate_output_violations(os.path.join(tmp, "validate")) == []
        res = te_sim.run(cfg)
        assert res["exit_code"] == 0 and res["items"] == 33
        with open(os.path.join(tmp, "summary.csv")) as f:
            assert len(f.read().strip().splitlines()) == 12
        with open(os.path.join(tmp, "manifest.json")) as f:
            assert json.load(f)["status"] == "complete"
