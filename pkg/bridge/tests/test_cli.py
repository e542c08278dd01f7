import json

from torch_bridge.cli import main


def test_extract_then_apply_plan(tiny_encoder_dir, text_dataset, tmp_path, capsys):
    ghs_path = tmp_path / "s.ghs"
    code = main(
        [
            "extract",
            "--model", tiny_encoder_dir,
            "--dataset", text_dataset,
            "--out", str(ghs_path),
            "--max-examples", "12",
        ]
    )
    assert code == 0
    assert ghs_path.read_bytes()[:4] == b"GHS1"

    plan_path = tmp_path / "plan.json"
    plan_path.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "ranks": [1, 1, 1, 1],
                "alpha": [32.0] * 4,
                "alpha_ratio": 32.0,
                "total_trainable_params": 4 * 4 * 2 * 32,
            }
        )
    )
    config_path = tmp_path / "config.json"
    code = main(
        [
            "apply-plan",
            "--plan", str(plan_path),
            "--model-dir", tiny_encoder_dir,
            "--out", str(config_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("block\trank\talpha\tparams")
    config = json.loads(config_path.read_text())
    assert config["total_trainable_params"] == 1024
    assert len(config["targets"]) == 16


def test_apply_plan_needs_target_info(tmp_path, capsys):
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "ranks": [1],
                "alpha": [32.0],
                "alpha_ratio": 32.0,
                "total_trainable_params": 512,
            }
        )
    )
    code = main(["apply-plan", "--plan", str(plan_path)])
    assert code == 1
    assert "--model-dir" in capsys.readouterr().err
