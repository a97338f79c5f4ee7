import json

import pytest

from chainlearn.cli import main
from chainlearn.config import DatasetSpec, ExperimentSpec, load_spec, save_spec, spec_from_dict
from chainlearn.sgd import TrainConfig


def small_spec(**over):
    defaults = dict(
        name="baseline",
        number_of_nodes=10,
        total_iterations=3,
        dataset=DatasetSpec(features=3, shard_size=60, validation_size=300),
        train=TrainConfig(eta0=0.008, eta_decay=0.04, weight_decay=1e-4, batch_size=32),
        seed=4,
    )
    defaults.update(over)
    return ExperimentSpec(**defaults)


def test_spec_roundtrip(tmp_path):
    spec = small_spec()
    path = tmp_path / "cfg.json"
    save_spec(path, spec)
    loaded = load_spec(path)
    assert loaded == spec


def test_spec_derived_table_values():
    spec = ExperimentSpec()  # reference defaults
    assert spec.number_of_nodes == 100
    assert spec.privacy_budget_epsilon == 2.0
    assert spec.delta == 1e-5
    assert spec.number_of_noisers == 2
    assert spec.number_of_verifiers == 3
    assert spec.number_of_aggregators == 3
    assert spec.multikrum_sample_R == 70
    assert spec.updates_per_block_u == 35
    assert spec.adversary_upper_bound_f == 33
    assert spec.initial_stake == 10
    assert spec.stake_reward == 5


def test_spec_unknown_field_rejected():
    with pytest.raises(ValueError, match="unknown config fields"):
        spec_from_dict({"number_of_peers": 10})


def test_spec_bad_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"name": "x",,}')
    with pytest.raises(ValueError, match="line 1"):
        load_spec(path)


def test_cli_run_and_verify_chain(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    save_spec(cfg, small_spec())
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "metrics.csv").exists()
    assert (out / "chain.bin").exists()
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config"]["number_of_nodes"] == 10
    assert meta["insecure_backend"] is True
    header = (out / "metrics.csv").read_text().splitlines()[0]
    assert header.startswith("iteration,sim_time,validation_error")

    assert main(["verify-chain", str(out / "chain.bin")]) == 0
    ok_msg = capsys.readouterr().out
    assert "OK" in ok_msg

    data = bytearray((out / "chain.bin").read_bytes())
    data[-3] ^= 0x55
    bad = tmp_path / "bad.bin"
    bad.write_bytes(bytes(data))
    assert main(["verify-chain", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "block" in err


def test_cli_run_deterministic(tmp_path):
    cfg = tmp_path / "cfg.json"
    save_spec(cfg, small_spec())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--seed", "7", "--out", str(out1)]) == 0
    assert main(["run", "--config", str(cfg), "--seed", "7", "--out", str(out2)]) == 0
    for name in ("metrics.csv", "chain.bin"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cli_bad_config_is_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"no_such_field": 1}')
    assert main(["run", "--config", str(cfg)]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_collusion_prob(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code = main([
        "collusion-prob", "--trials", "500", "--noisers", "3",
        "--stake-fractions", "0.0", "0.5", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "noisers,malicious_stake_fraction,violation_probability"
    assert len(lines) == 3


def test_cli_krum_bench(capsys):
    assert main(["krum-bench", "--cases", "50"]) == 0
    out = capsys.readouterr().out
    assert "oracle agreement: 50/50" in out


def test_cli_invert(tmp_path, capsys):
    out = tmp_path / "inv"
    assert main(["invert", "--seed", "3", "--out", str(out)]) == 0
    assert (out / "similarity.csv").exists()
    pgms = sorted(out.glob("*.pgm"))
    assert len(pgms) == 4
    assert pgms[0].read_bytes().startswith(b"P5\n")
