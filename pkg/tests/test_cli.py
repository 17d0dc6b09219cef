import json

import pytest

from nlkdv.cli import (
    EXIT_CONFIG,
    EXIT_INTEGRATION,
    PRESETS,
    ConfigError,
    ExperimentConfig,
    load_config_file,
    main,
    preset_config,
)

SMALL = ["--domain", "-20", "40", "--h", "0.5", "--t-end", "2", "--rel-tol", "1e-8",
         "--abs-tol", "1e-8"]


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_presets_cover_all_experiments():
    for name in ("fig1", "fig2-kdv", "fig2-bbm", "fig3-kdv", "fig3-bbm", "fig4", "table1"):
        assert name in PRESETS
        for scale in (False, True):
            cfg = ExperimentConfig(**preset_config(name, scale))
            cfg.validate()


def test_simulate_writes_profile_and_manifest(tmp_path, capsys):
    prefix = tmp_path / "run"
    code, out, _ = run_cli(["simulate", *SMALL, "--compare-exact", "--output", str(prefix)], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["results"]["linf_error"] < 1e-2
    lines = (tmp_path / "run_profile.csv").read_text().splitlines()
    assert lines[0] == "x,u,u_exact" and len(lines) == 122
    manifest = json.loads((tmp_path / "run_manifest.json").read_text())
    assert set(manifest) == {"version", "config", "outputs", "results", "stats"}


def test_manifest_reproduces_outputs_bit_for_bit(tmp_path, capsys):
    first = tmp_path / "a" / "run"
    assert run_cli(["simulate", *SMALL, "--output-times", "1", "2", "--output", str(first)],
                   capsys)[0] == 0
    second = tmp_path / "b" / "run"
    assert run_cli(["simulate", "--config", str(tmp_path / "a" / "run_manifest.json"),
                    "--output", str(second)], capsys)[0] == 0
    for suffix in ("profile_000.csv", "profile_001.csv"):
        a = (tmp_path / "a" / f"run_{suffix}").read_bytes()
        b = (tmp_path / "b" / f"run_{suffix}").read_bytes()
        assert a == b


def test_empty_output_times_gives_final_state_only(tmp_path, capsys):
    prefix = tmp_path / "run"
    code, out, _ = run_cli(["simulate", *SMALL, "--output-times", "--output", str(prefix)], capsys)
    assert code == 0
    assert json.loads(out)["results"]["times"] == [2.0]
    assert (tmp_path / "run_profile.csv").exists()


@pytest.mark.parametrize("args,field", [
    (["simulate", "--h", "-0.5"], "h"),
    (["simulate", "--h", "0.7"], "h"),
    (["simulate", "--kappa", "0"], "kappa"),
    (["simulate", "--nonlinearity", "1 + u"], "nonlinearity"),
    (["converge", "--h-list", "0.1", "0.2"], "h_list"),
    (["localize", "--h", "0.1"], "n_list"),
    (["simulate", "--output-times", "50"], "output_times"),
])
def test_invalid_config_names_field(args, field, tmp_path, capsys):
    code, _, err = run_cli([*args, "--output", str(tmp_path / "x")], capsys)
    assert code == EXIT_CONFIG
    assert repr(field) in err


def test_unknown_file_field(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"command": "simulate", "mesh": 0.1}))
    with pytest.raises(ConfigError) as exc:
        load_config_file(path)
    assert "mesh" in str(exc.value)


def test_flags_override_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"command": "simulate", "h": 0.25, "domain": [-20, 40],
                                "t_end": 1.0, "tolerances": {"rel_tol": 1e-6, "abs_tol": 1e-6}}))
    prefix = tmp_path / "run"
    assert run_cli(["simulate", "--config", str(path), "--h", "0.5", "--output", str(prefix)],
                   capsys)[0] == 0
    cfg = json.loads((tmp_path / "run_manifest.json").read_text())["config"]
    assert cfg["h"] == 0.5 and cfg["rel_tol"] == 1e-6


def test_blowup_exit_code(tmp_path, capsys):
    code, _, err = run_cli(["simulate", "--family", "rosenau-bbm-kdv", "--domain", "-20", "20",
                            "--h", "0.5", "--t-end", "5", "--nonlinearity", "u + 20*u^4",
                            "--output", str(tmp_path / "x")], capsys)
    assert code == EXIT_INTEGRATION
    assert "integration failed" in err


def test_kernel_check(tmp_path, capsys):
    prefix = tmp_path / "k"
    code, out, _ = run_cli(["kernel-check", "--kernel", "gaussian", "--output", str(prefix)], capsys)
    assert code == 0
    res = json.loads((tmp_path / "k_manifest.json").read_text())["results"]
    assert res["mu_total_variation"] == pytest.approx(1.5100130177924674, rel=1e-5)
    assert all(v <= 2 * res["mu_total_variation"] for v in res["d2_weight_l1h"].values())
    assert (tmp_path / "k_kernel.csv").read_text().startswith("quantity,value")


def test_converge_and_localize_small(tmp_path, capsys):
    prefix = tmp_path / "c"
    code, out, _ = run_cli(["converge", "--domain", "-20", "40", "--h-list", "0.5", "0.25",
                            "--t-end", "1", "--output", str(prefix)], capsys)
    assert code == 0
    assert len(json.loads(out)["results"]["rates"]) == 1
    assert (tmp_path / "c_convergence.csv").read_text().startswith("h,m,error,rate")
    prefix = tmp_path / "l"
    code, out, _ = run_cli(["localize", "--h", "0.5", "--n-list", "40", "80", "--t-end", "1",
                            "--output", str(prefix)], capsys)
    assert code == 0
    assert (tmp_path / "l_localization.csv").read_text().startswith("N,halfwidth,error")
