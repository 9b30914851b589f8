"""CLI: config parsing, outputs, exit codes, manifest round trip."""

import os

import numpy as np
import yaml

from enslat.cli import main, run, trajectory_csv, validate_config

INV = 0.70710678118654746


def qubit_config(tmp_path, method="chain", dist=None, depths=64, samples=4000,
                 n_steps=40, extra=None):
    cfg = {
        "unit": "E",
        "system": {
            "h0": [[0, 0], [0, 1]],
            "couplings": [{"type": "linear", "matrix": [[0, 0], [0, 1]]}],
            "distributions": [dist or {"family": "gaussian", "width": 1.0}],
        },
        "initial": {"kind": "localized", "amplitudes": [[INV, 0], [INV, 0]]},
        "time": {"t_max": 4.0, "n_steps": n_steps},
        "method": method,
        "numeric": {"tol": 1e-12, "depths": depths, "seed": 9, "samples": samples,
                    "quad_order": 40},
        "output": {"directory": str(tmp_path / "out")},
    }
    if extra:
        cfg.update(extra)
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def test_chain_run_outputs(tmp_path):
    path = qubit_config(tmp_path)
    result = run(str(path))
    assert result.exit_code == 0
    out = tmp_path / "out"
    assert (out / "trajectory_chain.csv").exists()
    assert (out / "leakage_chain.csv").exists()
    assert (out / "manifest.yaml").exists()
    header = (out / "trajectory_chain.csv").read_text().splitlines()[0]
    assert header == ("t,re_rho_0_0,im_rho_0_0,re_rho_0_1,im_rho_0_1,"
                      "re_rho_1_1,im_rho_1_1")
    lines = (out / "leakage_chain.csv").read_text().splitlines()
    assert lines[0] == "t,leakage"
    assert len(lines) == 41


def test_mc_run_has_sem_columns(tmp_path):
    path = qubit_config(tmp_path, method="mc", samples=500, n_steps=6)
    result = run(str(path))
    assert result.exit_code == 0
    header = (tmp_path / "out" / "trajectory_mc.csv").read_text().splitlines()[0]
    assert header.endswith("sem_rho_0_0,sem_rho_0_1,sem_rho_1_1")


def test_compare_ok_and_manifest(tmp_path):
    path = qubit_config(tmp_path, method="compare", samples=4000, n_steps=20,
                        extra={"compare": {"quad_tol": 1e-8, "analytic_tol": 1e-9}})
    result = run(str(path))
    assert result.exit_code == 0
    man = yaml.safe_load((tmp_path / "out" / "manifest.yaml").read_text())
    pairs = {row["pair"]: row for row in man["result"]["compare"]}
    assert pairs["chain_vs_quad"]["pass"] and pairs["chain_vs_analytic"]["pass"]
    assert man["result"]["accepted_depths"] == [64]
    assert man["config"]["numeric"]["depths"] == [64]


def test_compare_tolerance_exceeded_exit_4(tmp_path):
    path = qubit_config(tmp_path, method="compare", samples=200, n_steps=10,
                        extra={"compare": {"quad_tol": 1e-30, "analytic_tol": 1e-30}})
    assert main(["--config", str(path)]) == 4


def test_manifest_roundtrip_bitwise(tmp_path):
    path = qubit_config(tmp_path, method="chain", depths="auto", n_steps=25)
    run(str(path))
    man_path = tmp_path / "out" / "manifest.yaml"
    rt_dir = tmp_path / "rt"
    result = run(str(man_path), out_dir=str(rt_dir))
    assert result.exit_code == 0
    a = (tmp_path / "out" / "trajectory_chain.csv").read_bytes()
    b = (rt_dir / "trajectory_chain.csv").read_bytes()
    assert a == b
    # the manifest pins the auto-resolved depth
    man = yaml.safe_load(man_path.read_text())
    assert isinstance(man["config"]["numeric"]["depths"], list)


def test_method_and_seed_override(tmp_path):
    path = qubit_config(tmp_path, method="chain", samples=300, n_steps=6)
    rc = main(["--config", str(path), "--method", "mc", "--seed", "123",
               "--out", str(tmp_path / "ov")])
    assert rc == 0
    man = yaml.safe_load((tmp_path / "ov" / "manifest.yaml").read_text())
    assert man["result"]["method"] == "mc"
    assert man["config"]["numeric"]["seed"] == 123


def test_exit_code_2_on_bad_config(tmp_path):
    p = tmp_path / "broken.yaml"
    p.write_text(yaml.safe_dump({"system": {"h0": [[0, 0], [0, 1]]}}))
    assert main(["--config", str(p)]) == 2
    p2 = tmp_path / "nonhermitian.yaml"
    cfgpath = qubit_config(tmp_path)
    cfg = yaml.safe_load(cfgpath.read_text())
    cfg["system"]["h0"] = [[0, 1], [0, 1]]
    p2.write_text(yaml.safe_dump(cfg))
    assert main(["--config", str(p2)]) == 2


def test_exit_code_3_on_leakage(tmp_path):
    # depth 4 cannot carry the horizon: numeric failure, not a config error
    path = qubit_config(tmp_path, dist={"family": "semicircle", "width": 1.0},
                        depths=4, n_steps=30)
    assert main(["--config", str(path)]) == 3


def test_validate_reports(tmp_path, capsys):
    ok = qubit_config(tmp_path)
    assert main(["--config", str(ok), "--validate"]) == 0
    assert capsys.readouterr().out.strip() == "OK"

    bad = qubit_config(tmp_path, dist={"family": "cauchy", "width": 1.0})
    assert main(["--config", str(bad), "--validate"]) == 2
    out = capsys.readouterr().out
    assert "moments undefined; set cutoff" in out

    cfg = yaml.safe_load(ok.read_text())
    cfg["system"]["h0"] = [[0, [0.5, 0]], [0, 1]]
    p = tmp_path / "nh.yaml"
    p.write_text(yaml.safe_dump(cfg))
    failures = validate_config(str(p))
    assert failures and "Hermitian" in failures[0]


def test_validate_cut_cauchy_passes(tmp_path):
    path = qubit_config(tmp_path, dist={"family": "cauchy", "width": 1.0,
                                        "cutoff": [-30.0, 30.0]})
    assert validate_config(str(path)) == []


def test_tabulated_initial_state(tmp_path):
    # c(lam) = (lam, sqrt(1 - lam^2)) tabulated on a fine grid
    lam = np.linspace(-1, 1, 801)
    data = np.column_stack([lam, lam, np.zeros_like(lam),
                            np.sqrt(1 - lam ** 2), np.zeros_like(lam)])
    np.savetxt(tmp_path / "c.txt", data)
    path = qubit_config(tmp_path, dist={"family": "semicircle", "width": 1.0},
                        depths=48, n_steps=10)
    cfg = yaml.safe_load(path.read_text())
    cfg["initial"] = {"kind": "tabulated", "file": "c.txt"}
    path.write_text(yaml.safe_dump(cfg))
    result = run(str(path))
    assert result.exit_code == 0
    text = (tmp_path / "out" / "trajectory_chain.csv").read_text().splitlines()
    row0 = [float(tok) for tok in text[1].split(",")]
    # rho_00(0) = E[lam^2] = 1/4 for the unit semicircle
    assert abs(row0[1] - 0.25) < 1e-4


def test_trajectory_csv_precision():
    from enslat import DensityTrajectory
    rho = np.array([[[1 / 3, 1j / 7], [-1j / 7, 2 / 3]]])
    text = trajectory_csv(DensityTrajectory(np.array([0.0]), rho))
    row = text.splitlines()[1].split(",")
    assert row[1] == f"{1 / 3:.17g}"
    assert row[4] == f"{1 / 7:.17g}"


def test_spectral_initial_runs(tmp_path):
    path = qubit_config(tmp_path, depths=32, n_steps=8)
    cfg = yaml.safe_load(path.read_text())
    cfg["initial"] = {"kind": "spectral",
                      "amplitudes": [[INV, 0], [INV, 0]],
                      "distribution": {"family": "gaussian", "width": 0.5}}
    path.write_text(yaml.safe_dump(cfg))
    result = run(str(path))
    assert result.exit_code == 0


def test_output_written_atomically(tmp_path):
    # no temp droppings left next to the outputs
    path = qubit_config(tmp_path, n_steps=6)
    run(str(path))
    leftovers = [f for f in os.listdir(tmp_path / "out") if f.endswith(".tmp")]
    assert leftovers == []


def test_tabulated_distribution_from_file(tmp_path):
    # two-column text (lambda, density); run through the chain route
    lam = np.linspace(-3.0, 3.0, 601)
    np.savetxt(tmp_path / "dist.txt", np.column_stack([lam, np.exp(-lam ** 2)]))
    path = qubit_config(tmp_path, dist={"family": "tabulated", "file": "dist.txt"},
                        depths=48, n_steps=8)
    result = run(str(path))
    assert result.exit_code == 0
    man = yaml.safe_load((tmp_path / "out" / "manifest.yaml").read_text())
    assert man["config"]["system"]["distributions"][0]["file"] == "dist.txt"


def test_threads_flag_recorded(tmp_path):
    path = qubit_config(tmp_path, n_steps=6)
    rc = main(["--config", str(path), "--threads", "4"])
    assert rc == 0
    man = yaml.safe_load((tmp_path / "out" / "manifest.yaml").read_text())
    assert man["result"]["threads_requested"] == 4


def test_analytic_route_rejects_cut_distribution(tmp_path):
    path = qubit_config(tmp_path, method="analytic",
                        dist={"family": "cauchy", "width": 1.0, "cutoff": [-30, 30]})
    assert main(["--config", str(path)]) == 2


def test_compare_skips_analytic_for_cut_distribution(tmp_path):
    path = qubit_config(tmp_path, method="compare", samples=1000, n_steps=8,
                        dist={"family": "cauchy", "width": 1.0,
                              "cutoff": [-30.0, 30.0]},
                        depths=256)
    cfg = yaml.safe_load(path.read_text())
    cfg["numeric"]["quad_order"] = 128     # phases span +-120 rad at t_max
    path.write_text(yaml.safe_dump(cfg))
    result = run(str(path))
    assert result.exit_code == 0
    pairs = [r["pair"] for r in result.manifest["result"]["compare"]]
    assert "chain_vs_quad" in pairs and "chain_vs_analytic" not in pairs
