import json
from pathlib import Path


import pytest

from nematic_kit.cli import main
from nematic_kit.coefficients import validate_frank, FrankCoefficients

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def base_coefficients(**overrides):
    section = {
        "k1": 1.0, "k2": 1.0, "k3": 1.0, "alpha": 1.0,
        "mu_s": 1.0, "mu_V": 0.0, "mu_D": 0.0, "mu_P": 0.0,
        "mu_L": 0.0, "mu_0": 0.0, "mu_b": 0.0, "gamma": 1.0, "rho": 1.0,
    }
    section.update(overrides)
    return section


class TestValidate:
    def test_isotropic_defaults_pass(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"coefficients": base_coefficients()})
        assert main(["validate-coeffs", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "[pass] frank" in out

    def test_zero_gamma_fails_naming_clause(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"coefficients": base_coefficients(gamma=0.0)})
        assert main(["validate-coeffs", "--config", cfg]) == 1
        out = capsys.readouterr().out
        assert "gamma_positive" in out

    def test_double_disjunct_failure_named(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"coefficients": base_coefficients(k1=10.0)})
        assert main(["validate-coeffs", "--config", cfg]) == 1
        out = capsys.readouterr().out
        assert "anisotropy_disjunction" in out

    def test_json_report_written(self, tmp_path):
        cfg = write_config(tmp_path, {"coefficients": base_coefficients()})
        report = tmp_path / "report.json"
        assert main(["validate-coeffs", "--config", cfg, "--json", str(report)]) == 0
        payload = json.loads(report.read_text())
        assert payload["passed"] is True

    def test_parse_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["validate-coeffs", "--config", str(path)]) == 1
        assert "line" in capsys.readouterr().err


class TestEllipticityScan:
    def test_pass_boundary_matches_clause_evaluation(self, tmp_path):
        config = {
            "scan": {
                "k1": {"start": 0.52, "stop": 11.98, "count": 12},
                "k2": 1.0,
                "k3": 1.0,
                "alpha_fraction": 0.5,
                "sampler": {"grid_theta": 48, "grid_phi": 16,
                            "random_samples": 1000, "seed": 42},
            }
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "scan.csv"
        assert main(["ellipticity-scan", "--config", cfg, "--output", str(out),
                     "--no-plots"]) == 0
        rows = out.read_text().strip().split("\n")[1:]
        assert len(rows) == 12
        for row in rows:
            vals = row.split(",")
            k1 = float(vals[0])
            passed = vals[-1] == "1"
            c = FrankCoefficients(k1=k1, k2=1.0, k3=1.0, alpha=0.5)
            assert passed == validate_frank(c).passed

    def test_plot_rendered(self, tmp_path):
        config = {
            "scan": {
                "k1": {"start": 0.6, "stop": 2.0, "count": 3},
                "sampler": {"grid_theta": 16, "grid_phi": 8, "random_samples": 100},
            }
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "scan.csv"
        assert main(["ellipticity-scan", "--config", cfg, "--output", str(out)]) == 0
        assert (tmp_path / "scan.png").exists()

    def test_determinism(self, tmp_path):
        cfg = str(CONFIG_DIR / "isotropic.json")
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(["ellipticity-scan", "--config", cfg, "--output", str(out1),
                     "--no-plots"]) == 0
        assert main(["ellipticity-scan", "--config", cfg, "--output", str(out2),
                     "--no-plots"]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestLsCheck:
    def test_isotropic_all_rows_pass(self, tmp_path):
        config = {
            "coefficients": base_coefficients(),
            "ls": {"n_lambda": 4, "n_xi": 4, "n_d": 3, "seed": 1},
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "ls.csv"
        assert main(["ls-check", "--config", cfg, "--output", str(out),
                     "--no-plots"]) == 0
        lines = out.read_text().strip().split("\n")
        header = lines[0].split(",")
        assert header == ["re_lambda", "im_lambda", "xi1", "xi2", "xi3",
                          "det_modulus", "min_sv", "stable_dim", "pass"]
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 4 * 4 * 3 * 2  # director + coupled per point
        assert {r[7] for r in rows} == {"3", "6"}
        assert all(r[8] == "1" for r in rows)

    def test_inadmissible_coefficients_rejected(self, tmp_path, capsys):
        config = {"coefficients": base_coefficients(k1=10.0),
                  "ls": {"n_lambda": 2, "n_xi": 2, "n_d": 2}}
        cfg = write_config(tmp_path, config)
        assert main(["ls-check", "--config", cfg, "--output",
                     str(tmp_path / "x.csv"), "--no-plots"]) == 1
        assert "admissibility" in capsys.readouterr().err


class TestSimulate:
    def test_t_end_zero_header_only(self, tmp_path):
        config = json.loads((CONFIG_DIR / "simulation_small.json").read_text())
        config["time"]["t_end"] = 0.0
        cfg = write_config(tmp_path, config)
        out_dir = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--output-dir", str(out_dir),
                     "--no-plots"]) == 0
        csv = (out_dir / "diagnostics.csv").read_text().strip().split("\n")
        assert csv == ["t,energy,kinetic,norm_drift,phi_residual,div_u_max"]
        assert (out_dir / "d_000000.nlck").exists()
        assert (out_dir / "u_000000.nlck").exists()

    def test_short_run_artifacts(self, tmp_path):
        cfg = str(CONFIG_DIR / "simulation_small.json")
        out_dir = tmp_path / "run"
        assert main(["simulate", "--config", cfg, "--output-dir", str(out_dir)]) == 0
        lines = (out_dir / "diagnostics.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 4  # cadence 5, 20 steps
        assert (out_dir / "diagnostics.png").exists()
        assert (out_dir / "d_000020.nlck").exists()

    def test_incompatible_initial_data_exit_one(self, tmp_path, capsys):
        config = json.loads((CONFIG_DIR / "simulation_small.json").read_text())
        config["grid"]["wall_axis"] = 2
        config["bc"] = {"mode": "slab-nonlinear"}
        config["simulation"]["initial"] = {"type": "smooth_director", "epsilon": 0.3}
        cfg = write_config(tmp_path, config)
        assert main(["simulate", "--config", cfg, "--output-dir",
                     str(tmp_path / "o"), "--no-plots"]) == 1
        assert "compatibility" in capsys.readouterr().err

    def test_slab_tangential_twist_runs(self, tmp_path):
        config = json.loads((CONFIG_DIR / "simulation_small.json").read_text())
        config["grid"]["wall_axis"] = 2
        config["bc"] = {"mode": "slab-nonlinear"}
        config["time"] = {"dt": 0.002, "t_end": 0.01, "cadence": 5}
        config["simulation"]["initial"] = {"type": "tangential_twist", "amplitude": 0.2}
        config["simulation"]["compatibility_tol"] = 1e-1
        cfg = write_config(tmp_path, config)
        out_dir = tmp_path / "slab"
        assert main(["simulate", "--config", cfg, "--output-dir", str(out_dir),
                     "--no-plots"]) == 0


class TestConfigRoundTrip:
    @pytest.mark.parametrize("name", ["isotropic.json", "simulation_small.json"])
    def test_serialize_parse_is_key_equivalent(self, name):
        raw = (CONFIG_DIR / name).read_text()
        parsed = json.loads(raw)
        assert json.loads(json.dumps(parsed)) == parsed


class TestPointCommands:
    def test_symbol_eig_table(self, capsys):
        code = main(["symbol-eig", "--k1", "2.0", "--k2", "1.0", "--k3", "1.0",
                     "--alpha", "0.5", "--xi", "1,0,0", "--d", "0,0,1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "closed form" in out
        assert "min rayleigh = 2" in out

    def test_symbol_eig_lost_ellipticity_exit_code(self, capsys):
        code = main(["symbol-eig", "--k1", "10.0", "--alpha", "1.0",
                     "--xi", "0.5,0,0.866025403784", "--d", "0,0,1"])
        assert code == 1

    def test_energy_eval(self, capsys):
        code = main(["energy-eval", "--k1", "2", "--k2", "1", "--k3", "1",
                     "--alpha", "1", "--d", "0,0,1",
                     "--grad", "1,0,0,0,0,0,0,0,0"])
        assert code == 0
        out = capsys.readouterr().out
        assert "total        = 2" in out
        assert "psi_tilde    = 2" in out
