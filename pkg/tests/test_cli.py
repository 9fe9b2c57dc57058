import csv
import json

import numpy as np
import pytest

from mobsir import io
from mobsir.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main


def scenario(tmp_path, name="scenario.json", **over):
    doc = {
        "network": {"synthetic": {"n": 8, "rng_seed": 5}},
        "params": {"beta": 0.5, "mu": 0.2, "alpha": 0.5},
        "seed": {"strategy": "random", "rng_seed": 1},
        "integrator": {"scheme": "rk4", "dt": 0.2, "horizon": 120},
    }
    doc.update(over)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSimulate:
    def test_outputs_reload(self, tmp_path):
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(scenario(tmp_path)), "--out", str(out)]) == EXIT_OK
        traj = io.read_trajectory(out / "trajectory.csv")
        assert traj.S.shape == (601, 8)
        agg = read_csv(out / "aggregate.csv")
        assert len(agg) == 601
        metrics = json.loads((out / "metrics.json").read_text())
        assert 0 < metrics["attack_rate"] <= 1
        np.testing.assert_allclose(traj.R[-1].sum() / traj.populations.sum(), metrics["attack_rate"], rtol=1e-10)

    def test_classical_reference(self, tmp_path, capsys):
        cfg = scenario(tmp_path, params={"beta": 0.5, "mu": 0.2, "alpha": 0.0})
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out), "--classical-reference"]) == EXIT_OK
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["classical_max_abs_diff"] <= 1e-9
        assert (out / "classical_trajectory.csv").exists()
        assert "classical" in capsys.readouterr().out

    def test_missing_config(self, tmp_path, capsys):
        missing = tmp_path / "nowhere.json"
        assert main(["simulate", "--config", str(missing), "--out", str(tmp_path)]) == EXIT_INPUT
        assert "nowhere.json" in capsys.readouterr().err

    def test_bad_config(self, tmp_path, capsys):
        cfg = scenario(tmp_path, params={"beta": 2.0, "mu": 0.2})
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_INPUT
        assert "beta" in capsys.readouterr().err

    def test_byte_identical(self, tmp_path):
        cfg = scenario(tmp_path)
        for d in ("a", "b"):
            assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / d)]) == EXIT_OK
        for name in ("trajectory.csv", "aggregate.csv", "metrics.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_stiffness_exit_code(self, tmp_path, capsys):
        cfg = scenario(tmp_path, params={"beta": 1.0, "mu": 0.1, "alpha": 1.0},
                       seed={"strategy": "strongest", "fraction": 0.3},
                       integrator={"scheme": "euler", "dt": 4.0, "horizon": 80})
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_NUMERIC
        assert "dt" in capsys.readouterr().err

    def test_outputs_subset(self, tmp_path):
        cfg = scenario(tmp_path, outputs=["metrics.json"])
        out = tmp_path / "o"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == ["metrics.json"]


class TestSweep:
    def test_alpha_list(self, tmp_path):
        out = tmp_path / "o"
        alphas = ",".join(f"{a / 10:g}" for a in range(10, 0, -1))
        assert main(["sweep", "--config", str(scenario(tmp_path)), "--alphas", alphas,
                     "--percentiles", "0", "--out", str(out)]) == EXIT_OK
        res = io.read_sweep(out / "sweep.csv")
        peaks = res.table("peak_infected_fraction")[:, 0]
        assert np.all(np.diff(peaks) <= 0)
        peak_days = read_csv(out / "peak_days.csv")
        assert len(peak_days) == 10 and list(peak_days[0]) == ["alpha", "0"]

    def test_percentile_list(self, tmp_path, capsys):
        out = tmp_path / "o"
        cfg = scenario(tmp_path, network={"synthetic": {"n": 20, "rng_seed": 5}})
        assert main(["sweep", "--config", str(cfg), "--alphas", "0.5",
                     "--percentiles", "0,10,20,30", "--out", str(out)]) == EXIT_OK
        attack = io.read_sweep(out / "sweep.csv").table("attack_rate")[0]
        assert np.all(np.diff(attack) <= 0)
        assert capsys.readouterr().out.count("alpha=0.5") == 4

    def test_one_by_one_matches_simulate(self, tmp_path):
        cfg = scenario(tmp_path, quarantine={"percentile": 25})
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "s")]) == EXIT_OK
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "w")]) == EXIT_OK
        sim = json.loads((tmp_path / "s" / "metrics.json").read_text())
        cell = io.read_sweep(tmp_path / "w" / "sweep.csv")[0, 0]
        for key in ("peak_infected_fraction", "peak_day", "attack_rate"):
            assert getattr(cell, key) == pytest.approx(sim[key], rel=1e-11)

    def test_bad_list(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["sweep", "--config", str(scenario(tmp_path)), "--alphas", "a,b", "--out", str(tmp_path)])


class TestAnalytic:
    def test_r0(self, capsys):
        assert main(["r0", "--beta", "0.5", "--mu", "0.2", "--alpha", "0"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "2.5"

    def test_r0_hand_value(self, capsys):
        assert main(["r0", "--beta", "0.5", "--mu", "0.2", "--alpha", "1", "--k", "4", "--n", "0.1"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "3.40909091"

    def test_r0_zero_mu(self, capsys):
        assert main(["r0", "--beta", "0.5", "--mu", "0"]) == EXIT_INPUT
        assert "mu" in capsys.readouterr().err

    def test_final_size(self, capsys):
        assert main(["final-size", "--r0", "2.0"]) == EXIT_OK
        assert capsys.readouterr().out.strip().startswith("0.796812")

    def test_final_size_domain(self):
        assert main(["final-size", "--r0", "-1"]) == EXIT_INPUT


def test_gen_network(tmp_path):
    out = tmp_path / "net"
    assert main(["gen-network", "--n", "12", "--seed", "9", "--out", str(out)]) == EXIT_OK
    net = io.load_network(out / "od.csv", out / "population.csv")
    from mobsir.network import generate_random_network
    assert net == generate_random_network(12, (1e4, 1e6), 0.01, rng_seed=9)


@pytest.fixture(scope="module")
def case_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("case")
    assert main(["case-study", "--out", str(out)]) == EXIT_OK
    return read_csv(out / "case_study.csv"), json.loads((out / "metrics.json").read_text())


class TestCaseStudy:
    @pytest.fixture
    def result(self, case_result):
        return case_result

    def test_initial_state(self, result):
        _, metrics = result
        assert metrics["initial_infected"] == {"Harjumaa": 13.0, "Tartumaa": 2.0, "Saaremaa": 2.0}
        assert metrics["params"]["beta"] == pytest.approx(0.25)

    def test_pairing(self, result):
        _, metrics = result
        assert [r["percentile"] for r in metrics["runs"]] == [0, 5, 10, 20, 30]
        assert metrics["runs"][0]["quarantined"] == []
        assert len(metrics["runs"][1]["quarantined"]) == 1

    def test_dominance_and_monotone(self, result):
        rows, _ = result
        assert len(rows) == 31
        assert rows[0]["date"] == "2020-03-11" and rows[0]["actual"] == "17"
        curves = {k: np.array([float(r[k]) for r in rows]) for k in rows[0] if k.startswith("alpha_")}
        top = curves.pop("alpha_1")
        assert np.all(np.diff(top) >= 0)
        for c in curves.values():
            assert np.all(top >= c)
            assert np.all(np.diff(c) >= -1e-9)
        np.testing.assert_allclose(top[0], 17.0)

    def test_bad_cutoff(self, tmp_path):
        assert main(["case-study", "--cutoff", "2020-01-01", "--out", str(tmp_path)]) == EXIT_INPUT
        assert main(["case-study", "--r0", "20", "--mu", "0.1", "--out", str(tmp_path)]) == EXIT_INPUT


def test_help_documents_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["case-study", "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for flag in ("--od", "--pop", "--cases", "--cutoff", "--r0", "--mu", "--alphas", "--horizon", "--active"):
        assert flag in text
