import hashlib
import os
import subprocess
import sys

import numpy as np
import pytest

from gtl.errors import DomainError
from gtl.experiments import (
    ExperimentConfig,
    demo_sqrt_n_separation,
    make_truth,
    parse_config,
    run_experiment,
)
from gtl.serialize import (
    dump_matrix,
    dump_records,
    dump_state,
    load_matrix,
    load_records,
    load_state,
)
from gtl.states import GaussianState, thermal_state, vacuum_state
from gtl.symplectic import random_covariance


class TestSerialize:
    def test_matrix_round_trip(self):
        rng = np.random.default_rng(0)
        M = random_covariance(2, 6.0, "mixed", rng)
        text = dump_matrix(M)
        assert text.splitlines()[0] == "2,4,4"
        back = load_matrix(text)
        assert np.array_equal(back, M)

    def test_state_round_trip(self):
        rng = np.random.default_rng(1)
        state = GaussianState(rng.normal(size=4), random_covariance(2, 6.0, "mixed", rng))
        back = load_state(dump_state(state))
        assert np.array_equal(back.mu, state.mu)
        assert np.array_equal(back.sigma, state.sigma)

    def test_state_header_is_mode_count(self):
        text = dump_state(vacuum_state(3))
        assert text.splitlines()[0] == "3"

    def test_records_schema_header(self):
        rec = {
            "experiment": "x", "strategy": "pure", "n": 1, "E": 4.0, "eps": 0.2,
            "N": 100, "trial": 0, "error": 0.1, "error_metric": "m", "success": True,
            "branch": "", "seed": 7, "wall_ms": 0,
        }
        text = dump_records([rec])
        lines = text.splitlines()
        assert lines[0] == "# schema=1"
        back = load_records(text)
        assert back[0]["strategy"] == "pure"
        assert back[0]["success"] == "true"

    def test_malformed_matrix(self):
        with pytest.raises(DomainError):
            load_matrix("1,2\n0.0,0.0")


class TestConfigParsing:
    def test_flat_key_value(self):
        cfg = parse_config(
            """
            # comment line
            experiment = demo
            strategies = pure,heterodyne
            n = 1,2
            e = 4.0, 8.0
            eps = 2e-1
            trials = 3
            seed = 11
            workers = 2
            """
        )
        assert cfg.experiment == "demo"
        assert cfg.strategies == ("pure", "heterodyne")
        assert cfg.n_grid == (1, 2)
        assert cfg.e_grid == (4.0, 8.0)
        assert cfg.eps_grid == (0.2,)
        assert cfg.trials == 3
        assert cfg.seed == 11
        assert len(cfg.cells()) == 8

    def test_bad_line_rejected(self):
        with pytest.raises(DomainError):
            parse_config("strategies pure")

    def test_unknown_strategy_rejected(self):
        with pytest.raises(DomainError):
            ExperimentConfig(
                experiment="x", strategies=("nope",), n_grid=(1,), e_grid=(4.0,),
                eps_grid=(0.2,),
            )


class TestRunExperiment:
    def _config(self, workers=1, trials=2):
        return ExperimentConfig(
            experiment="unit",
            strategies=("heterodyne",),
            n_grid=(1,),
            e_grid=(4.0,),
            eps_grid=(0.3,),
            n_copies_grid=(2000,),
            trials=trials,
            seed=5,
            workers=workers,
        )

    def test_single_cell_rows(self):
        records = run_experiment(self._config())
        assert len(records) == 2
        assert all(r["experiment"] == "unit" for r in records)
        assert all(r["N"] == 2000 for r in records)
        assert [r["trial"] for r in records] == [0, 1]

    def test_rerun_identical(self):
        a = dump_records(run_experiment(self._config()))
        b = dump_records(run_experiment(self._config()))
        assert hashlib.sha256(a.encode()).hexdigest() == hashlib.sha256(b.encode()).hexdigest()

    def test_worker_count_invariance(self):
        serial = dump_records(run_experiment(self._config(workers=1, trials=3)))
        parallel = dump_records(run_experiment(self._config(workers=3, trials=3)))
        assert serial == parallel

    def test_failures_recorded_not_raised(self):
        # an alg-s1 sweep with a tiny K aborts on some trials; rows appear anyway
        config = ExperimentConfig(
            experiment="abort-sweep",
            strategies=("alg-s1",),
            n_grid=(1,),
            e_grid=(16.0,),
            eps_grid=(0.15,),
            trials=2,
            seed=2,
        )
        records = run_experiment(config)
        assert len(records) == 2
        for rec in records:
            assert isinstance(rec["success"], bool)

    def test_wall_ms_zero_without_timing(self):
        records = run_experiment(self._config())
        assert all(r["wall_ms"] == 0 for r in records)

    def test_truth_generators(self):
        rng = np.random.default_rng(3)
        for strategy in ("pure", "wigner", "passive", "alg-s1", "heterodyne"):
            state = make_truth(strategy, 1 if strategy in ("alg-s1", "heterodyne") else 2,
                               8.0, rng)
            assert state.validity.is_valid


class TestRegressionGolden:
    def test_committed_golden_hash(self):
        # committed regression golden: byte-level hash of a small deterministic sweep
        config = ExperimentConfig(
            experiment="golden",
            strategies=("heterodyne", "pure"),
            n_grid=(1,),
            e_grid=(4.0,),
            eps_grid=(0.3,),
            n_copies_grid=(3000,),
            trials=3,
            seed=20260810,
        )
        text = dump_records(run_experiment(config))
        digest = hashlib.sha256(text.encode()).hexdigest()
        assert digest == "52bb7ab79bf0e1b079e83bcc22197905a077e85c5a17918fbf953b02f503d5b6"


class TestSqrtNDemo:
    def test_rows_and_trend(self):
        rows = demo_sqrt_n_separation((1, 4), eps=0.5, samples=40_000, seed=0)
        assert rows[0]["n"] == 1
        for row in rows:
            assert row["d_tr_lower"] >= 0.5 / 4
        assert rows[1]["ratio"] > rows[0]["ratio"]
        # n = 1: ratio >= 1/4 - MC tolerance
        assert rows[0]["ratio"] >= 0.25 - 0.02

    def test_eps_validated(self):
        with pytest.raises(DomainError):
            demo_sqrt_n_separation((1,), eps=1.5)


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "gtl.cli", *args],
        capture_output=True,
        text=True,
        timeout=600,
    )
    return proc


class TestCli:
    def test_validate_suite_exit_zero(self):
        proc = run_cli("validate", "--suite", "symplectic")
        assert proc.returncode == 0
        assert "OK" in proc.stdout

    def test_learn_row(self, tmp_path):
        out = tmp_path / "learn.csv"
        proc = run_cli(
            "learn", "--strategy", "heterodyne", "--n", "1", "--E", "4", "--eps", "0.3",
            "--N", "2000", "--seed", "7", "--out", str(out),
        )
        assert proc.returncode == 0
        text = out.read_text()
        assert text.startswith("# schema=1")
        assert "heterodyne" in text

    def test_distance_subcommand(self, tmp_path):
        from gtl.serialize import save_state

        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        save_state(a, vacuum_state(1))
        save_state(b, thermal_state(1.5))
        out = tmp_path / "dist.csv"
        proc = run_cli(
            "distance", "--state-a", str(a), "--state-b", str(b),
            "--budget", "6000", "--out", str(out),
        )
        assert proc.returncode == 0
        assert "trace_distance_upper" in out.read_text()

    def test_ensemble_subcommand(self, tmp_path):
        out = tmp_path / "report.csv"
        proc = run_cli(
            "ensemble", "--kind", "passive-c1", "--n", "12", "--members", "4",
            "--eps", "0.27", "--seed", "3", "--out", str(out),
        )
        assert proc.returncode == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "# schema=1"
        assert lines[1] == "pair,d_lower,kl,overlap"
        assert len(lines) == 2 + 6  # 4 choose 2 pairs

    def test_experiment_config_and_figures(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "experiment = tiny\nstrategies = heterodyne\nn = 1\ne = 4\neps = 0.3\n"
            "n_copies = 2000\ntrials = 2\nseed = 9\n"
        )
        out = tmp_path / "exp.csv"
        proc = run_cli(
            "experiment", "--config", str(cfg), "--out", str(out), "--plot",
        )
        assert proc.returncode == 0
        assert out.exists()
        figdir = tmp_path / "figures"
        pngs = list(figdir.glob("*.png"))
        assert len(pngs) >= 2  # error + budget figures rendered alongside the CSV

    def test_usage_error_exit_two(self):
        proc = run_cli("learn")  # missing required --strategy
        assert proc.returncode == 2

    def test_unknown_suite_exit_two(self):
        proc = run_cli("validate", "--suite", "nonsense")
        assert proc.returncode == 2

    def test_gtl_workers_env(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "experiment = tiny\nstrategies = heterodyne\nn = 1\ne = 4\neps = 0.3\n"
            "n_copies = 2000\ntrials = 2\nseed = 9\n"
        )
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        p1 = run_cli("experiment", "--config", str(cfg), "--out", str(out1))
        env = os.environ.copy()
        env["GTL_WORKERS"] = "2"
        p2 = subprocess.run(
            [sys.executable, "-m", "gtl.cli", "experiment", "--config", str(cfg),
             "--out", str(out2)],
            capture_output=True, text=True, env=env, timeout=600,
        )
        assert p1.returncode == 0 and p2.returncode == 0
        assert out1.read_bytes() == out2.read_bytes()
