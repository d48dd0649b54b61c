import io
import json

import pytest

from boundlab.cli import ExperimentConfig, ResultTable, emit, main, run
from boundlab.errors import SchemaError


def run_to_text(sub, params, seed=0):
    table = run(ExperimentConfig(sub, params, seed))
    buf = io.StringIO()
    emit(table, buf)
    return buf.getvalue()


def data_section(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("#"))


class TestExperimentConfig:
    def test_unknown_subcommand(self):
        with pytest.raises(SchemaError):
            ExperimentConfig("nope", {}, 0)

    def test_unknown_key_rejected(self):
        with pytest.raises(SchemaError):
            ExperimentConfig("cover", {"bogus": 1}, 0)

    def test_type_coercion_and_defaults(self):
        cfg = ExperimentConfig("cover", {"density": "0.25"}, 3)
        assert cfg.params["density"] == 0.25
        assert cfg.params["N"] == 20  # default

    def test_bad_value(self):
        with pytest.raises(SchemaError):
            ExperimentConfig("cover", {"N": "many"}, 0)

    def test_json_round_trip(self):
        cfg = ExperimentConfig("tails", {"dist": "coins:50", "samples": 5000}, 11)
        back = ExperimentConfig.from_json(cfg.to_json())
        assert back == cfg

    def test_hash_changes_iff_params_change(self):
        a = ExperimentConfig("cover", {"N": 5}, 1)
        b = ExperimentConfig("cover", {"N": 5}, 1)
        c = ExperimentConfig("cover", {"N": 6}, 1)
        d = ExperimentConfig("cover", {"N": 5}, 2)
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()
        assert a.config_hash() != d.config_hash()


class TestEmit:
    def test_format(self):
        t = ResultTable(("a", "b"), [])
        t.add(1, 0.1)
        t.metadata["seed"] = 7
        buf = io.StringIO()
        emit(t, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "# seed=7"
        assert lines[1] == "a,b"
        assert lines[2].startswith("1,0.1000000000000000")

    def test_float_round_trip(self):
        x = 0.1 + 0.2
        t = ResultTable(("v",), [])
        t.add(x)
        buf = io.StringIO()
        emit(t, buf)
        printed = buf.getvalue().splitlines()[-1]
        assert float(printed) == x

    def test_empty_table(self):
        t = ResultTable(("x", "y"), [])
        buf = io.StringIO()
        emit(t, buf)
        assert buf.getvalue() == "x,y\n"

    def test_row_width_checked(self):
        t = ResultTable(("x", "y"), [])
        from boundlab.errors import InvariantError
        with pytest.raises(InvariantError):
            t.add(1)


class TestDeterminism:
    @pytest.mark.parametrize("sub,params", [
        ("cover", {"group": "cyclic:12", "density": 0.25, "N": 3, "trials": 64}),
        ("bohr", {"N": 500, "freqs": "0.37", "rho0": 0.05}),
        ("tails", {"dist": "coins:20", "samples": 2000}),
        ("lambdap", {"n": 16, "trials": 3, "probes": 4}),
    ])
    def test_identical_data_sections(self, sub, params):
        a = run_to_text(sub, params, seed=5)
        b = run_to_text(sub, params, seed=5)
        assert data_section(a) == data_section(b)

    def test_seed_changes_data(self):
        a = run_to_text("cover", {"group": "cyclic:12", "trials": 32}, seed=1)
        b = run_to_text("cover", {"group": "cyclic:12", "trials": 32}, seed=2)
        assert data_section(a) != data_section(b)

    def test_cover_example_mean(self):
        table = run(ExperimentConfig(
            "cover", {"group": "cyclic:10", "density": 0.2, "N": 5,
                      "trials": 1000}, seed=7))
        mean_row = [r for r in table.rows if r[0] == "mean"][0]
        assert abs(mean_row[1] - 0.67232) < 0.03


class TestMainExitCodes:
    def test_ok(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        rc = main(["cover", "--group", "cyclic:8", "--trials", "16",
                   "--seed", "1", "--out", str(out)])
        assert rc == 0
        assert out.read_text().startswith("# tool_version=")

    def test_schema_error_is_2(self, tmp_path):
        cfgfile = tmp_path / "c.json"
        cfgfile.write_text(json.dumps({"bogus_key": 1}))
        rc = main(["cover", "--config", str(cfgfile)])
        assert rc == 2

    def test_budget_error_is_3(self):
        rc = main(["similarity", "--mode", "ratio", "--J0", "3",
                   "--x-samples", "5", "--seed", "1"])
        assert rc == 3

    def test_invariant_error_is_4(self):
        rc = main(["similarity", "--mode", "coverage", "--J0", "2",
                   "--cube-side", "0.5", "--trials", "5", "--seed", "1"])
        assert rc == 4

    def test_io_error_is_5(self, tmp_path):
        rc = main(["cover", "--group", "cyclic:8", "--trials", "4",
                   "--out", str(tmp_path / "no" / "such" / "dir" / "x.csv")])
        assert rc == 5

    def test_config_file_with_override(self, tmp_path, capsys):
        cfgfile = tmp_path / "c.txt"
        cfgfile.write_text("group=cyclic:9\ntrials=8\nseed=4\n")
        out = tmp_path / "o.csv"
        rc = main(["cover", "--config", str(cfgfile), "--trials", "16",
                   "--out", str(out)])
        assert rc == 0
        text = out.read_text()
        assert "# seed=4" in text
        assert sum(1 for l in text.splitlines()
                   if l and not l.startswith("#") and l[0].isdigit()) == 16

    def test_threads_hint_does_not_change_data(self, tmp_path):
        outs = []
        for threads in ("1", "8"):
            p = tmp_path / f"t{threads}.csv"
            rc = main(["cover", "--group", "cyclic:10", "--trials", "32",
                       "--seed", "3", "--threads", threads, "--out", str(p)])
            assert rc == 0
            outs.append(data_section(p.read_text()))
        assert outs[0] == outs[1]

    def test_plot_written(self, tmp_path):
        out = tmp_path / "o.csv"
        png = tmp_path / "o.png"
        rc = main(["tails", "--dist", "gauss", "--samples", "2000",
                   "--out", str(out), "--plot", str(png)])
        assert rc == 0
        assert png.exists() and png.stat().st_size > 1000

    def test_plot_default_path_alongside_csv(self, tmp_path):
        out = tmp_path / "run.csv"
        rc = main(["tails", "--dist", "gauss", "--samples", "2000",
                   "--out", str(out), "--plot"])
        assert rc == 0
        assert (tmp_path / "run.png").exists()

    def test_dudley_points_file_kinds(self, tmp_path):
        import numpy as np
        coords = tmp_path / "coords.csv"
        np.savetxt(coords, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
                   delimiter=",")
        rc = main(["dudley", "--points-file", str(coords), "--file-kind",
                   "coords", "--samples", "2000",
                   "--out", str(tmp_path / "a.csv")])
        assert rc == 0
        cov = tmp_path / "cov.csv"
        np.savetxt(cov, np.eye(4), delimiter=",")
        rc = main(["dudley", "--points-file", str(cov), "--file-kind", "cov",
                   "--samples", "2000", "--out", str(tmp_path / "b.csv")])
        assert rc == 0
        header = (tmp_path / "b.csv").read_text().splitlines()
        data = [l for l in header if l and not l.startswith("#")][1]
        assert float(data.split(",")[0]) > 0  # entropy sum of 4 iid points

    def test_fkw_explicit_ladder(self, tmp_path):
        out = tmp_path / "f.csv"
        rc = main(["fkw", "--grid", "16", "--K", "36", "--ladder", "0.8,0.4,0.2",
                   "--set", "square:1.0", "--out", str(out)])
        assert rc == 0
        rows = [l for l in out.read_text().splitlines()
                if l and not l.startswith("#")][1:]
        assert len(rows) == 3
