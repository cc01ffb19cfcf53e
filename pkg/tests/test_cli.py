import csv
import json

import pytest

from sublinear_matching.cli import main
from sublinear_matching.graph import load_edge_list
from sublinear_matching.harness import (BENCH_HEADER, build_config, fit_slope, read_bench_csv, run_bench,
                                        run_distinguish, write_bench_csv)
from sublinear_matching.instances import load_instance


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestGen:
    def test_lowerbound_roundtrip(self, tmp_path, capsys):
        code, out, _ = run(capsys, "gen", "lowerbound", "--N", "125", "--eps", "0.2", "--d", "5",
                           "--truth", "NO", "--seed", "3", "--out", str(tmp_path / "lb"))
        assert code == 0
        inst = load_instance(tmp_path / "lb.json")
        assert inst.truth == "NO" and inst.graph.n == json.loads(out)["n"] == 750

    def test_same_seed_identical_files(self, tmp_path, capsys):
        for name in ("a", "b"):
            assert run(capsys, "gen", "lowerbound", "--N", "125", "--d", "5", "--seed", "1",
                       "--out", str(tmp_path / name))[0] == 0
        for ext in (".adj", ".labels"):
            assert (tmp_path / f"a{ext}").read_bytes() == (tmp_path / f"b{ext}").read_bytes()

    def test_gnm(self, tmp_path, capsys):
        assert run(capsys, "gen", "gnm", "--n", "100", "--m", "300", "--out", str(tmp_path / "g.txt"))[0] == 0
        assert load_edge_list(tmp_path / "g.txt").m == 300

    def test_bipartite(self, tmp_path, capsys):
        assert run(capsys, "gen", "bipartite", "--n-left", "5", "--n-right", "6", "--p", "1",
                   "--out", str(tmp_path / "b.txt"))[0] == 0
        assert load_edge_list(tmp_path / "b.txt").m == 30

    def test_infeasible_exit_3(self, tmp_path, capsys):
        code, _, err = run(capsys, "gen", "lowerbound", "--N", "125", "--d", "26", "--out", str(tmp_path / "x"))
        assert code == 3 and "exceeds" in err

    def test_missing_out(self, capsys):
        assert run(capsys, "gen", "gnm", "--n", "10", "--m", "5")[0] == 2


class TestExact:
    def test_path(self, write, capsys):
        code, out, _ = run(capsys, "exact", str(write("p.txt", "3\n0 1\n1 2\n")))
        assert code == 0 and json.loads(out)["mu"] == 1

    def test_k33(self, write, capsys):
        text = "6\n" + "".join(f"{u} {v}\n" for u in range(3) for v in range(3, 6))
        d = json.loads(run(capsys, "exact", str(write("k.txt", text)))[1])
        assert d["mu"] == 3 and d["cover_size"] == 3

    def test_lower_bound_no(self, tmp_path, capsys):
        run(capsys, "gen", "lowerbound", "--N", "125", "--d", "5", "--truth", "NO", "--out", str(tmp_path / "lb"))
        d = json.loads(run(capsys, "exact", str(tmp_path / "lb.json"))[1])
        assert d["mu"] <= (2 + 2 * 0.2) * 125

    def test_bad_file(self, write, capsys):
        code, _, err = run(capsys, "exact", str(write("bad.txt", "2\n0 0\n")))
        assert code == 2 and "self-loop at line 2" in err


class TestEstimate:
    def test_empty_graph(self, write, capsys):
        d = json.loads(run(capsys, "estimate", str(write("e.txt", "10\n")))[1])
        assert d["estimate"] == 0.0

    def test_report_fields(self, tmp_path, capsys):
        run(capsys, "gen", "gnm", "--n", "200", "--m", "600", "--out", str(tmp_path / "g.txt"))
        (tmp_path / "p.json").write_text(json.dumps({"beta": 32, "r": 40}))
        code, _, _ = run(capsys, "estimate", str(tmp_path / "g.txt"), "--model", "list", "--seed", "2",
                         "--params-file", str(tmp_path / "p.json"), "--out", str(tmp_path / "r.json"))
        d = json.loads((tmp_path / "r.json").read_text())
        assert code == 0
        assert d["model"] == "list" and d["seed"] == 2
        assert d["config"]["edcs"]["beta"] == 32 and d["config"]["r"] == 40
        assert "list_queries" in d and "pair_queries" in d

    def test_beyond_needs_bipartition(self, write, capsys):
        code, _, err = run(capsys, "estimate", str(write("t.txt", "3\n0 1\n1 2\n0 2\n")), "--algorithm", "beyond")
        assert code == 2 and "bipartition required" in err

    def test_beyond_on_bipartite(self, tmp_path, capsys):
        run(capsys, "gen", "bipartite", "--n-left", "60", "--n-right", "60", "--p", "0.05",
            "--out", str(tmp_path / "b.txt"))
        code, out, _ = run(capsys, "estimate", str(tmp_path / "b.txt"), "--algorithm", "beyond")
        assert code == 0 and json.loads(out)["algorithm"] == "beyond"

    def test_bad_params(self, write, capsys):
        g = write("g.txt", "3\n0 1\n")
        assert run(capsys, "estimate", str(g), "--params-file", str(write("p.json", '{"zzz": 1}')))[0] == 2
        assert run(capsys, "estimate", str(g), "--params-file", str(write("q.json", "[1]")))[0] == 2

    def test_usage_error(self, capsys):
        assert run(capsys, "estimate")[0] == 2


class TestBench:
    def test_single_row(self, tmp_path, capsys):
        code, _, err = run(capsys, "bench", "--sizes", "200", "--trials", "1", "--out", str(tmp_path / "b.csv"))
        assert code == 0
        with open(tmp_path / "b.csv") as fh:
            rows = list(csv.reader(fh))
        assert ",".join(rows[0]) == "n,trial,queries_list,queries_pair,estimate,mu_exact"
        assert len(rows) == 2

    def test_slope_reported(self, tmp_path, capsys):
        code, _, err = run(capsys, "bench", "--sizes", "200", "400", "--out", str(tmp_path / "b.csv"))
        assert code == 0 and "slope" in json.loads(err)

    def test_csv_roundtrip(self, tmp_path):
        rows = run_bench([100, 200], trials=2, seed=1)
        write_bench_csv(rows, tmp_path / "b.csv")
        assert read_bench_csv(tmp_path / "b.csv") == rows
        assert tuple(rows[0]) == BENCH_HEADER

    def test_fit_slope(self):
        rows = [{"n": n, "queries_list": 0, "queries_pair": 3 * n**1.5} for n in (100, 200, 400)]
        assert fit_slope(rows) == pytest.approx(1.5)
        with pytest.raises(ValueError):
            fit_slope(rows[:1])


class TestDistinguish:
    def test_trials_zero(self, capsys):
        code, _, err = run(capsys, "distinguish", "--variant", "broken", "--N", "125", "--d", "5", "--trials", "0")
        assert code == 2 and "trials" in err

    def test_broken_small(self, capsys):
        code, out, _ = run(capsys, "distinguish", "--variant", "broken", "--N", "125", "--d", "5",
                           "--trials", "6", "--per-trial")
        d = json.loads(out)
        assert code == 0 and d["walk_len"] == 10 and len(d["per_trial"]) == 6
        assert d["accuracy"] == d["correct"] / 6

    def test_deterministic(self):
        a = run_distinguish("fixed", 125, 0.2, 5, 4, seed=3)
        b = run_distinguish("fixed", 125, 0.2, 5, 4, seed=3)
        assert a == b


def test_build_config_presets():
    assert build_config("two-thirds", 100, 1, {"preset": "faithful"}).edcs.mode == "faithful"
    with pytest.raises(ValueError):
        build_config("two-thirds", 100, 1, {"preset": "faithful", "beta": 3})
    with pytest.raises(ValueError):
        build_config("nope", 100, 1)
