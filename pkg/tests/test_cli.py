import json
import subprocess
import sys


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "foldtrack", *args],
        capture_output=True, text=True)
    return proc


def test_spectrum_command():
    proc = run_cli("spectrum", "a->ab, b->a")
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert abs(data["gamma_hat"][0]["lambda"] - 1.6180339887) < 1e-8
    assert data["certified"] is True


def test_spectrum_empty():
    proc = run_cli("spectrum", "a->a, b->b")
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert data["gamma"] == [] and data["gamma_hat"] == []


def test_spectrum_parse_error_exit_2():
    proc = run_cli("spectrum", "a->aa, b->b")
    assert proc.returncode == 2


def test_invert_command(tmp_path):
    out = tmp_path / "dump.json"
    proc = run_cli("invert", "a->ab, b->a", "--out", str(out))
    assert proc.returncode == 0
    assert proc.stdout.strip() == "a->b, b->b^-1 a"
    dump = json.loads(out.read_text())
    assert dump["fold_count"] == 1
    assert dump["inverse_lc"] == 1
    assert dump["lc_product_bound_ok"] is True
    assert dump["factorization"][0]["case"] == 1


def test_invert_parageometric():
    proc = run_cli("invert", "a->ac, b->a, c->b")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "a->b, b->c, c->b^-1 a"


def test_invert_identity():
    proc = run_cli("invert", "a->a, b->b", "--out", "/dev/null")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "a->a, b->b"


def test_invert_map_file(tmp_path):
    from foldtrack.automorphisms import parse_automorphism, rose_representative
    from foldtrack.graph_map import map_to_json
    f = rose_representative(parse_automorphism("a->ab, b->a"))
    path = tmp_path / "map.json"
    path.write_text(json.dumps(map_to_json(f)))
    out = tmp_path / "inv.json"
    proc = run_cli("invert", str(path), "--out", str(out))
    assert proc.returncode == 0
    dump = json.loads(out.read_text())
    assert dump["inverse_map"]["edge_map"] == {"1": [2], "2": [-2, 1]}


def test_ratio_command():
    proc = run_cli("ratio", "a->ac, b->a, c->b")
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert abs(data["ratio"] - 1.359) < 1e-3


def test_experiment_determinism(tmp_path):
    a = tmp_path / "a.tsv"
    b = tmp_path / "b.tsv"
    for path in (a, b):
        proc = run_cli("experiment", "--trials", "6", "--seed", "11",
                       "--rank", "2", "--length", "4", "--out", str(path))
        assert proc.returncode == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().strip().split("\n")
    assert lines[0].startswith("trial\taut")
    assert lines[-1].startswith("# max_ratio")


def test_experiment_jobs_match_sequential(tmp_path):
    a = tmp_path / "seq.tsv"
    b = tmp_path / "par.tsv"
    run_cli("experiment", "--trials", "4", "--seed", "5", "--rank", "2",
            "--length", "3", "--out", str(a))
    run_cli("experiment", "--trials", "4", "--seed", "5", "--rank", "2",
            "--length", "3", "--jobs", "2", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_experiment_single_nielsen():
    proc = run_cli("experiment", "--trials", "1", "--seed", "7",
                   "--rank", "2", "--length", "1")
    assert proc.returncode == 0
    row = proc.stdout.strip().split("\n")[1].split("\t")
    assert row[4] in ("1", "NA")  # single Nielsen move: ratio 1 or no EG


def test_audit_command(tmp_path):
    out = tmp_path / "audit.json"
    proc = run_cli("audit", "--trials", "50", "--seed", "3", "--out", str(out))
    assert proc.returncode == 0
    data = json.loads(out.read_text())
    assert all(not s["failures"] for s in data["suites"])


def test_metric_command(tmp_path):
    from foldtrack.graph import dump_graph
    from foldtrack.metric import twist_family
    g0, gm = twist_family(2, 10)
    p0 = tmp_path / "g0.json"
    pm = tmp_path / "gm.json"
    dump_graph(g0, p0)
    dump_graph(gm, pm)
    proc = run_cli("metric", str(p0), str(pm))
    assert proc.returncode == 0
    lines = proc.stdout.strip().split("\n")
    assert lines[0] == "src\tdst\td_upper\twitness_total_length\tmethod"
    assert len(lines) == 3
    fields = lines[1].split("\t")
    assert fields[3] == "12"
