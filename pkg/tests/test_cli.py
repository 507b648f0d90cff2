import subprocess
import sys

import pytest

from graphs import FIG2_EDGES
from pprkit.cli import main
from pprkit.index import load_index


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {"fig2": FIG2_EDGES, "cycle": "0 1\n1 0\n", "loop": "0 0\n"}.items():
        paths[name] = tmp_path / f"{name}.txt"
        paths[name].write_text(text)
    paths["dir"] = tmp_path
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def blocks(text):
    out, cur = {}, None
    for line in text.splitlines():
        if line.startswith("# source "):
            cur = int(line.split()[-1])
            out[cur] = []
        else:
            rank, v, score = line.split("\t")
            out[cur].append((int(v), float(score)))
    return out


def build(capsys, files, R=100, name="fig2"):
    path = files["dir"] / f"{name}-{R}.pwix"
    code, out, err = run(capsys, "build-index", "--graph", files[name], "--walks", R, "--out", path)
    assert code == 0, err
    return path, out, err


def test_build_index(capsys, files):
    path, out, err = build(capsys, files)
    fields = dict(line.split("\t") for line in out.splitlines())
    assert fields["N"] == "8" and fields["M"] == "10" and fields["R"] == "100"
    assert int(fields["bytes"]) == path.stat().st_size
    assert "elapsed_s" in err
    with open(path, "rb") as fh:
        idx = load_index(fh)
    assert idx.num_vertices == 8 and idx.num_entries == int(fields["entries"])


def test_build_missing_graph(capsys, files):
    code, _, err = run(capsys, "build-index", "--graph", files["dir"] / "nope.txt", "--walks", 10,
                       "--out", files["dir"] / "x.pwix")
    assert code != 0 and "no such file" in err


@pytest.mark.parametrize("R", [0, -3])
def test_build_requires_walks(capsys, files, R):
    code, _, err = run(capsys, "build-index", "--graph", files["fig2"], "--walks", R, "--out", files["dir"] / "x")
    assert code == 2 and "usage" in err


def test_bad_graph_reports_line(capsys, files):
    bad = files["dir"] / "bad.txt"
    bad.write_text("0 1\n1 x\n")
    code, _, err = run(capsys, "oracle", "--graph", bad, "0")
    assert code == 1 and "2" in err


def test_query_batch_keeps_input_order(capsys, files):
    path, _, _ = build(capsys, files)
    batch = files["dir"] / "batch.txt"
    batch.write_text("# two sources\n2\n0\n")
    code, out, _ = run(capsys, "query", "--graph", files["fig2"], "--index", path, "--batch", batch, "--iters", 2)
    assert code == 0
    assert [line for line in out.splitlines() if line.startswith("#")] == ["# source 2", "# source 0"]
    assert len(blocks(out)) == 2


def test_query_fig2_ranking(capsys, files):
    path, _, _ = build(capsys, files, R=2000)
    code, out, _ = run(capsys, "query", "0", "--graph", files["fig2"], "--index", path, "--iters", 2, "--topk", 8)
    res = blocks(out)[0]
    ranked = [v for v, _ in res]
    # three children of both v2 and v3 outrank the source at two iterations
    assert set(ranked[:3]) == {4, 5, 6}
    assert dict(res)[4] == pytest.approx(0.180625, abs=1e-9)
    assert dict(res)[0] == pytest.approx(0.15, abs=1e-9)


def test_query_without_index(capsys, files):
    code, out, _ = run(capsys, "query", "0", "--graph", files["fig2"], "--no-index", "--iters", 7, "--topk", 100)
    assert code == 0
    assert sum(s for _, s in blocks(out)[0]) <= 1.0


def test_query_unknown_source(capsys, files):
    code, _, err = run(capsys, "query", "42", "--graph", files["fig2"], "--no-index")
    assert code != 0 and "42" in err


def test_query_zero_iterations_is_lookup(capsys, files):
    path, _, _ = build(capsys, files, R=500)
    code, out, _ = run(capsys, "query", "1", "--graph", files["fig2"], "--index", path, "--iters", 0, "--topk", 8)
    with open(path, "rb") as fh:
        fp = load_index(fh).fingerprint(1)
    got = blocks(out)[1]
    assert [v for v, _ in got] == [v for v, _ in sorted(fp.items(), key=lambda kv: (-kv[1], kv[0]))]
    assert all(s == pytest.approx(fp[v], rel=1e-9) for v, s in got)


def test_oracle_two_cycle(capsys, files):
    code, out, _ = run(capsys, "oracle", "--graph", files["cycle"], "0")
    assert code == 0
    assert out.splitlines() == ["1\t0\t0.5405405405", "2\t1\t0.4594594595"]


def test_oracle_self_loop(capsys, files):
    code, out, _ = run(capsys, "oracle", "--graph", files["loop"], "0")
    assert out == "1\t0\t1\n"


def test_oracle_nonconvergence(capsys, files):
    code, _, err = run(capsys, "oracle", "--graph", files["fig2"], "0", "--max-iters", 1, "--tol", 1e-14)
    assert code == 1 and "residual" in err


def test_eval_empty_sources(capsys, files):
    empty = files["dir"] / "empty.txt"
    empty.write_text("# nothing\n")
    code, _, err = run(capsys, "eval", "--graph", files["fig2"], "--batch", empty, "--method", "mcfp", "--walks", 10)
    assert code == 2 and "no sources" in err


def test_eval_writes_report(capsys, files):
    report = files["dir"] / "rag.tsv"
    code, out, _ = run(capsys, "eval", "--graph", files["fig2"], "--method", "verd", "--walks", 200,
                       "--iters", 2, "--topk", "1,3", "--out", report)
    assert code == 0
    assert "mean_rag\tk=1\t" in out and "mean_rag\tk=3\t" in out
    rows = report.read_text().splitlines()
    assert rows[0] == "source\tbucket\tk\trag" and len(rows) == 1 + 3 * 2


def test_reproducible_output(capsys, files):
    p1 = files["dir"] / "a.pwix"
    p2 = files["dir"] / "b.pwix"
    for p, w in ((p1, 1), (p2, 4)):
        assert run(capsys, "build-index", "--graph", files["fig2"], "--walks", 300, "--out", p, "--workers", w)[0] == 0
    assert p1.read_bytes() == p2.read_bytes()
    outs = [run(capsys, "query", "0", "--graph", files["fig2"], "--index", p1, "--iters", 3)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "pprkit", "oracle", "--graph", str(files["cycle"]), "1"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "1\t1\t0.5405405405"
