import json

import pytest

from docmix.cli import run

from conftest import ring_corpus_records, word_list, write_jsonl, write_vocab


@pytest.fixture
def workspace(tmp_path):
    corpus = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "", "text": "alpha beta gamma " * 40, "links": ["B"]},
        {"id": "B", "title": "", "text": "beta gamma delta " * 40, "links": ["C"]},
        {"id": "C", "title": "", "text": "delta epsilon zeta " * 40, "links": []},
    ])
    vocab = write_vocab(tmp_path / "v.txt",
                        ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"])
    return tmp_path, corpus, vocab


def test_build_graph_hyperlink(workspace, capsys):
    tmp, corpus, _ = workspace
    out = tmp / "g.tsv"
    assert run(["build-graph", "--mode", "hyperlink", "--corpus", str(corpus),
                "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "#mode=hyperlink nodes=3 edges=2"
    assert lines[1:] == ["A\tB", "B\tC"]
    err = capsys.readouterr().err
    assert "config: subcommand=build-graph" in err
    assert "seed=0" in err


def test_make_instances_count_zero(workspace):
    tmp, corpus, vocab = workspace
    out = tmp / "i.jsonl"
    assert run(["make-instances", "--corpus", str(corpus), "--vocab", str(vocab),
                "--out", str(out), "--count", "0"]) == 0
    assert out.read_text() == ""


def test_stats_emits_record_on_stdout(workspace, capsys):
    tmp, corpus, vocab = workspace
    graph = tmp / "g.tsv"
    instances = tmp / "i.jsonl"
    run(["build-graph", "--mode", "hyperlink", "--corpus", str(corpus), "--out", str(graph)])
    assert run(["make-instances", "--corpus", str(corpus), "--vocab", str(vocab),
                "--graph", str(graph), "--out", str(instances),
                "--count", "12", "--max-seq-len", "64"]) == 0
    capsys.readouterr()
    assert run(["stats", "--in", str(instances)]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["instance_count"] == 12
    assert record["replacement_split"] is None  # no vocab given

    assert run(["stats", "--in", str(instances), "--vocab", str(vocab),
                "--corpus", str(corpus), "--graph", str(graph)]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["replacement_split"] is not None
    assert record["graph"]["edges"] == 2


def test_stats_text_mode(workspace, capsys):
    tmp, corpus, vocab = workspace
    instances = tmp / "i.jsonl"
    run(["make-instances", "--corpus", str(corpus), "--vocab", str(vocab),
         "--out", str(instances), "--count", "3", "--max-seq-len", "64"])
    capsys.readouterr()
    assert run(["stats", "--in", str(instances), "--text"]) == 0
    assert "instances: 3" in capsys.readouterr().out


def test_unknown_flag_exits_nonzero(workspace, capsys):
    tmp, corpus, _ = workspace
    with pytest.raises(SystemExit) as excinfo:
        run(["build-graph", "--mode", "hyperlink", "--corpus", str(corpus),
             "--out", str(tmp / "g.tsv"), "--bogus", "x"])
    assert excinfo.value.code != 0
    assert "--bogus" in capsys.readouterr().err


def test_missing_file_diagnostic(workspace, capsys):
    tmp, _, _ = workspace
    rc = run(["build-graph", "--mode", "hyperlink",
              "--corpus", str(tmp / "nope.jsonl"), "--out", str(tmp / "g.tsv")])
    assert rc == 1
    assert "nope.jsonl" in capsys.readouterr().err


def test_schema_violation_names_line(workspace, capsys):
    tmp, _, _ = workspace
    bad = tmp / "bad.jsonl"
    bad.write_text('{"id": "A"}\n')
    rc = run(["build-graph", "--mode", "hyperlink", "--corpus", str(bad),
              "--out", str(tmp / "g.tsv")])
    assert rc == 1
    assert "line 1" in capsys.readouterr().err


def test_bad_mix_rejected(workspace, capsys):
    tmp, corpus, vocab = workspace
    with pytest.raises(SystemExit):
        run(["make-instances", "--corpus", str(corpus), "--vocab", str(vocab),
             "--out", str(tmp / "i.jsonl"), "--count", "1", "--mix", "1,2"])
    assert "--mix" in capsys.readouterr().err


def test_random_mode_uses_k_and_seed(workspace):
    tmp, corpus, _ = workspace
    out_a, out_b, out_c = tmp / "a.tsv", tmp / "b.tsv", tmp / "c.tsv"
    base = ["build-graph", "--mode", "random", "--corpus", str(corpus), "--k", "1"]
    assert run([*base, "--out", str(out_a), "--seed", "4"]) == 0
    assert run([*base, "--out", str(out_b), "--seed", "4"]) == 0
    assert run([*base, "--out", str(out_c), "--seed", "5"]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert out_a.read_bytes() != out_c.read_bytes()


def test_tfidf_mode_default_k(workspace):
    tmp, corpus, _ = workspace
    out = tmp / "g.tsv"
    assert run(["build-graph", "--mode", "tfidf", "--corpus", str(corpus),
                "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0]
    # k=5 > 2 other docs, so every doc links to both others.
    assert header == "#mode=tfidf nodes=3 edges=6"


def test_workers_do_not_change_output(tmp_path):
    corpus = write_jsonl(tmp_path / "c.jsonl", ring_corpus_records(10, 300, word_list(30)))
    vocab = write_vocab(tmp_path / "v.txt", word_list(30))
    graph = tmp_path / "g.tsv"
    run(["build-graph", "--mode", "hyperlink", "--corpus", str(corpus), "--out", str(graph)])
    outs = []
    for workers in ("1", "3"):
        out = tmp_path / f"i{workers}.jsonl"
        assert run(["make-instances", "--corpus", str(corpus), "--vocab", str(vocab),
                    "--graph", str(graph), "--out", str(out), "--count", "120",
                    "--max-seq-len", "96", "--workers", workers]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
