"""CLI surface: subcommands, exit codes, end-to-end determinism."""
import filecmp
import json
import os

import pytest

from rulewalk.cli import main
from rulewalk.dataio import load_corpus, load_graph

PLANTED = "w=0.0 Target() <- A(X0->X1) , B(X1->X2) | 0 {BEFORE} 1\n"


@pytest.fixture()
def rule_file(tmp_path):
    path = tmp_path / "planted.rule"
    path.write_text("# planted rule\n" + PLANTED)
    return str(path)


def run_pipeline(base, rule_file, seed=7, walks=120):
    corpus = str(base / "corpus")
    rules = str(base / "rules.txt")
    model = str(base / "model.txt")
    metrics = str(base / "metrics.json")
    assert main(["gen", "--rule", rule_file, "--out", corpus,
                 "--num-pos", "8", "--num-neg", "8", "--noise", "4",
                 "--seed", str(seed)]) == 0
    assert main(["train", "--data", corpus, "--target-label", "Target",
                 "--walks", str(walks), "--max-steps", "2",
                 "--seed", str(seed), "--out", rules,
                 "--model-out", model]) == 0
    assert main(["eval", "--data", corpus, "--target-label", "Target",
                 "--rules", rules, "--model", model,
                 "--seed", str(seed), "--out", metrics]) == 0
    return corpus, rules, model, metrics


def test_gen_writes_labeled_corpus(tmp_path, rule_file):
    corpus = tmp_path / "corpus"
    assert main(["gen", "--rule", rule_file, "--out", str(corpus),
                 "--num-pos", "3", "--num-neg", "2", "--noise", "3",
                 "--seed", "1"]) == 0
    graphs, labels = load_corpus(str(corpus))
    assert len(graphs) == 5
    assert labels.count("Target") == 3


def test_full_pipeline_and_determinism(tmp_path, rule_file):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    files_a = run_pipeline(a, rule_file)
    files_b = run_pipeline(b, rule_file)
    corpus_a, corpus_b = files_a[0], files_b[0]
    for name in sorted(os.listdir(corpus_a)):
        assert filecmp.cmp(
            os.path.join(corpus_a, name), os.path.join(corpus_b, name), shallow=False
        )
    for fa, fb in zip(files_a[1:], files_b[1:]):
        assert open(fa, "rb").read() == open(fb, "rb").read()
    record = json.loads(open(files_a[3]).read())
    assert set(record) >= {"mrr", "hits@3", "hits@10", "n_queries", "mode", "seed"}


def test_eval_without_model_uses_counts(tmp_path, rule_file, capsys):
    corpus, rules, _, _ = run_pipeline(tmp_path, rule_file)
    capsys.readouterr()  # drain pipeline chatter
    assert main(["eval", "--data", corpus, "--target-label", "Target",
                 "--rules", rules, "--seed", "7"]) == 0
    out = capsys.readouterr().out
    record = json.loads(out.splitlines()[0])
    assert record["mode"] == "classification"
    assert "mrr" in out


def test_mine_writes_rules(tmp_path, rule_file):
    corpus = str(tmp_path / "corpus")
    rules = str(tmp_path / "rules.txt")
    assert main(["gen", "--rule", rule_file, "--out", corpus,
                 "--num-pos", "6", "--num-neg", "6", "--noise", "3",
                 "--seed", "3"]) == 0
    assert main(["mine", "--data", corpus, "--target-label", "Target",
                 "--walks", "100", "--max-steps", "2", "--seed", "3",
                 "--out", rules]) == 0
    lines = [l for l in open(rules) if l.startswith("w=")]
    assert lines
    assert any("A(X0->X1) , B(X1->X2)" in l for l in lines)


def test_unknown_flag_exits_1(capsys):
    assert main(["mine", "--no-such-flag"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err


def test_unknown_command_exits_1():
    assert main(["frobnicate"]) == 1


def test_missing_file_exits_2(tmp_path):
    assert main(["inspect", "--data", str(tmp_path / "nope.thg")]) == 2


def test_malformed_graph_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.thg"
    bad.write_text("#thg v1\nBad | | x | 1 2\n")
    assert main(["inspect", "--data", str(bad)]) == 2
    assert "bad.thg:2" in capsys.readouterr().err


def test_help_exits_0():
    assert main(["--help"]) == 0


def test_convert_time_points(tmp_path):
    src = tmp_path / "g.thg"
    src.write_text("#thg v1\n#label L\nPut | a | b | 3 5\n")
    out = str(tmp_path / "points.thg")
    assert main(["convert", "--in", str(src), "--out", out,
                 "--time-points"]) == 0
    graph, label = load_graph(out)
    assert label == "L"
    assert tuple(graph.events[0].interval) == (3, 3)


def test_convert_clique_expand(tmp_path):
    src = tmp_path / "g.thg"
    src.write_text("#thg v1\nMix | a,b | c,d | 1 2\n")
    out = str(tmp_path / "expanded.thg")
    assert main(["convert", "--in", str(src), "--out", out,
                 "--clique-expand", "--split-multi-tail"]) == 0
    graph, _ = load_graph(out)
    assert len(graph) == 4


def test_convert_needs_exactly_one_mode(tmp_path):
    src = tmp_path / "g.thg"
    src.write_text("#thg v1\nPut | a | b | 3 5\n")
    assert main(["convert", "--in", str(src), "--out",
                 str(tmp_path / "o.thg")]) == 1


def test_convert_from_tkg(tmp_path):
    src = tmp_path / "toy.tkg"
    src.write_text(
        "1 | alice | likes | bob\n"
        "2 | alice | likes | carol\n"
    )
    out = str(tmp_path / "kg.thg")
    assert main(["convert", "--in", str(src), "--out", out, "--from-tkg"]) == 0
    graph, _ = load_graph(out)
    names = [graph.event_names(i) for i in range(len(graph))]
    assert ("IsSameEnt", ("alice@1",), ("alice@2",)) in names


def test_inspect_reports_predicate_kinds(tmp_path, capsys):
    src = tmp_path / "g.thg"
    src.write_text(
        "#thg v1\n"
        "Oil | a | a | 0 9\n"
        "Put | a | b | 1 2\n"
        "Mix | a,b | c | 3 4\n"
    )
    assert main(["inspect", "--data", str(src)]) == 0
    out = capsys.readouterr().out
    assert "unary" in out and "binary" in out and "n-ary" in out
    assert "graphs: 1" in out


def test_corpus_without_target_label_is_usage_error(tmp_path, rule_file, capsys):
    corpus = str(tmp_path / "corpus")
    assert main(["gen", "--rule", rule_file, "--out", corpus,
                 "--num-pos", "2", "--num-neg", "2", "--noise", "1",
                 "--seed", "1"]) == 0
    assert main(["mine", "--data", corpus, "--walks", "10",
                 "--out", str(tmp_path / "r.txt")]) == 1
    assert "target-label" in capsys.readouterr().err
