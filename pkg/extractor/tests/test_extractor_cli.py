"""Command-line behavior: flag parsing, outputs, and exit codes."""

import os
import subprocess
import sys

import pytest

from conceptmine.dataset import load_dataset
from hsextract.cli import main


def _args(checkpoint, corpus, out, **extra):
    argv = ["--model", checkpoint, "--layers", "0,2", "--corpus", corpus, "--out", out]
    for flag, value in extra.items():
        argv += [f"--{flag.replace('_', '-')}", value]
    return argv


def test_cli_end_to_end(checkpoint, corpus50, tmp_path, capsys):
    corpus, labels = corpus50
    out = str(tmp_path / "out")
    rc = main(_args(checkpoint, corpus, out, labels=labels, span_ngrams="2,3"))
    assert rc == 0
    printed = capsys.readouterr().out
    assert "rows=" in printed and "dim=16" in printed
    for name in ("layer_00.lce1", "layer_02.lce1", "tokens.jsonl", "manifest.json"):
        assert os.path.exists(os.path.join(out, name))
    ds = load_dataset(os.path.join(out, "layer_02.lce1"),
                      os.path.join(out, "tokens.jsonl"))
    assert ds.layer_id == 2


def test_cli_missing_corpus_exits_2(checkpoint, tmp_path, capsys):
    rc = main(_args(checkpoint, str(tmp_path / "nope.txt"), str(tmp_path / "out")))
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_cli_label_mismatch_exits_2(checkpoint, tmp_path, capsys):
    corpus = tmp_path / "c.txt"
    corpus.write_text("the cat sat\n", encoding="utf-8")
    labels = tmp_path / "l.txt"
    labels.write_text("DT NN\n", encoding="utf-8")
    rc = main(_args(checkpoint, str(corpus), str(tmp_path / "out"),
                    labels=str(labels)))
    assert rc == 2
    assert "label/line mismatch" in capsys.readouterr().err


def test_cli_bad_layer_exits_2(checkpoint, tmp_path, capsys):
    corpus = tmp_path / "c.txt"
    corpus.write_text("the cat\n", encoding="utf-8")
    rc = main(["--model", checkpoint, "--layers", "0,99",
               "--corpus", str(corpus), "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "out of range" in capsys.readouterr().err


def test_cli_rejects_malformed_layer_list(checkpoint, tmp_path):
    corpus = tmp_path / "c.txt"
    corpus.write_text("the cat\n", encoding="utf-8")
    with pytest.raises(SystemExit) as exc:
        main(["--model", checkpoint, "--layers", "0,x",
              "--corpus", str(corpus), "--out", str(tmp_path / "out")])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hsextract", "--help"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "hsextract" in proc.stdout and "--layers" in proc.stdout
