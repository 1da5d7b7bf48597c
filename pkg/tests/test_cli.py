import json
import subprocess
import sys

import pytest

from ellislab.cli import RunConfig, main, run

GAMMA = "[0,0,3,3],[1,1,2,2],[0,3,0,3],[2,1,2,1]"


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_text(capsys, corpus_dir):
    code, out, err = call(capsys, "analyze", str(corpus_dir / "thue_morse.sub"), "--samples", "4")
    assert code == 0 and not err
    assert "verdict: HUGE" in out


def test_classify_json(capsys, corpus_dir):
    code, out, _ = call(capsys, "classify", str(corpus_dir / "toeplitz_abbaa.sub"), "--format", "json",
                        "--samples", "4")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "SMALL"
    assert data["tool"]["name"] == "ellislab" and data["config"]["samples"] == 4


def test_columns(capsys, corpus_dir):
    code, out, _ = call(capsys, "columns", str(corpus_dir / "thue_morse.sub"), "--format", "json")
    data = json.loads(out)
    assert data["columns"] == [[0, 1], [1, 0]] and data["column_group_order"] == 2


def test_semigroup_and_rees(capsys):
    code, out, _ = call(capsys, "semigroup", "--generators", "[1,0],[0,0]", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["size"] == 4 and len(data["kernel"]) == 2
    code, out, _ = call(capsys, "rees", "--generators", GAMMA)
    assert code == 0
    assert "|I| = 2, |Lambda| = 2, |H| = 2" in out and "orthodox = False" in out


def test_fiber(capsys, corpus_dir):
    code, out, _ = call(capsys, "fiber", str(corpus_dir / "thue_morse.sub"),
                        "--stream", "digits=;tail=zero", "--format", "json")
    data = json.loads(out)
    assert data["points"] == ["a.a", "a.b", "b.a", "b.b"] and data["transitive"] is False


@pytest.mark.parametrize("argv, fragment", [
    (["analyze"], "needs a substitution file"),
    (["analyze", "/nonexistent.sub"], "No such file"),
    (["semigroup"], "needs --generators"),
    (["semigroup", "--generators", "[0,1],[0]"], "degree"),
    (["semigroup", "--generators", "[0,5]"], "out of range"),
    (["fiber", "CORPUS/thue_morse.sub"], "needs --stream"),
    (["fiber", "CORPUS/thue_morse.sub", "--stream", "digits=7;tail=zero"], "bad digit stream"),
    (["analyze", "CORPUS/thue_morse.sub", "--level", "0"], "level"),
])
def test_errors_exit_one(capsys, corpus_dir, argv, fragment):
    argv = [a.replace("CORPUS", str(corpus_dir)) for a in argv]
    code, out, err = call(capsys, *argv)
    assert code == 1 and not out
    assert err.startswith("error:") and fragment in err and err.count("\n") == 1


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and "invalid choice" in err


def test_bad_substitution_file(capsys, tmp_path):
    p = tmp_path / "bad.sub"
    p.write_text("a -> a b\nb -> b\n")
    code, _, err = call(capsys, "analyze", str(p))
    assert code == 1 and err.startswith("error: line 2")


def test_cap_exceeded_exits_two(capsys):
    code, out, err = call(capsys, "semigroup", "--generators", "[1,0,2],[1,2,0],[0,0,1]",
                          "--element-cap", "10")
    assert code == 2 and not out and err.startswith("error:")


def test_unknown_flag_exits_one():
    proc = subprocess.run([sys.executable, "-m", "ellislab", "analyze", "--nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stderr.startswith("error:")


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig("analyze", samples=-1)
    with pytest.raises(ValueError):
        RunConfig("analyze", format="xml")


def test_json_byte_identical(corpus_dir):
    cfg = RunConfig("analyze", str(corpus_dir / "s3_bijective.sub"), samples=6, format="json")
    assert run(cfg)[1] == run(cfg)[1]
