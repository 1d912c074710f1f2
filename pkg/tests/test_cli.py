import io
import json
import subprocess
import sys

import jsonschema
import pytest

from rlam.cli import SCHEMA_PATH, run

from conftest import EXAMPLES, golden_cases

SCHEMA = json.loads(SCHEMA_PATH.read_text())


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("stem,argv,expected,code", golden_cases(),
                         ids=lambda v: v if isinstance(v, str) else None)
def test_golden(stem, argv, expected, code):
    got_code, out, _ = call(*argv)
    assert out == expected
    assert got_code == code


def test_every_example_has_a_golden():
    stems = {p.stem for p in EXAMPLES.glob("*.rlam")}
    assert stems and stems == {p.stem for p in EXAMPLES.glob("*.expected")}


def test_documented_examples():
    assert call("grad", "examples/mul.rlam", "--at", "2,3")[1] == "[3, 2]\n"
    assert call("ad", "examples/lit.rlam")[1] == "(5.0, 0.0)\n"
    code, out, _ = call("check", "examples/fig_b.rlam")
    assert code == 0 and out.splitlines()[0] == "Accepted"


def _subcommands(path):
    cmds = [["typecheck", str(path)], ["ad", str(path)], ["eval", str(path)],
            ["poly", str(path)], ["grad", str(path), "--at", "1,2"], ["check", str(path)],
            ["probe", str(path)]]
    return [[*c, "--json"] for c in cmds]


@pytest.mark.parametrize("path", sorted(EXAMPLES.glob("*.rlam")), ids=lambda p: p.stem)
def test_json_output_validates(path):
    for argv in _subcommands(path):
        code, out, _ = call(*argv)
        doc = json.loads(out)
        jsonschema.validate(doc, SCHEMA)
        assert code in (0, 1, 2)
        if code == 0:
            assert doc["status"] in ("ok", "accepted", "continuous", "inconclusive")


def test_exit_code_taxonomy():
    assert call("check", "examples/fig_a.rlam")[0] == 1
    assert call("probe", "examples/fig_a.rlam")[0] == 1
    assert call("check", "examples/display1.rlam")[0] == 0


def test_type_error_exits_one(tmp_path):
    f = tmp_path / "bad.rlam"
    f.write_text("fst 1.0\n")
    code, out, err = call("typecheck", str(f))
    assert code == 1 and "projection of non-product" in err


def test_parse_error_exits_two(tmp_path):
    f = tmp_path / "bad.rlam"
    f.write_text("(1.0,\n")
    code, _, err = call("typecheck", str(f))
    assert code == 2 and "2:1" in err
    code, out, _ = call("typecheck", str(f), "--json")
    doc = json.loads(out)
    assert doc["status"] == "parse-error"
    jsonschema.validate(doc, SCHEMA)


def test_usage_errors_exit_two():
    assert call()[0] == 2
    assert call("frobnicate")[0] == 2
    assert call("grad", "examples/mul.rlam")[0] == 2
    assert call("grad", "examples/mul.rlam", "--at", "1,2,3")[0] == 1
    assert call("eval", "missing.rlam")[0] == 2


def test_grad_check_fd():
    code, out, _ = call("grad", "examples/sincos_open.rlam", "--at", "0.3,-1.2", "--check-fd",
                        "--json")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["agree"] is True
    assert len(doc["result"]["residuals"]) == 2


def test_eval_curried_and_packed():
    assert call("eval", "examples/sincos.rlam", "--args", "0,0")[1] == "1.0\n"
    assert call("eval", "examples/mul.rlam", "--args", "2,3")[1] == "6.0\n"


def test_check_all():
    code, out, _ = call("check", "--all", "examples")
    lines = out.splitlines()
    assert "fig_a.rlam: Rejected" in lines and "fig_b.rlam: Accepted" in lines
    assert code == 1


def test_seed_flag_and_environment(monkeypatch):
    a = call("probe", "examples/fig_b.rlam", "--seed", "5", "--json")[1]
    monkeypatch.setenv("RLAM_SEED", "5")
    b = call("probe", "examples/fig_b.rlam", "--json")[1]
    assert a == b


def test_probe_domain_must_use_program_variables():
    code, _, err = call("probe", "examples/fmin.rlam", "--domain", "a >= 0")
    assert code == 2 and "variables" in err


def test_aliases(tmp_path):
    manifest = tmp_path / "aliases.json"
    manifest.write_text(json.dumps({"aliases": {"times": "mul"}}))
    f = tmp_path / "t.rlam"
    f.write_text("@vars x y\ntimes(x, y)\n")
    assert call("--aliases", str(manifest), "grad", str(f), "--at", "2,3")[1] == "[3, 2]\n"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rlam", "grad", "examples/mul.rlam", "--at", "2,3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "[3, 2]\n"


def test_common_flags_before_and_after_subcommand():
    before = call("--json", "--seed", "9", "probe", "examples/fig_b.rlam")[1]
    after = call("probe", "examples/fig_b.rlam", "--json", "--seed", "9")[1]
    assert before == after and json.loads(before)["status"] == "continuous"
