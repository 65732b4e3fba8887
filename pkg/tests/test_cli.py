"""Command-line interface: verbs, exit codes, certificate schema,
and deterministic output."""

import json

import pytest

from nestsum.cli import main, EXIT_OK, EXIT_PARSE, EXIT_SCOPE, EXIT_ORACLE


def _run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_telescope_emits_passing_certificate(capsys, tmp_path):
    out_path = tmp_path / "cert.json"
    code, out, err = _run(
        ["telescope", "sum(i, 1, n, 1/(i*(i+1)))",
         "--range", "1:20", "-o", str(out_path)], capsys)
    assert code == EXIT_OK
    assert "oracle: pass" in out
    doc = json.loads(out_path.read_text())
    assert doc["schema"] == 1
    assert doc["verb"] == "telescope"
    assert doc["oracle"]["pass"] is True
    assert doc["oracle"]["checked"] == 20
    assert set(doc) >= {"input", "result", "element", "tower", "flags"}


def test_simplify_inline_json_on_stdout(capsys):
    code, out, err = _run(["simplify", "S[1,1](n)", "--range", "1:15"],
                          capsys)
    assert code == EXIT_OK
    brace = out.index("{")
    doc = json.loads(out[brace:])
    assert doc["verb"] == "simplify"
    assert doc["oracle"]["checked"] == 15


def test_certificates_are_byte_identical(capsys, tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    for p in (p1, p2):
        code, _, _ = _run(
            ["simplify", "sum(i, 1, n, S[1](i))", "--range", "1:10",
             "-o", str(p)], capsys)
        assert code == EXIT_OK
    assert p1.read_bytes() == p2.read_bytes()
    # timing goes to stderr only, never into the certificate
    assert b"elapsed" not in p1.read_bytes()


def test_timing_on_stderr(capsys):
    _, out, err = _run(["verify", "S[1](n) = S[1](n)", "--range", "1:5"],
                       capsys)
    assert "elapsed:" in err
    assert "elapsed:" not in out


def test_verify_pass_and_fail(capsys):
    code, out, _ = _run(
        ["verify", "S[1,1](n) = (S[1](n)^2 + S[2](n))/2",
         "--range", "1:25"], capsys)
    assert code == EXIT_OK
    assert "pass" in out

    code, out, _ = _run(
        ["verify", "S[1,1](n) = (S[1](n)^2 - S[2](n))/2",
         "--range", "1:25"], capsys)
    assert code == EXIT_ORACLE
    assert "counterexample" in out


def test_parse_error_exit_code(capsys):
    code, _, err = _run(["simplify", "sum(i, 1, n"], capsys)
    assert code == EXIT_PARSE
    assert "parse error" in err


def test_scope_error_exit_code(capsys):
    # a malformed range is rejected by the argument parser itself
    with pytest.raises(SystemExit) as exc:
        main(["verify", "1/(n-3) = 1/(n-4)", "--range", "bad-range"])
    assert exc.value.code == EXIT_PARSE
    capsys.readouterr()
    code, _, err = _run(
        ["csum", "sum(i, 1, n, 2^i)", "--param", "m"], capsys)
    assert code == EXIT_SCOPE


def test_csum_recurrence_certificate(capsys, tmp_path):
    out_path = tmp_path / "rec.json"
    code, out, _ = _run(
        ["csum", "sum(k, 0, m, binom(m, k))", "--param", "m",
         "--max-order", "2", "--check", "0:15", "-o", str(out_path)],
        capsys)
    assert code == EXIT_OK
    doc = json.loads(out_path.read_text())
    assert doc["verb"] == "csum"
    assert doc["kind"] == "recurrence"
    assert doc["order"] == 1
    assert doc["oracle"]["pass"] is True
    assert "recurrence" in doc and "certificate_element" in doc


def test_relations_verb(capsys, tmp_path):
    out_path = tmp_path / "rel.json"
    code, out, _ = _run(
        ["relations", "S[4,2](n)", "S[2,4](n)", "--range", "1:20",
         "-o", str(out_path)], capsys)
    assert code == EXIT_OK
    doc = json.loads(out_path.read_text())
    assert doc["verb"] == "relations"
    assert doc["certificates"]
    assert all(c["oracle"]["pass"] for c in doc["certificates"])
    assert "depth_profile" in doc


def test_expression_from_file(capsys, tmp_path):
    f = tmp_path / "expr.txt"
    f.write_text("sum(i, 1, n, 1/(i*(i+1)))\n")
    code, out, _ = _run(["telescope", str(f), "--range", "1:10"], capsys)
    assert code == EXIT_OK


def test_m_max_env_default(monkeypatch):
    from nestsum.cli import build_parser
    monkeypatch.setenv("NESTSUM_M_MAX", "7")
    args = build_parser().parse_args(["simplify", "S[1](n)"])
    assert args.m_max == 7
