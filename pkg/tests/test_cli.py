import json

import numpy as np
import pytest

from discord_gate.cli import (
    EXIT_ANOMALY,
    EXIT_INVARIANT,
    EXIT_MALFORMED,
    EXIT_OK,
    canonical_dumps,
    encode_matrix,
    load_state,
    main,
    report_without_metadata,
    state_to_json,
    write_json,
)
from discord_gate.linalg import RandomSource, haar_unitary
from discord_gate.states import bell_state
from discord_gate.verify import thread_count


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def analyze_json(capsys, path, *extra):
    code, out, err = run(capsys, "analyze", path, "--json", *extra)
    assert code == EXIT_OK, err
    return json.loads(out)


# --- canonical JSON ------------------------------------------------------

def test_canonical_dumps_format():
    text = canonical_dumps({"b": [1, 0.1, -0.0, 1.0, True, None], "a": "x"})
    assert text == '{"a":"x","b":[1,0.10000000000000001,-0.0,1.0,true,null]}'


def test_canonical_dumps_rejects_nan():
    with pytest.raises(ValueError):
        canonical_dumps({"x": float("nan")})


def test_canonical_floats_round_trip():
    g = np.random.default_rng(0)
    xs = list(g.standard_normal(50)) + [1e-300, 5e-324, 1e300, 2.0, -3.0]
    assert json.loads(canonical_dumps(xs)) == xs


# --- generate / load -----------------------------------------------------

def test_generate_cq_then_analyze(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "--kind", "cq", "--count", 3, "--seed", 4, "--out-dir", tmp_path)
    assert code == EXIT_OK
    files = sorted(tmp_path.glob("cq-*.json"))
    assert [f.name for f in files] == ["cq-0.json", "cq-1.json", "cq-2.json"]
    for f in files:
        v = analyze_json(capsys, f)
        assert v["sl"] and v["vqd"] and v["structural_cp"]
        assert v["discord_estimate"] <= 1e-6
    meta = json.loads(files[1].read_text())["metadata"]
    assert meta == {"index": 1, "label": "cq", "seed": 4}


def test_generate_same_seed_identical(tmp_path, capsys):
    for sub in ("a", "b"):
        assert run(capsys, "generate", "--kind", "sl-generic", "--dims", "3x2", "--count", 2,
                   "--seed", 9, "--out-dir", tmp_path / sub)[0] == EXIT_OK
    for name in ("sl-generic-0.json", "sl-generic-1.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("kind", ["product", "cq", "sl-generic", "separable-discordant", "entangled-pure"])
def test_json_round_trip_byte_identical(tmp_path, capsys, kind):
    run(capsys, "generate", "--kind", kind, "--dims", "2x3", "--seed", 1, "--out-dir", tmp_path)
    path = tmp_path / f"{kind}-0.json"
    state, meta = load_state(path)
    again = tmp_path / "again.json"
    write_json(again, state_to_json(state, meta))
    assert again.read_bytes() == path.read_bytes()


def test_entangled_pure_handled(tmp_path, capsys):
    run(capsys, "generate", "--kind", "entangled-pure", "--count", 3, "--seed", 2, "--out-dir", tmp_path)
    for f in sorted(tmp_path.glob("*.json")):
        v = analyze_json(capsys, f, "--budget", 50)
        assert v["vqd"] in (None, False)
        assert not v["cq_basis_found"]
        assert v["discord_estimate"] > 0
        if v["sl"]:
            assert v["certificates"]


def test_generate_unwritable(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "generate", "--out-dir", blocker / "sub")
    assert code == EXIT_MALFORMED
    assert "cannot create" in err


# --- analyze -------------------------------------------------------------

def test_analyze_product(tmp_path, capsys):
    run(capsys, "generate", "--kind", "product", "--out-dir", tmp_path)
    v = analyze_json(capsys, tmp_path / "product-0.json")
    assert v["sl"] and v["vqd"]
    assert v["blocks"] == [[0, 1]]


def test_analyze_bell(tmp_path, capsys):
    path = tmp_path / "bell.json"
    write_json(path, state_to_json(bell_state()))
    v = analyze_json(capsys, path)
    assert v["sl"] is False
    assert v["blocks"] is None and v["vqd"] is None
    assert v["trace_tags"][0][1] == "zero-traceless"
    code, out, _ = run(capsys, "analyze", path)
    assert code == EXIT_OK
    assert "skipped" in out


def test_analyze_with_unitaries(tmp_path, capsys):
    run(capsys, "generate", "--kind", "separable-discordant", "--out-dir", tmp_path)
    us = [encode_matrix(haar_unitary(4, RandomSource(3, i))) for i in range(3)]
    upath = tmp_path / "u.json"
    write_json(upath, {"unitaries": us})
    v = analyze_json(capsys, tmp_path / "separable-discordant-0.json", "--unitary", upath, "--budget", 100)
    assert len(v["choi_min_eig"]) == 3
    assert v["structural_cp"] is False
    assert v["certificates"][0]["min_choi_eigenvalue"] < -1e-7


def test_analyze_same_seed_same_output(tmp_path, capsys):
    run(capsys, "generate", "--kind", "sl-generic", "--out-dir", tmp_path)
    path = tmp_path / "sl-generic-0.json"
    outs = [run(capsys, "analyze", path, "--json", "--budget", 20, "--seed", 5)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_truncated_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dim_s": 2, "dim_b": 2, "matrix": [[[1, 0]')
    code, _, err = run(capsys, "analyze", path)
    assert code == EXIT_MALFORMED
    assert "bad.json:1:" in err


def test_missing_key_and_bad_shape(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dim_s": 2, "dim_b": 2}')
    assert run(capsys, "analyze", path)[0] == EXIT_MALFORMED
    path.write_text(json.dumps({"dim_s": 2, "dim_b": 2, "matrix": [[[1, 0], [0, 0]]]}))
    assert run(capsys, "analyze", path)[0] in (EXIT_MALFORMED, EXIT_INVARIANT)
    assert run(capsys, "analyze", tmp_path / "missing.json")[0] == EXIT_MALFORMED


def test_invariant_violation(tmp_path, capsys):
    path = tmp_path / "bad.json"
    write_json(path, {"dim_s": 2, "dim_b": 2, "matrix": encode_matrix(np.eye(4) / 2)})
    code, _, err = run(capsys, "analyze", path)
    assert code == EXIT_INVARIANT
    assert "unit-trace" in err


def test_non_unitary_file(tmp_path, capsys):
    run(capsys, "generate", "--kind", "cq", "--out-dir", tmp_path)
    upath = tmp_path / "u.json"
    write_json(upath, {"matrix": encode_matrix(2 * np.eye(4))})
    code, _, err = run(capsys, "analyze", tmp_path / "cq-0.json", "--unitary", upath)
    assert code == EXIT_INVARIANT
    assert "unitary" in err


# --- verify --------------------------------------------------------------

def test_verify_byte_identical(tmp_path, capsys):
    args = ["verify", "--families", "cq,sl-generic", "--dims", "2x2,3x2", "--n-states", 4,
            "--n-unitaries", 3, "--seed", 21]
    for name in ("a.json", "b.json"):
        assert run(capsys, *args, "--out", tmp_path / name)[0] == EXIT_OK
    a, b = (json.loads((tmp_path / n).read_text()) for n in ("a.json", "b.json"))
    assert "timestamp" in a["metadata"]
    assert canonical_dumps(report_without_metadata(a)) == canonical_dumps(report_without_metadata(b))


def test_verify_sufficiency_only(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, text, _ = run(capsys, "verify", "--families", "cq", "--n-states", 5, "--n-unitaries", 5, "--out", out)
    assert code == EXIT_OK
    assert json.loads(out.read_text())["families"]["cq"]["violations_found"] == 0
    assert "anomalies: 0" in text


def test_verify_necessity_only(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "--families", "separable-discordant", "--n-states", 8, "--out", out)
    assert code == EXIT_OK
    t = json.loads(out.read_text())["families"]["separable-discordant"]
    assert t["violations_found"] == t["tested"] == 8


def test_verify_anomaly_exit(capsys):
    # a one-level bath carries no correlations, so no certificate exists
    code, text, _ = run(capsys, "verify", "--families", "separable-discordant", "--dims", "2x1",
                        "--n-states", 3, "--budget", 5)
    assert code == EXIT_ANOMALY
    assert "anomalies: 0" not in text


def test_verify_bad_flags(capsys):
    assert run(capsys, "verify", "--families", "bogus")[0] == EXIT_MALFORMED
    assert run(capsys, "verify", "--dims", "2by2")[0] == EXIT_MALFORMED
    assert run(capsys, "verify", "--n-states", 0)[0] == EXIT_MALFORMED
    assert run(capsys, "frobnicate")[0] == EXIT_MALFORMED


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("DISCORD_GATE_THREADS", "2")
    assert thread_count(8) == 2
    monkeypatch.setenv("DISCORD_GATE_THREADS", "junk")
    assert thread_count(3) == 3
    monkeypatch.delenv("DISCORD_GATE_THREADS")
    assert thread_count(5) == 5
