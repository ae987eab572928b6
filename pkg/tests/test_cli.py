import json
import subprocess
import sys

import pytest

from lossyparity.cli import main
from lossyparity.game import Region
from lossyparity.lcs import expand_bounded, load_lcs, parse_config
from lossyparity.oracle import classify

RANK0 = "lcs rank=0 lambda=0.5\nchannels c\nmessages a\nstate q player=0 color=0\nstate r player=1 color=0\n" \
        "trans q -> r c!a\ntrans r -> q c?a\n"


def report(d):
    return json.loads((d / "report.json").read_text())


def test_solve_explicit_ladder(bundled_path, tmp_path):
    assert main(["solve-explicit", str(bundled_path("ladder4.game")), "--out", str(tmp_path)]) == 0
    part = json.loads((tmp_path / "partition.json").read_text())
    assert part["as_winner0"] == ["s0", "s1", "s2", "s3", "s4"]
    assert report(tmp_path)["status"] == "ok"
    assert (tmp_path / "certificate.json").exists()


def test_solve_explicit_flat_text(bundled_path, capsys):
    assert main(["solve-explicit", str(bundled_path("flat.game")), "--format", "text"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1:] == ["as_winner1: ", "both_wpp: "]
    assert out[0].startswith("as_winner0: ")


def test_malformed_game(tmp_path, capsys):
    bad = tmp_path / "bad.game"
    bad.write_text("game rank=1\nstate a owner=0 color=0\nedge a -> nowhere\n")
    out = tmp_path / "out"
    assert main(["solve-explicit", str(bad), "--out", str(out)]) == 2
    assert "line 3" in capsys.readouterr().err
    rep = report(out)
    assert rep["status"] == "invalid-input" and "line 3" in rep["error"]


def test_missing_file(tmp_path):
    assert main(["solve-lcs", str(tmp_path / "nope.lcs"), "--out", str(tmp_path)]) == 2


@pytest.fixture
def prodcons_bundle(bundled_path, tmp_path):
    out = tmp_path / "bundle"
    assert main(["solve-lcs", str(bundled_path("prodcons.lcs")), "--out", str(out)]) == 0
    return out


def test_member_matches_oracle(prodcons_bundle, bundled_path, capsys):
    capsys.readouterr()
    lit = "q0 | c= | phase=1"
    assert main(["member", str(prodcons_bundle), lit, "--region", "as_winner1"]) == 0
    got = capsys.readouterr().out.strip()
    sys_ = load_lcs(bundled_path("prodcons.lcs"))
    e = expand_bounded(sys_, 2)
    oracle = classify(e.game).of(1, e.ids[parse_config(sys_, lit)]) == "almost-sure"
    assert got == ("true" if oracle else "false") == "true"


def test_member_rank_zero(tmp_path, capsys):
    src = tmp_path / "r0.lcs"
    src.write_text(RANK0)
    assert main(["solve-lcs", str(src), "--out", str(tmp_path / "b")]) == 0
    for lit in ("q | c= | phase=1", "r | c=aaa | phase=0"):
        capsys.readouterr()
        assert main(["member", str(tmp_path / "b"), lit]) == 0
        assert capsys.readouterr().out.strip() == "true"


def test_strategy_step(prodcons_bundle, capsys):
    capsys.readouterr()
    assert main(["strategy-step", str(prodcons_bundle), "q1 | c=a | phase=1"]) == 0
    assert capsys.readouterr().out.strip() == "q0 | c= | phase=0"
    assert main(["strategy-step", str(prodcons_bundle), "q1 | c=a | phase=0"]) == 4
    assert "wrong-phase" in capsys.readouterr().err
    assert main(["strategy-step", str(prodcons_bundle), "q0 | c= | phase=1"]) == 4
    assert "not-winning-here" in capsys.readouterr().err
    assert main(["strategy-step", str(prodcons_bundle), "q9 | c= | phase=1"]) == 2


@pytest.mark.parametrize("name", ["prodcons.lcs", "gate.lcs", "relay.lcs", "sendloop.lcs"])
def test_crosscheck_passes(bundled_path, tmp_path, name):
    assert main(["crosscheck", str(bundled_path(name)), "--k", "2", "--samples", "5", "--out", str(tmp_path)]) == 0
    checks = json.loads((tmp_path / "crosscheck.json").read_text())
    assert all(c["fail"] == 0 for c in checks.values())
    assert checks["pointwise-pre-exists"]["pass"] > 0


def test_crosscheck_k0(bundled_path, tmp_path):
    assert main(["crosscheck", str(bundled_path("gate.lcs")), "--k", "0", "--samples", "2", "--out", str(tmp_path)]) == 0


def test_crosscheck_explicit(bundled_path, tmp_path):
    assert main(["crosscheck", str(bundled_path("split.game")), "--out", str(tmp_path)]) == 0


def test_crosscheck_detects_corruption(bundled_path, tmp_path, capsys):
    bundle = tmp_path / "b"
    assert main(["solve-lcs", str(bundled_path("relay.lcs")), "--out", str(bundle)]) == 0
    # move both_wpp into as_winner0: the stored partition no longer matches the certificate
    a0 = json.loads((bundle / "as_winner0.json").read_text())
    both = json.loads((bundle / "both_wpp.json").read_text())
    (bundle / "as_winner0.json").write_text(json.dumps({**a0, **both}))
    code = main(["crosscheck", str(bundled_path("relay.lcs")), "--result", str(bundle), "--k", "1",
                 "--samples", "2", "--out", str(tmp_path / "cc")])
    assert code == 1
    err = capsys.readouterr().err
    assert "FAIL bundle-consistency" in err
    assert report(tmp_path / "cc")["status"] == "check-failed"


def test_crosscheck_k_limit(bundled_path):
    assert main(["crosscheck", str(bundled_path("gate.lcs")), "--k", "9"]) == 2


def test_caps(bundled_path, tmp_path):
    assert main(["solve-lcs", str(bundled_path("relay.lcs")), "--iter-cap", "0", "--out", str(tmp_path)]) == 3
    assert report(tmp_path)["status"] == "cap-exceeded"
    assert main(["solve-lcs", str(bundled_path("relay.lcs")), "--dfa-cap", "2", "--out", str(tmp_path)]) == 3


def _strip(rep):
    rep["metrics"].pop("wall_time")
    return rep


def test_solve_lcs_is_byte_identical(bundled_path, tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["solve-lcs", str(bundled_path("relay.lcs")), "--out", str(o)]) == 0
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for f in files:
        if f != "report.json":
            assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes(), f
    assert _strip(report(outs[0])) == _strip(report(outs[1]))


@pytest.mark.parametrize(
    "src, start, extra",
    [
        ("gate.lcs", "s | | phase=1", ["--p0", "solver", "--target", "w"]),
        ("split.game", "r", ["--p0", "solver", "--target", "b"]),
    ],
)
def test_simulate_is_byte_identical(bundled_path, tmp_path, src, start, extra):
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        argv = ["simulate", str(bundled_path(src)), "--start", start, "--trials", "50", "--horizon", "30",
                "--seed", "4", "--out", str(o)] + extra
        assert main(argv) == 0
    assert (outs[0] / "playstats.json").read_bytes() == (outs[1] / "playstats.json").read_bytes()
    assert json.loads((outs[0] / "playstats.json").read_text())["rng"] == "PCG64"


def test_simulate_bad_target(bundled_path):
    assert main(["simulate", str(bundled_path("gate.lcs")), "--start", "s | | phase=1", "--target", "nowhere"]) == 2
    assert main(["simulate", str(bundled_path("gate.lcs")), "--start", "s | | phase=1", "--trials", "0"]) == 2


def test_corpus(tmp_path):
    assert main(["corpus", "--kind", "ladder", "--count", "3", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.glob("*.game")) == [f"ladder-00000{i}.game" for i in range(3)]
    assert main(["corpus", "--kind", "random", "--count", "2"]) == 2


def test_module_entry_point(bundled_path):
    proc = subprocess.run(
        [sys.executable, "-m", "lossyparity", "solve-explicit", str(bundled_path("split.game"))],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["both_wpp"] == ["r"]
    assert json.loads(proc.stderr)["status"] == "ok"
