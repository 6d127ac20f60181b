import csv
import io
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from sqlab import __version__
from sqlab.apstats import AffineMap, correlation, error_vector, variance
from sqlab.cli import invocation, run


def call(argv, capsys):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# sqlab ") and lines[0].endswith(f"(sqlab {__version__})")
    return lines[1], list(csv.reader(io.StringIO("\n".join(lines[2:]))))


def test_evector(tmp_path, capsys):
    out = tmp_path / "ev.csv"
    code, _, _ = call(["evector", "--x", "1000000", "--q", "997", "--out", str(out)], capsys)
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0] == f"# sqlab evector --x 1000000 --q 997 (sqlab {__version__})"
    header, body = rows(text)
    assert header == "a,count,E"
    ev = error_vector(10**6, 997)
    assert len(body) == 997
    for a, count, E in body:
        assert int(count) == ev.counts[int(a)]
        assert float(E) == ev.E[int(a)]


def test_correlate_row(capsys):
    code, out, _ = call(["correlate", "--x", "1000000", "--q", "997", "--r", "-1", "--s", "1"], capsys)
    assert code == 0
    header, body = rows(out)
    assert header == "X,q,r,s,S_gamma,full_sum,C,variance,ratio"
    assert len(body) == 1
    ev = error_vector(10**6, 997)
    C = float(body[0][6])
    assert C == correlation(ev, AffineMap(-1, 1))
    assert float(body[0][7]) == variance(ev)
    assert float(body[0][8]) == pytest.approx(C / variance(ev), rel=1e-15)


def test_seventeen_digits(capsys):
    _, out, _ = call(["bigsigma", "--x", "10000", "--q", "101", "--r", "-1", "--s", "1"], capsys)
    header, body = rows(out)
    assert header == "X,q,r,s,sigma,main_term,rel_dev"
    sigma = body[0][4]
    assert sigma == f"{float(sigma):.17g}"


@pytest.mark.parametrize("argv,header", [
    (["pairs", "--x", "10000", "--l", "1:5"], "l,r,S,f,interval,main,abs_dev,rel_dev"),
    (["decay", "--q", "1009", "--samples", "2"], "q,epsilon,N,a,abs_sum,ratio"),
    (["sieve-count", "--x", "100", "1e4"], "X,Q,Q_mobius,main,normalized_dev"),
    (["variance", "--x", "10000", "--q", "101"], "X,q,variance,sqrt_Xq,ratio"),
    (["density", "--l", "1,4", "--r", "2"], "l,r,rational_part,includes_c2,f"),
    (["expsum", "--n", "4", "--q", "5", "--a", "1"], "N,q,a,re,im,abs_sum,ratio"),
    (["asum", "--kind", "a", "--y", "5", "--q", "101", "--a", "1", "--tolerance", "1e-3"],
     "kind,Y,q,a,r,s,value,cutoff,m_cutoff,tail_bound"),
    (["asum", "--kind", "b", "--y", "5", "--q", "101", "--a", "1", "--r", "2", "--cutoff", "1000"],
     "kind,Y,q,a,r,s,value,cutoff,m_cutoff,tail_bound"),
    (["asum", "--kind", "g", "--y", "5", "--q", "101", "--s", "2", "--r", "-1", "--cutoff", "1000",
      "--m-cutoff", "16"], "kind,Y,q,a,r,s,value,cutoff,m_cutoff,tail_bound"),
])
def test_headers(argv, header, capsys):
    code, out, err = call(argv, capsys)
    assert code == 0, err
    assert rows(out)[0] == header


def test_pairs_values(capsys):
    _, out, _ = call(["pairs", "--x", "10", "--l", "1", "--r", "1"], capsys)
    _, body = rows(out)
    assert body[0][:3] == ["1", "1", "4"]


@pytest.mark.parametrize("argv", [
    ["evector", "--x", "100", "--q", "997"],
    ["correlate", "--x", "1000", "--q", "97", "--r", "-1", "--s", "0"],
    ["correlate", "--x", "1000", "--q", "97", "--r", "97", "--s", "1"],
    ["correlate", "--x", "1000", "--q", "97", "--r", "0", "--s", "1"],
    ["evector", "--x", "1000", "--q", "97", "--bogus"],
    ["evector", "--x", "1000", "--q", "97", "--workers", "0"],
    ["asum", "--kind", "a", "--y", "5", "--q", "101", "--a", "1", "--tolerance", "-1"],
    ["asum", "--kind", "b", "--y", "30", "--q", "101", "--a", "1", "--r", "-1"],
    ["asum", "--kind", "g", "--y", "5", "--q", "101", "--r", "-1"],
    ["bigsigma", "--x", "1000", "--q", "7", "--r", "7", "--s", "1"],
    ["selftest", "--only", "13"],
    ["nonsense"],
    [],
])
def test_validation_exit_2(argv, capsys):
    code, out, err = call(argv, capsys)
    assert code == 2
    assert "error" in err


def test_allow_flags(capsys):
    code, out, _ = call(["evector", "--x", "100", "--q", "997", "--allow-degenerate"], capsys)
    assert code == 0
    code, out, _ = call(["correlate", "--x", "10000", "--q", "101", "--r", "-1", "--s", "0", "--allow-homothety"],
                        capsys)
    assert code == 0
    ev = error_vector(10**4, 101)
    assert float(rows(out)[1][0][6]) == correlation(ev, AffineMap(-1, 0), require_hypothesis=False)


def test_runtime_error_exit_1(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = call(["density", "--l", "1", "--out", str(blocker / "sub" / "o.csv")], capsys)
    assert code == 1
    assert "runtime error" in err


@pytest.mark.parametrize("argv", [
    ["evector", "--x", "300000", "--q", "101"],
    ["correlate", "--x", "300000", "--q", "101", "--r", "2", "--s", "5"],
    ["pairs", "--x", "300000", "--l", "1:30", "--r", "-1"],
    ["bigsigma", "--x", "300000", "--q", "101", "--r", "-1", "--s", "3"],
    ["decay", "--q", "1009,10007", "--samples", "3"],
    ["expsum", "--n", "100000", "--q", "10007", "--a", "3"],
    ["asum", "--kind", "g", "--y", "20", "--q", "101", "--s", "2", "--r", "-2", "--cutoff", "5000"],
])
def test_workers_and_cache_byte_identical(argv, tmp_path, capsys):
    _, ref, _ = call(argv, capsys)
    _, w8, _ = call(argv + ["--workers", "8"], capsys)
    _, cached, _ = call(argv + ["--cache-dir", str(tmp_path)], capsys)
    _, cached_again, _ = call(argv + ["--cache-dir", str(tmp_path), "--workers=3"], capsys)
    assert ref == w8 == cached == cached_again


def test_env_cache_dir_overrides_flag(tmp_path, monkeypatch, capsys):
    env_dir, flag_dir = tmp_path / "env", tmp_path / "flag"
    monkeypatch.setenv("SQLAB_CACHE_DIR", str(env_dir))
    code, _, _ = call(["evector", "--x", "5000", "--q", "7", "--cache-dir", str(flag_dir)], capsys)
    assert code == 0
    assert list(env_dir.glob("*.bin"))
    assert not flag_dir.exists()


def test_svg_outputs(tmp_path, capsys):
    for argv in (["decay", "--q", "1009", "--samples", "2"], ["pairs", "--x", "10000", "--l", "1:10"],
                 ["evector", "--x", "10000", "--q", "31"], ["sieve-count", "--x", "100", "1000", "10000"]):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert call(argv + ["--svg", str(a)], capsys)[0] == 0
        assert call(argv + ["--svg", str(b)], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        ET.parse(a)


def test_invocation_drops_neutral_flags():
    assert invocation(["evector", "--x", "10", "--q", "3", "--workers", "8", "--cache-dir=/tmp/c",
                       "--out", "o.csv", "--svg", "p.svg"]) == "sqlab evector --x 10 --q 3"


def test_selftest_subset(tmp_path, capsys):
    out = tmp_path / "self.csv"
    code, _, err = call(["selftest", "--only", "4,5,12", "--compare-workers", "1,2", "--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "criterion,name,status,measured,tolerance"
    assert [l.split(",")[0] for l in lines[2:]] == ["4", "5", "12"]
    assert "[pass] criterion 12" in err


def test_selftest_reports_failure(capsys):
    code, out, err = call(["selftest", "--only", "2"], capsys)
    assert code == 1
    assert "2,Gauss magnitude,FAIL" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sqlab", "density", "--l", "4"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[2].startswith("4,1,3/2,true,")
