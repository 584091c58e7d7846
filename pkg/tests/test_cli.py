from hesselab.cli import Config, main, run_config
from hesselab.potentials import CATALOG_NAMES, catalog_entries


def test_catalog_listing(capsys):
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "cone2d" in out
    assert "calabi_ball" in out
    assert "|x1| > |x2|" in out  # domain description present
    assert len([ln for ln in out.splitlines() if ln.strip()]) >= 7


def test_catalog_entries_complete():
    names = [n for n, _ in catalog_entries()]
    assert names == list(CATALOG_NAMES)


def certify_config(tmp_path, name="cone2d", expect="NONPOSITIVE"):
    cfg = tmp_path / "certify.ini"
    cfg.write_text(f"""
[experiment]
kind = certify

[potential]
name = {name}

[certify]
quantity = ABC
count = 8
seed = 3
expect = {expect}

[output]
dir = {tmp_path / 'out'}
""")
    return cfg


def test_run_certify_config(tmp_path, capsys):
    code = main(["run", str(certify_config(tmp_path))])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out
    cert = tmp_path / "out" / "certificate_cone2d_ABC.txt"
    assert cert.exists()
    assert "NONPOSITIVE" in cert.read_text()


def test_run_config_property_failure_exits_1(tmp_path, capsys):
    code = main(["run", str(certify_config(tmp_path, expect="NONNEGATIVE"))])
    assert code == 1
    assert "FAIL" in capsys.readouterr().out


def test_unknown_potential_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("""
[experiment]
kind = certify

[potential]
name = not_a_potential

[certify]
quantity = ABC
""")
    assert main(["run", str(cfg)]) == 2


def test_unknown_kind_exits_2(tmp_path):
    cfg = tmp_path / "bad2.ini"
    cfg.write_text("[experiment]\nkind = make-coffee\n")
    assert main(["run", str(cfg)]) == 2


def test_missing_config_file_exits_2(tmp_path):
    assert main(["run", str(tmp_path / "nowhere.ini")]) == 2


def test_trace_suite_config(tmp_path, capsys):
    cfg = tmp_path / "trace.ini"
    cfg.write_text(f"""
[experiment]
kind = trace-suite

[suite]
trials = 500
seed = 5

[output]
dir = {tmp_path / 'out'}
""")
    assert main(["run", str(cfg)]) == 0
    report = (tmp_path / "out" / "trace_suite.txt").read_text()
    assert "min_value" in report


def test_scan_outputs_are_deterministic(tmp_path):
    base = """
[experiment]
kind = curvature-scan

[potential]
name = calabi_ball
n = 2

[scan]
count = 6
seed = 4
extent = 0.8

[output]
dir = {out}
"""
    runs = []
    for sub in ("a", "b"):
        cfg = tmp_path / f"scan_{sub}.ini"
        cfg.write_text(base.format(out=tmp_path / sub))
        assert main(["run", str(cfg)]) == 0
        runs.append((tmp_path / sub / "curvature_scan.csv").read_bytes())
    assert runs[0] == runs[1]
    header = runs[0].decode().splitlines()[0]
    assert header.startswith("x1,x2,S,O,Hmin_pol,ABC_min")


def test_ode_config_dict():
    cfg = Config.from_dict({
        "experiment": {"kind": "ode-run"},
        "ode": {"a0": -1.0, "time": 0.25, "dt": 1e-3},
        "output": {"dir": "/tmp/hesselab_cli_test_ode"},
    })
    assert run_config(cfg) == 0
