import csv
import io
import json

import pytest

from pcfbounds.cli import EXIT_CHECK, EXIT_NUMERIC, EXIT_OK, EXIT_PARAMS, compare_table, main, parse_complex, parse_real
from mpmath import mp, mpf, mpc, sqrt, pi


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_numbers():
    with mp.workdps(30):
        assert parse_real("1/2") == mpf(1) / 2
        assert parse_complex("3+4j") == mpc(3, 4)
        assert parse_complex("10@1") == mpc(-10, 0)
        assert abs(parse_complex("2@1/2") - mpc(0, 2)) < mpf("1e-25")
        assert parse_complex("7") == 7


def test_spot_check(capsys):
    code, out, _ = run(capsys, "eval", "--method", "uniform-pos", "--a", "100", "--t", "50", "--n", "3", "--oracle", "--format", "json")
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["partial_sum"] == "0.99999962523819834799"
    assert rec["exact_value"] == "0.99999962523819834461"
    assert set(rec) >= {"params", "method", "value", "bound", "exact_remainder", "ratio", "region", "digits"}
    assert set(rec["value"]) == {"mantissa", "logscale"}


def test_poincare_eval(capsys):
    code, out, _ = run(capsys, "eval", "--method", "poincare", "--a", "0.5", "--z", "10", "--n", "5", "--digits", "30", "--format", "json")
    assert code == EXIT_OK
    rec = json.loads(out)
    assert abs(float(rec["ratio"]) - 0.29) <= 0.01
    assert rec["region"] == "R1"


def test_oracle_eval(capsys):
    code, out, _ = run(capsys, "eval", "--method", "oracle", "--a", "0.5", "--z", "0", "--digits", "30", "--format", "json")
    assert code == EXIT_OK
    with mp.workdps(30):
        assert abs(mpf(json.loads(out)["U"]) - sqrt(pi / 2)) < mpf("1e-18")


def test_ibp_and_nega_eval(capsys):
    code, out, _ = run(capsys, "eval", "--method", "ibp", "--a", "25", "--z", "10", "--n", "2", "--digits", "30", "--format", "csv")
    assert code == EXIT_OK
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["ratio"]) <= 1
    code, out, _ = run(capsys, "eval", "--method", "uniform-nega", "--a", "-5", "--t", "2", "--n", "3", "--function", "V", "--digits", "30", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["bound"] is None


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--method", "poincare", "--a", "0.5", "--n", "5"],
        ["eval", "--method", "poincare", "--a", "0.5", "--z", "10", "--n", "0"],
        ["eval", "--method", "uniform-pos", "--a", "-1", "--t", "1", "--n", "3"],
        ["eval", "--method", "uniform-pos", "--a", "1", "--t", "1", "--z", "2", "--n", "3"],
        ["eval", "--method", "oracle", "--a", "1", "--z", "1", "--digits", "10"],
        ["eval", "--method", "poincare", "--a", "0.5", "--z", "0.1", "--n", "3"],
        ["eval", "--method", "oracle", "--a", "x", "--z", "1"],
    ],
)
def test_invalid_params_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_PARAMS


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--method", "nope"])
    assert exc.value.code == EXIT_PARAMS


def test_numeric_failure_exit_3(capsys, monkeypatch):
    from pcfbounds import oracle

    def boom(*args, **kwargs):
        raise oracle.OracleError("forced")

    monkeypatch.setattr(oracle, "pcf_values", boom)
    code, _, err = run(capsys, "eval", "--method", "oracle", "--a", "1", "--z", "1", "--digits", "30")
    assert code == EXIT_NUMERIC and "forced" in err


def test_table_check_pass(capsys):
    code, out, _ = run(capsys, "table", "1", "--check", "--digits", "30", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 27 and all(r["ok"] == "True" for r in rows)


def test_table_check_detects_mismatch():
    grid = [[0.0] * 9 for _ in range(3)]
    rows = compare_table(1, grid)
    assert not any(r["ok"] for r in rows)


def test_table_max_entry():
    from pcfbounds.cli import load_expected

    ref = load_expected()["5"]
    grid = [list(map(float, row)) for row in ref["values"]]
    grid[0][0] = 1.0000001
    ref["values"][0][0] = 1.0
    rows = compare_table(5, grid, {"5": ref})
    assert not rows[0]["ok"] and all(r["ok"] for r in rows[1:])


def test_table_exit_code_on_mismatch(capsys, monkeypatch):
    import pcfbounds.cli as cli

    monkeypatch.setattr(cli, "compute_table", lambda which, ctx, jobs=1: [[0.5] * 9 for _ in range(3)])
    code, _, err = run(capsys, "table", "1", "--check", "--digits", "30")
    assert code == EXIT_CHECK and "mismatch" in err


def test_regions(capsys):
    code, out, _ = run(capsys, "regions", "--a", "1", "--points", "4", "--point", "3", "--point", "-3", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    q = [r for r in rows if r["name"] == "Q" and r["plane"] == "z"][0]
    assert abs(float(q["x"]) + 3**0.5) < 1e-9 and abs(float(q["y"]) - 1) < 1e-9
    s = [r for r in rows if r["name"] == "S" and r["plane"] == "z"][0]
    assert float(s["x"]) == 0 and float(s["y"]) == 1
    assert any(r["plane"] == "w" for r in rows)
    pts = [r for r in rows if r["kind"] == "point"]
    assert [p["region"] for p in pts] == ["R1", "R4"]


def test_regions_grid(capsys):
    code, out, _ = run(capsys, "regions", "--a", "1", "--points", "2", "--grid=-4:4:3,0:4:3", "--format", "csv")
    assert code == EXIT_OK
    assert sum(1 for r in csv.DictReader(io.StringIO(out)) if r["kind"] == "point") == 9
    assert run(capsys, "regions", "--grid", "bad")[0] == EXIT_PARAMS


def test_figdata_2_3(capsys):
    code, out, _ = run(capsys, "figdata", "2", "--points", "3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and abs(float(rows[0]["phi1"]) + 1 / 12) < 1e-14
    code, out, _ = run(capsys, "figdata", "3", "--points", "11", "--digits", "30", "--format", "csv")
    assert code == EXIT_OK
    rows = [r for r in csv.DictReader(io.StringIO(out)) if r["s"] == "1"]
    for r in rows:
        assert float(r["phi"]) <= float(r["variation"]) <= float(r["majorant"]) + 1e-15
        assert abs(float(r["variation_shifted"]) - float(r["variation"]) - 0.1692) < 1e-4


def test_figdata_4_dip(capsys):
    code, out, _ = run(capsys, "figdata", "4", "--lambdas", "0,1", "--digits", "30", "--format", "json")
    assert code == EXIT_OK
    rows = json.loads(out)
    assert float(rows[0]["f1"]) == -0.375 and float(rows[0]["M1"]) == 0


def test_fig4_default_grid_contains_dip(ctx30):
    from pcfbounds.cli import fig4_table
    from pcfbounds import integral

    with ctx30.workdps():
        dip = mp.findroot(lambda x: integral.f1_closed(x, ctx30), 8)
    assert abs(dip - mpf("8.3176")) < mpf("1e-3")


def test_coeffs(capsys):
    code, out, _ = run(capsys, "coeffs", "--N", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert {"poly": "phi1", "power": "3", "coefficient": "-5/3"} in rows
    code, out, _ = run(capsys, "coeffs", "--kernel", "2", "--format", "json")
    assert code == EXIT_OK and len(json.loads(out)) == 6


def test_out_file(tmp_path, capsys):
    path = tmp_path / "t.json"
    code, out, _ = run(capsys, "coeffs", "--N", "1", "--format", "json", "--out", str(path))
    assert code == EXIT_OK and out == ""
    assert json.loads(path.read_text())


def test_deterministic(capsys):
    argv = ["eval", "--method", "ibp", "--a", "10", "--z", "5", "--n", "1", "--digits", "30", "--format", "json"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
