import json

import jsonschema
import pytest

from cayleycontour.cli import main
from cayleycontour.reports import load_schema, rational


@pytest.fixture
def files(tmp_path):
    paths = {}

    def put(name, text):
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)

    put("competing.model", "model = potts_competing\nJ1 = -1\nJ2 = 0\n")
    put("outside.model", "model = potts_competing\nJ1 = 1\nJ2 = 0\n")
    put("kron.model", "model = kronecker\nJ = 1\nr = 1\nq = 2\n")
    put("kron0.model", "model = kronecker\nJ = 0\n")
    put("kron_k3.model", "model = kronecker\nJ = 1\nq = 2\nk = 3\n")
    put("broken.model", "model = kronecker\nJ = 1\nq two\n")
    put("window.txt", "n=3 k=2 boundary=1\n- 2\n1.2.3 2\n")
    put("contour.txt", "k=2 r=1 q=2 boundary=1\nmark=2\n-\n")
    put("contour_q3.txt", "k=2 r=1 q=3 boundary=1\nmark=2\n-\n")
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rational_serialisation():
    assert rational(0.5) == {"exact": "1/2", "decimal": 0.5}
    assert rational(None) is None


def test_check_model_inside_region(capsys, files):
    code, out, _ = run(capsys, "check-model", "--model", files["competing.model"])
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, load_schema())
    assert report["result"]["s"] == 3
    assert report["result"]["lambda0"]["exact"] == "1/2"


@pytest.mark.parametrize("name", ["outside.model", "kron0.model"])
def test_check_model_failures(capsys, files, name):
    code, out, _ = run(capsys, "check-model", "--model", files[name])
    assert code == 1
    jsonschema.validate(json.loads(out), load_schema())


def test_parse_error_names_line(capsys, files):
    code, _, err = run(capsys, "check-model", "--model", files["broken.model"])
    assert code == 2
    assert ":3:" in err


def test_missing_file_is_usage_error(capsys, files):
    code, _, _ = run(capsys, "check-model", "--model", files["kron.model"] + ".nope")
    assert code == 2


def test_bad_arguments_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["gibbs", "--beta", "1"])
    assert info.value.code == 2


def test_k_mismatch_names_both_values(capsys, files):
    code, _, err = run(capsys, "contours", "--model", files["kron_k3.model"], "--window", files["window.txt"])
    assert code == 2
    assert "k=3" in err and "k=2" in err


def test_q_mismatch_in_contour_file(capsys, files):
    code, _, err = run(capsys, "contour-prob", "--model", files["kron.model"],
                       "--contour", files["contour_q3.txt"], "--beta", "1")
    assert code == 2
    assert "q=2" in err and "q=3" in err


def test_contours_report(capsys, files):
    code, out, _ = run(capsys, "contours", "--model", files["kron.model"], "--window", files["window.txt"])
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, load_schema())
    sizes = [c["imp_size"] for c in report["result"]["contours"]]
    assert sizes == [4, 4]


def test_peierls_without_samples(capsys, files):
    code, out, err = run(capsys, "peierls", "--model", files["kron.model"], "--samples", "0")
    assert code == 0
    lines = out.splitlines()
    assert lines[-1] == "seed,boundary_size,lhs,rhs,holds"
    assert "no samples" in err


def test_peierls_csv(capsys, files):
    code, out, err = run(capsys, "peierls", "--model", files["kron.model"], "--samples", "40", "--seed", "2")
    assert code == 0
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert len(rows) == 41
    assert "min_slack=0" in err


def test_peierls_refuses_bad_model(capsys, files):
    code, _, _ = run(capsys, "peierls", "--model", files["outside.model"], "--samples", "5")
    assert code == 2


def test_count_contours(capsys, files):
    code, out, _ = run(capsys, "count-contours", "--model", files["kron.model"], "--l", "4", "--l", "6")
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, load_schema())
    assert [row["count"] for row in report["result"]["counts"]] == [4, 9]
    assert report["result"]["C0"]["exact"] == "4/1"


def test_cap_refusal_exit_code(capsys, files):
    code, _, err = run(capsys, "--cap", "50", "gibbs", "--model", files["kron.model"], "--n", "3",
                       "--beta", "1", "--engine", "enum")
    assert code == 3
    assert "refused" in err


def test_cap_from_environment(capsys, files, monkeypatch):
    monkeypatch.setenv("CAYLEY_CONTOUR_CAP", "50")
    code, _, _ = run(capsys, "count-contours", "--model", files["kron.model"], "--l", "7")
    assert code == 3


def test_gibbs_report(capsys, files):
    code, out, _ = run(capsys, "gibbs", "--model", files["kron.model"], "--n", "2", "--beta", "1",
                       "--boundary", "2")
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, load_schema())
    marg = report["result"]["root_marginals"]
    assert marg[1] > marg[0]


def test_contour_prob_csv(capsys, files):
    code, out, _ = run(capsys, "contour-prob", "--model", files["kron.model"], "--contour", files["contour.txt"],
                       "--beta", "0.5", "--beta", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[2] == "beta,p,bound,slack"
    assert len(lines) == 5


def test_coexist_scan_csv(capsys, files):
    code, out, _ = run(capsys, "coexist-scan", "--model", files["kron.model"], "--beta-to", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[2] == "beta,boundary_mark,marginal_1,marginal_2,delta"
    assert lines[3].endswith(",0.0")
    assert "\r" not in out


def test_ball_counts_report(capsys):
    code, out, _ = run(capsys, "ball-counts", "--k", "3", "--trials", "200", "--max-n", "12")
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, load_schema())
    assert report["result"]["boundary_formula"] == {"matches": 200, "trials": 200}


def test_subgraphs_report(capsys):
    code, out, _ = run(capsys, "subgraphs", "--max-n", "6")
    assert code == 0
    counts = [row["count"] for row in json.loads(out)["result"]["counts"]]
    assert counts == [1, 3, 9, 28, 90, 297]


def test_output_file(capsys, files, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "check-model", "--model", files["competing.model"], "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "check-model"
