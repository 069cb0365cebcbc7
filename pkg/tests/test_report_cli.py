import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from gmlie.checks import run_checks
from gmlie.cli import main
from gmlie.geometry import get_geometry
from gmlie.qmrings import CheckResult
from gmlie.report import DuplicateCheck, Record, VerificationReport

text = st.text(alphabet="abcxyz019 .=*", max_size=12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(text, st.booleans(), st.booleans(), text), max_size=8, unique_by=lambda t: t[0]))
def test_report_round_trip_and_determinism(rows):
    def build():
        rep = VerificationReport("g", {"order": 20, "seed": 0})
        for cid, ok, flagged, wit in rows:
            rep.add(CheckResult(cid, "s", ok, wit, flagged))
        return rep

    a, b = build(), build()
    assert a.to_text() == b.to_text() and a.to_json() == b.to_json()
    again = VerificationReport.from_dict(json.loads(a.to_json()))
    assert again.to_json() == a.to_json()
    assert a.exit_code == (1 if any(not ok and not fl for _, ok, fl, _ in rows) else 0)


def test_duplicate_check_rejected():
    rep = VerificationReport("g")
    rep.add(Record("x", "s", "PASS"))
    with pytest.raises(DuplicateCheck):
        rep.add(Record("x", "s", "FAIL"))


def _run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_cli_list():
    code, out = _run("list")
    assert code == 0
    assert [line.split(":")[0] for line in out.splitlines()] == ["elliptic-1star", "local-p2", "local-f2"]


def test_cli_expand():
    code, out = _run("expand", "E4", "--order", "4")
    assert code == 0 and out.strip() == "E4 = 1 + 240*q + 2160*q^2 + 6720*q^3 + O(q^4)"


def test_cli_verify_elliptic_all_pass():
    code, out = _run("verify", "elliptic-1star", "--order", "20")
    assert code == 0
    assert "FAIL " not in out and "seed: 0" in out


def test_cli_verify_deterministic_json():
    a = _run("verify", "elliptic-1star", "--checks", "symbolic", "--json")
    b = _run("verify", "elliptic-1star", "--checks", "symbolic", "--json")
    assert a == b
    doc = json.loads(a[1])
    assert doc["schema_version"] == 1 and doc["summary"]["FAIL"] == 0


def test_cli_verify_f2_symbolic_records_flags():
    code, out = _run("verify", "local-f2", "--checks", "symbolic", "--json")
    doc = json.loads(out)
    flagged = {r["id"] for r in doc["records"] if r["status"] == "FLAGGED"}
    assert {"theorem.u_candidate.(1-z1)^2", "theorem.E_binding", "system.R2.s43"} <= flagged
    assert code == (1 if doc["summary"]["FAIL"] else 0)


def test_cli_usage_errors(capsys):
    assert _run("verify", "no-such-geometry")[0] == 2
    assert _run("verify", "local-p2", "--checks", "bogus")[0] == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_cli_loads_toml_file(tmp_path):
    from test_geometry import ELLIPTIC_TOML
    path = tmp_path / "g.toml"
    path.write_text(ELLIPTIC_TOML)
    code, out = _run("solve", str(path))
    assert code == 0 and "type: sl2" in out


def test_every_check_id_unique():
    for name in ("elliptic-1star", "local-p2"):
        ids = [c.check_id for c in run_checks(get_geometry(name), ("symbolic", "mhs"))]
        assert len(ids) == len(set(ids))
