import json
import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperwave.report import Report, SchemaError, Table, atomic_write, fmt, golden_check, load_report


def _rep(**scalars):
    r = Report("spectrum", dict(scalars))
    r.add_table("eigenvalues", ["re", "im"], [[1.0, 0.0], [-1.5, 0.25]])
    return r


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_roundtrip(x):
    assert float(fmt(x)) == x


def test_fmt_types():
    assert fmt(True) == "1" and fmt(np.int64(7)) == "7" and fmt("abc") == "abc"
    assert fmt(0.1) == "0.10000000000000001"


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_table_csv_roundtrip(xs):
    t = Table(["x", "k"], [[x, i] for i, x in enumerate(xs)])
    back = Table.from_csv(t.to_csv())
    assert back.columns == ["x", "k"]
    assert all(float(a[0]) == b[0] and a[1] == b[1] for a, b in zip(back.rows, t.rows))


def test_write_and_load(tmp_path):
    r = _rep(rank=1, rate=-0.7512345678901234, label="x", bad=float("nan"))
    path = r.write(tmp_path / "out")
    assert (tmp_path / "out" / "eigenvalues.csv").read_text().startswith("re,im\n")
    back = load_report(path)
    assert back.scalars["rate"] == r.scalars["rate"]
    assert back.scalars["bad"] == "nan"
    assert back.tables["eigenvalues"].rows == [[1.0, 0.0], [-1.5, 0.25]]
    mode = os.stat(path).st_mode & 0o777
    mask = os.umask(0)
    os.umask(mask)
    assert mode == 0o666 & ~mask


def test_atomic_write_interrupted(tmp_path):
    p = tmp_path / "report.json"
    p.write_text("old")

    def boom(fh):
        fh.write("partial")
        raise KeyboardInterrupt

    with pytest.raises(KeyboardInterrupt):
        atomic_write(p, boom)
    assert p.read_text() == "old"
    assert sorted(os.listdir(tmp_path)) == ["report.json"]
    atomic_write(p, b"\x00\x01", binary=True)
    assert p.read_bytes() == b"\x00\x01"


def test_golden_identical():
    a = _rep(lam=1.0, rate=-0.8)
    res = golden_check(a, Report.from_dict(json.loads(json.dumps(a.to_dict()))))
    assert res and res.summary() == "PASS"


def test_golden_perturbed_eigenvalue():
    res = golden_check(_rep(lam=1.0 + 1e-3), _rep(lam=1.0), rtol=1e-6)
    assert not res
    assert len(res.failures) == 1 and res.failures[0].startswith("lam:")
    assert "FAIL" in res.summary() and "lam" in res.summary()


def test_golden_rate_within_tol():
    assert golden_check(_rep(rate=1.0005), _rep(rate=1.0), rtol=1e-3)
    assert golden_check(_rep(rate=1.0005, x=2.0), _rep(rate=1.0, x=2.0), tolerances={"rate": (1e-3, 0.0)})
    assert not golden_check(_rep(rate=1.0005, x=2.0), _rep(rate=1.0, x=2.0))


def test_golden_absolute_and_special():
    assert golden_check(_rep(a=1e-12), _rep(a=0.0), atol=1e-10)
    assert golden_check(_rep(a=float("nan")), _rep(a=float("nan")))
    assert not golden_check(_rep(a=[1.0, 2.0]), _rep(a=[1.0, 2.5]))
    assert not golden_check(_rep(a="x"), _rep(a="y"))
    assert golden_check(_rep(a=None), _rep(a=None))


def test_golden_table_diff():
    a, b = _rep(), _rep()
    a.tables["eigenvalues"].rows[1][0] = -1.6
    res = golden_check(a, b)
    assert not res and "table eigenvalues row 1 column re" in res.failures[0]
    assert golden_check(a, b, tables=False)


def test_golden_schema_mismatch():
    with pytest.raises(SchemaError):
        golden_check(_rep(a=1.0), _rep(b=1.0))
    a, b = _rep(), _rep()
    a.add_table("eigenvalues", ["re", "imag"], [[1.0, 0.0]])
    with pytest.raises(SchemaError):
        golden_check(a, b)
    a = _rep()
    a.add_table("extra", ["x"], [[1]])
    with pytest.raises(SchemaError):
        golden_check(a, b)
