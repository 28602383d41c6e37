import csv

import numpy as np
import pytest

import nqpsor as nq
from nqpsor import io as nio
from nqpsor.diagnostics import IterationTrace


def test_matrix_market_round_trip(cycle3_problem, tmp_path):
    path = tmp_path / "a.mtx"
    nio.write_matrix_market(path, cycle3_problem.A)
    back = nio.read_matrix_market(path)
    assert np.array_equal(back.row_starts, cycle3_problem.A.row_starts)
    assert np.array_equal(back.col_indices, cycle3_problem.A.col_indices)
    assert np.array_equal(back.values, cycle3_problem.A.values)


def test_matrix_market_round_trip_random(tmp_path):
    A = nq.gen_matrix(nq.GenSpec(40, 0.15, nq.spd_spectrum(40, 1e4), seed=60))
    path = tmp_path / "r.mtx"
    nio.write_matrix_market(path, A)
    back = nio.read_matrix_market(path)
    assert np.array_equal(back.values, A.values)
    assert np.array_equal(back.col_indices, A.col_indices)


def test_matrix_market_writer_deterministic(cycle3_problem, tmp_path):
    p1 = tmp_path / "a1.mtx"
    p2 = tmp_path / "a2.mtx"
    nio.write_matrix_market(p1, cycle3_problem.A)
    nio.write_matrix_market(p2, cycle3_problem.A)
    assert p1.read_bytes() == p2.read_bytes()


def test_matrix_market_one_by_one(tmp_path):
    path = tmp_path / "s.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate real symmetric\n1 1 1\n1 1 9.0\n"
    )
    A = nio.read_matrix_market(path)
    assert A.n == 1
    assert A.toarray()[0, 0] == 9.0


def test_matrix_market_missing_diagonal(tmp_path):
    path = tmp_path / "m.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n"
        "1 1 1.0\n2 1 0.5\n"
    )
    with pytest.raises(ValueError, match="positive diagonal"):
        nio.read_matrix_market(path)


def test_matrix_market_general_tag_rejected(tmp_path):
    path = tmp_path / "g.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.0\n"
    )
    with pytest.raises(nio.FormatError, match="symmetry"):
        nio.read_matrix_market(path)


def test_matrix_market_malformed_header(tmp_path):
    path = tmp_path / "h.mtx"
    path.write_text("%%NotMatrixMarket nope\n1 1 1\n1 1 2.0\n")
    with pytest.raises(nio.FormatError, match="header"):
        nio.read_matrix_market(path)
    path.write_text("%%MatrixMarket matrix coordinate complex symmetric\n")
    with pytest.raises(nio.FormatError, match="field"):
        nio.read_matrix_market(path)


def test_matrix_market_mirrors_lower_triangle(tmp_path):
    path = tmp_path / "lo.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n"
        "1 1 2.0\n2 1 -1.0\n2 2 2.0\n"
    )
    A = nio.read_matrix_market(path)
    np.testing.assert_array_equal(A.toarray(), [[2.0, -1.0], [-1.0, 2.0]])


def test_rect_matrix_market_round_trip(tmp_path):
    rng = np.random.default_rng(61)
    dense = rng.standard_normal((7, 4))
    dense[np.abs(dense) < 0.4] = 0.0
    dense[0, :] = 1.0
    C = nq.ColumnOperator.from_dense(dense)
    path = tmp_path / "c.mtx"
    nio.write_matrix_market_rect(path, C)
    back = nio.read_matrix_market_rect(path)
    assert back.rows == 7 and back.cols == 4
    assert np.array_equal(back.values, C.values)
    assert np.array_equal(back.row_indices, C.row_indices)


def test_vector_round_trip(tmp_path):
    x = np.array([1.0, -2.5, 3.141592653589793, 1e-300, 0.1])
    path = tmp_path / "v.txt"
    nio.write_vector(path, x)
    content = path.read_text()
    assert content.startswith("# n=5\n")
    back = nio.read_vector(path)
    np.testing.assert_array_equal(back, x)


def test_solver_config_round_trip(tmp_path):
    cfg = nq.SolverConfig(tolerance=1e-8, max_iterations=1234,
                          wolfe=nq.WolfeParams(c1=0.5, c2=0.9),
                          freeze_m=7, shift_sigma=2.5, kkt_every=0)
    path = tmp_path / "cfg.json"
    nio.write_solver_config(path, cfg)
    back = nio.read_solver_config(path)
    assert back == cfg
    # writer is deterministic
    path2 = tmp_path / "cfg2.json"
    nio.write_solver_config(path2, cfg)
    assert path.read_bytes() == path2.read_bytes()


def test_solver_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"tolerence": 1e-8}\n')
    with pytest.raises(nio.FormatError, match="unknown solver config"):
        nio.read_solver_config(path)


def test_solver_config_partial_file_uses_defaults(tmp_path):
    path = tmp_path / "part.json"
    path.write_text('{"tolerance": 1e-6, "wolfe": {"rho": 0.5}}\n')
    cfg = nio.read_solver_config(path)
    assert cfg.tolerance == 1e-6
    assert cfg.wolfe.rho == 0.5
    assert cfg.max_iterations == 100_000


def test_trace_csv_header_and_shape(tmp_path):
    trace = IterationTrace()
    trace.start_segment(1.0)
    path = tmp_path / "empty.csv"
    nio.write_trace_csv(trace, path)
    lines = path.read_text().splitlines()
    assert lines == [nio.TRACE_CSV_HEADER]

    for k in range(3):
        trace.append(10.0 ** (-k - 1), -float(k), 1.0 + 0.1 * k, 2.0,
                     kkt=(0.5 if k == 1 else float("nan")))
    trace.add_event("freeze")
    path = tmp_path / "t.csv"
    nio.write_trace_csv(trace, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 4
    assert lines[0] == ("iter,delta_norm,objective,omega,h,"
                        "kkt_residual,d,s,event")
    rows = list(csv.DictReader(lines))
    assert rows[0]["kkt_residual"] == ""
    assert rows[1]["kkt_residual"] != ""
    assert rows[2]["event"] == "freeze"


def test_trace_csv_round_trips_floats(tmp_path):
    rng = np.random.default_rng(62)
    trace = IterationTrace()
    trace.start_segment(0.0)
    values = 10.0 ** (-rng.random(20) * 12)
    for v in values:
        trace.append(float(v), float(rng.standard_normal()),
                     float(rng.uniform(0.1, 1.9)), 2.0)
    path = tmp_path / "rt.csv"
    nio.write_trace_csv(trace, path)
    rows = list(csv.DictReader(path.read_text().splitlines()))
    for row, v in zip(rows, values):
        assert float(row["delta_norm"]) == v
    # writer is deterministic
    path2 = tmp_path / "rt2.csv"
    nio.write_trace_csv(trace, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_trace_csv_from_solver_run(cycle3_problem, tmp_path):
    r = nq.apsor_wolfe_solve(cycle3_problem)
    path = tmp_path / "run.csv"
    nio.write_trace_csv(r.trace, path)
    rows = list(csv.DictReader(path.read_text().splitlines()))
    assert len(rows) == r.iterations
    assert float(rows[0]["omega"]) == 1.0
