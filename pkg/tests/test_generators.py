import numpy as np
import pytest

import nqpsor as nq


def test_no_rotation_case_is_diagonal():
    # density floor n/n^2 leaves no room beyond the diagonal
    spec = nq.GenSpec(4, 0.25, np.array([1.0, 4.0, 7.0, 10.0]), seed=0)
    A = nq.gen_matrix(spec)
    dense = A.toarray()
    np.testing.assert_array_equal(dense, np.diag(np.diag(dense)))
    assert sorted(np.diag(dense)) == [1.0, 4.0, 7.0, 10.0]
    ev = np.linalg.eigvalsh(dense)
    assert ev[-1] / ev[0] == pytest.approx(10.0)


def test_spd_spectrum_preserved():
    kappa = 1e4
    spec = nq.GenSpec(50, 0.1, nq.spd_spectrum(50, kappa), seed=1)
    A = nq.gen_matrix(spec)
    ev = np.linalg.eigvalsh(A.toarray())
    want = np.sort(nq.spd_spectrum(50, kappa))
    assert np.max(np.abs(ev - want)) <= 1e-10 * kappa


def test_rank_deficient_spectrum_preserved():
    kappa = 1e5
    spec = nq.GenSpec(100, 0.1, nq.rank_deficient_spectrum(100, 99, kappa),
                      seed=2)
    A = nq.gen_matrix(spec)
    ev = np.linalg.eigvalsh(A.toarray())
    assert abs(ev[0]) <= 1e-8 * kappa
    numerical_rank = int(np.sum(ev > 1e-8 * kappa))
    assert numerical_rank == 99


def test_density_near_target():
    n, density = 200, 0.05
    spec = nq.GenSpec(n, density, nq.spd_spectrum(n, 100.0), seed=3)
    A = nq.gen_matrix(spec)
    target = density * n * n
    assert A.nnz >= target
    assert A.nnz <= 1.2 * target


def test_determinism_bitwise():
    spec = nq.GenSpec(60, 0.1, nq.spd_spectrum(60, 1e3), seed=7)
    A1 = nq.gen_matrix(spec)
    A2 = nq.gen_matrix(nq.GenSpec(60, 0.1, nq.spd_spectrum(60, 1e3), seed=7))
    assert np.array_equal(A1.row_starts, A2.row_starts)
    assert np.array_equal(A1.col_indices, A2.col_indices)
    assert np.array_equal(A1.values, A2.values)
    gp1 = nq.gen_rhs(A1, seed=8)
    gp2 = nq.gen_rhs(A2, seed=8)
    assert np.array_equal(gp1.problem.b, gp2.problem.b)
    assert np.array_equal(gp1.x_true, gp2.x_true)


def test_gen_spec_validation():
    with pytest.raises(ValueError):
        nq.GenSpec(4, 0.1, np.ones(4), seed=0)  # too sparse for the diagonal
    with pytest.raises(ValueError):
        nq.GenSpec(4, 0.0, np.ones(4), seed=0)
    with pytest.raises(ValueError):
        nq.GenSpec(4, 0.5, np.ones(3), seed=0)
    with pytest.raises(ValueError):
        nq.spd_spectrum(5, 0.5)
    with pytest.raises(ValueError):
        nq.rank_deficient_spectrum(5, 5, 10.0)


def test_gen_rhs_complementarity_exact():
    A = nq.gen_matrix(nq.GenSpec(50, 0.2, nq.spd_spectrum(50, 100.0), seed=9))
    for seed in range(5):
        gp = nq.gen_rhs(A, seed=seed)
        assert float(gp.x_true @ gp.y_true) == 0.0
        assert np.all(gp.x_true >= 0.0)
        assert np.all(gp.y_true >= 0.0)
        assert nq.kkt_residual(gp.problem, gp.x_true).residual_norm <= 1e-12


def test_gen_rhs_zero_fraction():
    A = nq.gen_matrix(nq.GenSpec(1000, 0.01, nq.spd_spectrum(1000, 10.0),
                                 seed=10))
    gp = nq.gen_rhs(A, seed=11)
    frac = float(np.mean(gp.x_true == 0.0))
    assert 0.44 <= frac <= 0.56


def test_suite_toy_spd():
    problems = nq.gen_suite("toy-spd", n=200, seed=1)
    assert len(problems) == 4
    for i, gp in enumerate(problems, start=1):
        assert gp.problem.n == 200
        ev = np.linalg.eigvalsh(gp.problem.A.toarray())
        assert ev[-1] / ev[0] == pytest.approx(10.0 ** (2 * i - 1), rel=1e-6)


def test_suite_toy_spsd_small():
    problems = nq.gen_suite("toy-spsd-small", seed=1)
    assert len(problems) == 1
    gp = problems[0]
    assert gp.problem.n == 100
    assert gp.problem.A.nnz >= 0.1 * 100 * 100
    ev = np.linalg.eigvalsh(gp.problem.A.toarray())
    assert ev[-1] == pytest.approx(1e5, rel=1e-9)
    assert int(np.sum(ev > 1e-8 * 1e5)) == 99


def test_suite_toy_spsd_large_desk_scale():
    problems = nq.gen_suite("toy-spsd-large", n=300, seed=1)
    gp = problems[0]
    assert gp.problem.n == 300
    ev = np.linalg.eigvalsh(gp.problem.A.toarray())
    assert int(np.sum(ev > 1e-8 * 1e10)) == 295  # rank n - 5


def test_suite_determinism():
    a = nq.gen_suite("toy-spsd-small", seed=5)[0]
    b = nq.gen_suite("toy-spsd-small", seed=5)[0]
    assert np.array_equal(a.problem.A.values, b.problem.A.values)
    assert np.array_equal(a.problem.b, b.problem.b)


def test_suite_unknown_preset():
    with pytest.raises(ValueError, match="unknown preset"):
        nq.gen_suite("toy-imaginary")


def test_solvers_recover_constructed_solutions_on_suite():
    for gp in nq.gen_suite("toy-spd", n=150, seed=4):
        r = nq.psor_solve(gp.problem, 1.5, nq.SolverConfig(tolerance=1e-10))
        assert r.status is nq.Status.CONVERGED
        assert np.max(np.abs(r.x - gp.x_true)) <= 1e-6
