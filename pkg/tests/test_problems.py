import numpy as np
import pytest
import scipy.sparse as sp

from sgslasso.problems import (
    GeneratorSpec,
    Problem,
    generate,
    lambda_settings,
    load_sparse_regression,
    save_sparse_regression,
)
from sgslasso.prox import GroupPartition, PenaltyParams


def test_problem_validation():
    A = np.zeros((3, 4))
    gp = GroupPartition.contiguous(4, 2)
    with pytest.raises(ValueError):
        Problem(A=A, b=np.zeros(2), groups=gp, params=PenaltyParams(1, 1))
    with pytest.raises(ValueError):
        Problem(A=A, b=np.zeros(3), groups=gp, params=PenaltyParams(1, 1),
                BE=np.zeros((1, 5)))
    with pytest.raises(ValueError):
        Problem(A=A, b=np.zeros(3), groups=GroupPartition.contiguous(3, 1),
                params=PenaltyParams(1, 1))


def test_problem_stacked_and_split(rng):
    prob = generate(GeneratorSpec(family=1, m=6, n=40, mE=2, mI=3, J=10, seed=0))
    x = rng.standard_normal(40)
    stacked = prob.stacked_apply(x)
    a, e, i = prob.split(stacked)
    np.testing.assert_allclose(a, prob.apply_A(x))
    bE, bI = prob.apply_constraints(x)
    np.testing.assert_allclose(e, bE)
    np.testing.assert_allclose(i, bI)
    # adjoint consistency of [A; BE; BI]
    d = rng.standard_normal(prob.m_hat)
    lhs = float(stacked @ d)
    rhs = float(x @ prob.adjoint_apply(*prob.split(d)))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_generator_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec(family=4, m=1, n=1)
    with pytest.raises(ValueError):
        GeneratorSpec(family=2, m=1, n=1, mI=1)
    with pytest.raises(ValueError):
        GeneratorSpec(family=3, m=1, n=1, mE=2)
    with pytest.raises(ValueError):
        GeneratorSpec(family=1, m=0, n=1)


def test_generator_deterministic_and_valid():
    spec = GeneratorSpec(family=1, m=10, n=60, mE=3, mI=3, J=12, seed=5)
    p1, p2 = generate(spec), generate(spec)
    np.testing.assert_array_equal(p1.A, p2.A)
    np.testing.assert_array_equal(p1.b, p2.b)
    # partition invariants hold by construction (validated in __post_init__)
    assert p1.groups.n == 60
    # selector rows pick disjoint group pairs with 0/1 entries
    BE = p1.BE.toarray()
    BI = p1.BI.toarray()
    rows = np.vstack([BE, BI])
    assert set(np.unique(rows)) <= {0.0, 1.0}
    assert np.all(rows.sum(axis=0) <= 1.0)  # pairwise disjoint supports


def test_generator_family3_sum_row():
    prob = generate(GeneratorSpec(family=3, m=5, n=20, mE=1, mI=0, J=4, seed=1))
    np.testing.assert_array_equal(np.asarray(prob.BE), np.ones((1, 20)))
    assert prob.mI == 0


def test_generator_rejects_too_many_rows():
    with pytest.raises(ValueError):
        generate(GeneratorSpec(family=1, m=5, n=20, mE=3, mI=3, J=4, seed=0))


def test_spec_from_config(tmp_path):
    cfg = tmp_path / "gen.cfg"
    cfg.write_text(
        "family = 1\nm = 10\nn = 40\nmE = 2\nmI = 2  # comment\nJ = 8\nseed = 3\n"
    )
    spec = GeneratorSpec.from_config(cfg)
    assert (spec.family, spec.m, spec.n, spec.mE, spec.mI, spec.J, spec.seed) == (
        1, 10, 40, 2, 2, 8, 3,
    )
    bad = tmp_path / "bad.cfg"
    bad.write_text("family 1\n")
    with pytest.raises(ValueError, match="bad.cfg:1"):
        GeneratorSpec.from_config(bad)
    unk = tmp_path / "unk.cfg"
    unk.write_text("foo = 1\n")
    with pytest.raises(ValueError, match="unknown"):
        GeneratorSpec.from_config(unk)


def test_lambda_settings():
    A = np.array([[1.0, 0.0], [0.0, 2.0]])
    b = np.array([1.0, 1.0])
    base = 2.0  # ||A^T b||_inf
    s1 = lambda_settings(A, b, 0.1, "S1")
    assert (s1.lam1, s1.lam2) == (0.5 * 0.1 * base, 0.5 * 0.1 * base)
    s2 = lambda_settings(A, b, 0.1, "S2")
    assert s2.lam1 == pytest.approx(0.8 * 0.1 * base)
    assert s2.lam2 == pytest.approx(0.2 * 0.1 * base)
    with pytest.raises(ValueError):
        lambda_settings(A, b, 0.0, "S1")
    with pytest.raises(ValueError):
        lambda_settings(A, b, 0.1, "S3")


def test_sparse_regression_round_trip(tmp_path, rng):
    A = sp.random(6, 9, density=0.5, random_state=1, format="csr")
    # make sure the last column is populated so the width round-trips
    A = sp.hstack([A, sp.csr_matrix(np.ones((6, 1)))], format="csr")
    b = rng.standard_normal(6)
    path = tmp_path / "data.txt"
    save_sparse_regression(path, A, b)
    A2, b2 = load_sparse_regression(path)
    np.testing.assert_allclose(A2.toarray(), A.toarray())
    np.testing.assert_allclose(b2, b)


def test_load_sparse_regression_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1.0 0:2.0\n")
    with pytest.raises(ValueError, match="bad.txt:1"):
        load_sparse_regression(p)
    p.write_text("1.0 2:nan\n")
    with pytest.raises(ValueError, match="bad.txt:1"):
        load_sparse_regression(p)
    p.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_sparse_regression(p)
