import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extreme_povm.errors import NotHermitian, NotNormalized, NotPositive, SingularSum
from extreme_povm.operator_core import (
    DEFAULT,
    STRICT,
    conjugate_renormalize,
    numerical_rank,
    projector,
    sorted_eigh,
    spectral_decompose,
    tolerance_profile,
    validate_povm,
)

from suites import random_suite


def haar_unitary(d, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_identity_and_projective():
    assert validate_povm([np.eye(2)]).ranks == (2,)
    p = validate_povm([np.diag([1, 0]), np.diag([0, 1])], 2)
    assert p.ranks == (1, 1)
    assert p.n_outcomes == len(p) == 2


def test_not_normalized_reports_deviation():
    with pytest.raises(NotNormalized) as exc:
        validate_povm([0.75 * np.eye(2), 0.75 * np.eye(2)])
    assert exc.value.magnitude == pytest.approx(0.5)


def test_not_positive_reports_outcome():
    with pytest.raises(NotPositive) as exc:
        validate_povm([np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])])
    assert exc.value.outcome == 1
    assert exc.value.magnitude == pytest.approx(0.5)


def test_not_hermitian():
    m = np.array([[0.5, 0.1], [0.0, 0.5]])
    with pytest.raises(NotHermitian) as exc:
        validate_povm([m, np.eye(2) - m])
    assert exc.value.outcome == 0


def test_shape_mismatch():
    with pytest.raises(ValueError):
        validate_povm([np.eye(2), np.zeros((3, 3))], 2)


def test_effects_are_read_only():
    p = validate_povm([np.eye(2)])
    with pytest.raises(ValueError):
        p.effects[0][0, 0] = 3


def test_spectral_examples():
    s = spectral_decompose(validate_povm([np.diag([1, 0]), np.diag([0, 1])]))
    assert np.allclose(s.vectors[0][:, 0], [1, 0])
    s = spectral_decompose(validate_povm([np.eye(2) / 2, np.eye(2) / 2]))
    f = s.vectors[0]
    assert f.shape == (2, 2)
    assert np.allclose(f.conj().T @ f, np.eye(2) / 2)
    v = np.array([1, 1]) / np.sqrt(2)
    s = spectral_decompose(validate_povm([projector(v), np.eye(2) - projector(v)]))
    f = s.vectors[0][:, 0]
    assert np.isclose(np.linalg.norm(f) ** 2, 1.0)
    assert np.isclose(abs(np.vdot(f, v)), 1.0)


def test_sorted_eigh_is_descending_and_deterministic():
    m = np.diag([0.2, 0.7, 0.7])
    w, v = sorted_eigh(m)
    assert np.all(np.diff(w) <= 1e-15)
    w2, v2 = sorted_eigh(m.copy())
    assert np.array_equal(v, v2)


def test_renormalize_examples():
    p = conjugate_renormalize([np.diag([2, 0]), np.diag([0, 1])], 2)
    assert np.allclose(p.effects[0], np.diag([1, 0]))
    assert np.allclose(p.effects[1], np.diag([0, 1]))
    v = np.array([1, 1j]) / np.sqrt(2)
    q = conjugate_renormalize([np.eye(2), projector(v)], 2)
    assert np.allclose(q.total(), np.eye(2), atol=DEFAULT.sum)
    assert q.ranks == (2, 1)
    base = validate_povm([np.eye(3) / 3] * 3)
    same = conjugate_renormalize(base.effects, 3)
    assert all(np.allclose(a, b) for a, b in zip(base.effects, same.effects))


def test_renormalize_singular():
    with pytest.raises(SingularSum):
        conjugate_renormalize([np.diag([1, 0])], 2)


def test_zero_effect_has_rank_zero():
    p = validate_povm([np.eye(2), np.zeros((2, 2))])
    assert p.ranks == (2, 0)
    assert spectral_decompose(p).vectors[1].shape == (2, 0)


def test_profiles():
    assert tolerance_profile("strict") is STRICT
    assert STRICT.rank == pytest.approx(DEFAULT.rank / 100)
    with pytest.raises(ValueError):
        tolerance_profile("loose")


def test_reconstruction_on_random_suite():
    for p in random_suite(40, seed=5):
        s = spectral_decompose(p)
        assert s.ranks == p.ranks
        for m, r in zip(p.effects, s.reconstruct()):
            assert np.max(np.abs(m - r)) <= DEFAULT.recon
        for f in s.vectors:
            g = f.conj().T @ f
            assert np.allclose(g, np.diag(np.diag(g)), atol=1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(0, 60))
def test_unitary_covariance(useed, k):
    p = random_suite(61, seed=17)[k]
    u = haar_unitary(p.dim, useed)
    q = validate_povm([u @ m @ u.conj().T for m in p.effects], p.dim)
    assert q.ranks == p.ranks
    for a, b in zip(spectral_decompose(p).eigenvalues, spectral_decompose(q).eigenvalues):
        assert np.allclose(a, b, atol=10 * DEFAULT.rank)


@given(st.integers(0, 2**32 - 1))
def test_renormalize_preserves_rank(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    ops = []
    for _ in range(int(rng.integers(d, d + 3))):
        r = int(rng.integers(1, d + 1))
        g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
        ops.append(g @ g.conj().T)
    p = conjugate_renormalize(ops, d)
    assert p.ranks == tuple(numerical_rank(m) for m in ops)
