import json
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spatranspose.qmath import (
    I2,
    PAULIS,
    SX,
    SZ,
    haar_random_ket,
    hermitian_eigensystem,
    matrix_from_json,
    matrix_sqrt_psd,
    matrix_to_json,
    projector,
    random_density_matrix,
    tensor_product,
)

finite = st.floats(-10, 10, allow_nan=False)


def test_eigensystem_sigma_z():
    vals, vecs = hermitian_eigensystem(SZ)
    np.testing.assert_allclose(vals, [-1, 1])
    assert abs(abs(vecs[0][1]) - 1) < 1e-12
    assert abs(abs(vecs[1][0]) - 1) < 1e-12


def test_eigensystem_sigma_x():
    vals, _ = hermitian_eigensystem(SX)
    np.testing.assert_allclose(vals, [-1, 1], atol=1e-14)


def test_eigensystem_partial_transpose_of_phi_plus():
    # partial transpose of |phi+><phi+| is swap/2; swap squares to I with trace 2,
    # so its spectrum is {-1, 1, 1, 1}
    swap_half = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex) / 2
    vals, vecs = hermitian_eigensystem(swap_half)
    np.testing.assert_allclose(vals, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)
    for lam in (-0.5, 0.5):
        assert abs(np.linalg.det(swap_half - lam * np.eye(4))) < 1e-14
    for lam, v in zip(vals, vecs):
        np.testing.assert_allclose(swap_half @ v, lam * v, atol=1e-9)


def test_eigensystem_rejects_bad_input():
    with pytest.raises(ValueError):
        hermitian_eigensystem(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        hermitian_eigensystem(np.eye(5))


def test_eigen_reconstruction_and_orthonormality(rng):
    for dim in (2, 3, 4):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        m = g + g.conj().T
        vals, vecs = hermitian_eigensystem(m)
        v = np.column_stack(vecs)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(dim), atol=1e-9)
        np.testing.assert_allclose(sum(l * projector(x) for l, x in zip(vals, vecs)), m, atol=1e-9)
        assert np.all(np.diff(vals) >= 0)


def test_sqrt_examples():
    np.testing.assert_allclose(matrix_sqrt_psd(np.eye(2)), np.eye(2))
    np.testing.assert_allclose(matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    m = I2 / 2 + SX / 4
    r = matrix_sqrt_psd(m)
    np.testing.assert_allclose(r @ r, m, atol=1e-9)
    np.testing.assert_allclose(r, r.conj().T, atol=1e-14)


def test_sqrt_clamps_tiny_negative_and_rejects_negative():
    r = matrix_sqrt_psd(np.diag([1.0, -5e-11]))
    np.testing.assert_allclose(r, np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        matrix_sqrt_psd(np.diag([1.0, -1e-6]))


def test_sqrt_squares_back_on_random_psd(rng):
    for _ in range(100):
        dim = rng.choice([2, 3, 4])
        m = random_density_matrix(dim, rng)
        r = matrix_sqrt_psd(m)
        np.testing.assert_allclose(r @ r, m, atol=1e-9)
        assert np.linalg.eigvalsh(r)[0] > -1e-12


def test_haar_is_reproducible():
    a = haar_random_ket(2, np.random.default_rng(42))
    b = haar_random_ket(2, np.random.default_rng(42))
    np.testing.assert_array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1) < 1e-12
    with pytest.raises(ValueError):
        haar_random_ket(3, np.random.default_rng(0))


def test_haar_moments(rng):
    kets = [haar_random_ket(2, rng) for _ in range(10_000)]
    pop = np.mean([abs(k[0]) ** 2 for k in kets])
    assert abs(pop - 0.5) < 0.02
    mean_proj = np.mean([projector(k) for k in kets], axis=0)
    assert np.max(np.abs(mean_proj - I2 / 2)) < 0.02


def test_tensor_product_examples():
    np.testing.assert_array_equal(tensor_product(I2, I2), np.eye(4))
    np.testing.assert_array_equal(tensor_product(SZ, SZ), np.diag([1, -1, -1, 1]))
    block = tensor_product(projector([1, 0]), SX)
    np.testing.assert_array_equal(block[:2, :2], SX)
    assert np.all(block[2:, :] == 0) and np.all(block[:, 2:] == 0)
    with pytest.raises(ValueError):
        tensor_product(np.eye(4), I2)


def test_tensor_product_index_rule(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    ab = tensor_product(a, b)
    for i, j, k, l in itertools.product(range(2), repeat=4):
        assert abs(ab[i * 2 + k, j * 2 + l] - a[i, j] * b[k, l]) < 1e-14


@settings(max_examples=30, deadline=None)
@given(st.lists(finite, min_size=12, max_size=12), finite)
def test_tensor_product_bilinear(xs, c):
    a = np.array(xs[0:4]).reshape(2, 2) + 0j
    a2 = np.array(xs[4:8]).reshape(2, 2) + 0j
    b = np.array(xs[8:12]).reshape(2, 2) + 0j
    np.testing.assert_allclose(tensor_product(a + c * a2, b), tensor_product(a, b) + c * tensor_product(a2, b), atol=1e-9)
    np.testing.assert_allclose(tensor_product(b, a + a2), tensor_product(b, a) + tensor_product(b, a2), atol=1e-9)


def test_tensor_product_associative_flattened(rng):
    a, b = (rng.standard_normal((2, 2)) for _ in range(2))
    c = np.array([[2.0]])
    np.testing.assert_allclose(tensor_product(tensor_product(a, c), b), tensor_product(a, tensor_product(c, b)))


def test_pauli_algebra_exact():
    eps = np.zeros((3, 3, 3))
    for (i, j, k), sign in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[i, j, k] = sign
    s = PAULIS[1:]
    for i in range(3):
        for j in range(3):
            expected = (i == j) * I2 + 1j * sum(eps[i, j, k] * s[k] for k in range(3))
            assert np.max(np.abs(s[i] @ s[j] - expected)) < 1e-14


def test_matrix_json_round_trip_bit_exact(rng):
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    text = json.dumps(matrix_to_json(m))
    back = matrix_from_json(json.loads(text))
    np.testing.assert_array_equal(back, m)
    assert json.loads(text)["dim"] == 4
    with pytest.raises(ValueError):
        matrix_from_json({"dim": 2, "entries": [[0, 0]]})
