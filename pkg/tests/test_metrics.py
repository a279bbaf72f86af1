import json

import numpy as np
import pytest

from spatranspose import metrics as mt
from spatranspose.channels import (
    ChoiMatrix,
    KrausSet,
    apply_channel,
    identity_kraus,
    spa_measure_prepare_ensemble,
    spa_transpose_choi,
    unitary_scheme_kraus,
)
from spatranspose.qmath import haar_random_ket, projector, random_density_matrix

PHI_PLUS = projector(np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_uhlmann_examples(rng):
    for _ in range(10):
        rho = random_density_matrix(2, rng)
        assert mt.uhlmann_fidelity(rho, rho) == pytest.approx(1, abs=1e-10)
    assert mt.uhlmann_fidelity(projector([1, 0]), projector([0, 1])) == pytest.approx(0, abs=1e-12)
    assert mt.uhlmann_fidelity(projector([1, 0]), np.eye(2) / 2) == pytest.approx(0.5, abs=1e-12)


def test_uhlmann_bounds_and_symmetry(rng):
    for _ in range(1000):
        d = rng.choice([2, 4])
        a, b = random_density_matrix(d, rng), random_density_matrix(d, rng)
        f = mt.uhlmann_fidelity(a, b)
        assert 0 <= f <= 1 + 1e-10
        assert abs(f - mt.uhlmann_fidelity(b, a)) < 1e-10


def test_uhlmann_qubit_closed_form(rng):
    # independent oracle: F = tr(ab) + 2 sqrt(det a det b) for qubits
    for _ in range(50):
        a, b = random_density_matrix(2, rng), random_density_matrix(2, rng)
        oracle = np.real(np.trace(a @ b)) + 2 * np.sqrt(np.real(np.linalg.det(a) * np.linalg.det(b)))
        assert mt.uhlmann_fidelity(a, b) == pytest.approx(oracle, abs=1e-10)


def test_uhlmann_dimension_mismatch():
    with pytest.raises(ValueError):
        mt.uhlmann_fidelity(np.eye(2) / 2, np.eye(4) / 4)


def test_overlap_examples(rng, haar_projectors):
    mp = spa_measure_prepare_ensemble()
    for psi in haar_projectors:
        assert mt.overlap_fidelity(psi.T, apply_channel(mp, psi)) == pytest.approx(2 / 3, abs=1e-11)
        assert mt.overlap_fidelity(psi, psi) == pytest.approx(1, abs=1e-12)
    rho = random_density_matrix(2, rng)
    assert mt.overlap_fidelity(rho, rho) == pytest.approx(np.real(np.trace(rho @ rho)))
    assert mt.overlap_fidelity(np.eye(2) / 2, np.eye(2) / 2) == pytest.approx(0.5)


def test_average_fidelity_identical_spa():
    mp = spa_measure_prepare_ensemble()
    res = mt.process_and_average_fidelity(mp, mp, samples=2000)
    assert res.average == pytest.approx(1, abs=1e-9)
    assert res.average_monte_carlo == pytest.approx(1, abs=1e-9)
    assert res.process == pytest.approx(1, abs=1e-9)


def test_average_fidelity_mp_vs_u():
    res = mt.process_and_average_fidelity(spa_measure_prepare_ensemble(), unitary_scheme_kraus(), samples=2000)
    assert res.average == pytest.approx(1, abs=1e-9)


def test_average_fidelity_identity_vs_spa():
    res = mt.process_and_average_fidelity(identity_kraus(), spa_measure_prepare_ensemble(), samples=100_000, seed=3)
    assert res.process == pytest.approx(1 / 3, abs=1e-10)
    assert res.average_formula == pytest.approx(5 / 9, abs=1e-12)
    assert abs(res.average_monte_carlo - 5 / 9) < 2e-3
    assert abs(res.average_monte_carlo - res.average_formula) < 3 * res.monte_carlo_stderr


def _random_unitary(rng):
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_channel(rng):
    g = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    q, _ = np.linalg.qr(g)
    return KrausSet((q[0:2], q[2:4], q[4:6]))


def test_average_fidelity_routes_agree_on_random_pairs():
    rng = np.random.default_rng(99)
    for i in range(5):
        a = KrausSet((_random_unitary(rng),))
        b = _random_channel(rng)
        res = mt.process_and_average_fidelity(a, b, samples=100_000, seed=i)
        assert res.average_formula is not None
        assert abs(res.average_formula - res.average_monte_carlo) < 3 * res.monte_carlo_stderr


def test_average_formula_unavailable_for_generic_pairs(rng):
    assert mt.average_fidelity_formula(_random_channel(rng), _random_channel(rng)) is None


def test_partial_transpose_examples(rng):
    pt = mt.partial_transpose(PHI_PLUS)
    assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5, abs=1e-12)
    assert np.linalg.eigvalsh(mt.partial_transpose(spa_transpose_choi(2, 2 / 3)))[0] >= -1e-10
    a, b = random_density_matrix(2, rng), random_density_matrix(2, rng)
    np.testing.assert_allclose(mt.partial_transpose(np.kron(a, b)), np.kron(a, b.T), atol=1e-14)
    np.testing.assert_allclose(mt.partial_transpose(np.kron(a, b), "first"), np.kron(a.T, b), atol=1e-14)
    with pytest.raises(ValueError):
        mt.partial_transpose(np.eye(2))
    with pytest.raises(ValueError):
        mt.partial_transpose(np.eye(4), "third")


def test_partial_transpose_preserves_trace_and_hermiticity(rng):
    for _ in range(20):
        rho = random_density_matrix(4, rng)
        pt = mt.partial_transpose(rho)
        np.testing.assert_allclose(pt, pt.conj().T, atol=1e-14)
        assert np.trace(pt) == pytest.approx(1)


def test_negativity_examples():
    assert mt.negativity(PHI_PLUS) == pytest.approx(0.5, abs=1e-10)
    assert mt.negativity(spa_transpose_choi(2, 2 / 3)) == pytest.approx(0, abs=1e-10)
    assert mt.negativity(np.eye(4) / 4) == pytest.approx(0, abs=1e-12)


def test_negativity_monotone_in_entangled_weight():
    rho_t = spa_transpose_choi(2, 2 / 3)
    values = [mt.negativity((1 - w) * rho_t + w * PHI_PLUS) for w in np.linspace(0, 1, 11)]
    assert values[0] == pytest.approx(0, abs=1e-10) and values[-1] > 0.49
    assert np.all(np.diff(values) >= -1e-12)


def test_fidelity_report_json():
    rho = np.diag([0.25, 0.75]).astype(complex)
    rep = mt.state_fidelity_report(rho, rho)
    obj = json.loads(json.dumps(rep.to_json()))
    assert obj["value"] == pytest.approx(1)
    assert obj["operands"][0] == obj["operands"][1] == mt.content_hash(rho)
    with pytest.raises(ValueError):
        mt.FidelityReport(1.5, "uhlmann", ())
