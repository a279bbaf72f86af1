"""Small dense complex linear algebra for qubit and two-qubit objects.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; kets are 1-d
arrays.  Every function here accepts dimensions 2, 3 or 4 only.
"""

from __future__ import annotations

import numpy as np

SUPPORTED_DIMS = (2, 3, 4)

HERMITIAN_TOL = 1e-8
PSD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# Pauli basis order used everywhere: (sigma_0, sigma_x, sigma_y, sigma_z)
PAULIS = (I2, SX, SY, SZ)

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)


def _square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] not in SUPPORTED_DIMS:
        raise ValueError(f"dimension {m.shape[0]} outside supported {SUPPORTED_DIMS}")
    return m


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - dag(m))) <= tol)


def normalize(ket) -> np.ndarray:
    """Return ``ket`` scaled to unit Euclidean norm."""
    ket = np.asarray(ket, dtype=complex).ravel()
    norm = np.linalg.norm(ket)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return ket / norm


def projector(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex).ravel()
    return np.outer(ket, ket.conj())


def hermitian_eigensystem(m) -> tuple[np.ndarray, list[np.ndarray]]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Raises ``ValueError`` for non-Hermitian input or unsupported dimension.
    """
    m = _square(m)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian")
    # symmetrize so round-off in the lower triangle does not leak into eigh
    vals, vecs = np.linalg.eigh((m + dag(m)) / 2)
    return vals, [vecs[:, i].copy() for i in range(vals.size)]


def matrix_sqrt_psd(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero; anything more
    negative is rejected.
    """
    vals, vecs = hermitian_eigensystem(m)
    if vals[0] < -PSD_TOL:
        raise ValueError(f"matrix is not PSD (min eigenvalue {vals[0]:.3e})")
    vals = np.clip(vals, 0.0, None)
    v = np.column_stack(vecs)
    return (v * np.sqrt(vals)) @ dag(v)


def tensor_product(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] * b.shape[0] > 4:
        raise ValueError(f"tensor product dimension {a.shape[0] * b.shape[0]} exceeds 4")
    return np.kron(a, b)


def haar_random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed pure state from normalized complex Gaussians."""
    if dim not in (2, 4):
        raise ValueError(f"haar_random_ket supports dim 2 or 4, got {dim}")
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return normalize(z)


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Hilbert-Schmidt random mixed state (Ginibre construction)."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def check_density_matrix(rho, tol: float = PSD_TOL) -> np.ndarray:
    """Validate and return ``rho`` as a complex array.

    Checks Hermiticity, unit trace and positivity, each to ``tol``.
    """
    rho = _square(rho)
    if np.max(np.abs(rho - dag(rho))) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh((rho + dag(rho)) / 2)[0] < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def partial_trace(m, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator; ``keep`` is 0 or 1."""
    da, db = dims
    t = np.asarray(m).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    entries = obj["entries"]
    if len(entries) != dim * dim:
        raise ValueError(f"expected {dim * dim} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return flat.reshape(dim, dim)
