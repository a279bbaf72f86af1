"""Fidelities between states and channels, and two-qubit PPT diagnostics."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .channels import ChannelRep, to_choi
from .qmath import check_density_matrix, dag, hermitian_eigensystem, matrix_sqrt_psd, matrix_to_json

FIDELITY_KINDS = ("uhlmann", "overlap", "process", "average")


def _same_shape(rho, sigma):
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return rho, sigma


def uhlmann_fidelity(rho, sigma) -> float:
    """``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    rho, sigma = _same_shape(rho, sigma)
    s = matrix_sqrt_psd(rho)
    inner = s @ sigma @ s
    inner = (inner + dag(inner)) / 2
    f = np.trace(matrix_sqrt_psd(inner)).real ** 2
    return float(max(f, 0.0))


def overlap_fidelity(rho, sigma) -> float:
    """``tr[rho sigma]``; equals the Uhlmann fidelity when one argument is pure."""
    rho, sigma = _same_shape(rho, sigma)
    return float(np.real(np.trace(rho @ sigma)))


def trace_distance(rho, sigma) -> float:
    rho, sigma = _same_shape(rho, sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


def _qubit_fidelity_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # closed form for 2x2 states: tr(ab) + 2 sqrt(det a det b)
    tr_ab = np.real(np.einsum("nij,nji->n", a, b))
    det = np.real(np.linalg.det(a)) * np.real(np.linalg.det(b))
    return tr_ab + 2 * np.sqrt(np.clip(det, 0, None))


def _apply_choi_batch(choi: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    c = choi.reshape(2, 2, 2, 2)
    # E(rho)_{kl} = d * sum_ij rho_{ji} C_{ik,jl}
    return 2 * np.einsum("nji,ikjl->nkl", rhos, c)


def _is_unitary_choi(c: np.ndarray, tol: float = 1e-9) -> bool:
    vals = np.linalg.eigvalsh((c + dag(c)) / 2)
    return bool(vals[-1] > 1 - tol and np.all(np.abs(vals[:-1]) < tol))


@dataclass(frozen=True)
class ChannelFidelity:
    process: float
    average: float
    average_formula: float | None
    average_monte_carlo: float
    monte_carlo_stderr: float
    samples: int


def average_fidelity_formula(a: ChannelRep, b: ChannelRep) -> float | None:
    """Closed-form Haar-average output fidelity, when one is available.

    Valid when one channel is unitary, ``(d tr[C_a C_b] + 1)/(d + 1)``, or
    when the two channels coincide (fidelity 1).  Returns ``None`` otherwise.
    """
    ca, cb = to_choi(a).matrix, to_choi(b).matrix
    if np.max(np.abs(ca - cb)) < 1e-12:
        return 1.0
    if _is_unitary_choi(ca) or _is_unitary_choi(cb):
        d = 2
        return float((d * np.real(np.trace(ca @ cb)) + 1) / (d + 1))
    return None


def average_fidelity_monte_carlo(a: ChannelRep, b: ChannelRep, samples: int = 100_000, seed: int = 0):
    """Mean and standard error of ``F(a(psi), b(psi))`` over Haar-random pure ``psi``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    z = rng.standard_normal((samples, 2)) + 1j * rng.standard_normal((samples, 2))
    kets = z / np.linalg.norm(z, axis=1, keepdims=True)
    rhos = np.einsum("ni,nj->nij", kets, kets.conj())
    out_a = _apply_choi_batch(to_choi(a).matrix, rhos)
    out_b = _apply_choi_batch(to_choi(b).matrix, rhos)
    f = _qubit_fidelity_batch(out_a, out_b)
    return float(f.mean()), float(f.std(ddof=1) / np.sqrt(samples))


def process_and_average_fidelity(a: ChannelRep, b: ChannelRep, samples: int = 100_000, seed: int = 0) -> ChannelFidelity:
    """Process fidelity (Uhlmann between Choi states) and average output fidelity.

    The average is reported by the closed form where it applies and by the
    Monte Carlo estimate otherwise; both routes are returned.
    """
    ca, cb = to_choi(a).matrix, to_choi(b).matrix
    process = uhlmann_fidelity(ca, cb)
    formula = average_fidelity_formula(a, b)
    mc, err = average_fidelity_monte_carlo(a, b, samples, seed)
    return ChannelFidelity(
        process=process,
        average=formula if formula is not None else mc,
        average_formula=formula,
        average_monte_carlo=mc,
        monte_carlo_stderr=err,
        samples=samples,
    )


def partial_transpose(rho, subsystem: str = "second") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("partial transpose expects a two-qubit (4x4) operator")
    t = rho.reshape(2, 2, 2, 2)  # indices (i, k, j, l) for |ik><jl|
    if subsystem == "first":
        t = t.transpose(2, 1, 0, 3)
    elif subsystem == "second":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 'first' or 'second', got {subsystem!r}")
    return t.reshape(4, 4)


def negativity(rho) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    vals, _ = hermitian_eigensystem(partial_transpose(rho))
    return float(-np.sum(vals[vals < 0]))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def content_hash(obj) -> str:
    """SHA-256 of the canonical JSON form; matrices are hashed via their JSON schema."""
    if isinstance(obj, np.ndarray):
        obj = matrix_to_json(obj)
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class FidelityReport:
    value: float
    kind: str
    operands: tuple

    def __post_init__(self):
        if self.kind not in FIDELITY_KINDS:
            raise ValueError(f"unknown fidelity kind {self.kind!r}")
        if not -1e-10 <= self.value <= 1 + 1e-10:
            raise ValueError(f"fidelity {self.value} outside [0, 1]")

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": self.value, "operands": list(self.operands)}


def state_fidelity_report(rho, sigma, kind: str = "uhlmann") -> FidelityReport:
    rho = check_density_matrix(rho, tol=1e-8)
    sigma = check_density_matrix(sigma, tol=1e-8)
    fn = {"uhlmann": uhlmann_fidelity, "overlap": overlap_fidelity}.get(kind)
    if fn is None:
        raise ValueError(f"state fidelity kind must be 'uhlmann' or 'overlap', got {kind!r}")
    return FidelityReport(fn(rho, sigma), kind, (content_hash(rho), content_hash(sigma)))
