"""Qubit channel representations and the structural physical approximation
of the transpose map.

Four interconvertible representations are supported:

* :class:`KrausSet`  -- ``E(rho) = sum_i K_i rho K_i^dag``
* :class:`ChoiMatrix` -- ``C = [id (x) E](|phi+><phi+|)`` with
  ``|phi+> = sum_i |ii>/sqrt(d)``; the channel acts on the *second* factor.
* :class:`ChiMatrix` -- ``E(rho) = sum_mn chi_mn s_m rho s_n^dag`` over the
  unnormalized Paulis ``(I, X, Y, Z)``, ``tr chi = 1`` for trace preserving maps.
* :class:`MeasurePrepareEnsemble` -- ``E(rho) = sum_k tr[M_k rho] sigma_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .qmath import (
    PAULIS,
    PSD_TOL,
    SUPPORTED_DIMS,
    I2,
    SX,
    SZ,
    dag,
    hermitian_eigensystem,
    matrix_from_json,
    matrix_to_json,
    normalize,
    partial_trace,
    projector,
)

KINDS = ("kraus", "choi", "chi", "measure_prepare")


class UnsupportedConversion(ValueError):
    """Raised when a representation cannot be produced for the given channel."""


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ValueError("Kraus set is empty")
        d = ops[0].shape[0]
        if any(k.shape != (d, d) for k in ops):
            raise ValueError("Kraus operators must share one square shape")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_error(self) -> float:
        total = sum(dag(k) @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(self.dim))))


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"Choi matrix of shape {m.shape} is not a qubit channel")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 2

    def trace_preservation_error(self) -> float:
        d = self.dim
        reduced = partial_trace(self.matrix, (d, d), keep=0)
        return float(np.max(np.abs(reduced - np.eye(d) / d)))

    def min_eigenvalue(self) -> float:
        return float(hermitian_eigensystem(self.matrix)[0][0])


@dataclass(frozen=True, eq=False)
class ChiMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError("chi matrix must be 4x4 in the Pauli basis")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True, eq=False)
class Branch:
    effect: np.ndarray
    prepared: np.ndarray
    label: int


@dataclass(frozen=True, eq=False)
class MeasurePrepareEnsemble:
    branches: tuple

    def __post_init__(self):
        branches = tuple(
            Branch(np.asarray(b.effect, dtype=complex), np.asarray(b.prepared, dtype=complex), int(b.label))
            for b in self.branches
        )
        object.__setattr__(self, "branches", branches)

    @property
    def dim(self) -> int:
        return self.branches[0].effect.shape[0]

    def completeness_error(self) -> float:
        total = sum(b.effect for b in self.branches)
        return float(np.max(np.abs(total - np.eye(self.dim))))


ChannelRep = Union[KrausSet, ChoiMatrix, ChiMatrix, MeasurePrepareEnsemble]


# ---------------------------------------------------------------------------
# SPA construction
# ---------------------------------------------------------------------------


def _check_dim(dim: int) -> None:
    if dim not in SUPPORTED_DIMS:
        raise ValueError(f"dim must be one of {SUPPORTED_DIMS}, got {dim}")


def maximally_entangled(dim: int = 2) -> np.ndarray:
    ket = np.zeros(dim * dim, dtype=complex)
    ket[:: dim + 1] = 1
    return ket / np.sqrt(dim)


def spa_transpose_map(rho, p: float = 2 / 3) -> np.ndarray:
    """``(1 - p) rho^T + p tr[rho] I / d`` on a single system."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return (1 - p) * rho.T + p * np.trace(rho) * np.eye(d) / d


def spa_transpose_choi(dim: int, p: float) -> np.ndarray:
    """Choi matrix of ``(1 - p) T + p D``; PSD exactly when ``p >= d/(d+1)``."""
    _check_dim(dim)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"admixture p must lie in [0, 1], got {p}")
    # [id (x) T](|phi+><phi+|) is the swap operator divided by d
    swap = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            swap[i * dim + j, j * dim + i] = 1
    return (1 - p) * swap / dim + p * np.eye(dim * dim) / dim**2


def minimal_spa_admixture(dim: int, tol: float = 1e-10) -> float:
    """Smallest admixture making the SPA of the transpose completely positive.

    Bisection on the sign of the minimum Choi eigenvalue; returns the upper
    (PSD) end of the final bracket.
    """
    _check_dim(dim)

    def min_eig(p):
        return np.linalg.eigvalsh(spa_transpose_choi(dim, p))[0]

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if min_eig(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def canonical_spa_vectors() -> list[np.ndarray]:
    """The four tetrahedral qubit states of the separable Choi decomposition."""
    w = np.exp(1j * np.pi * 2 / 3)
    a = 1j * w / (1j + np.conj(w))
    b = 1j * w / (1j - np.conj(w))
    return [normalize([1, c]) for c in (a, -b, b, -a)]


def spa_measure_prepare_ensemble() -> MeasurePrepareEnsemble:
    """Measure ``|v_k*>`` with effects ``|v_k*><v_k*|/2``, then prepare ``|v_k>``."""
    return MeasurePrepareEnsemble(
        tuple(
            Branch(projector(v.conj()) / 2, projector(v), k)
            for k, v in enumerate(canonical_spa_vectors(), start=1)
        )
    )


def unitary_scheme_kraus() -> KrausSet:
    return KrausSet(tuple(s / np.sqrt(3) for s in (I2, SX, SZ)))


def identity_kraus(dim: int = 2) -> KrausSet:
    return KrausSet((np.eye(dim, dtype=complex),))


# ---------------------------------------------------------------------------
# Application and conversion
# ---------------------------------------------------------------------------


def apply_channel(rep: ChannelRep, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (rep.dim, rep.dim):
        raise ValueError(f"state of shape {rho.shape} does not match channel dimension {rep.dim}")
    if isinstance(rep, KrausSet):
        return sum(k @ rho @ dag(k) for k in rep.operators)
    if isinstance(rep, ChoiMatrix):
        d = rep.dim
        big = np.kron(rho.T, np.eye(d)) @ rep.matrix
        return d * partial_trace(big, (d, d), keep=1)
    if isinstance(rep, ChiMatrix):
        chi = rep.matrix
        return sum(
            chi[m, n] * PAULIS[m] @ rho @ dag(PAULIS[n])
            for m in range(4)
            for n in range(4)
        )
    if isinstance(rep, MeasurePrepareEnsemble):
        return sum(np.trace(b.effect @ rho) * b.prepared for b in rep.branches)
    raise TypeError(f"unknown channel representation {type(rep).__name__}")


def kind_of(rep: ChannelRep) -> str:
    return {
        KrausSet: "kraus",
        ChoiMatrix: "choi",
        ChiMatrix: "chi",
        MeasurePrepareEnsemble: "measure_prepare",
    }[type(rep)]


def to_choi(rep: ChannelRep) -> ChoiMatrix:
    if isinstance(rep, ChoiMatrix):
        return rep
    d = rep.dim
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1
            c += np.kron(unit, apply_channel(rep, unit))
    return ChoiMatrix(c / d)


def _pauli_vectors() -> np.ndarray:
    """Columns ``(I (x) s_m) sum_i |ii>`` for the four Paulis."""
    phi = maximally_entangled(2) * np.sqrt(2)
    return np.column_stack([np.kron(I2, s) @ phi for s in PAULIS])


def choi_to_chi(choi: ChoiMatrix) -> ChiMatrix:
    b = _pauli_vectors()
    return ChiMatrix(dag(b) @ choi.matrix @ b / 2)


def chi_to_choi(chi: ChiMatrix) -> ChoiMatrix:
    b = _pauli_vectors()
    return ChoiMatrix(b @ chi.matrix @ dag(b) / 2)


def choi_to_kraus(choi: ChoiMatrix, cutoff: float = 1e-12) -> KrausSet:
    d = choi.dim
    vals, vecs = hermitian_eigensystem(choi.matrix)
    if vals[0] < -PSD_TOL:
        raise ValueError("Choi matrix is not PSD; map is not completely positive")
    ops = [
        np.sqrt(d * lam) * v.reshape(d, d).T
        for lam, v in zip(vals, vecs)
        if lam > cutoff
    ]
    return KrausSet(tuple(ops))


def convert(rep: ChannelRep, target: str) -> ChannelRep:
    """Convert ``rep`` to the representation named ``target``.

    Conversion to ``measure_prepare`` is only available for the SPA transpose
    channel; any other channel raises :class:`UnsupportedConversion`.
    """
    if target not in KINDS:
        raise ValueError(f"unknown representation kind {target!r}")
    if kind_of(rep) == target:
        return rep
    choi = to_choi(rep)
    if target == "choi":
        return choi
    if target == "chi":
        return choi_to_chi(choi)
    if target == "kraus":
        return choi_to_kraus(choi)
    reference = spa_transpose_choi(2, 2 / 3)
    if choi.matrix.shape == reference.shape and np.max(np.abs(choi.matrix - reference)) < 1e-9:
        return spa_measure_prepare_ensemble()
    raise UnsupportedConversion(
        "measure-and-prepare decomposition is only implemented for the SPA transpose channel"
    )


NAMED_CHANNELS = {
    "identity": identity_kraus,
    "spa-mp": spa_measure_prepare_ensemble,
    "spa-u": unitary_scheme_kraus,
    "sx": lambda: KrausSet((SX,)),
    "sz": lambda: KrausSet((SZ,)),
}


def named_channel(name: str) -> ChannelRep:
    try:
        return NAMED_CHANNELS[name]()
    except KeyError:
        raise ValueError(f"unknown channel {name!r}; choose from {sorted(NAMED_CHANNELS)}") from None


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def channel_to_json(rep: ChannelRep) -> dict:
    kind = kind_of(rep)
    if kind == "kraus":
        return {"kind": kind, "operators": [matrix_to_json(k) for k in rep.operators]}
    if kind in ("choi", "chi"):
        return {"kind": kind, "matrix": matrix_to_json(rep.matrix)}
    return {
        "kind": kind,
        "branches": [
            {"label": b.label, "effect": matrix_to_json(b.effect), "prepared": matrix_to_json(b.prepared)}
            for b in rep.branches
        ],
    }


def channel_from_json(obj: dict) -> ChannelRep:
    kind = obj.get("kind")
    if kind == "kraus":
        return KrausSet(tuple(matrix_from_json(k) for k in obj["operators"]))
    if kind == "choi":
        return ChoiMatrix(matrix_from_json(obj["matrix"]))
    if kind == "chi":
        return ChiMatrix(matrix_from_json(obj["matrix"]))
    if kind == "measure_prepare":
        return MeasurePrepareEnsemble(
            tuple(
                Branch(matrix_from_json(b["effect"]), matrix_from_json(b["prepared"]), b["label"])
                for b in obj["branches"]
            )
        )
    raise ValueError(f"unknown channel kind {kind!r}")
