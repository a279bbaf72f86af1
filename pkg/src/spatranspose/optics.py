"""Jones-calculus model of the waveplate/polarizer arms.

Basis order is ``(|H>, |V>)``.  Angles are radians in memory and degrees in
serialized trains.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.optimize import least_squares

from .channels import canonical_spa_vectors
from .qmath import dag, normalize

H = np.array([1, 0], dtype=complex)
V = np.array([0, 1], dtype=complex)

BLOCKED_TOL = 1e-15
SOLVER_TOL = 1e-10


class SolverError(RuntimeError):
    """Angle refinement failed to reach the target infidelity."""


@dataclass(frozen=True)
class WaveplateSetting:
    kind: str
    angle: float

    def __post_init__(self):
        if self.kind not in ("half", "quarter"):
            raise ValueError(f"waveplate kind must be 'half' or 'quarter', got {self.kind!r}")
        object.__setattr__(self, "angle", float(np.mod(self.angle, np.pi)))


@dataclass(frozen=True)
class Polarizer:
    """Transmits the linear polarization at ``angle`` from horizontal."""

    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "angle", float(np.mod(self.angle, np.pi)))


Element = Union[WaveplateSetting, Polarizer]


def hwp(angle: float) -> WaveplateSetting:
    return WaveplateSetting("half", angle)


def qwp(angle: float) -> WaveplateSetting:
    return WaveplateSetting("quarter", angle)


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _hwp_matrix(theta):
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def _qwp_matrix(theta):
    return rotation(theta) @ np.diag([1, 1j]) @ rotation(-theta)


def jones_matrix(element: Element) -> np.ndarray:
    if isinstance(element, Polarizer):
        r = rotation(element.angle)
        return r @ np.diag([1, 0]).astype(complex) @ dag(r)
    if element.kind == "half":
        return _hwp_matrix(element.angle)
    return _qwp_matrix(element.angle)


def train_matrix(train) -> np.ndarray:
    """Total Jones matrix; the first element of ``train`` acts first."""
    m = np.eye(2, dtype=complex)
    for element in train:
        m = jones_matrix(element) @ m
    return m


def simulate_train(train, rho) -> tuple[float, np.ndarray | None]:
    """Propagate a density matrix through the train.

    Returns the transmission probability and the renormalized output state,
    or ``(0.0, None)`` when the input is blocked.
    """
    out = np.asarray(rho, dtype=complex)
    for element in train:
        j = jones_matrix(element)
        out = j @ out @ dag(j)
    prob = float(np.trace(out).real)
    if prob <= BLOCKED_TOL:
        return 0.0, None
    return prob, out / prob


# vectorized forms used by the angle grid search
def _hwp_on_h(h):
    return np.stack([np.cos(2 * h), np.sin(2 * h)], axis=-1).astype(complex)


def _qwp_batch(q):
    c, s = np.cos(q), np.sin(q)
    # R(q) diag(1, i) R(-q)
    a = c * c + 1j * s * s
    b = (1 - 1j) * c * s
    d = s * s + 1j * c * c
    return a, b, d


def _prep_amplitudes(h, q):
    """``QWP(q) HWP(h) |H>`` for broadcast arrays ``h``, ``q``."""
    lin = _hwp_on_h(h)
    a, b, d = _qwp_batch(q)
    return np.stack([a * lin[..., 0] + b * lin[..., 1], b * lin[..., 0] + d * lin[..., 1]], axis=-1)


def _meas_amplitudes(q, h):
    """``(HWP(h) QWP(q))^dag |H>``: the state the train projects onto."""
    # HWP is real symmetric, so HWP^dag |H> = HWP(h) |H>; QWP^dag = conj(QWP)
    lin = _hwp_on_h(h)
    a, b, d = _qwp_batch(q)
    a, b, d = np.conj(a), np.conj(b), np.conj(d)
    return np.stack([a * lin[..., 0] + b * lin[..., 1], b * lin[..., 0] + d * lin[..., 1]], axis=-1)


def _solve(target, amplitudes):
    target = normalize(target)
    grid = np.deg2rad(np.arange(180.0))
    x, y = np.meshgrid(grid, grid, indexing="ij")
    amps = amplitudes(x, y)
    infid = 1 - np.abs(amps @ target.conj()) ** 2
    i, j = np.unravel_index(np.argmin(infid), infid.shape)

    def residual(p):
        # component of the produced state orthogonal to the target; its squared
        # norm is the infidelity
        amp = amplitudes(p[0], p[1])
        r = amp - target * np.vdot(target, amp)
        return np.concatenate([r.real, r.imag])

    start = np.array([grid[i], grid[j]])
    res = least_squares(residual, start, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    infidelity = float(np.sum(res.fun**2))
    if infidelity > SOLVER_TOL:
        raise SolverError(f"angle refinement stalled at infidelity {infidelity:.3e}")
    return tuple(res.x)


def solve_preparation_angles(target) -> tuple[WaveplateSetting, WaveplateSetting]:
    """Angles with ``QWP(q) HWP(h) |H>`` equal to ``target`` up to phase.

    The HWP acts first. Returns ``(hwp, qwp)``.
    """
    h, q = _solve(target, _prep_amplitudes)
    return hwp(h), qwp(q)


def solve_measurement_angles(projector_ket) -> tuple[WaveplateSetting, WaveplateSetting]:
    """Angles for QWP -> HWP -> H-polarizer transmitting ``|<v|psi>|^2``.

    Returns ``(qwp, hwp)`` in beam order.
    """
    q, h = _solve(projector_ket, _meas_amplitudes)
    return qwp(q), hwp(h)


def preparation_train(target) -> tuple:
    return solve_preparation_angles(target)


def measurement_train(projector_ket) -> tuple:
    return (*solve_measurement_angles(projector_ket), Polarizer(0.0))


@lru_cache(maxsize=None)
def spa_branch_train(k: int) -> tuple:
    """Measure ``|v_k*>`` then prepare ``|v_k>`` (``k`` in 1..4)."""
    if k not in (1, 2, 3, 4):
        raise ValueError(f"branch index must be 1..4, got {k}")
    v = canonical_spa_vectors()[k - 1]
    return measurement_train(v.conj()) + preparation_train(v)


def train_to_json(train) -> list[dict]:
    out = []
    for element in train:
        if isinstance(element, Polarizer):
            kind = "polarizer"
        else:
            kind = "hwp" if element.kind == "half" else "qwp"
        out.append({"kind": kind, "angle_deg": float(np.rad2deg(element.angle))})
    return out


def train_from_json(items: list[dict]) -> tuple:
    build = {"hwp": hwp, "qwp": qwp, "polarizer": Polarizer}
    try:
        return tuple(build[item["kind"]](np.deg2rad(item["angle_deg"])) for item in items)
    except KeyError as exc:
        raise ValueError(f"bad optical element {exc}") from None
