"""Maximum-likelihood state and process tomography from count records.

Both estimators maximize the Poisson log-likelihood

    L = sum_j n_j log(s p_j) - s p_j,     p_j = tr[O_j X]

with the overall rate ``s`` profiled out (``s = N / sum_j p_j``).  ``X`` is a
qubit density matrix for QST and a two-qubit Choi matrix for QPT.  The
optimizer is projected gradient ascent with Barzilai-Borwein step proposals
and backtracking: a step is kept only if it raises ``L``, so the likelihood
sequence is monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ChiMatrix, ChoiMatrix, choi_to_chi
from .qmath import PAULIS, dag, matrix_to_json
from .shots import ANALYSIS_KETS, CountRecord, input_states

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


@dataclass
class MleResult:
    kind: str
    estimate: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    chi: np.ndarray | None = None
    initial_log_likelihood: float = float("nan")
    trace: list = field(default_factory=list)

    def to_json(self, include_trace: bool = False) -> dict:
        out = {
            "kind": self.kind,
            "estimate": matrix_to_json(self.estimate),
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if self.chi is not None:
            out["chi"] = matrix_to_json(self.chi)
        if include_trace:
            out["log_likelihood_trace"] = list(self.trace)
        return out


# ---------------------------------------------------------------------------
# projections onto the physical sets
# ---------------------------------------------------------------------------


def _project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of a real vector onto {x >= 0, sum x = total}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_density(m: np.ndarray) -> np.ndarray:
    """Closest unit-trace PSD matrix in Frobenius norm."""
    vals, vecs = np.linalg.eigh((m + dag(m)) / 2)
    vals = _project_simplex(vals)
    return (vecs * vals) @ dag(vecs)


def _project_psd(m):
    vals, vecs = np.linalg.eigh((m + dag(m)) / 2)
    return (vecs * np.clip(vals, 0, None)) @ dag(vecs)


def _project_tp(m, d=2):
    reduced = np.einsum("ijkj->ik", m.reshape(d, d, d, d))
    return m - np.kron(reduced - np.eye(d) / d, np.eye(d) / d)


def project_cptp(m: np.ndarray, tol: float = 1e-12, max_iter: int = 5000) -> np.ndarray:
    """Closest Choi matrix of a CPTP qubit map (Dykstra alternating projections).

    The returned matrix is exactly PSD; its trace-preservation residual is
    below ``tol`` unless ``max_iter`` is exhausted.
    """
    x = (m + dag(m)) / 2
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    y = x
    for _ in range(max_iter):
        y = _project_psd(x + p)
        p = x + p - y
        x_new = _project_tp(y + q)
        q = y + q - x_new
        x = x_new
        if np.max(np.abs(x - y)) < tol:
            break
    return y


# ---------------------------------------------------------------------------
# design matrices
# ---------------------------------------------------------------------------


def _analysis_projector(label: str) -> np.ndarray:
    try:
        ket = ANALYSIS_KETS[label]
    except KeyError:
        raise ValueError(f"unknown analysis setting {label!r}") from None
    return np.outer(ket, ket.conj())


def qst_design(records) -> tuple[np.ndarray, np.ndarray]:
    ops = np.array([_analysis_projector(r.setting_label) for r in records])
    counts = np.array([r.total for r in records], dtype=float)
    return ops, counts


def qpt_design(records) -> tuple[np.ndarray, np.ndarray]:
    """Operators ``O_j = d (rho_in^T (x) Pi_j)`` so that ``p_j = tr[O_j C]``."""
    inputs = input_states()
    ops = []
    for r in records:
        if r.input_label not in inputs:
            raise ValueError(f"unknown QPT input state {r.input_label!r}")
        ops.append(2 * np.kron(inputs[r.input_label].T, _analysis_projector(r.setting_label)))
    counts = np.array([r.total for r in records], dtype=float)
    return np.array(ops), counts


def _hermitian_basis(dim: int) -> list[np.ndarray]:
    if dim == 2:
        return [p / np.sqrt(2) for p in PAULIS]
    return [np.kron(a, b) / 2 for a in PAULIS for b in PAULIS]


def linear_inversion(ops: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Unconstrained least-squares fit of ``tr[O_j Y] = n_j``, normalized to unit trace.

    Raises ``ValueError`` if the operators do not span the Hermitian matrices.
    """
    dim = ops.shape[1]
    basis = _hermitian_basis(dim)
    a = np.real(np.einsum("jab,kba->jk", ops, np.array(basis)))
    if np.linalg.matrix_rank(a, tol=1e-9) < dim * dim:
        raise ValueError("measurement design is not informationally complete")
    coef, *_ = np.linalg.lstsq(a, counts, rcond=None)
    y = sum(c * b for c, b in zip(coef, basis))
    tr = np.trace(y).real
    if tr <= 0:
        raise ValueError("linear inversion produced a non-positive trace")
    return y / tr


def linear_inversion_qst(expectations) -> np.ndarray:
    """``(I + x X + y Y + z Z) / 2``; Bloch vectors longer than 1 are rescaled to the surface."""
    r = np.asarray(expectations, dtype=float)
    norm = np.linalg.norm(r)
    if norm > 1:
        r = r / norm
    return (PAULIS[0] + r[0] * PAULIS[1] + r[1] * PAULIS[2] + r[2] * PAULIS[3]) / 2


# ---------------------------------------------------------------------------
# likelihood and optimizer
# ---------------------------------------------------------------------------


def _probs(ops, x):
    return np.real(np.einsum("jab,ba->j", ops, x))


def poisson_log_likelihood(ops, counts, x) -> float:
    """Profiled Poisson log-likelihood (``-inf`` if a counted setting has ``p_j <= 0``)."""
    p = _probs(ops, x)
    total = counts.sum()
    if np.any((p <= 0) & (counts > 0)):
        return -np.inf
    scale = total / p.sum()
    pos = counts > 0
    return float(np.sum(counts[pos] * np.log(scale * p[pos])) - scale * p.sum())


def _gradient(ops, counts, x):
    p = _probs(ops, x)
    weights = np.where(counts > 0, counts / np.where(p > 0, p, 1.0), 0.0) - counts.sum() / p.sum()
    g = np.einsum("j,jab->ab", weights, ops)
    return (g + dag(g)) / 2


def _inner(a, b):
    return float(np.real(np.vdot(a, b)))


def maximize_likelihood(ops, counts, x0, project, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, record_trace=False):
    x = project(x0)
    ll = poisson_log_likelihood(ops, counts, x)
    if not np.isfinite(ll):
        d = x.shape[0]
        # nudge toward the maximally mixed point so every counted setting has p > 0
        x = project(0.99 * x + 0.01 * np.eye(d) / d)
        ll = poisson_log_likelihood(ops, counts, x)
    ll0 = ll
    trace = [ll] if record_trace else []
    g = _gradient(ops, counts, x)
    step = 1.0 / max(counts.sum(), 1.0)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        t = step
        for _ in range(60):
            x_new = project(x + t * g)
            ll_new = poisson_log_likelihood(ops, counts, x_new)
            if ll_new > ll:
                break
            t *= 0.5
        else:
            # no ascent direction left at machine precision
            converged = True
            break
        g_new = _gradient(ops, counts, x_new)
        dx = x_new - x
        dg = g_new - g
        curv = -_inner(dx, dg)
        step = _inner(dx, dx) / curv if curv > 0 else 2 * t
        rel = abs(ll_new - ll) / max(abs(ll), 1.0)
        x, ll, g = x_new, ll_new, g_new
        if record_trace:
            trace.append(ll)
        if rel < tol:
            converged = True
            break
    return x, ll, ll0, it, converged, trace


def _check_records(records):
    records = list(records)
    if not records:
        raise ValueError("no count records")
    if sum(r.total for r in records) <= 0:
        raise ValueError("total counts must be positive")
    return records


def qst_mle(records, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, record_trace=False) -> MleResult:
    records = _check_records(records)
    ops, counts = qst_design(records)
    x0 = linear_inversion(ops, counts)
    x, ll, ll0, it, conv, trace = maximize_likelihood(
        ops, counts, x0, project_density, tol, max_iter, record_trace
    )
    return MleResult("qst", x, ll, it, conv, initial_log_likelihood=ll0, trace=trace)


def qpt_mle(records, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, record_trace=False) -> MleResult:
    records = _check_records(records)
    ops, counts = qpt_design(records)
    x0 = linear_inversion(ops, counts)
    x, ll, ll0, it, conv, trace = maximize_likelihood(
        ops, counts, x0, project_cptp, tol, max_iter, record_trace
    )
    chi = choi_to_chi(ChoiMatrix(x)).matrix
    return MleResult("qpt", x, ll, it, conv, chi=chi, initial_log_likelihood=ll0, trace=trace)


def expected_records(kind, channel=None, rho=None) -> list[CountRecord]:
    """Noiseless unit-rate records, handy for exact-recovery checks."""
    from .shots import SourceModel, generate_tomography_dataset

    return generate_tomography_dataset(
        kind, channel=channel, rho=rho, source=SourceModel(1.0, 1.0, 1), noiseless=True
    )


def chi_from_result(result: MleResult) -> ChiMatrix:
    if result.chi is None:
        raise ValueError("result carries no chi matrix")
    return ChiMatrix(result.chi)
