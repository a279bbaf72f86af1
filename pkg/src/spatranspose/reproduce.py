"""End-to-end reproduction report.

Deterministic checks compare computed values to exact expectations; the
shot-noise section summarizes seeded tomography trials.  Experimental point
values (state fidelity 0.996, process fidelity 0.999) appear only as context
annotations, never as pass/fail targets.
"""

from __future__ import annotations

import csv
import io
import json
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .channels import (
    ChoiMatrix,
    apply_channel,
    canonical_spa_vectors,
    convert,
    identity_kraus,
    maximally_entangled,
    minimal_spa_admixture,
    spa_measure_prepare_ensemble,
    spa_transpose_choi,
    to_choi,
    unitary_scheme_kraus,
)
from .metrics import (
    average_fidelity_formula,
    average_fidelity_monte_carlo,
    negativity,
    overlap_fidelity,
    uhlmann_fidelity,
)
from .qmath import haar_random_ket, projector
from .shots import EQ4_STATE, SourceModel, generate_tomography_dataset
from .tomography import expected_records, qpt_mle, qst_mle

IDEAL_CHI = np.diag([1 / 3, 1 / 3, 0, 1 / 3]).astype(complex)


@dataclass
class Check:
    name: str
    expected: float
    computed: float
    tolerance: float
    passed: bool
    provenance: str


def _check(name, expected, computed, tol, provenance, *, mode="abs"):
    computed = float(computed)
    if mode == "abs":
        ok = abs(computed - expected) <= tol
    elif mode == "min":
        ok = computed >= expected - tol
    else:
        raise ValueError(mode)
    return Check(name, float(expected), computed, float(tol), bool(ok), provenance)


def _seed(master: int, *counters: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=counters).generate_state(1)[0])


def deterministic_checks(seed: int) -> list[Check]:
    checks = []
    for d in (2, 3, 4):
        checks.append(_check(f"minimal_p_d{d}", d / (d + 1), minimal_spa_admixture(d), 1e-9, "published"))

    vs = canonical_spa_vectors()
    decomposition = sum(np.kron(projector(v), projector(v)) for v in vs) / 4
    bell = [maximally_entangled(2), np.array([1, 0, 0, -1]) / np.sqrt(2), np.array([0, 1, 1, 0]) / np.sqrt(2)]
    target = sum(projector(b) for b in bell) / 3
    checks.append(_check("separable_decomposition_max_dev", 0.0, np.max(np.abs(decomposition - target)), 1e-10, "published"))
    povm = sum(projector(v.conj()) for v in vs) / 2
    checks.append(_check("povm_completeness_max_dev", 0.0, np.max(np.abs(povm - np.eye(2))), 1e-10, "derived"))

    mp = spa_measure_prepare_ensemble()
    ku = unitary_scheme_kraus()
    choi_dev = np.max(np.abs(to_choi(mp).matrix - to_choi(ku).matrix))
    checks.append(_check("scheme_equivalence_choi_max_dev", 0.0, choi_dev, 1e-10, "published"))

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    action_dev, bound_dev = 0.0, 0.0
    for _ in range(100):
        psi = projector(haar_random_ket(2, rng))
        out_m = apply_channel(mp, psi)
        action_dev = max(action_dev, np.max(np.abs(out_m - apply_channel(ku, psi))))
        bound_dev = max(bound_dev, abs(overlap_fidelity(psi.T, out_m) - 2 / 3))
    checks.append(_check("scheme_equivalence_action_max_dev", 0.0, action_dev, 1e-10, "published"))
    checks.append(_check("fidelity_bound_two_thirds_max_dev", 0.0, bound_dev, 1e-11, "published"))

    chi = convert(ku, "chi").matrix
    checks.append(_check("chi_ideal_from_kraus_max_dev", 0.0, np.max(np.abs(chi - IDEAL_CHI)), 1e-10, "published"))

    qpt = qpt_mle(expected_records("qpt", channel=mp))
    checks.append(_check("chi_noiseless_qpt_max_dev", 0.0, np.max(np.abs(qpt.chi - IDEAL_CHI)), 1e-5, "published"))
    qst = qst_mle(expected_records("qst", rho=EQ4_STATE))
    checks.append(_check("eq4_noiseless_qst_max_dev", 0.0, np.max(np.abs(qst.estimate - EQ4_STATE)), 1e-6, "published"))

    checks.append(_check("negativity_spa_choi", 0.0, negativity(spa_transpose_choi(2, 2 / 3)), 1e-10, "derived"))
    checks.append(_check("negativity_phi_plus", 0.5, negativity(projector(maximally_entangled(2))), 1e-10, "derived"))

    formula = average_fidelity_formula(identity_kraus(), mp)
    mc, err = average_fidelity_monte_carlo(identity_kraus(), mp, 100_000, seed)
    checks.append(_check("average_fidelity_identity_vs_spa_formula", 5 / 9, formula, 1e-12, "derived"))
    checks.append(_check("average_fidelity_identity_vs_spa_routes", formula, mc, 3 * err, "derived"))
    checks.append(_check("average_fidelity_mp_vs_u", 1.0, average_fidelity_formula(mp, ku), 1e-9, "derived"))
    return checks


def _qst_trial(args):
    seed, channel_name, source = args
    channel = {"spa-mp": spa_measure_prepare_ensemble(), "spa-u": unitary_scheme_kraus(), "none": None}[channel_name]
    ideal = EQ4_STATE if channel is None else apply_channel(channel, EQ4_STATE)
    recs = generate_tomography_dataset("qst", channel=channel, rho=EQ4_STATE, source=source, master_seed=seed)
    return uhlmann_fidelity(qst_mle(recs).estimate, ideal)


def _qpt_trial(args):
    seed, channel_name, source = args
    channel = spa_measure_prepare_ensemble() if channel_name == "spa-mp" else unitary_scheme_kraus()
    recs = generate_tomography_dataset("qpt", channel=channel, source=source, master_seed=seed)
    est = ChoiMatrix(qpt_mle(recs).estimate)
    mean, _ = average_fidelity_monte_carlo(est, channel, 20_000, seed)
    return mean


def _summary(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {
        "trials": int(v.size),
        "mean": float(v.mean()),
        "std": float(v.std(ddof=1)) if v.size > 1 else 0.0,
        "min": float(v.min()),
        "q05": float(np.quantile(v, 0.05)),
        "median": float(np.median(v)),
        "max": float(v.max()),
    }


def shot_noise_section(seed: int, source: SourceModel, trials: int, qpt_trials: int, jobs: int) -> tuple[dict, list[Check]]:
    tasks = {
        "qst_input_eq4": (_qst_trial, "none", trials),
        "qst_output_spa_mp": (_qst_trial, "spa-mp", trials),
        "qst_output_spa_u": (_qst_trial, "spa-u", trials),
        "qpt_average_fidelity_spa_mp": (_qpt_trial, "spa-mp", qpt_trials),
        "qpt_average_fidelity_spa_u": (_qpt_trial, "spa-u", qpt_trials),
    }
    context = {
        "qst_output_spa_mp": 0.996,
        "qst_output_spa_u": 0.999,
        "qpt_average_fidelity_spa_mp": 0.999,
        "qpt_average_fidelity_spa_u": 0.999,
    }
    summaries, checks = {}, []
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for t_idx, (name, (fn, channel_name, n)) in enumerate(tasks.items()):
            args = [(_seed(seed, 100 + t_idx, i), channel_name, source) for i in range(n)]
            values = list(pool.map(fn, args)) if pool else [fn(a) for a in args]
            summary = _summary(values)
            if name in context:
                summary["experimental_value_context"] = context[name]
            if fn is _qst_trial:
                frac = float(np.mean(np.asarray(values) >= 0.99))
                summary["fraction_at_least_0.99"] = frac
                checks.append(_check(f"{name}_fraction_fidelity_ge_0.99", 0.95, frac, 0.0, "derived", mode="min"))
            summaries[name] = summary
    finally:
        if pool:
            pool.shutdown()
    return summaries, checks


def reproduce_paper(seed: int = 0, source: SourceModel | None = None, trials: int = 100, qpt_trials: int = 20, jobs: int = 1) -> dict:
    source = source or SourceModel()
    checks = deterministic_checks(seed)
    summaries, stat_checks = shot_noise_section(seed, source, trials, qpt_trials, jobs)
    checks += stat_checks
    return {
        "master_seed": seed,
        "source": asdict(source),
        "trials": {"qst": trials, "qpt": qpt_trials},
        "environment": {
            "package_version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "checks": [asdict(c) for c in checks],
        "all_passed": all(c.passed for c in checks),
        "shot_noise": summaries,
        "ideal_chi": [[float(x.real) for x in row] for row in IDEAL_CHI],
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    fields = ["name", "expected", "computed", "tolerance", "passed", "provenance"]
    writer.writerow(fields)
    for c in report["checks"]:
        writer.writerow([repr(c[f]) if isinstance(c[f], float) else c[f] for f in fields])
    return buf.getvalue()

