"""Photon-counting simulator for the heralded single-photon experiment.

Counts per setting are Poissonian with mean ``rate * duration * P`` where ``P``
is the probability that a photon leaving the channel passes the analysis
projector.  For the measure-and-prepare SPA scheme ``P`` is assembled from
the four Jones-calculus branch trains, each chosen with probability 1/4.

Every (setting, repetition) draw gets its own generator derived from the
master seed by counters, so datasets do not depend on scheduling.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import optics
from .channels import (
    ChannelRep,
    MeasurePrepareEnsemble,
    apply_channel,
    spa_measure_prepare_ensemble,
)
from .qmath import check_density_matrix, normalize, projector

SQ2 = np.sqrt(2)

ANALYSIS_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([1, 1], dtype=complex) / SQ2,
    "A": np.array([1, -1], dtype=complex) / SQ2,
    "R": np.array([1, 1j], dtype=complex) / SQ2,
    "L": np.array([1, -1j], dtype=complex) / SQ2,
}
# published reconstruction of the prepared input (|H> + (1+i)|V>)/sqrt(3)
EQ4_STATE = np.array([[0.322, 0.352 - 0.307j], [0.352 + 0.307j, 0.678]], dtype=complex)

QST_SETTINGS = ("H", "V", "D", "A", "R", "L")
QPT_INPUTS = ("H", "V", "D", "R")

CSV_COLUMNS = ("setting_label", "input_label", "repetition", "duration_s", "counts", "seed")


@dataclass(frozen=True)
class SourceModel:
    coincidence_rate: float = 4000.0
    duration: float = 1.0
    repetitions: int = 3

    def __post_init__(self):
        if not self.coincidence_rate > 0:
            raise ValueError("coincidence rate must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ValueError("repetitions must be a positive integer")


@dataclass(frozen=True)
class CountRecord:
    setting_label: str
    counts: tuple
    duration: float
    input_label: str = ""
    seed_path: tuple = ()
    seeds: tuple = field(default=(), compare=False)

    @property
    def total(self) -> float:
        return float(sum(self.counts))


def sample_branch(rng: np.random.Generator) -> int:
    """Uniform draw from the four measure-and-prepare branches, 1..4."""
    return int(rng.integers(1, 5))


def _is_spa_ensemble(channel) -> bool:
    if not isinstance(channel, MeasurePrepareEnsemble):
        return False
    ref = spa_measure_prepare_ensemble()
    return len(channel.branches) == 4 and all(
        np.allclose(a.effect, b.effect, atol=1e-12) and np.allclose(a.prepared, b.prepared, atol=1e-12)
        for a, b in zip(channel.branches, ref.branches)
    )


def branch_probabilities(rho, analysis_ket) -> tuple[np.ndarray, np.ndarray]:
    """Per-branch polarizer transmission and analyzer pass probability.

    Both come from propagating ``rho`` through the optical branch trains.
    """
    a = projector(analysis_ket)
    passed = np.zeros(4)
    detect = np.zeros(4)
    for k in range(1, 5):
        p, out = optics.simulate_train(optics.spa_branch_train(k), rho)
        passed[k - 1] = p
        detect[k - 1] = 0.0 if out is None else float(np.trace(a @ out).real)
    return passed, detect


def detection_probability(rho, analysis_ket, channel: ChannelRep | None = None) -> float:
    """Probability a heralded photon that left the channel passes the analyzer."""
    rho = np.asarray(rho, dtype=complex)
    ket = normalize(analysis_ket)
    if channel is None:
        out = rho
    elif _is_spa_ensemble(channel):
        passed, detect = branch_probabilities(rho, ket)
        # uniform branch choice; the measurement polarizer passes sum(passed)/4 = 1/2
        # of heralded photons, and only those reach the coincidence detector
        return float(np.dot(passed, detect) / np.sum(passed))
    else:
        out = apply_channel(channel, rho)
    return float(np.real(np.vdot(ket, out @ ket)))


def expected_count(rho, analysis_ket, channel, source: SourceModel) -> float:
    return source.coincidence_rate * source.duration * detection_probability(rho, analysis_ket, channel)


def simulate_counts(rho, analysis_ket, channel, source: SourceModel, rng: np.random.Generator) -> CountRecord:
    """Poisson counts for one analysis setting, one entry per repetition."""
    mean = expected_count(rho, analysis_ket, channel, source)
    counts = rng.poisson(mean, size=source.repetitions)
    return CountRecord("custom", tuple(int(c) for c in counts), source.duration)


def simulate_photons(rho, analysis_ket, n_photons: int, rng: np.random.Generator) -> dict:
    """Photon-by-photon run of the measure-and-prepare scheme.

    Each heralded photon draws a branch uniformly, passes the branch
    polarizer with its Born probability, and is then analyzed.
    """
    passed, detect = branch_probabilities(rho, analysis_ket)
    k = rng.integers(0, 4, size=n_photons)
    through = rng.random(n_photons) < passed[k]
    detected = through & (rng.random(n_photons) < detect[k])
    return {
        "heralded": int(n_photons),
        "passed_measurement": int(through.sum()),
        "detected": int(detected.sum()),
        "branch_counts": np.bincount(k, minlength=4).tolist(),
    }


def _seed_sequence(master_seed: int, setting_index: int, repetition: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(setting_index, repetition))


def _record_for(args):
    idx, setting, input_label, rho, channel, source, master_seed, noiseless = args
    mean = expected_count(rho, ANALYSIS_KETS[setting], channel, source)
    counts, seeds = [], []
    for rep in range(source.repetitions):
        ss = _seed_sequence(master_seed, idx, rep)
        seeds.append(int(ss.generate_state(1)[0]))
        if noiseless:
            counts.append(mean)
        else:
            counts.append(int(np.random.default_rng(ss).poisson(mean)))
    return CountRecord(
        setting_label=setting,
        counts=tuple(counts),
        duration=source.duration,
        input_label=input_label,
        seed_path=(master_seed, idx),
        seeds=tuple(seeds),
    )


def named_state(name: str) -> np.ndarray:
    """``eq4``, ``mixed`` or one of the six analysis labels."""
    if name == "eq4":
        return EQ4_STATE.copy()
    if name == "mixed":
        return np.eye(2, dtype=complex) / 2
    if name in ANALYSIS_KETS:
        return projector(ANALYSIS_KETS[name])
    raise ValueError(f"unknown state {name!r}")


def input_states() -> dict:
    return {label: projector(ANALYSIS_KETS[label]) for label in QPT_INPUTS}


def generate_tomography_dataset(
    kind: str,
    channel: ChannelRep | None = None,
    source: SourceModel | None = None,
    master_seed: int = 0,
    rho=None,
    input_label: str = "rho",
    noiseless: bool = False,
    workers: int = 1,
) -> list[CountRecord]:
    """Count records for state (``qst``) or process (``qpt``) tomography.

    ``qst`` measures the six analysis settings on ``channel(rho)``;
    ``qpt`` sends the inputs H, V, D, R through ``channel`` and analyzes each
    output in the same six settings.  ``noiseless`` replaces Poisson draws by
    their means.
    """
    source = source or SourceModel()
    jobs = []
    if kind == "qst":
        if rho is None:
            raise ValueError("qst dataset needs an input state")
        rho = check_density_matrix(rho, tol=1e-8)
        for setting in QST_SETTINGS:
            jobs.append((setting, input_label, rho))
    elif kind == "qpt":
        for label, state in input_states().items():
            for setting in QST_SETTINGS:
                jobs.append((setting, label, state))
    else:
        raise ValueError(f"kind must be 'qst' or 'qpt', got {kind!r}")
    args = [
        (idx, setting, label, state, channel, source, master_seed, noiseless)
        for idx, (setting, label, state) in enumerate(jobs)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_record_for, args))
    return [_record_for(a) for a in args]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        seeds = rec.seeds or (None,) * len(rec.counts)
        for rep, (count, seed) in enumerate(zip(rec.counts, seeds)):
            writer.writerow([rec.setting_label, rec.input_label, rep, repr(rec.duration), repr(count), "" if seed is None else seed])
    return buf.getvalue()


def _parse_count(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def records_from_csv(text: str) -> list[CountRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"CSV is missing columns {sorted(missing)}")
    grouped: dict[tuple, dict] = {}
    for row in reader:
        key = (row["setting_label"], row["input_label"])
        entry = grouped.setdefault(key, {"counts": [], "seeds": [], "duration": float(row["duration_s"])})
        entry["counts"].append(_parse_count(row["counts"]))
        if row["seed"]:
            entry["seeds"].append(int(row["seed"]))
    return [
        CountRecord(setting, tuple(e["counts"]), e["duration"], input_label=label, seeds=tuple(e["seeds"]))
        for (setting, label), e in grouped.items()
    ]


def records_to_json(records, *, kind: str, source: SourceModel, channel_kind: str | None, master_seed: int) -> dict:
    return {
        "kind": kind,
        "master_seed": master_seed,
        "channel": channel_kind,
        "source": asdict(source),
        "records": [
            {
                "setting_label": r.setting_label,
                "input_label": r.input_label,
                "duration_s": r.duration,
                "counts": list(r.counts),
                "seed_path": list(r.seed_path),
                "seeds": list(r.seeds),
            }
            for r in records
        ],
    }


def records_from_json(obj: dict) -> list[CountRecord]:
    return [
        CountRecord(
            setting_label=r["setting_label"],
            counts=tuple(r["counts"]),
            duration=float(r["duration_s"]),
            input_label=r.get("input_label", ""),
            seed_path=tuple(r.get("seed_path", ())),
            seeds=tuple(r.get("seeds", ())),
        )
        for r in obj["records"]
    ]
