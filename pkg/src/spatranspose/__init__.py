"""Structural physical approximation of the qubit transpose: channels,
optics, photon-count simulation and maximum-likelihood tomography."""

__version__ = "0.1.0"

from .channels import (
    ChiMatrix,
    ChoiMatrix,
    KrausSet,
    MeasurePrepareEnsemble,
    apply_channel,
    canonical_spa_vectors,
    convert,
    minimal_spa_admixture,
    spa_measure_prepare_ensemble,
    spa_transpose_choi,
    unitary_scheme_kraus,
)
from .metrics import negativity, overlap_fidelity, process_and_average_fidelity, uhlmann_fidelity
from .shots import EQ4_STATE, SourceModel, generate_tomography_dataset
from .tomography import qpt_mle, qst_mle

__all__ = [
    "ChiMatrix",
    "ChoiMatrix",
    "EQ4_STATE",
    "KrausSet",
    "MeasurePrepareEnsemble",
    "SourceModel",
    "apply_channel",
    "canonical_spa_vectors",
    "convert",
    "generate_tomography_dataset",
    "minimal_spa_admixture",
    "negativity",
    "overlap_fidelity",
    "process_and_average_fidelity",
    "qpt_mle",
    "qst_mle",
    "spa_measure_prepare_ensemble",
    "spa_transpose_choi",
    "uhlmann_fidelity",
    "unitary_scheme_kraus",
]
