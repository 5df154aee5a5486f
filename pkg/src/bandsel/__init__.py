"""Unsupervised hyperspectral band selection via multi-dictionary sparse
representation, with baseline selectors and a classification harness."""

__version__ = "0.1.0"

from .cube import (
    GroundTruth,
    HyperCube,
    SynthSpec,
    flatten,
    restrict_bands,
    sample_pixels,
    synth_cube,
    unflatten,
)
from .errors import (
    BandselError,
    CorruptFileError,
    DegenerateInputError,
    InsufficientClassSamplesError,
    InvalidArgumentError,
    InvalidDataError,
    NotOvercompleteError,
    UnsupportedFormatError,
)
from .io import inspect_cube, load_cube, load_ground_truth, save_cube
from .sparse import (
    Dictionary,
    SelectionResult,
    SparseCoefficients,
    band_weights,
    build_dictionary,
    mdsr_select,
    omp,
    select_bands,
    solve_all,
)
from .baselines import cluster_select, lp_select, osp_select, pca_extract
from .evaluate import (
    EvaluationReport,
    LabeledSplit,
    SelectorConfig,
    avg_band_correlation,
    evaluate_predictions,
    kappa,
    knn_classify,
    oca,
    run_trials,
    stratified_split,
)
from .numerics import EigenPair, least_squares, pearson, sym_eig

__all__ = [
    "__version__",
    "HyperCube",
    "GroundTruth",
    "SynthSpec",
    "flatten",
    "unflatten",
    "sample_pixels",
    "restrict_bands",
    "synth_cube",
    "load_cube",
    "save_cube",
    "load_ground_truth",
    "inspect_cube",
    "Dictionary",
    "SparseCoefficients",
    "SelectionResult",
    "build_dictionary",
    "omp",
    "solve_all",
    "band_weights",
    "select_bands",
    "mdsr_select",
    "lp_select",
    "osp_select",
    "cluster_select",
    "pca_extract",
    "LabeledSplit",
    "SelectorConfig",
    "EvaluationReport",
    "stratified_split",
    "knn_classify",
    "oca",
    "kappa",
    "avg_band_correlation",
    "run_trials",
    "evaluate_predictions",
    "EigenPair",
    "least_squares",
    "sym_eig",
    "pearson",
    "BandselError",
    "InvalidArgumentError",
    "NotOvercompleteError",
    "DegenerateInputError",
    "InsufficientClassSamplesError",
    "CorruptFileError",
    "UnsupportedFormatError",
    "InvalidDataError",
]
