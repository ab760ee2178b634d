"""Elastic path-matching distances between neuron reconstructions.

The pipeline: parse an SWC file into a rooted tree, decompose it into
root-to-leaf paths carrying branching features, resample path pairs onto a
shared grid, compare them as square-root-velocity curves after rigid
registration, and assemble per-pair costs into a neuron distance through an
optimal one-to-one path matching.  On top of the distance sit k nearest
neighbour retrieval, an evaluation harness, morphing, and scikit-learn style
estimators.
"""

from .elastic import Rotation3, SrvCurve, kabsch, morph, register, srv_inverse, srv_transform
from .errors import (
    ArborMatchError,
    DegeneratePathError,
    ManifestError,
    MultipleRootsError,
    StratificationError,
    SwcParseError,
    SwcValidationError,
)
from .estimators import ElasticNeuronDistance, ElasticNeuronKNN
from .distance import PathCost, PreparedPath, pair_pipeline, path_cost, prepare_path, prepared_cost
from .matching import (
    Assignment,
    CostMatrix,
    cost_matrix,
    hungarian,
    neuron_distance,
    pad_dummy,
    pairwise_neuron_distances,
)
from .paths import PathSet, RootedPath, as_path_set, concurrence, decompose, hierarchy
from .resample import ElasticConfig, ResampledPath, interpolate_features, pair_target, resample
from .retrieval import (
    CorpusEntry,
    CorpusIndex,
    EvalReport,
    corpus_distance_matrix,
    evaluate,
    knn_classify,
    load_corpus,
    load_distance_csv,
    load_manifest,
    parse_ratio,
    save_distance_csv,
    vote,
)
from .swc import (
    NeuronTree,
    SwcRecord,
    build_tree,
    load_swc,
    parse_swc,
    read_swc,
    to_swc,
    translate_to_origin,
)
from .synth import CLASS_PRESETS, MorphologyParams, synthetic_corpus, synthetic_neuron

__version__ = "0.1.0"

__all__ = [
    "ArborMatchError",
    "Assignment",
    "CLASS_PRESETS",
    "CorpusEntry",
    "CorpusIndex",
    "CostMatrix",
    "DegeneratePathError",
    "ElasticConfig",
    "ElasticNeuronDistance",
    "ElasticNeuronKNN",
    "EvalReport",
    "ManifestError",
    "MorphologyParams",
    "MultipleRootsError",
    "NeuronTree",
    "PathCost",
    "PathSet",
    "PreparedPath",
    "ResampledPath",
    "RootedPath",
    "Rotation3",
    "SrvCurve",
    "StratificationError",
    "SwcParseError",
    "SwcRecord",
    "SwcValidationError",
    "as_path_set",
    "build_tree",
    "concurrence",
    "corpus_distance_matrix",
    "cost_matrix",
    "decompose",
    "evaluate",
    "hierarchy",
    "hungarian",
    "interpolate_features",
    "kabsch",
    "knn_classify",
    "load_corpus",
    "load_distance_csv",
    "load_manifest",
    "load_swc",
    "morph",
    "neuron_distance",
    "pad_dummy",
    "pair_pipeline",
    "pair_target",
    "pairwise_neuron_distances",
    "parse_ratio",
    "parse_swc",
    "path_cost",
    "prepare_path",
    "prepared_cost",
    "read_swc",
    "register",
    "resample",
    "save_distance_csv",
    "srv_inverse",
    "srv_transform",
    "synthetic_corpus",
    "synthetic_neuron",
    "to_swc",
    "translate_to_origin",
    "vote",
    "__version__",
]
