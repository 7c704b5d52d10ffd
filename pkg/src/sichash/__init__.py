"""SicHash: perfect hashing via small overloaded irregular cuckoo
tables whose per-key hash-function choice lives in compact retrieval
stores, plus a load-threshold solver and overloading experiments."""

from .cuckoo import (
    BucketInput,
    PlacementResult,
    RattleTable,
    build_bucket,
    incremental_load_experiment,
    matching_oracle,
    rattle_insert,
)
from .errors import ConstructionError, DeserializationError, SicHashError
from .hashing import MasterHash, bucket_of, cell_of, class_of, master_hash
from .phf import (
    BucketMetaArray,
    PhfConfig,
    SicHashPhf,
    SpaceBreakdown,
    build,
    class_fractions,
    deserialize,
    minimize,
    serialize,
)
from .retrieval import RetrievalStore
from .succinct import (
    BitVector,
    EliasFanoSeq,
    GolombRiceSeq,
    bv_select1,
    ef_access,
    ef_encode,
    gr_access,
    gr_encode,
)
from .thresholds import ClassMix, ThresholdSolution, g_A, F_of_lambda, solve_threshold

__version__ = "0.1.0"

__all__ = [
    "BitVector",
    "BucketInput",
    "BucketMetaArray",
    "ClassMix",
    "ConstructionError",
    "DeserializationError",
    "EliasFanoSeq",
    "F_of_lambda",
    "GolombRiceSeq",
    "MasterHash",
    "PhfConfig",
    "PlacementResult",
    "RattleTable",
    "RetrievalStore",
    "SicHashError",
    "SicHashPhf",
    "SpaceBreakdown",
    "ThresholdSolution",
    "bucket_of",
    "bv_select1",
    "build",
    "build_bucket",
    "cell_of",
    "class_fractions",
    "class_of",
    "deserialize",
    "ef_access",
    "ef_encode",
    "g_A",
    "gr_access",
    "gr_encode",
    "incremental_load_experiment",
    "master_hash",
    "matching_oracle",
    "minimize",
    "rattle_insert",
    "serialize",
]
