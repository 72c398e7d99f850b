"""Parallel decoding engine: n-gram speculation from Jacobi trajectories,
distribution-preserving verification, scaling analytics, and simulated
multi-device execution over pluggable reference models."""

__version__ = "0.1.0"

from .analytics import (
    AcceptanceParams,
    RunMetrics,
    compression_ratio,
    expected_accepted_batched,
    expected_accepted_single,
    flops_proxy,
    mc_expected_accepted,
    predicted_compression,
    scaling_rows,
    speculation_params,
)
from .decoding import (
    DecodeState,
    JacobiTrajectory,
    StepOutcome,
    decode_autoregressive,
    decode_jacobi,
    decode_lookahead,
    lookahead_step,
    start_session,
)
from .layout import (
    CandidateBranch,
    QueryToken,
    StepLayout,
    Window2D,
    build_layout,
    chain_layout,
    collect_ngrams,
    window_init,
    window_update,
)
from .models import (
    MarkovModel,
    ModelInterface,
    TinyTransformer,
    detokenize,
    markov_train,
    tokenize,
    transformer_init,
)
from .parallel import (
    CommStats,
    DevicePlan,
    decode_lookahead_devices,
    lp_step,
    partition_layout,
)
from .pool import NGramPool
from .sampling import adjusted_distribution, greedy_token, sample_token
from .types import (
    DegenerateDistributionError,
    GenerationConfig,
    LayoutError,
    SamplerSpec,
    StepRecord,
    validate_distribution,
)
from .verification import exact_accept_distribution, verify_greedy, verify_sample

__all__ = [
    "AcceptanceParams",
    "CandidateBranch",
    "CommStats",
    "DecodeState",
    "DegenerateDistributionError",
    "DevicePlan",
    "GenerationConfig",
    "JacobiTrajectory",
    "LayoutError",
    "MarkovModel",
    "ModelInterface",
    "NGramPool",
    "QueryToken",
    "RunMetrics",
    "SamplerSpec",
    "StepLayout",
    "StepOutcome",
    "StepRecord",
    "TinyTransformer",
    "Window2D",
    "adjusted_distribution",
    "build_layout",
    "chain_layout",
    "collect_ngrams",
    "compression_ratio",
    "decode_autoregressive",
    "decode_jacobi",
    "decode_lookahead",
    "decode_lookahead_devices",
    "detokenize",
    "exact_accept_distribution",
    "expected_accepted_batched",
    "expected_accepted_single",
    "flops_proxy",
    "greedy_token",
    "lookahead_step",
    "lp_step",
    "markov_train",
    "mc_expected_accepted",
    "partition_layout",
    "predicted_compression",
    "sample_token",
    "scaling_rows",
    "speculation_params",
    "start_session",
    "tokenize",
    "transformer_init",
    "validate_distribution",
    "verify_greedy",
    "verify_sample",
    "window_init",
    "window_update",
]
