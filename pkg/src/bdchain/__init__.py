"""Birth-death chain analysis through the Brownian scale embedding."""

from ._backend import BACKEND
from . import montecarlo, oracle
from .analysis import (
    CertificateError,
    ConsistencyError,
    ExtinctionResult,
    LimitExpectation,
    LimitKind,
    TransientChainError,
    expected_local_time_infinity,
    extinction_probability,
    green_value,
    green_values,
    limit_expectation,
    log_green_value,
    tanaka_expectation,
)
from .asymptotics import LimitPolicy, LimitVerdict, VerdictKind, classify_t_limit, sum_t
from .chain import (
    ChainSpec,
    ChainSpecError,
    ConstantBias,
    PaperHarmonic,
    ScaleEmbedding,
    Tabular,
    parse_chain,
    probabilities,
    read_table,
    skeleton_step_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CertificateError",
    "ChainSpec",
    "ChainSpecError",
    "ConsistencyError",
    "ConstantBias",
    "ExtinctionResult",
    "LimitExpectation",
    "LimitKind",
    "LimitPolicy",
    "LimitVerdict",
    "PaperHarmonic",
    "ScaleEmbedding",
    "Tabular",
    "TransientChainError",
    "VerdictKind",
    "classify_t_limit",
    "expected_local_time_infinity",
    "extinction_probability",
    "green_value",
    "green_values",
    "limit_expectation",
    "montecarlo",
    "oracle",
    "log_green_value",
    "parse_chain",
    "probabilities",
    "read_table",
    "skeleton_step_distribution",
    "sum_t",
    "tanaka_expectation",
]
