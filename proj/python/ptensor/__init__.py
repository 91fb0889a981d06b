from ._core import (
    ConfigError,
    ContractError,
    Error,
    IsolatedNeuronError,
    ParseError,
    SizeError,
    bell,
    burnside_dimension,
    count,
    demo,
    enumerate,
    span_rank,
)
