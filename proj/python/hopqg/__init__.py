"""Python access to the hopqg core: metrics, decomposition and the CLI."""

from ._hopqg import (
    Error,
    answer_metrics,
    compare_pairwise,
    decompose,
    decompose_dataset,
    detokenize,
    diversity,
    normalize_answer,
    relative_change,
    run_cli,
    supporting_fact_metrics,
    tokenize,
)

__all__ = [
    "Error",
    "answer_metrics",
    "compare_pairwise",
    "decompose",
    "decompose_dataset",
    "detokenize",
    "diversity",
    "normalize_answer",
    "relative_change",
    "run_cli",
    "supporting_fact_metrics",
    "tokenize",
]
