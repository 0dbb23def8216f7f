"""Subset selection for LLM-alignment corpora.

Provides entropy-guided sampling over a Gaussian-mixture fit of the
embedding cloud, random and kernel-density baselines, an LLM-judge filter,
and a winrate-vs-data scaling-law fitter, all behind one CLI.
"""

from .dataset import (
    DataRecord,
    EmbeddedDataset,
    Selection,
    load_dataset,
    read_selection,
    write_selection,
)
from .gmm import EmConfig, GmmModel, fit_gmm, log_likelihood, responsibilities
from .isa import ScoreVector, dataset_entropy, entropy_deltas, score_points, select_isa
from .baselines import DensityScores, density_scores, select_density, select_random
from .llm_filter import build_prompt, parse_verdict, select_llm
from .scaling_law import ScalingLawFit, WinratePoint, fit_full, fit_pinned, predict

__version__ = "0.1.0"

__all__ = [
    "DataRecord",
    "EmbeddedDataset",
    "Selection",
    "load_dataset",
    "read_selection",
    "write_selection",
    "EmConfig",
    "GmmModel",
    "fit_gmm",
    "log_likelihood",
    "responsibilities",
    "ScoreVector",
    "score_points",
    "dataset_entropy",
    "entropy_deltas",
    "select_isa",
    "DensityScores",
    "density_scores",
    "select_density",
    "select_random",
    "build_prompt",
    "parse_verdict",
    "select_llm",
    "WinratePoint",
    "ScalingLawFit",
    "fit_pinned",
    "fit_full",
    "predict",
    "__version__",
]
