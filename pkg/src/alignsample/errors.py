"""Exception types shared across the toolkit.

Each error names the component it came from so the CLI can prefix its
diagnostics uniformly, and carries an exit code separating bad input (1)
from failures that happen mid-run (2).
"""


class ToolkitError(Exception):
    component = "alignsample"
    exit_code = 1


class DatasetError(ToolkitError):
    component = "dataset"


class GmmError(ToolkitError):
    component = "gmm"


class ScoringError(ToolkitError):
    component = "isa"


class BaselineError(ToolkitError):
    component = "baselines"


class LlmFilterError(ToolkitError):
    component = "llm-filter"


class VerdictParseError(LlmFilterError):
    """The judge reply contained neither a yes nor a no token."""


class TransportError(LlmFilterError):
    exit_code = 2


class ScalingLawError(ToolkitError):
    component = "scaling-law"


class FitDivergenceError(ScalingLawError):
    """Iterative refinement produced non-finite parameters.

    ``last_fit`` holds the last finite iterate so callers can inspect how
    far the solver got.
    """

    exit_code = 2

    def __init__(self, message, last_fit=None):
        super().__init__(message)
        self.last_fit = last_fit


class CliError(ToolkitError):
    component = "cli"
