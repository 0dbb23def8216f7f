"""End-to-end runs behind the CLI: load -> fit -> score -> select -> write.

Everything here is plain library code so tests can drive full runs without
spawning a process; the click layer only parses flags into a RunConfig.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import baselines, dataset, gmm, isa, llm_filter, scaling_law
from .errors import CliError, LlmFilterError


@dataclass
class RunConfig:
    """One sampling run. Exactly one of k/fraction must be set."""

    strategy: str
    meta_path: Path
    emb_path: Path
    out_path: Path
    k: int | None = None
    fraction: float | None = None
    seed: int = 42
    threads: int = 1
    subset_out: Path | None = None
    preserve_order: str = "selection"  # or "original"
    # gmm / isa
    em: gmm.EmConfig = field(default_factory=gmm.EmConfig)
    model_in: Path | None = None
    model_out: Path | None = None
    renormalize: bool = False
    simplex: bool = False
    # density
    bandwidth: float | str = "auto"
    density_topk: bool = False
    # llm
    chat: llm_filter.ChatClientConfig | None = None
    mock_script: Path | None = None
    scan_order: str = "shuffled"

    def validate(self) -> None:
        if self.strategy not in dataset.STRATEGIES:
            raise CliError(f"unknown strategy {self.strategy!r}")
        if (self.k is None) == (self.fraction is None):
            raise CliError("exactly one of --k and --fraction must be given")
        if self.k is not None and self.k < 1:
            raise CliError(f"k must be >= 1, got {self.k}")
        if self.fraction is not None and not 0.0 < self.fraction <= 1.0:
            raise CliError(f"fraction must lie in (0, 1], got {self.fraction}")
        if self.preserve_order not in ("selection", "original"):
            raise CliError(f"unknown --preserve-order value {self.preserve_order!r}")
        if self.threads < 1:
            raise CliError(f"threads must be >= 1, got {self.threads}")


def resolve_k(config: RunConfig, n: int) -> int:
    """Fraction f resolves to ceil(f * N) so tiny corpora never round to zero."""
    if config.k is not None:
        return config.k
    k = math.ceil(config.fraction * n)
    return k


def _gmm_model(config: RunConfig, embeddings):
    if config.model_in is not None:
        model = gmm.load_model(config.model_in)
    else:
        model = gmm.fit_gmm(embeddings, config.em, threads=config.threads)
    if config.model_out is not None:
        gmm.save_model(model, config.model_out)
    return model


def compute_isa_selection(config: RunConfig, ds: dataset.EmbeddedDataset, k: int):
    model = _gmm_model(config, ds.embeddings)
    scores = isa.score_points(model, ds.embeddings, simplex=config.simplex, threads=config.threads)
    if config.renormalize:
        report = isa.renormalized_deltas(scores)
        selection = isa.select_by_deltas(report.deltas, k, seed=config.seed)
    else:
        selection = isa.select_isa(scores, k, seed=config.seed)
    return selection


def _llm_client(config: RunConfig):
    if config.mock_script is not None:
        return llm_filter.ScriptTransport.from_jsonl(config.mock_script)
    if config.chat is not None and config.chat.endpoint:
        return llm_filter.HttpChatClient(config.chat)
    raise LlmFilterError("no transport configured")


@dataclass
class RunSummary:
    strategy: str
    n: int
    k: int
    selected: int
    wall_seconds: float


def run_sample(config: RunConfig) -> RunSummary:
    """Execute one sampling run and write its artifacts."""
    config.validate()
    started = time.perf_counter()
    ds = dataset.load_dataset(config.meta_path, config.emb_path)
    n = len(ds)
    if n == 0:
        raise CliError("cannot sample from an empty corpus")
    k = resolve_k(config, n)

    if config.strategy == "random":
        selection = baselines.select_random(n, k, config.seed)
    elif config.strategy == "density":
        scores = baselines.density_scores(
            ds.embeddings, config.bandwidth, seed=config.seed, threads=config.threads
        )
        if config.density_topk:
            selection = baselines.select_density_topk(scores, k)
        else:
            selection = baselines.select_density(scores, k, config.seed)
    elif config.strategy == "isa":
        selection = compute_isa_selection(config, ds, k)
    else:
        client = _llm_client(config)
        result = llm_filter.select_llm(
            ds, k, client, order_seed=config.seed, scan_order=config.scan_order
        )
        selection = result.selection

    dataset.write_selection(selection, config.out_path)
    if config.subset_out is not None:
        indices = list(selection.indices)
        if config.preserve_order == "original":
            indices = sorted(indices)
        sub = dataset.subset_dataset(ds, indices)
        dataset.write_dataset(
            sub,
            Path(str(config.subset_out) + ".jsonl"),
            Path(str(config.subset_out) + ".emb1"),
        )
    wall = time.perf_counter() - started
    return RunSummary(
        strategy=config.strategy, n=n, k=k, selected=len(selection.indices), wall_seconds=wall
    )


def run_score(
    config: RunConfig, out_csv: Path, mode: str = "analytic", plot_out: Path | None = None
) -> int:
    """Write the per-point score table (and optionally its figure)."""
    ds = dataset.load_dataset(config.meta_path, config.emb_path)
    if len(ds) == 0:
        raise CliError("cannot score an empty corpus")
    model = _gmm_model(config, ds.embeddings)
    scores = isa.score_points(model, ds.embeddings, simplex=config.simplex, threads=config.threads)
    if config.renormalize:
        report = isa.renormalized_deltas(scores)
    else:
        report = isa.entropy_deltas(scores, mode=mode)
    with open(out_csv, "w", encoding="utf-8", newline="") as fh:
        fh.write("index,raw_ll,norm_ll,p,delta\n")
        for i in range(len(ds)):
            fh.write(
                f"{i},{scores.raw_ll[i]:.17g},{scores.norm_ll[i]:.17g},"
                f"{scores.p[i]:.17g},{report.deltas[i]:.17g}\n"
            )
    if plot_out is not None:
        from .plots import render_score_figure

        render_score_figure(scores, plot_out)
    return len(ds)


def run_fit_law(
    csv_path: Path,
    mode: str = "pinned",
    weighted: bool = False,
    out_path: Path | None = None,
    curve_out: Path | None = None,
    plot_out: Path | None = None,
) -> scaling_law.ScalingLawFit:
    """Fit the plateau law from a winrate CSV and write the requested outputs."""
    points = scaling_law.load_points_csv(csv_path)
    if mode == "pinned":
        fit = scaling_law.fit_pinned(points, weighted=weighted)
    elif mode == "full":
        fit = scaling_law.fit_full(points, weighted=weighted)
    else:
        raise CliError(f"unknown fit mode {mode!r} (expected 'pinned' or 'full')")
    doc = scaling_law.fit_to_json(fit)
    if out_path is not None:
        Path(out_path).write_text(doc + "\n", encoding="utf-8")
    if curve_out is not None:
        scaling_law.write_curve_csv(fit, curve_out)
    if plot_out is not None:
        from .plots import render_fit_figure

        render_fit_figure(points, fit, plot_out)
    return fit
