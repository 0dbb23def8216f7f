"""Command-line entry point.

Subcommands: ``sample`` (select a subset), ``score`` (per-point score
table), ``fit-law`` (winrate scaling-law fit). Flags beat environment
variables (prefix ``ISA_``, e.g. ``ISA_SAMPLE_SEED``), which beat
defaults. Exit status: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import pipeline
from .errors import ToolkitError
from .gmm import EmConfig
from .llm_filter import ChatClientConfig

CONTEXT_SETTINGS = {"auto_envvar_prefix": "ISA", "help_option_names": ["-h", "--help"]}


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    return threads


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option()
def cli():
    """Subset selection for alignment corpora and winrate scaling-law fitting."""


def _common_dataset_options(fn):
    fn = click.option("--meta", "meta_path", type=click.Path(exists=True, path_type=Path),
                      required=True, help="Metadata JSONL path.")(fn)
    fn = click.option("--emb", "emb_path", type=click.Path(exists=True, path_type=Path),
                      required=True, help="EMB1 embedding matrix path.")(fn)
    fn = click.option("--threads", type=int, default=None,
                      help="Worker threads (default: machine parallelism); any value "
                           "gives bit-identical output.")(fn)
    return fn


def _gmm_options(fn):
    fn = click.option("--em-max-iters", type=int, default=200, show_default=True,
                      help="EM iteration cap.")(fn)
    fn = click.option("--em-rel-tol", type=float, default=1e-6, show_default=True,
                      help="EM relative log-likelihood stopping tolerance.")(fn)
    fn = click.option("--variance-floor", type=float, default=1e-6, show_default=True,
                      help="Per-dimension variance lower bound.")(fn)
    fn = click.option("--model-in", type=click.Path(exists=True, path_type=Path), default=None,
                      help="Reuse a fitted mixture (JSON) instead of fitting.")(fn)
    fn = click.option("--model-out", type=click.Path(path_type=Path), default=None,
                      help="Write the fitted mixture JSON here.")(fn)
    fn = click.option("--renormalize", is_flag=True,
                      help="Recompute min-max and p over the survivors per removal.")(fn)
    fn = click.option("--simplex", is_flag=True,
                      help="Rescale p to sum to one before the entropy sum.")(fn)
    return fn


@cli.command()
@_common_dataset_options
@_gmm_options
@click.option("--strategy", type=click.Choice(["isa", "random", "density", "llm"]),
              required=True, help="Selection strategy.")
@click.option("--k", type=int, default=None, help="Subset size (exclusive with --fraction).")
@click.option("--fraction", type=float, default=None,
              help="Subset size as a fraction of N, resolved as ceil(f*N).")
@click.option("--seed", type=int, default=42, show_default=True, help="Run seed.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True,
              help="Selection JSON output path.")
@click.option("--subset-out", type=click.Path(path_type=Path), default=None,
              help="Also write <prefix>.jsonl and <prefix>.emb1 with the selected rows.")
@click.option("--preserve-order", type=click.Choice(["selection", "original"]),
              default="selection", show_default=True,
              help="Row order of the subset files.")
@click.option("--bandwidth", default="auto", show_default=True,
              help="Density kernel bandwidth (positive real or 'auto').")
@click.option("--density-topk", is_flag=True,
              help="Density strategy: take the k sparsest points deterministically.")
@click.option("--endpoint", default=None, help="Chat-completion endpoint base URL.")
@click.option("--model-name", default=None, help="Judge model name for the llm strategy.")
@click.option("--timeout", type=float, default=30.0, show_default=True,
              help="Per-request timeout in seconds.")
@click.option("--max-retries", type=int, default=3, show_default=True,
              help="Retries per request before aborting.")
@click.option("--auth-token", default=None, envvar="ISA_AUTH_TOKEN",
              help="Bearer token for the endpoint.")
@click.option("--mock-script", type=click.Path(exists=True, path_type=Path), default=None,
              help="Scripted transport JSONL (id -> response), replaces the endpoint.")
@click.option("--scan-order", type=click.Choice(["shuffled", "natural"]), default="shuffled",
              show_default=True, help="Record visit order for the llm strategy.")
def sample(meta_path, emb_path, threads, em_max_iters, em_rel_tol, variance_floor,
           model_in, model_out, renormalize, simplex, strategy, k, fraction, seed,
           out_path, subset_out, preserve_order, bandwidth, density_topk, endpoint,
           model_name, timeout, max_retries, auth_token, mock_script, scan_order):
    """Select a subset of the corpus and write the selection JSON."""
    chat = None
    if endpoint:
        chat = ChatClientConfig(
            endpoint=endpoint,
            model_name=model_name or "default",
            timeout=timeout,
            max_retries=max_retries,
            auth_token=auth_token,
        )
    config = pipeline.RunConfig(
        strategy=strategy,
        meta_path=meta_path,
        emb_path=emb_path,
        out_path=out_path,
        k=k,
        fraction=fraction,
        seed=seed,
        threads=_resolve_threads(threads),
        subset_out=subset_out,
        preserve_order=preserve_order,
        em=EmConfig(max_iters=em_max_iters, rel_tol=em_rel_tol, seed=seed,
                    variance_floor=variance_floor),
        model_in=model_in,
        model_out=model_out,
        renormalize=renormalize,
        simplex=simplex,
        bandwidth=_parse_bandwidth(bandwidth),
        density_topk=density_topk,
        chat=chat,
        mock_script=mock_script,
        scan_order=scan_order,
    )
    summary = pipeline.run_sample(config)
    click.echo(
        f"{summary.strategy}: N={summary.n} k={summary.k} "
        f"selected={summary.selected} wall={summary.wall_seconds:.3f}s"
    )


def _parse_bandwidth(value):
    if isinstance(value, str) and value != "auto":
        try:
            return float(value)
        except ValueError:
            raise click.UsageError(f"--bandwidth must be a positive real or 'auto', got {value!r}")
    return value


@cli.command()
@_common_dataset_options
@_gmm_options
@click.option("--seed", type=int, default=42, show_default=True, help="Run seed (used for EM).")
@click.option("--out", "out_csv", type=click.Path(path_type=Path), required=True,
              help="Score CSV output path (index,raw_ll,norm_ll,p,delta).")
@click.option("--mode", type=click.Choice(["analytic", "naive"]), default="analytic",
              show_default=True, help="Delta computation path.")
@click.option("--plot-out", type=click.Path(path_type=Path), default=None,
              help="Render the score distributions to this image file.")
def score(meta_path, emb_path, threads, em_max_iters, em_rel_tol, variance_floor,
          model_in, model_out, renormalize, simplex, seed, out_csv, mode, plot_out):
    """Score every point and write the per-point CSV."""
    config = pipeline.RunConfig(
        strategy="isa",
        meta_path=meta_path,
        emb_path=emb_path,
        out_path=out_csv,
        k=1,
        seed=seed,
        threads=_resolve_threads(threads),
        em=EmConfig(max_iters=em_max_iters, rel_tol=em_rel_tol, seed=seed,
                    variance_floor=variance_floor),
        model_in=model_in,
        model_out=model_out,
        renormalize=renormalize,
        simplex=simplex,
    )
    n = pipeline.run_score(config, out_csv, mode=mode, plot_out=plot_out)
    click.echo(f"scored {n} points -> {out_csv}")


@cli.command(name="fit-law")
@click.option("--csv", "csv_path", type=click.Path(exists=True, path_type=Path), required=True,
              help="Winrate CSV with header x,winrate[,ci95].")
@click.option("--mode", type=click.Choice(["pinned", "full"]), default="pinned",
              show_default=True, help="Fitting mode.")
@click.option("--weighted", is_flag=True, help="Weight residuals by 1/ci95^2.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Fit JSON output path (defaults to stdout).")
@click.option("--curve-out", type=click.Path(path_type=Path), default=None,
              help="Predicted-curve CSV at 1-percent steps.")
@click.option("--plot-out", type=click.Path(path_type=Path), default=None,
              help="Render observations plus fitted curve to this image file.")
def fit_law(csv_path, mode, weighted, out_path, curve_out, plot_out):
    """Fit the exponential-plateau winrate law to a CSV of observations."""
    fit = pipeline.run_fit_law(
        csv_path, mode=mode, weighted=weighted, out_path=out_path,
        curve_out=curve_out, plot_out=plot_out,
    )
    from .scaling_law import fit_to_json

    if out_path is None:
        click.echo(fit_to_json(fit))
    else:
        click.echo(f"fit written -> {out_path}")


def main(argv=None) -> int:
    """Entry point with the documented exit-status contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ToolkitError as exc:
        click.echo(f"{exc.component}: {exc}", err=True)
        return exc.exit_code
    except OSError as exc:
        click.echo(f"io: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
