"""CLI: extract --model <id> --in meta.jsonl --out-emb corpus.emb1
--out-meta corpus.jsonl --batch 8"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .extractor import ExtractConfig, extract_embeddings
from .formats import FormatError


@click.command()
@click.option("--model", "model_id", required=True,
              help="Encoder id: a hub model name or a local model directory.")
@click.option("--in", "input_jsonl", type=click.Path(exists=True, path_type=Path),
              required=True, help="Input metadata JSONL.")
@click.option("--out-emb", type=click.Path(path_type=Path), required=True,
              help="Output EMB1 path (manifest written alongside).")
@click.option("--out-meta", type=click.Path(path_type=Path), required=True,
              help="Output metadata JSONL path (validated copy of the input).")
@click.option("--batch", "batch_size", type=int, default=8, show_default=True,
              help="Inference batch size.")
@click.option("--device", default="cpu", show_default=True, help="Torch device.")
@click.option("--separator", default="\n", help="Text between prompt and completion.")
def extract(model_id, input_jsonl, out_emb, out_meta, batch_size, device, separator):
    """Encode prompt+completion pairs into last-token embeddings."""
    config = ExtractConfig(
        model_id=model_id,
        input_jsonl=input_jsonl,
        out_emb=out_emb,
        out_meta=out_meta,
        batch_size=batch_size,
        device=device,
        separator=separator,
    )
    report = extract_embeddings(config)
    click.echo(
        f"extracted {report.rows} rows (dim {report.dim}) -> {out_emb}; "
        f"manifest {report.manifest_path}"
    )
    if report.truncated_ids:
        click.echo(f"truncated {len(report.truncated_ids)} record(s)", err=True)


def main(argv=None) -> int:
    try:
        extract.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 1
    except (FormatError, ValueError) as exc:
        click.echo(f"extract: {exc}", err=True)
        return 1
    except RuntimeError as exc:
        click.echo(f"extract: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
