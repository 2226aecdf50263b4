"""
CLI Interface - Command-line surface of nulllda

Every command prints at most one JSON object per line on standard output;
diagnostics and errors go to standard error. Exit codes: 0 ok, 2 input
error, 3 retries exhausted, 4 injected sketch rejected, 5 degenerate model.
"""

import functools
import json
import sys
from pathlib import Path
from typing import Any, Dict

import click
import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.text import Text

from src import __version__
from src.lda.adversarial import counterexample
from src.lda.errors import NullLdaError, SketchRejectedError
from src.lda.fast_null import Verdict, apply_g
from src.lda.pipeline import NullLdaPipeline
from src.lda.scatter import scatter_apply
from src.utils.config import ConfigError, load_config
from src.utils.data_io import (
    read_dataset,
    read_matrix,
    read_samples,
    write_dataset,
    write_labels,
    write_matrix,
)
from src.utils.logger import get_logger, setup_logging
from src.utils.model_store import load_model, save_model

logger = get_logger(__name__)
console = Console(stderr=True)

EXIT_INPUT_ERROR = 2


def emit(command: str, payload: Dict[str, Any]) -> None:
    """Print one JSON report line tagged with the command that produced it."""
    click.echo(json.dumps({"command": command, **payload}, sort_keys=True))


def _display_error(error: NullLdaError) -> None:
    error_text = Text()
    error_text.append(f"❌ {error.message}", style="red")
    console.print(Panel(error_text, title=type(error).__name__, border_style="red", padding=(0, 1)))


def handle_errors(func):
    """Translate NullLdaError into its exit code after showing it on stderr."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except NullLdaError as e:
            logger.error("command failed", subcommand=ctx.command.name, error=e.message,
                         exit_code=e.exit_code)
            _display_error(e)
            ctx.exit(e.exit_code)

    return wrapper


def _pipeline(ctx: click.Context, **overrides) -> NullLdaPipeline:
    """Pipeline from the group's settings with per-command fit overrides applied."""
    settings = ctx.obj["settings"]
    updates = {key: value for key, value in overrides.items() if value is not None}
    if updates:
        settings = settings.model_copy(update={"fit": settings.fit.model_copy(update=updates)})
    return NullLdaPipeline(settings)


data_option = click.option("--data", "data_path", required=True,
                           type=click.Path(dir_okay=False, path_type=Path),
                           help="CSV with one sample per row, label last")
model_option = click.option("--model", "model_path", required=True,
                            type=click.Path(dir_okay=False, path_type=Path),
                            help="Model file written by 'train'")
transpose_option = click.option("--transpose", is_flag=True,
                                help="Input has one feature per row, labels in the last row")


@click.group()
@click.version_option(__version__, prog_name="nulllda")
@click.option("--config", "-c", "config_path", type=click.Path(dir_okay=False, path_type=Path),
              help="Configuration file path")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")
@click.pass_context
def cli(ctx, config_path, verbose):
    """Fast null LDA with full-rank certificates."""
    try:
        settings = load_config(config_path)
    except ConfigError as e:
        console.print(f"[red]Configuration error: {e}[/red]")
        ctx.exit(EXIT_INPUT_ERROR)
    setup_logging("DEBUG" if verbose else settings.logging.level, settings.logging.file)
    ctx.ensure_object(dict)
    ctx.obj["settings"] = settings


@cli.command()
@data_option
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Where to write the model file")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Sketch generator seed")
@click.option("--threshold", type=click.FloatRange(min=0, min_open=True, max=1), default=None,
              help="Near-singular ratio sigma_min/sigma_max that triggers a redraw")
@click.option("--max-retries", type=click.IntRange(min=0), default=None,
              help="Redraws allowed after a failed certificate")
@click.option("--sketch-file", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Use this d x (c-1) sketch instead of drawing one")
@transpose_option
@click.pass_context
@handle_errors
def train(ctx, data_path, out_path, seed, threshold, max_retries, sketch_file, transpose):
    """Fit W = S_T^+ S_B Y and write the model file."""
    pipeline = _pipeline(ctx, seed=seed, near_singular_threshold=threshold, max_retries=max_retries)
    dataset = read_dataset(data_path, transpose=transpose)
    sketch = read_matrix(sketch_file) if sketch_file is not None else None

    try:
        model = pipeline.fit(dataset, sketch=sketch)
    except SketchRejectedError as e:
        if e.certificate is not None:
            emit("train", e.certificate.summary().model_dump(mode="json") | {"retries": 0, "seed": None})
        raise

    save_model(model, out_path)
    emit("train", model.certificate.summary().model_dump(mode="json")
         | {"retries": model.retries, "seed": model.seed})


@cli.command()
@model_option
@data_option
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Where to write the projected samples")
@transpose_option
@click.pass_context
@handle_errors
def transform(ctx, model_path, data_path, out_path, transpose):
    """Project samples onto the reduced space W^T x."""
    model = load_model(model_path)
    table = read_samples(data_path, transpose=transpose, n_features=model.d, require_labels=False)
    projected = model.transform(table.data)
    write_matrix(projected if transpose else projected.T, out_path)
    emit("transform", {"samples": int(table.data.shape[1]), "dimensions": int(projected.shape[0])})


@cli.command()
@model_option
@data_option
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False, path_type=Path),
              help="Where to write predicted labels (default: standard output)")
@transpose_option
@click.pass_context
@handle_errors
def classify(ctx, model_path, data_path, out_path, transpose):
    """Assign each sample the class of its nearest reduced centroid."""
    model = load_model(model_path)
    table = read_samples(data_path, transpose=transpose, n_features=model.d, require_labels=False)
    predictions = model.predict(table.data)

    if out_path is None:
        write_labels(predictions, sys.stdout)
        return
    write_labels(predictions, out_path)
    payload: Dict[str, Any] = {"samples": len(predictions)}
    if table.labels is not None:
        payload["accuracy"] = float(np.mean([p == t for p, t in zip(predictions, table.labels)]))
    emit("classify", payload)


@cli.command()
@model_option
@data_option
@transpose_option
@click.pass_context
@handle_errors
def verify(ctx, model_path, data_path, transpose):
    """Check a model against the null LDA criteria on its training data."""
    model = load_model(model_path)
    dataset = read_dataset(data_path, transpose=transpose)
    report = _pipeline(ctx).verify(model, dataset)
    emit("verify", report.model_dump(mode="json") | {"all_passed": report.all_passed})


@cli.command("counterexample")
@click.option("--dim", "-d", "dim", type=int, required=True, help="Feature dimension d >= 4")
@click.option("--alpha", type=float, required=True, help="Sketch entry in (0, 1)")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path),
              help="Directory for dataset.csv, sketch.csv and expected.json")
@click.pass_context
@handle_errors
def counterexample_cmd(ctx, dim, alpha, out_dir):
    """Emit the two-class instance whose admissible sketch gives W = 0."""
    dataset, Y = counterexample(dim, alpha)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_dataset(dataset, out_dir / "dataset.csv")
    write_matrix(Y, out_dir / "sketch.csv")

    pipeline = _pipeline(ctx)
    context = pipeline.prepare(dataset)
    report, _ = pipeline.certify(dataset, Y)
    W = apply_g(context.factors, context.eigen, Y)
    expected = {
        "d": dim,
        "alpha": alpha,
        "sb_y_column_norms": np.linalg.norm(scatter_apply(context.factors, "B", Y), axis=0).tolist(),
        "w_frobenius": float(np.linalg.norm(W)),
        "verdict": report.verdict.value,
        "expected_exit_code": SketchRejectedError.exit_code,
    }
    (out_dir / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n",
                                           encoding="utf-8")
    emit("counterexample", expected)


@cli.command()
@data_option
@click.option("--sketch-file", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="d x (c-1) sketch to certify")
@transpose_option
@click.pass_context
@handle_errors
def certify(ctx, data_path, sketch_file, transpose):
    """Decide before fitting whether a sketch yields a full-rank W."""
    dataset = read_dataset(data_path, transpose=transpose)
    report, geometry = _pipeline(ctx).certify(dataset, read_matrix(sketch_file))
    emit("certify", {
        "certificate": report.summary().model_dump(mode="json"),
        "geometric": geometry.model_dump(mode="json"),
    })
    if report.verdict is not Verdict.NONSINGULAR:
        ctx.exit(SketchRejectedError.exit_code)


@cli.command()
@data_option
@transpose_option
@click.pass_context
@handle_errors
def inspect(ctx, data_path, transpose):
    """Report numerical ranks of the scatter matrices."""
    dataset = read_dataset(data_path, transpose=transpose)
    report, r = _pipeline(ctx).inspect(dataset)
    emit("inspect", report.model_dump(mode="json")
         | {"all_ok": report.all_ok, "eigen_rank": r, "d": dataset.d, "n": dataset.n, "c": dataset.c})


@cli.command()
@data_option
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Sketch generator seed")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Where to write the sketch")
@transpose_option
@click.pass_context
@handle_errors
def adversarial(ctx, data_path, seed, out_path, transpose):
    """Write a full-column-rank sketch orthogonal to the certificate basis (W = 0)."""
    dataset = read_dataset(data_path, transpose=transpose)
    Y = _pipeline(ctx).adversarial(dataset, seed=seed)
    write_matrix(Y, out_path)
    emit("adversarial", {"rows": int(Y.shape[0]), "columns": int(Y.shape[1])})


if __name__ == "__main__":
    cli()
