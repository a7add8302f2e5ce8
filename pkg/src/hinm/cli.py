"""Command line front end.

Commands: stats, prune, permute, encode, decode, spmm, chain, oracle,
shuffle-check.  Exit codes: 0 ok, 2 configuration error, 3 shape or file
error, 4 enumeration size guard.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import figures, io as hio
from .errors import SizeGuard, exit_code_for
from .model import (
    DenseMatrix,
    GyroPermutation,
    composed_sparsity,
    count_permutation_space,
    validate_config,
)
from .oracle import GROUPING_LIMIT, oracle_gap
from .permutation import gyro_permute, no_perm_prune
from .pruning import (
    apply_masks,
    decode,
    encode,
    load_saliency,
    magnitude_saliency,
    masked_dense_from_encoding,
    nm_prune,
    restore_row_order,
    vector_prune,
)
from .spmm import (
    LayerChain,
    compose_layers,
    hinm_spmm,
    tile_shuffle_check,
)


def _fail(exc: BaseException) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(exit_code_for(exc))


def _load_config(ctx, override_path):
    path = override_path or ctx.obj.get("config")
    if path is None:
        raise ValueError("no --config given")
    cfg = hio.load_config(path)
    seed = ctx.obj.get("seed")
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def _load_inputs(weights_path, saliency_path):
    weights = DenseMatrix(hio.read_hnmw(weights_path))
    if saliency_path is None:
        saliency = magnitude_saliency(weights)
    else:
        saliency = load_saliency(saliency_path, weights.shape)
    return weights, saliency


def _write_report(report_dict: dict, report_path) -> None:
    hio.dump_json(report_dict, report_path)
    csv_path, png_path = figures.sibling_paths(report_path)
    if "ocp_log" in report_dict:
        figures.write_prune_csv(report_dict, csv_path)
        figures.render_prune_figure(report_dict, png_path)
    elif "oracle" in report_dict:
        figures.write_gap_csv(report_dict, csv_path)
        figures.render_gap_figure(report_dict, png_path)
    elif "errors" in report_dict:
        figures.write_shuffle_csv(report_dict, csv_path)
        figures.render_shuffle_figure(report_dict, png_path)


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Pruning configuration JSON.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--verbose", is_flag=True, help="Chatty progress output.")
@click.pass_context
def main(ctx, config, seed, verbose):
    """Hierarchical N:M pruning, channel permutation, and SpMM checking."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = config
    ctx.obj["seed"] = seed
    ctx.obj["verbose"] = verbose


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--rows", type=int, required=True, help="Output channels (m).")
@click.option("--cols", type=int, required=True, help="Input channels (n).")
@click.pass_context
def stats(ctx, config_path, rows, cols):
    """Print composed sparsity and the exact permutation-space size."""
    try:
        cfg = _load_config(ctx, config_path)
        vcfg = validate_config(cfg, (rows, cols))
        sparsity = composed_sparsity(cfg.vector_sparsity, cfg.nm_keep, cfg.nm_group)
        count = count_permutation_space(rows, cols, cfg.vector_size, cfg.nm_group)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        _fail(exc)
    click.echo(f"shape: {rows}x{cols}")
    click.echo(f"tiles: {vcfg.num_tiles}  keep_per_tile: {vcfg.tile_keep}")
    click.echo(f"composed_sparsity: {float(sparsity)}")
    click.echo(f"permutation_space: {count:,}")


@main.command()
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--saliency", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--no-perm", is_flag=True, help="Skip the permutation search.")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Masked-dense HNMW output.")
@click.option("--encoding", "encoding_path", type=click.Path(dir_okay=False), default=None,
              help="Encoding JSON output (default: <out>.encoding.json).")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def prune(ctx, weights, config_path, saliency, no_perm, out, encoding_path, report_path):
    """Prune weights and write masked matrix, encoding, and report."""
    try:
        cfg = _load_config(ctx, config_path)
        W, S = _load_inputs(weights, saliency)
        runner = no_perm_prune if no_perm else gyro_permute
        sigma, masks, report = runner(W, cfg, saliency=S)
        masked = apply_masks(W, masks)
        hio.write_hnmw(out, masked)
        enc = encode(W, masks, sigma, cfg)
        enc_path = encoding_path or str(Path(out).with_suffix("")) + ".encoding.json"
        hio.save_encoding(enc, enc_path)
        _write_report(report.to_dict(), report_path)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    if ctx.obj.get("verbose"):
        click.echo(f"retained {report.retained_saliency:.9g} of {report.total_saliency:.9g}")
    click.echo(f"wrote {out}, {enc_path}, {report_path}")


@main.command()
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--saliency", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Permutation JSON output.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def permute(ctx, weights, config_path, saliency, out, report_path):
    """Search channel orders only; write the permutation and its report."""
    try:
        cfg = _load_config(ctx, config_path)
        W, S = _load_inputs(weights, saliency)
        sigma, _, report = gyro_permute(W, cfg, saliency=S)
        hio.dump_json(hio.permutation_to_dict(sigma), out)
        _write_report(report.to_dict(), report_path)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {out}, {report_path}")


@main.command(name="encode")
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--saliency", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--permutation", "perm_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Permutation JSON; identity ordering if omitted.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def encode_cmd(ctx, weights, config_path, saliency, perm_path, out):
    """Compress weights under a given (or identity) permutation."""
    try:
        cfg = _load_config(ctx, config_path)
        W, S = _load_inputs(weights, saliency)
        if perm_path is None:
            sigma, masks, _ = no_perm_prune(W, cfg, saliency=S)
        else:
            sigma = hio.load_permutation(perm_path)
            vm = vector_prune(S, cfg, sigma.sigma_o)
            em = nm_prune(S, vm, cfg, sigma)
            from .model import MaskPair

            masks = MaskPair(vector_mask=vm, element_mask=em)
        enc = encode(W, masks, sigma, cfg)
        hio.save_encoding(enc, out)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {out}")


@main.command(name="decode")
@click.option("--encoding", "encoding_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def decode_cmd(encoding_path, out):
    """Expand an encoding back to a masked-dense HNMW matrix.

    Rows are restored to their original channel order, so the output
    matches the prune command's masked matrix exactly.
    """
    try:
        enc = hio.load_encoding(encoding_path)
        hio.write_hnmw(out, masked_dense_from_encoding(enc))
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--encoding", "encoding_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def spmm(encoding_path, input_path, out):
    """Sparse-times-dense product; output rows in original channel order."""
    try:
        enc = hio.load_encoding(encoding_path)
        X = hio.read_hnmw(input_path)
        result = restore_row_order(hinm_spmm(enc, X), enc.sigma_o)
        hio.write_hnmw(out, result)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON manifest: {\"layers\": [\"layer1.encoding.json\", ...]}.")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def chain(manifest, input_path, out):
    """Run a pre-permuted layer chain; final rows in original order."""
    try:
        paths = hio.load_chain_manifest(manifest)
        layers = LayerChain(layers=tuple(hio.load_encoding(p) for p in paths))
        X = hio.read_hnmw(input_path)
        result = compose_layers(layers, X)
        hio.write_hnmw(out, restore_row_order(result, layers.final_sigma_o))
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(f"wrote {out}")


@main.command(name="oracle")
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--saliency", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), required=True)
@click.option("--force", is_flag=True, help="Run past the enumeration size guard.")
@click.pass_context
def oracle_cmd(ctx, weights, config_path, saliency, report_path, force):
    """Compare the search against exhaustive enumeration (small shapes)."""
    try:
        cfg = _load_config(ctx, config_path)
        W, S = _load_inputs(weights, saliency)
        limit = 10**18 if force else GROUPING_LIMIT
        report = oracle_gap(W, cfg, saliency=S, limit=limit)
        _write_report(report, report_path)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    click.echo(
        f"no_perm {report['no_perm']:.9g}  gyro {report['gyro']:.9g}  "
        f"oracle {report['oracle']:.9g}  gap {report['gap']:.9g}"
    )


@main.command(name="shuffle-check")
@click.option("--encoding", "encoding_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--trials", type=int, default=50, show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def shuffle_check(ctx, encoding_path, input_path, trials, report_path):
    """Verify within-tile vector order freedom on random shuffles."""
    try:
        enc = hio.load_encoding(encoding_path)
        X = hio.read_hnmw(input_path)
        seed = ctx.obj.get("seed")
        rng = np.random.default_rng(0 if seed is None else seed)
        report = tile_shuffle_check(enc, X, rng, trials=trials)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)
    _write_report(report, report_path)
    status = "ok" if report["passed"] else "FAILED"
    click.echo(
        f"{status}: kept sets equal={report['kept_sets_equal']} "
        f"max relative error={report['max_relative_error']:.3g}"
    )
    if not report["passed"]:
        sys.exit(1)


if __name__ == "__main__":
    main()
