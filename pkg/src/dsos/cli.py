"""Command-line interface for sampling and validation campaigns.

Each subcommand builds an ExperimentSpec (from flags and/or a JSON config
file), runs the campaign, and writes a manifest, delimited data files, and
rendered figures under the output directory.
"""
from __future__ import annotations

import json
from pathlib import Path

import click

from .experiments import ExperimentSpec, run


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def _build_spec(kind: str, config: str | None, **overrides) -> ExperimentSpec:
    base = _load_config(config)
    base["kind"] = kind
    for key, val in overrides.items():
        if val is not None:
            base[key] = val
    if isinstance(base.get("distributions"), str):
        base["distributions"] = [base["distributions"]]
    return ExperimentSpec.from_dict(base)


def _common(f):
    for opt in reversed([
        click.option("--n", "n", type=int, default=None, help="grid side N"),
        click.option("--samples", type=int, default=None,
                     help="Monte Carlo sample count"),
        click.option("--seed", type=int, default=None, help="master seed"),
        click.option("--workers", type=int, default=None,
                     help="worker processes (default: DSOS_WORKERS or 1)"),
        click.option("--out", type=click.Path(), default=None,
                     help="output directory"),
        click.option("--config", type=click.Path(exists=True), default=None,
                     help="JSON file mirroring the experiment spec"),
    ]):
        f = opt(f)
    return f


def _dist_option(multiple: bool):
    return click.option("--dist", "distributions", multiple=multiple,
                        default=None,
                        help="distribution descriptor: uniform | exp | "
                             "exp:<rate> | beta:<a> | table:<path>")


def _report(manifest) -> None:
    click.echo(json.dumps(manifest.summary, indent=2, sort_keys=True))
    click.echo(f"wrote {len(manifest.files)} files in {manifest.wall_time:.1f}s")


@click.group()
def main():
    """Directed solid-on-solid model: samplers, kernels, shape and edge laws."""


@main.command()
@_common
@_dist_option(multiple=False)
def sample(config, distributions, **kw):
    """Draw configurations and write them as JSON lines."""
    if distributions:
        kw["distributions"] = [distributions]
    _report(run(_build_spec("sample", config, **kw)))


@main.command()
@_common
@click.option("--resolution", type=int, default=None,
              help="surface grid resolution")
def shape(config, **kw):
    """Export the limiting height surface, optionally with MC deviations."""
    _report(run(_build_spec("shape", config, **kw)))


@main.command("kernel-validate")
@_common
def kernel_validate(config, **kw):
    """Validate the determinantal kernel against exact samplers (n <= 4)."""
    _report(run(_build_spec("kernel-validate", config, **kw)))


@main.command("edge-fluct")
@_common
@_dist_option(multiple=True)
@click.option("--line-s", "line_s", type=float, default=None,
              help="scaled line position S in (0,2), S != 1")
def edge_fluct(config, distributions, **kw):
    """Compare rescaled back-row maxima across distributions and the limit law."""
    if distributions:
        kw["distributions"] = list(distributions)
    _report(run(_build_spec("universality", config, **kw)))


@main.command()
@_common
@_dist_option(multiple=True)
def corner(config, distributions, **kw):
    """Corner-height extreme-value campaign (distribution-dependent scaling)."""
    if distributions:
        kw["distributions"] = list(distributions)
    _report(run(_build_spec("corner", config, **kw)))


@main.command("tw-table")
@_common
@click.option("--v-min", "v_min", type=float, default=None)
@click.option("--v-max", "v_max", type=float, default=None)
@click.option("--v-step", "v_step", type=float, default=None)
def tw_table(config, **kw):
    """Tabulate the limiting edge CDF to CSV."""
    _report(run(_build_spec("tw-table", config, **kw)))


if __name__ == "__main__":
    main()
