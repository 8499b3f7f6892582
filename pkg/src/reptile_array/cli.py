"""``reptile`` command line: tileability, counting, enumeration, synthesis, evaluation, scan."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import plotting
from .cardinality import CardinalityError, count_tilings_formula, scientific
from .exact_cover import EnumerationLimits, build_cover_instance, dump_solutions, enumerate_exact_covers
from .excitations import cluster_excitations, expand, write_excitations
from .geometry import GeometryError, GridSpec, TileShape, check_tileability
from .io import ConfigError, parse_config, read_clustering, write_clustering, write_json, write_pareto
from .pattern import (
    PatternError,
    pattern_metrics,
    power_pattern,
    principal_cuts,
    scan_sll_map,
    write_cut_csv,
    write_pattern_csv,
)
from .rtam import RtamError, run

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_TRUNCATED = 2, 3, 4


def _fail(code: int, kind: str, message: str):
    click.echo(json.dumps({"error": kind, "message": message}), err=True)
    sys.exit(code)


def _load(config):
    try:
        return parse_config(config)
    except (ConfigError, ValueError) as exc:
        _fail(EXIT_CONFIG, "config", str(exc))


def _parse_orders(text: str) -> list[int]:
    try:
        return sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise click.BadParameter("orders must be a comma list such as 1,2") from None


def _parse_composition(text: str | None) -> dict[int, int] | None:
    if not text:
        return None
    try:
        return {int(k): int(v) for k, v in (item.split(":") for item in text.split(","))}
    except ValueError:
        raise click.BadParameter("composition must look like 2:6,1:8 (order:count)") from None


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more logging.")
def main(verbose):
    """Rep-tile clustered phased-array synthesis."""
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("rows", type=int)
@click.argument("cols", type=int)
@click.argument("order", type=int)
@click.option("--shape", type=click.Choice(["ltromino", "square"]), default="ltromino")
def tileability(rows, cols, order, shape):
    """Can a ROWS x COLS grid be tiled with order-ORDER tiles only?"""
    try:
        v = check_tileability(GridSpec(rows, cols), order, TileShape.parse(shape))
    except GeometryError as exc:
        _fail(EXIT_CONFIG, "parameter", str(exc))
    click.echo(f"{'tileable' if v.tileable else 'not tileable'} ({v.reason.value})")
    if not v.tileable:
        sys.exit(EXIT_INFEASIBLE)


@main.command()
@click.argument("mhat", type=int)
@click.argument("nhat", type=int)
def count(mhat, nhat):
    """Number of L-tromino tilings of an MHAT x NHAT board in tile-side units."""
    try:
        m, n = sorted((mhat, nhat))
        t = count_tilings_formula(m, n)
    except CardinalityError as exc:
        _fail(EXIT_CONFIG, "parameter", str(exc))
    click.echo(str(t))
    click.echo(f"~{scientific(t)}", err=True)


@main.command("enumerate")
@click.argument("rows", type=int)
@click.argument("cols", type=int)
@click.option("--orders", default="1", show_default=True, help="Allowed tile orders, e.g. 1,2.")
@click.option("--composition", default=None, help="Exact tile counts per order, e.g. 2:6,1:8.")
@click.option("--shape", type=click.Choice(["ltromino", "square"]), default="ltromino")
@click.option("--max-solutions", type=int, default=None)
@click.option("--max-nodes", type=int, default=None)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--dump", type=click.Path(dir_okay=False), default=None,
              help="Write each cover as a line of row ids.")
def enumerate_covers(rows, cols, orders, composition, shape, max_solutions, max_nodes, workers, dump):
    """Count (and optionally dump) exact covers of a ROWS x COLS grid."""
    from .exact_cover import count_exact_covers

    try:
        inst = build_cover_instance(GridSpec(rows, cols), TileShape.parse(shape), _parse_orders(orders))
        comp = _parse_composition(composition)
        limits = EnumerationLimits(max_solutions, max_nodes, comp)
    except (GeometryError, ValueError) as exc:
        _fail(EXIT_CONFIG, "parameter", str(exc))
    if dump:
        res = dump_solutions(dump, inst, limits, max_records=max_solutions or 100_000)
    elif workers > 1 and max_solutions is None:
        res = count_exact_covers(inst, comp, workers, max_nodes)
    else:
        res = enumerate_exact_covers(inst, limits)
    click.echo(str(res.count))
    if res.truncated:
        _fail(EXIT_TRUNCATED, "truncated", f"search stopped early after {res.count} covers")


def _pattern_bundle(out: Path, stem: str, cfg, c, w_q, center=None) -> dict:
    p = power_pattern(c, w_q, cfg.grid, cfg.element, cfg.resolution)
    metrics = pattern_metrics(p, cfg.mask, center).to_dict()
    from .pattern import gamma

    metrics["gamma"] = gamma(p, cfg.mask)
    metrics["Q"] = c.Q
    write_pattern_csv(out / f"{stem}_pattern.csv", p)
    t, cu, cv = principal_cuts(p)
    write_cut_csv(out / f"{stem}_cut_u.csv", "u", t, cu)
    write_cut_csv(out / f"{stem}_cut_v.csv", "v", t, cv)
    write_json(out / f"{stem}_metrics.json", metrics)
    plotting.plot_cuts(out / f"{stem}_cuts.png", t, cu, cv, cfg.mask)
    plotting.plot_pattern_map(out / f"{stem}_pattern.png", p)
    return metrics


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Override the output directory.")
@click.option("--all-snapshots", is_flag=True, help="Write a clustering CSV for every iteration.")
def synthesize(config, out, all_snapshots):
    """Run the split loop described by CONFIG and write the trace bundle."""
    cfg = _load(config)
    out = Path(out) if out else cfg.output
    out.mkdir(parents=True, exist_ok=True)
    try:
        trace = run(cfg.rtam())
    except RtamError as exc:
        code = EXIT_INFEASIBLE if "cannot be tiled" in str(exc) else EXIT_CONFIG
        _fail(code, "synthesis", str(exc))
    write_json(out / "trace.json", trace.to_dict())
    write_pareto(out / "pareto.csv", trace.pareto())
    keep = trace.iterations if all_snapshots else [trace.iterations[0], trace.final]
    for it in keep:
        write_clustering(out / f"clustering_h{it.h:03d}.csv", it.clustering)
        plotting.plot_clustering(out / f"clustering_h{it.h:03d}.png", it.clustering,
                                 f"h = {it.h}, Q = {it.Q}")
    write_clustering(out / "clustering_final.csv", trace.final.clustering)
    write_excitations(out / "excitations_final.csv", cfg.grid, expand(trace.final.clustering, trace.final.weights))
    plotting.plot_pareto(out / "pareto.png", *zip(*trace.pareto()))
    metrics = _pattern_bundle(out, "final", cfg, trace.final.clustering, trace.final.weights)
    click.echo(json.dumps({"H": trace.H, "Q": trace.final.Q, "gamma": trace.final.gamma,
                           "q_sequence": trace.q_sequence(), "stop_reason": trace.stop_reason,
                           "sll_db": metrics["sll_db"]}))


def _clustering_and_weights(cfg, clustering, excitations):
    try:
        c = read_clustering(clustering, cfg.grid, cfg.shape)
        ref = cfg.reference
        if excitations:
            from .excitations import read_excitations

            ref = read_excitations(excitations, cfg.grid)
    except (ValueError, GeometryError) as exc:
        _fail(EXIT_CONFIG, "input", str(exc))
    return c, ref


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--clustering", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--excitations", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Element excitations to match (defaults to the configured reference).")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def evaluate(config, clustering, excitations, out):
    """Pattern, Gamma, SLL, directivity and beamwidths of a clustered layout."""
    cfg = _load(config)
    out = Path(out) if out else cfg.output
    out.mkdir(parents=True, exist_ok=True)
    c, ref = _clustering_and_weights(cfg, clustering, excitations)
    alpha, beta = cluster_excitations(ref, c, cfg.phase_mode)
    try:
        metrics = _pattern_bundle(out, "eval", cfg, c, alpha * np.exp(1j * beta))
    except PatternError as exc:
        _fail(EXIT_CONFIG, "pattern", str(exc))
    plotting.plot_clustering(out / "eval_clustering.png", c)
    click.echo(json.dumps(metrics, sort_keys=True))


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--clustering", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--excitations", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Element amplitudes to use (phases are rebuilt per scan direction).")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def scan(config, clustering, excitations, out):
    """SLL map while re-pointing the beam over a cone of scan offsets."""
    cfg = _load(config)
    out = Path(out) if out else cfg.output
    out.mkdir(parents=True, exist_ok=True)
    c, ref = _clustering_and_weights(cfg, clustering, excitations)
    s = cfg.scan
    try:
        smap = scan_sll_map(c, ref.amplitude, cfg.grid, cfg.mask, s.get("theta0_deg", 0.0),
                            s.get("phi0_deg", 0.0), s.get("theta_max_deg", 30.0), s.get("n_theta", 7),
                            s.get("n_phi", 12), s.get("resolution", 181), cfg.element, cfg.phase_mode)
    except (ValueError, PatternError) as exc:
        _fail(EXIT_CONFIG, "scan", str(exc))
    with open(out / "scan_sll.csv", "w") as fh:
        fh.write("theta_deg,phi_deg,sll_db\n")
        for i, th in np.ndenumerate(smap.theta_deg):
            for j, ph in np.ndenumerate(smap.phi_deg):
                fh.write(f"{th:.6f},{ph:.6f},{smap.sll_db[i[0], j[0]]:.6f}\n")
    stats = smap.stats()
    write_json(out / "scan_stats.json", stats)
    plotting.plot_scan_map(out / "scan_sll.png", smap)
    click.echo(json.dumps(stats, sort_keys=True))


if __name__ == "__main__":  # pragma: no cover
    main()
