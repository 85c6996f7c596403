"""Command line interface.

Exit codes: 0 success, 1 data/config error, 2 usage error. Every file
output gets a run manifest written next to it (command line, config and
dataset hashes, seeds, tool version, wall time, output digests), so a run
can be traced back to its exact inputs. All randomness comes from explicit
seeds; nothing reads the wall clock except the manifest's timing field.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analytics import (
    components_over_time,
    detect_bypasses,
    link_growth,
    one_click_reach,
    platform_connectivity,
    series_from_posts,
    shock_response,
)
from .attrition import (
    AttritionScenario,
    Law,
    characteristic_time,
    closed_form,
    containment_capacity,
    extinction_time,
    integrate,
    predict_outcome,
    sweep,
)
from .configs import BUILTIN, builtin_config_dict
from .errors import ConfigError, EcosimError
from .export import write_edge_csv, write_gexf
from .generator import GeneratorConfig, generate_ecosystem
from .graph import Klass, LinkKind
from .ingest import (
    EVENTS_FILE,
    JOINS_FILE,
    META_FILE,
    NODES_FILE,
    POSTS_FILE,
    Dataset,
    estimate_core_size,
    load_dataset,
    write_dataset,
)
from .modsim import (
    AdaptationRule,
    ModerationPolicy,
    Strategy,
    adaptive_policy,
    compare_strategies,
    majors_policy,
    run_sim,
)
from .pathways import (
    DAY,
    ban_status_from_graph,
    build_journeys,
    journey_histogram,
    violence_mix,
)
from .schemas import validate_payload


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _dataset_hash(directory: Path) -> str | None:
    parts = []
    for name in (NODES_FILE, EVENTS_FILE, JOINS_FILE, POSTS_FILE, META_FILE):
        p = directory / name
        if p.exists():
            parts.append(f"{name}:{_sha256_file(p)}")
    if not parts:
        return None
    return hashlib.sha256("\n".join(parts).encode()).hexdigest()


class _Run:
    """Collects manifest fields over one subcommand invocation."""

    def __init__(self, subcommand: str, quiet: bool):
        self.subcommand = subcommand
        self.quiet = quiet
        self.t0 = time.monotonic()
        self.seed: int | None = None
        self.config_hash: str | None = None
        self.dataset_hash: str | None = None
        self.outputs: dict[str, str] = {}

    def note(self, message: str) -> None:
        if not self.quiet:
            click.echo(message, err=True)

    def track(self, path: Path) -> None:
        self.outputs[str(path)] = _sha256_file(path)

    def write_manifest(self, path: Path) -> None:
        payload = {
            "tool": "ecosim",
            "version": __version__,
            "subcommand": self.subcommand,
            "argv": sys.argv[1:],
            "seed": self.seed,
            "config_hash": self.config_hash,
            "dataset_hash": self.dataset_hash,
            "outputs": self.outputs,
            "wall_time_s": round(time.monotonic() - self.t0, 6),
        }
        validate_payload("manifest", payload)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _emit(run: _Run, payload: dict, schema: str, json_path: Path | None) -> None:
    """Validate a payload, then write it (with manifest) or print it."""
    validate_payload(schema, payload)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if json_path is None:
        click.echo(text, nl=False)
        return
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(text, encoding="utf-8")
    run.track(json_path)
    run.write_manifest(json_path.with_name(json_path.name + ".manifest.json"))
    run.note(f"wrote {json_path}")


def _finite(x: float) -> float | None:
    return x if math.isfinite(x) else None


@click.group()
@click.version_option(version=__version__, prog_name="ecosim")
@click.option("--seed", type=int, default=None, help="Override any config/default seed.")
@click.option("--quiet", is_flag=True, help="Suppress progress notes on stderr.")
@click.pass_context
def cli(ctx: click.Context, seed: int | None, quiet: bool) -> None:
    """Temporal multilayer ecosystem toolkit."""
    ctx.obj = {"seed": seed, "quiet": quiet}


# ---------------------------------------------------------------------------
# generate


@cli.command()
@click.option("--config", "config_ref", required=True,
              help=f"Path to a generator config JSON, or one of {', '.join(BUILTIN)}.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path),
              help="Output dataset directory.")
@click.pass_context
def generate(ctx: click.Context, config_ref: str, out_dir: Path) -> None:
    """Generate a synthetic dataset from a seeded config."""
    run = _Run("generate", ctx.obj["quiet"])
    if config_ref in BUILTIN:
        obj = builtin_config_dict(config_ref)
        raw = json.dumps(obj, sort_keys=True).encode()
    else:
        path = Path(config_ref)
        if not path.exists():
            raise ConfigError(f"config not found: {config_ref}")
        raw = path.read_bytes()
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if ctx.obj["seed"] is not None:
        obj = {**obj, "seed": ctx.obj["seed"]}
    cfg = GeneratorConfig.from_dict(obj)
    run.seed = cfg.seed
    run.config_hash = hashlib.sha256(raw).hexdigest()
    ds = generate_ecosystem(cfg)
    write_dataset(ds, out_dir)
    for name in (NODES_FILE, EVENTS_FILE, JOINS_FILE, POSTS_FILE, META_FILE):
        run.track(out_dir / name)
    run.dataset_hash = _dataset_hash(out_dir)
    run.write_manifest(out_dir / "run_manifest.json")
    g = ds.graph
    run.note(
        f"generated {len(g.nodes)} nodes, {len(g.events)} events, "
        f"{len(ds.joins)} joins, {len(ds.posts)} posts -> {out_dir}"
    )


# ---------------------------------------------------------------------------
# validate


def _load(run: _Run, directory: Path) -> Dataset:
    ds = load_dataset(directory)
    run.dataset_hash = _dataset_hash(directory)
    return ds


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--json", "json_path", type=click.Path(path_type=Path), default=None,
              help="Write the summary JSON here instead of stdout.")
@click.pass_context
def validate(ctx: click.Context, dataset: Path, json_path: Path | None) -> None:
    """Load a dataset, check its integrity and print summary statistics."""
    run = _Run("validate", ctx.obj["quiet"])
    ds = _load(run, dataset)
    g = ds.graph
    kind_counts = {k.value: 0 for k in LinkKind}
    for e in g.events:
        kind_counts[e.kind.value] += 1
    payload = {
        "nodes": len(g.nodes),
        "platforms": list(g.platforms),
        "hate_core": g.count_of_klass(Klass.HATE_CORE),
        "vulnerable_mainstream": g.count_of_klass(Klass.VULNERABLE_MAINSTREAM),
        "news_source": g.count_of_klass(Klass.NEWS_SOURCE),
        "events": {**kind_counts, "total": len(g.events)},
        "joins": len(ds.joins),
        "posts": len(ds.posts),
        "time_range": list(g.time_range),
        "estimated_core_size": estimate_core_size(g),
    }
    _emit(run, payload, "validate", json_path)


# ---------------------------------------------------------------------------
# analyze


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--metric", required=True,
              type=click.Choice(["components", "reach", "growth", "connectivity",
                                 "bypass", "shock"]))
@click.option("--at", "at_t", type=int, default=None,
              help="Evaluation time (default: end of the observation window).")
@click.option("--samples", type=int, default=4,
              help="components: number of evenly spaced sample times.")
@click.option("--window-days", type=float, default=7.0, help="bypass: return window.")
@click.option("--bin-seconds", type=int, default=60, help="shock: series bin width.")
@click.option("--category", default=None, help="shock: post category to analyze.")
@click.option("--event-t", type=int, default=None, help="shock: external event time.")
@click.option("--pre-window", type=int, default=30, help="shock: bins before the event.")
@click.option("--post-window", type=int, default=10, help="shock: bins after the event.")
@click.option("--json", "json_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def analyze(ctx, dataset, metric, at_t, samples, window_days, bin_seconds, category,
            event_t, pre_window, post_window, json_path):
    """Run one ecosystem metric over a dataset."""
    run = _Run("analyze", ctx.obj["quiet"])
    ds = _load(run, dataset)
    g = ds.graph
    t0, t1 = g.time_range
    at = t1 if at_t is None else at_t

    if metric == "components":
        if samples < 1:
            raise ConfigError("--samples must be >= 1")
        times = [int(round(x)) for x in np.linspace(t0, t1, samples)] if samples > 1 else [t1]
        reports = components_over_time(g, times)
        payload = {
            "metric": "components",
            "samples": [
                {"as_of": r.as_of, "n_components": len(r.components), "sizes": list(r.sizes)}
                for r in reports
            ],
        }
        _emit(run, payload, "analyze_components", json_path)
    elif metric == "reach":
        reach = one_click_reach(g, at)
        payload = {
            "metric": "reach", "as_of": at,
            "n_communities": reach.n_communities, "total_members": reach.total_members,
        }
        _emit(run, payload, "analyze_reach", json_path)
    elif metric == "growth":
        report = link_growth(g)
        payload = {
            "metric": "growth",
            "bin_seconds": report.bin_seconds,
            "t_start": report.t_start,
            "n_bins": report.n_bins,
            "kinds": [
                {
                    "kind": k.kind, "total": k.total, "mean_daily_rate": k.mean_daily_rate,
                    "slope_per_bin": k.slope_per_bin, "r_squared": k.r_squared,
                    "steady": k.steady,
                }
                for k in report.kinds
            ],
        }
        _emit(run, payload, "analyze_growth", json_path)
    elif metric == "connectivity":
        report = platform_connectivity(g, at)
        payload = {
            "metric": "connectivity",
            "as_of": at,
            "ratio_max_median": _finite(report.ratio_max_median),
            "degrees": report.degrees,
        }
        _emit(run, payload, "analyze_connectivity", json_path)
    elif metric == "bypass":
        motifs = detect_bypasses(g, window_days=window_days)
        payload = {
            "metric": "bypass",
            "window_days": window_days,
            "count": len(motifs),
            "motifs": [
                {
                    "origin": m.origin, "intermediate": m.intermediate,
                    "return_target": m.return_target, "t_out": m.t_out, "t_back": m.t_back,
                }
                for m in motifs
            ],
        }
        _emit(run, payload, "analyze_bypass", json_path)
    else:  # shock
        if category is None or event_t is None:
            raise ConfigError("--metric shock needs --category and --event-t")
        series = series_from_posts(ds.posts, category, bin_seconds, t_start=t0, t_end=t1)
        report = shock_response(series, event_t, pre_window, post_window)
        payload = {
            "metric": "shock",
            "category": category,
            "event_t": event_t,
            "bin_seconds": bin_seconds,
            "pre_rate": report.pre_rate,
            "post_rate": report.post_rate,
            "ratio": _finite(report.ratio),
            "latency_bins": report.latency_bins,
            "verdict": report.verdict.value,
        }
        _emit(run, payload, "analyze_shock", json_path)


# ---------------------------------------------------------------------------
# pathways


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--horizon-days", type=float, default=180.0, show_default=True)
@click.option("--json", "json_path", type=click.Path(path_type=Path), default=None)
@click.option("--timelines-csv", type=click.Path(path_type=Path), default=None,
              help="Also export one row per journey step.")
@click.pass_context
def pathways(ctx, dataset, horizon_days, json_path, timelines_csv):
    """Summarize individual journeys through hate communities."""
    run = _Run("pathways", ctx.obj["quiet"])
    ds = _load(run, dataset)
    journeys = build_journeys(ds.joins, ban_status_from_graph(ds.graph))
    horizon_s = int(horizon_days * DAY)
    hist = journey_histogram(journeys, horizon_s)
    payload = {
        "horizon_days": horizon_days,
        "n_individuals": len(journeys),
        "histogram": {"bins": [list(b) for b in hist.bins], "counts": list(hist.counts)},
        "journeys": [
            {
                "individual": j.individual,
                "length": len(j),
                "length_within_horizon": j.length_within(horizon_s),
                "fraction_banned": violence_mix(j).fraction_banned,
            }
            for j in journeys
        ],
    }
    if timelines_csv is not None:
        timelines_csv.parent.mkdir(parents=True, exist_ok=True)
        with timelines_csv.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["individual", "step", "community", "t", "banned"])
            for j in journeys:
                for i, s in enumerate(j.steps):
                    writer.writerow([j.individual, i, s.community, s.t, int(s.banned)])
        run.track(timelines_csv)
        run.note(f"wrote {timelines_csv}")
    _emit(run, payload, "pathways", json_path)


# ---------------------------------------------------------------------------
# attrition


def _parse_grid(spec: str) -> list[float]:
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"grid spec must be LO:HI:N, got {spec!r}") from None
    if n < 2 or hi <= lo:
        raise ConfigError(f"grid spec needs HI > LO and N >= 2, got {spec!r}")
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


@cli.command()
@click.option("--law", required=True, type=click.Choice([l.value for l in Law]))
@click.option("--m", "m_", type=float, required=True, help="Moderation effectiveness rate.")
@click.option("--h", "h_", type=float, required=True, help="Hate-side counterpressure rate.")
@click.option("--H0", "h0", type=float, required=True, help="Initial hate-side strength.")
@click.option("--M0", "m0", type=float, required=True, help="Initial moderation capacity.")
@click.option("--dt", type=float, default=None,
              help="Integrate numerically with this step (default: auto when --horizon set).")
@click.option("--horizon", type=float, default=None, help="Integration horizon T.")
@click.option("--sweep-mh", default=None, help="Sweep m/h over LO:HI:N (CSV output).")
@click.option("--sweep-ratio", default=None, help="Sweep H0/M0 over LO:HI:N (CSV output).")
@click.option("--sweep-csv", type=click.Path(path_type=Path), default=None,
              help="Destination for the sweep grid.")
@click.option("--json", "json_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def attrition(ctx, law, m_, h_, h0, m0, dt, horizon, sweep_mh, sweep_ratio, sweep_csv,
              json_path):
    """Predict and/or integrate a moderation-attrition scenario."""
    run = _Run("attrition", ctx.obj["quiet"])
    law_ = Law(law)

    if sweep_mh or sweep_ratio:
        if not (sweep_mh and sweep_ratio and sweep_csv):
            raise ConfigError("sweep mode needs --sweep-mh, --sweep-ratio and --sweep-csv")
        result = sweep(law_, _parse_grid(sweep_mh), _parse_grid(sweep_ratio), h=h_, M0=m0)
        sweep_csv.parent.mkdir(parents=True, exist_ok=True)
        with sweep_csv.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["mh_ratio", "h0m0_ratio", "predicted", "integrated", "agrees"]
            )
            writer.writeheader()
            writer.writerows(result.rows())
        run.track(sweep_csv)
        run.write_manifest(sweep_csv.with_name(sweep_csv.name + ".manifest.json"))
        run.note(f"wrote {sweep_csv} ({len(result.cells)} cells, "
                 f"{len(result.disagreements)} disagreements)")
        return

    s = AttritionScenario(law=law_, m=m_, h=h_, H0=h0, M0=m0)
    prediction = predict_outcome(s)
    payload = {
        "law": law, "m": m_, "h": h_, "H0": h0, "M0": m0,
        "prediction": {
            "winner": prediction.winner.value,
            "threshold_quantity": prediction.threshold_quantity,
            "survivor_level": prediction.survivor_level,
        },
        "containment_capacity": (
            containment_capacity(m0, m_, h_) if law_ is Law.AMBUSH else None
        ),
        "extinction_time": _finite(extinction_time(s)) if law_ is Law.SQUARE else None,
        "integration": None,
    }
    if dt is not None or horizon is not None:
        traj = integrate(s, dt=dt, T=horizon)
        t_f, h_f, m_f = traj.final
        payload["integration"] = {
            "dt": dt if dt is not None else 1e-3 * characteristic_time(s),
            "T": horizon if horizon is not None else 100.0 * characteristic_time(s),
            "outcome": traj.outcome.value,
            "final_t": t_f, "final_H": h_f, "final_M": m_f,
            "invariant_drift": traj.invariant_drift,
            "steps": int(len(traj.times) - 1),
        }
    _emit(run, payload, "attrition", json_path)


# ---------------------------------------------------------------------------
# simulate


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--policy", type=click.Choice(["majors", "adaptive"]), default="adaptive",
              show_default=True)
@click.option("--budget", type=int, required=True, help="Removals per tick.")
@click.option("--ticks", type=int, default=50, show_default=True)
@click.option("--seed", "seed_", type=int, default=None,
              help="Simulation seed (falls back to the global --seed, then 0).")
@click.option("--delay", type=int, default=0, help="Detection delay in ticks.")
@click.option("--bypass-prob", type=float, default=0.5, show_default=True)
@click.option("--relink-window", type=int, default=3, show_default=True)
@click.option("--majors-k", type=int, default=3, show_default=True,
              help="How many top platforms the majors policy covers.")
@click.option("--compare", "compare_", is_flag=True,
              help="Run both strategies over a seed batch and summarize.")
@click.option("--n-seeds", type=int, default=20, show_default=True,
              help="Seed batch size for --compare.")
@click.option("--json", "json_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def simulate(ctx, dataset, policy, budget, ticks, seed_, delay, bypass_prob, relink_window,
             majors_k, compare_, n_seeds, json_path):
    """Play moderation strategies against the bypass adaptation."""
    run = _Run("simulate", ctx.obj["quiet"])
    ds = _load(run, dataset)
    g = ds.graph
    seed = seed_ if seed_ is not None else (ctx.obj["seed"] if ctx.obj["seed"] is not None else 0)
    run.seed = seed
    rule = AdaptationRule(bypass_probability=bypass_prob, relink_window_ticks=relink_window)

    if compare_:
        policies = [majors_policy(g, budget, k=majors_k, delay=delay),
                    adaptive_policy(budget, delay=delay)]
        seeds = list(range(seed, seed + n_seeds))
        comparison = compare_strategies(g, policies, rule, ticks, seeds)
        payload = {
            "ticks": ticks,
            "seeds": seeds,
            "results": [
                {
                    "policy": r.policy.label,
                    "mean_residual": r.mean_residual,
                    "residuals": list(r.residuals),
                }
                for r in comparison.results
            ],
        }
        _emit(run, payload, "compare", json_path)
        return

    pol = (majors_policy(g, budget, k=majors_k, delay=delay) if policy == "majors"
           else adaptive_policy(budget, delay=delay))
    outcome = run_sim(g, pol, rule, ticks, seed)
    payload = {
        "policy": {
            "strategy": pol.strategy.value,
            "budget_per_tick": pol.budget_per_tick,
            "detection_delay_ticks": pol.detection_delay_ticks,
            "platforms": list(pol.platforms),
        },
        "rule": {
            "bypass_probability": rule.bypass_probability,
            "relink_window_ticks": rule.relink_window_ticks,
        },
        "ticks": ticks,
        "seed": seed,
        "initial_active": outcome.initial_active,
        "final_residual": outcome.final_residual,
        "series": {
            "active_nodes": outcome.active_nodes,
            "reach": outcome.reach,
            "removals": outcome.removals,
            "bypasses": outcome.bypasses,
        },
    }
    _emit(run, payload, "simulate", json_path)


# ---------------------------------------------------------------------------
# export


@cli.command("export-gexf")
@click.argument("dataset", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--at", "at_t", type=int, default=None,
              help="Snapshot time (default: end of the observation window).")
@click.option("--aggregate", is_flag=True, help="Export platform supernodes instead of nodes.")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None,
              help="Also write a source,target,weight edge list.")
@click.pass_context
def export_gexf(ctx, dataset, at_t, aggregate, out, csv_path):
    """Export a snapshot (or platform aggregate) as GEXF."""
    run = _Run("export-gexf", ctx.obj["quiet"])
    ds = _load(run, dataset)
    g = ds.graph
    at = g.time_range[1] if at_t is None else at_t
    obj = g.aggregate_by_platform(at) if aggregate else g.snapshot_at(at)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_gexf(obj, out)
    run.track(out)
    if csv_path is not None:
        write_edge_csv(obj, csv_path)
        run.track(csv_path)
        run.note(f"wrote {csv_path}")
    run.write_manifest(out.with_name(out.name + ".manifest.json"))
    run.note(f"wrote {out}")


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:  # --help, --version
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except EcosimError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
