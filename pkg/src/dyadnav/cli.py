"""Command-line entry point: fit, simulate, eval-shield, generate-data, serve.

Every run writes a manifest.json (resolved options + versions) beside its
outputs; rerunning a subcommand with --config manifest.json reproduces the
outputs byte for byte. Exit codes: 0 success, 1 runtime/data error, 2 usage.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np

from . import config as cfgmod
from . import data as datamod
from .data import load_trajectories
from .interaction import FIT_KINDS, compare_models, fit
from .policy import GreedyPolicy, evaluate, metrics_from_traces, run_episode
from .suites import scenario_spec, table3_suite


def _load_config_options(ctx, config_path, keymap: dict) -> dict:
    """Resolve options: config file fills anything not set explicitly.

    keymap maps manifest option keys to click parameter names; explicit
    CLI flags always win over values stored in --config.
    """
    options = {key: ctx.params[param] for key, param in keymap.items()}
    if config_path:
        doc = json.loads(Path(config_path).read_text())
        stored = doc.get("options", doc)
        for key, param in keymap.items():
            if key not in stored:
                continue
            src = ctx.get_parameter_source(param)
            if src is None or src.name == "DEFAULT":
                options[key] = stored[key]
    return options


def _write_outputs(out_dir: Path, subcommand: str, options: dict,
                   files: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, obj in files.items():
        cfgmod.dump_json(obj, out_dir / name)
    cfgmod.dump_json(cfgmod.manifest(subcommand, options), out_dir / "manifest.json")


@click.group()
def main():
    """Human/guide-robot dyad navigation toolkit."""


@main.command("fit")
@click.option("--data", "data_path", required=True, help="Trajectory JSONL file or directory.")
@click.option("--model", "model_kind", default="delayed",
              type=click.Choice([*FIT_KINDS, "all"]), show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", default="fit-out", show_default=True)
@click.option("--config", "config_path", default=None,
              help="Manifest/config JSON; explicit flags still win.")
@click.pass_context
def cmd_fit(ctx, data_path, model_kind, seed, out_dir, config_path):
    """Fit interaction-model parameters to dyad trajectories."""
    options = _load_config_options(ctx, config_path, {
        "data": "data_path", "model": "model_kind", "seed": "seed"})
    try:
        trajectories = load_trajectories(options["data"])
    except (FileNotFoundError, ValueError) as exc:
        raise click.ClickException(str(exc))
    if not trajectories:
        raise click.ClickException(f"no trajectories found in {options['data']}")
    out = Path(out_dir)
    try:
        if options["model"] == "all":
            rows = compare_models(trajectories, seed=int(options["seed"]))
            click.echo(f"{'model':<14} {'train RMSE (mm)':>16} {'val RMSE (mm)':>14}")
            for row in rows:
                click.echo(f"{row['model']:<14} {row['train_rmse_mm']:>16.1f} "
                           f"{row['val_rmse_mm']:>14.1f}")
            best = min(rows, key=lambda r: r["val_rmse_mm"])
            files = {"fit_report.json": {"rows": rows},
                     "params.json": best["params"]}
        else:
            result = fit(options["model"], trajectories, seed=int(options["seed"]))
            click.echo(f"{options['model']}: train RMSE "
                       f"{result.train_rmse:.1f} mm over {len(trajectories)} trajectories")
            files = {"fit_report.json": result.to_dict(),
                     "params.json": result.to_dict()["params"]}
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _write_outputs(out, "fit", options, files)
    click.echo(f"wrote {out / 'params.json'}")


@main.command("simulate")
@click.option("--scenario", "scenario_name", default="builtin:fig5a", show_default=True,
              help="builtin:<name> or a scenario JSON file.")
@click.option("--beta", default=0.0, show_default=True)
@click.option("--no-shield", is_flag=True, help="Shorthand for --beta 1.0.")
@click.option("--noise-sigma", default=0.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", default="sim-out", show_default=True)
@click.option("--config", "config_path", default=None)
@click.pass_context
def cmd_simulate(ctx, scenario_name, beta, no_shield, noise_sigma, seed,
                 out_dir, config_path):
    """Run one episode with the greedy policy and export the trace."""
    options = _load_config_options(ctx, config_path, {
        "scenario": "scenario_name", "beta": "beta", "no_shield": "no_shield",
        "noise_sigma": "noise_sigma", "seed": "seed"})
    cfg = cfgmod.merged_config()
    cfg["seed"] = int(options["seed"])
    beta_eff = 1.0 if options["no_shield"] else float(options["beta"])
    try:
        scenario = scenario_spec(options["scenario"])
        model = cfgmod.interaction_model(cfg)
        env = scenario.make_env(model, noise_sigma=float(options["noise_sigma"]),
                                seed=cfg["seed"])
    except (FileNotFoundError, ValueError, KeyError) as exc:
        raise click.ClickException(f"invalid scenario: {exc}")
    policy = GreedyPolicy(model, cfgmod.shield_config(cfg, beta=beta_eff),
                          cfgmod.greedy_config(cfg))
    rng = np.random.default_rng([np.uint64(cfg["seed"]), np.uint64(7)])
    trace = run_episode(env, policy, rng)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "trace.jsonl").open("w", encoding="utf-8") as f:
        for step in trace:
            f.write(json.dumps(step, sort_keys=True) + "\n")
    metrics = metrics_from_traces([trace], cfg["seed"])
    _write_outputs(out, "simulate", options,
                   {"summary.json": metrics.to_dict()})
    click.echo(f"{scenario.name}: {len(trace)} steps, "
               f"{int(metrics.avg_collisions_per_ep)} collisions, "
               f"reward {metrics.mean_reward:.2f}")


@main.command("eval-shield")
@click.option("--sensors", type=click.Choice(["ideal", "noisy", "both"]),
              default="both", show_default=True)
@click.option("--betas", default="0.0,1.0", show_default=True,
              help="Comma-separated test-time suppression factors.")
@click.option("--episodes-per-scenario", default=4, show_default=True)
@click.option("--noise-sigma", default=0.05, show_default=True)
@click.option("--train-iterations", default=0, show_default=True,
              help="Train a linear policy first instead of using greedy.")
@click.option("--train-beta", default=0.5, show_default=True)
@click.option("--max-scenarios", default=0, show_default=True,
              help="Truncate the suite (0 = all 25).")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", default="shield-out", show_default=True)
@click.option("--config", "config_path", default=None)
@click.pass_context
def cmd_eval_shield(ctx, sensors, betas, episodes_per_scenario, noise_sigma,
                    train_iterations, train_beta, max_scenarios, seed, out_dir,
                    config_path):
    """Shielding ablation over the 25-scenario suite."""
    options = _load_config_options(ctx, config_path, {
        "sensors": "sensors", "betas": "betas",
        "episodes_per_scenario": "episodes_per_scenario",
        "noise_sigma": "noise_sigma", "train_iterations": "train_iterations",
        "train_beta": "train_beta", "max_scenarios": "max_scenarios",
        "seed": "seed"})
    cfg = cfgmod.merged_config()
    scenarios = table3_suite()
    if int(options["max_scenarios"]) > 0:
        scenarios = scenarios[:int(options["max_scenarios"])]
    beta_list = [float(b) for b in str(options["betas"]).split(",")]
    sensor_list = (["ideal", "noisy"] if options["sensors"] == "both"
                   else [options["sensors"]])
    n_episodes = len(scenarios) * int(options["episodes_per_scenario"])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    files = {}
    policy_builder = None
    if int(options["train_iterations"]) > 0:
        from .policy import LinearPolicy, train_linear
        from .suites import training_corridor_scenario
        train_sc = training_corridor_scenario()
        result = train_linear(
            lambda s: train_sc.make_env(cfgmod.interaction_model(cfg), seed=s),
            cfgmod.shield_config(cfg, beta=float(options["train_beta"])),
            iterations=int(options["train_iterations"]),
            seed=int(options["seed"]))
        if result.diverged:
            click.echo(f"training diverged ({result.divergence_reason})")
        with (out / "learning_curve.jsonl").open("w", encoding="utf-8") as f:
            for entry in result.log:
                f.write(json.dumps(entry, sort_keys=True) + "\n")
        files["policy.json"] = result.params.to_dict()
        params = result.params
        policy_builder = lambda model, sc: LinearPolicy(params, sc, model=model)

    rows = []
    header = (f"{'sensors':<8} {'beta_test':>9} {'collision-free':>15} "
              f"{'avg collisions':>15} {'mean reward':>12}")
    click.echo(header)
    click.echo("-" * len(header))
    for sensor in sensor_list:
        sigma = float(options["noise_sigma"]) if sensor == "noisy" else 0.0
        for beta in beta_list:
            metrics = evaluate(
                scenarios, lambda: cfgmod.interaction_model(cfg),
                cfgmod.shield_config(cfg, beta=beta), n_episodes,
                seed=int(options["seed"]), noise_sigma=sigma,
                policy_builder=policy_builder)
            row = {"sensors": sensor, "beta_test": beta, **metrics.to_dict()}
            rows.append(row)
            click.echo(f"{sensor:<8} {beta:>9.1f} "
                       f"{metrics.collision_free_ratio:>15.2f} "
                       f"{metrics.avg_collisions_per_ep:>15.2f} "
                       f"{metrics.mean_reward:>12.2f}")
    with (out / "metrics.jsonl").open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")
    files["metrics.json"] = {"rows": rows}
    _write_outputs(out, "eval-shield", options, files)


@main.command("generate-data")
@click.option("--repeats", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--profiles", "profiles_path", default=None,
              help="JSON list of subject profiles; defaults to three built-ins.")
@click.option("--out", "out_dir", default="data-out", show_default=True)
@click.option("--config", "config_path", default=None)
@click.pass_context
def cmd_generate_data(ctx, repeats, seed, profiles_path, out_dir, config_path):
    """Write synthetic dyad trajectories over the five scripted robot paths."""
    options = _load_config_options(ctx, config_path, {
        "repeats": "repeats", "seed": "seed", "profiles": "profiles_path"})
    profiles = None
    if options["profiles"]:
        try:
            doc = json.loads(Path(options["profiles"]).read_text())
            from .geometry import Pose2
            from .interaction import DelayedHarnessParams
            profiles = [datamod.SubjectProfile(
                p["id"], DelayedHarnessParams(Pose2(*p["offset"]), float(p["alpha"])),
                float(p.get("noise_sigma", 0.02))) for p in doc]
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise click.ClickException(f"bad profiles file: {exc}")
    written = datamod.generate_dataset(out_dir, profiles=profiles,
                                       repeats=int(options["repeats"]),
                                       seed=int(options["seed"]))
    _write_outputs(Path(out_dir), "generate-data", options,
                   {"dataset.json": {"files": [p.name for p in written]}})
    click.echo(f"wrote {len(written)} trajectory files to {out_dir}")


@main.command("serve")
@click.option("--port", default=8732, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--world", "scenario_name", default="builtin:corridor",
              show_default=True, help="builtin:<name> or a scenario JSON file.")
@click.option("--beta", default=0.0, show_default=True)
@click.option("--noise-sigma", default=0.0, show_default=True)
@click.option("--tick-ms", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--static", "static_dir", default=None,
              help="Directory with the built web UI (default: auto-detect).")
def cmd_serve(port, host, scenario_name, beta, noise_sigma, tick_ms, seed,
              static_dir):
    """Serve live interactive episodes over the WebSocket protocol."""
    import uvicorn

    from .server import create_app
    cfg = cfgmod.merged_config({
        "seed": int(seed),
        "shield": {"beta": float(beta)},
        "lidar": {"sigma": float(noise_sigma)},
        "server": {"tick_ms": int(tick_ms), "scenario": scenario_name},
    })
    app = create_app(cfg, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
