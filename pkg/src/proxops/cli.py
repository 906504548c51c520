"""Command-line entry points.

Exit codes: 0 success, 2 usage errors (bad flags, unknown subcommand),
3 configuration or validation failures, 4 runtime failures.
"""

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import figures
from .config import (
    episode_config_from_source,
    load_yaml,
    train_config_from_dict,
    trajectory_spec_from_dict,
)
from .errors import ConfigError, ProxopsError, ValidationError
from .metrics import episode_metrics, write_rollout_csv, write_rollout_jsonl
from .morphology import load_morphology, validate_positive_span
from .rl.checkpoint import load_policy
from .rl.train import evaluate_policy, train
from .rollout import parse_script, policy_source, run_rollout
from .server import serve_stdio, serve_tcp
from .trajectories import sample_reference, trajectory_period

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4


def _parser():
    parser = argparse.ArgumentParser(
        prog="proxops",
        description="6-DOF spacecraft proximity-operations simulator and RL trainer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("traj", help="sample a reference trajectory to CSV (and a figure)")
    p.add_argument("--spec", help="trajectory YAML (alternatively use the flags below)")
    p.add_argument("--shape", choices=["circle", "capsule", "rectangle", "lemniscate",
                                       "lissajous", "spiral"])
    p.add_argument("--speed", type=float, default=0.1, help="path speed [m/s]")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--duration", type=float, help="sampled span [s]; default one period")
    p.add_argument("--dt", type=float, default=0.1, help="sampling interval [s]")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--plot", action="store_true", help="write a PNG next to the CSV")

    p = sub.add_parser("validate", help="check a morphology file's wrench authority")
    p.add_argument("morphology", help="morphology YAML path")
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("rollout", help="run one scripted or policy episode to files")
    p.add_argument("--episode", default="hover", help="episode config (name, path)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, help="max steps; default episode horizon")
    p.add_argument("--script", default="zero", help="zero | random | constant:v1,..,v8")
    p.add_argument("--policy", help="checkpoint path (overrides --script)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figure", action="store_true")

    p = sub.add_parser("train", help="run a training job from a YAML config")
    p.add_argument("--config", required=True, help="training YAML path")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, help="override the config seed")

    p = sub.add_parser("eval", help="evaluate a checkpoint over fixed seeds")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episode", default="hover")
    p.add_argument("--seeds", default="1001,1002,1003")
    p.add_argument("--out-dir")

    p = sub.add_parser("serve", help="serve one environment per connection")
    p.add_argument("--episode", default="hover")
    p.add_argument("--transport", choices=["stdio", "tcp"], default="stdio")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, help="TCP port; 0 picks a free one "
                                            "(default from PROXOPS_PORT)")
    return parser


def _cmd_traj(args):
    if args.spec:
        spec = trajectory_spec_from_dict(load_yaml(args.spec))
    elif args.shape:
        spec = trajectory_spec_from_dict(
            {"shape": args.shape, "speed_mps": args.speed, "radius_m": args.radius}
        )
    else:
        raise ConfigError("traj needs either --spec or --shape")
    period = trajectory_period(spec)
    duration = args.duration if args.duration else (period if np.isfinite(period) else 60.0)
    times = np.arange(0.0, duration + 0.5 * args.dt, args.dt)
    samples = [sample_reference(spec, float(t)) for t in times]

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        fh.write("t,px,py,pz,qw,qx,qy,qz,vx,vy,vz\n")
        for s in samples:
            cells = [s.time, *s.position, *s.orientation, *s.velocity]
            fh.write(",".join(repr(float(c)) for c in cells) + "\n")
    print(f"wrote {len(samples)} samples to {out}")
    if args.plot:
        png = out.with_suffix(".png")
        figures.save_trajectory_figure(samples, png, title=f"{spec.shape} reference")
        print(f"wrote {png}")
    return EXIT_OK


def _cmd_validate(args):
    morph = load_morphology(args.morphology, check_span=False)
    report = validate_positive_span(morph, n_samples=args.samples)
    print(f"{morph.name}: {report.summary()}")
    return EXIT_OK if report.passed else EXIT_CONFIG


def _cmd_rollout(args):
    cfg = episode_config_from_source(args.episode)
    if args.policy:
        source = policy_source(load_policy(args.policy))
    else:
        source = parse_script(args.script)
    log = run_rollout(cfg, source, seed=args.seed, max_steps=args.steps)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_rollout_csv(log, out_dir / "rollout.csv")
    write_rollout_jsonl(log, out_dir / "rollout.jsonl")
    summary = episode_metrics(log)
    with open(out_dir / "metrics.json", "w") as fh:
        json.dump(asdict(summary), fh, indent=2, sort_keys=True)
    if not args.no_figure:
        figures.save_rollout_figure(log, out_dir / "rollout.png",
                                    title=f"{log.regime} seed {log.seed}")
    print(f"rollout: {len(log)} steps, total reward {summary.total_reward:.3f}, "
          f"rms err {summary.rms_pos_err:.3f} m -> {out_dir}")
    return EXIT_OK


def _cmd_train(args):
    doc = load_yaml(args.config)
    train_cfg, episode_cfg = train_config_from_dict(doc, base_dir=Path(args.config).parent)
    if args.seed is not None:
        from dataclasses import replace
        train_cfg = replace(train_cfg, seed=args.seed)
    result = train(train_cfg, episode_cfg, args.out_dir)
    figures.save_training_curve(
        result.records, Path(args.out_dir) / "learning_curve.png",
        title=f"{train_cfg.algorithm} seed {train_cfg.seed}",
    )
    print(f"training done: metrics {result.metrics_path}, "
          f"final checkpoint {result.checkpoint_path}")
    return EXIT_OK


def _cmd_eval(args):
    policy = load_policy(args.checkpoint)
    cfg = episode_config_from_source(args.episode)
    seeds = [int(s) for s in args.seeds.split(",") if s]
    summary = evaluate_policy(policy, cfg, seeds)
    record = {
        "mean_return": summary.mean_return,
        "std_return": summary.std_return,
        "dist_err_m": summary.dist_err_m,
        "ang_err_frob": summary.ang_err_frob,
        "action_rate": summary.action_rate,
        "returns": list(summary.returns),
        "seeds": seeds,
    }
    print(json.dumps(record, indent=2, sort_keys=True))
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "eval.json", "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
        figures.save_eval_figure(summary, out_dir / "eval.png")
    return EXIT_OK


def _cmd_serve(args):
    cfg = episode_config_from_source(args.episode)
    if args.transport == "stdio":
        serve_stdio(cfg)
    else:
        serve_tcp(cfg, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "traj": _cmd_traj,
    "validate": _cmd_validate,
    "rollout": _cmd_rollout,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProxopsError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
