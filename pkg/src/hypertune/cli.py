"""Command-line interface.

Subcommands:

    optimize      run one optimizer, persist artifacts to a run directory
    compare       run an optimizer/seed grid with equal budgets
    eval-metrics  MSE / PSNR / SSIM between two PNG images, as JSON
    replay        audit a persisted run for decision-level consistency

Exit codes: 0 success, 1 runtime failure or replay divergence, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import ConfigError, load_config
from .metrics import GAUSSIAN_11X11, GLOBAL, Image, SsimConfig, mse, psnr, ssim
from .runs import jobs_from_env, replay_run, run_and_persist, run_compare


def _parse_seeds(text: str) -> list[int]:
    """Seed lists: '1..20' or '1,2,5'."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypertune",
        description="Derivative-free hyperparameter search over integer lattices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", help="run one optimizer and persist artifacts")
    opt.add_argument("--config", default=None, help="YAML run configuration")
    opt.add_argument("--optimizer", choices=["bo", "cobyla", "pso", "random"])
    opt.add_argument("--seed", type=int)
    opt.add_argument("--max-evals", type=int, dest="max_evals")
    opt.add_argument("--out", dest="output_dir")
    opt.add_argument("--acquisition", choices=["ucb", "pi"])
    opt.add_argument("--lambda", type=float, dest="lam", help="UCB exploration weight")

    cmp_ = sub.add_parser("compare", help="optimizer/seed grid with equal budgets")
    cmp_.add_argument("--config", default=None)
    cmp_.add_argument("--optimizers", default="bo,cobyla,pso")
    cmp_.add_argument("--seeds", default="1..20", help="e.g. 1..20 or 1,2,3")
    cmp_.add_argument("--budget", type=int, default=None)
    cmp_.add_argument("--jobs", type=int, default=None)
    cmp_.add_argument("--out", dest="output_dir")

    met = sub.add_parser("eval-metrics", help="image quality metrics for two PNGs")
    met.add_argument("image_a")
    met.add_argument("image_b")
    met.add_argument(
        "--ssim-window",
        choices=[GLOBAL, GAUSSIAN_11X11],
        default=GAUSSIAN_11X11,
    )

    rep = sub.add_parser("replay", help="verify a persisted run is reproducible")
    rep.add_argument("run_dir")

    return parser


def _load_png(path: str) -> Image:
    from PIL import Image as PilImage

    with PilImage.open(path) as img:
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB")
        arr = np.asarray(img, dtype=float) / 255.0
    return Image.from_array(arr)


def cmd_optimize(args) -> int:
    overrides = {
        "optimizer": args.optimizer,
        "seed": args.seed,
        "max_evals": args.max_evals,
        "output_dir": args.output_dir,
        "acquisition": args.acquisition,
        "lam": args.lam,
    }
    cfg = load_config(args.config, overrides)
    run_dir, result = run_and_persist(cfg)
    report_path = run_dir / "report.json"
    print(f"run directory: {run_dir}")
    if result.aborted:
        print(f"run aborted: {result.error}", file=sys.stderr)
        return 1
    best = result.best
    print(
        f"best: {cfg.space.point_as_dict(best.point)} "
        f"score={best.score:.6g} (iteration {best.iteration})"
    )
    print(f"report: {report_path}")
    return 0


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    optimizers = [o for o in args.optimizers.split(",") if o]
    seeds = _parse_seeds(args.seeds)
    comparison = run_compare(
        cfg,
        optimizers,
        seeds,
        budget=args.budget,
        jobs=jobs_from_env(args.jobs),
        out_dir=args.output_dir,
    )
    print(f"comparison directory: {comparison['output_dir']}")
    header = f"{'optimizer':<10} {'median evals-to-opt':>20} {'IQR':>16} {'reached':>9}"
    print(header)
    for name, stats in comparison["per_optimizer"].items():
        med = stats["median_evals_to_optimum"]
        lo, hi = stats["iqr_evals_to_optimum"]
        med_s = "never" if med is None else f"{med:g}"
        iqr_s = f"[{lo or 'inf'}, {hi or 'inf'}]"
        print(
            f"{name:<10} {med_s:>20} {iqr_s:>16} "
            f"{stats['n_reached_optimum']}/{stats['n_cells']:<8}"
        )
    return 0


def cmd_eval_metrics(args) -> int:
    a = _load_png(args.image_a)
    b = _load_png(args.image_b)
    cfg = SsimConfig(window=args.ssim_window)
    print(
        json.dumps(
            {"mse": mse(a, b), "psnr": psnr(a, b), "ssim": ssim(a, b, cfg)},
            indent=2,
        )
    )
    return 0


def cmd_replay(args) -> int:
    ok, message = replay_run(args.run_dir)
    print(message)
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "optimize":
            return cmd_optimize(args)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "eval-metrics":
            return cmd_eval_metrics(args)
        return cmd_replay(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
