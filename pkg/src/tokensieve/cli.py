"""Command-line front door.

Subcommands: compress (full pipeline), score (scores without selection),
prior (frequency prior for one frame), flops (cost accounting), bench
(synthetic benchmark), oracle-check (solver vs exact LP). Exit status is 0 on
success, 1 on validation errors, 2 on I/O errors; all errors print a single
``error:`` line to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SPATIAL_OPERATORS, TRANSPORT_MODES, RunConfig
from .errors import ConfigError, TokenSieveError
from .flops_model import ModelDims, SequenceBudget, reduction_report, transformer_flops
from .projection import IDENTITY, load_projector
from .scoring_selection import compress, score_tokens
from .synthetic_bench import SynthConfig, run_bench_with_samples, stream
from .tensor_io import load_frame, load_token_tensor, save_report
from .transport import augment_cost, exact_ot_oracle, make_marginal, plan_objective, sinkhorn


class _Parser(argparse.ArgumentParser):
    # route argparse failures (unknown flags, bad values) to exit status 1
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tokensieve",
        description="Visual-token compression by transport novelty scoring.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = _sub(sub, "compress", "Score tokens and write the Top-K selection report.")
    _add_io_flags(p)
    _add_run_flags(p, require_ratio=True)
    p.set_defaults(func=_cmd_compress)

    p = _sub(sub, "score", "Write per-token score vectors without selecting.")
    _add_io_flags(p)
    _add_run_flags(p, require_ratio=False)
    p.set_defaults(func=_cmd_score)

    p = _sub(sub, "prior", "Compute the frequency prior for a single frame.")
    p.add_argument("--frame", required=True, help="frame file (binary PGM P5 or 2-D NPY)")
    p.add_argument("--grid-rows", type=int, required=True, help="patch grid rows")
    p.add_argument("--grid-cols", type=int, required=True, help="patch grid cols")
    p.add_argument(
        "--spatial-operator", choices=SPATIAL_OPERATORS, default="laplacian",
        help="spatial filter",
    )
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_prior)

    p = _sub(sub, "flops", "Transformer FLOPs accounting.")
    p.add_argument("--layers", type=int, required=True, help="transformer layers")
    p.add_argument("--hidden", type=int, required=True, help="hidden size")
    p.add_argument("--ffn", type=int, required=True, help="FFN intermediate size")
    p.add_argument("--n", type=int, default=None, help="sequence length; prints the FLOP count")
    p.add_argument("--n-sys", type=int, default=0, help="system prompt tokens")
    p.add_argument("--n-txt", type=int, default=0, help="user text tokens")
    p.add_argument("--frames", type=int, default=None, help="video frame count")
    p.add_argument("--tokens-per-frame", type=int, default=None, help="patch tokens per frame")
    p.add_argument("--kept-per-frame", type=int, default=None, help="patch tokens kept per frame")
    p.add_argument("--sinkhorn-iters", type=int, default=20, help="solver iterations")
    p.add_argument("--out", default=None, help="output JSON path (defaults to stdout)")
    p.set_defaults(func=_cmd_flops)

    p = _sub(sub, "bench", "Run the synthetic separation benchmark.")
    p.add_argument("--frames", type=int, default=8, help="frames per sequence")
    p.add_argument("--tokens-per-frame", type=int, default=64, help="patch tokens per frame")
    p.add_argument("--dim", type=int, default=64, help="embedding dimension")
    p.add_argument("--drift-sigma", type=float, default=0.02, help="per-step drift scale")
    p.add_argument("--artifacts", type=int, default=6, help="replaced tokens per forged sequence")
    p.add_argument(
        "--artifact-frames", default="random",
        help="comma-separated frame indices, or 'random'",
    )
    p.add_argument("--trials", type=int, default=100, help="sequence pairs to evaluate")
    p.add_argument(
        "--ratios", default="0.05,0.1,0.25,0.5,1.0",
        help="comma-separated retention ratios to sweep",
    )
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--figures", default=None, help="directory for rendered figures")
    _add_run_flags(p, require_ratio=False, io=False)
    p.set_defaults(func=_cmd_bench)

    p = _sub(sub, "oracle-check", "Compare the Sinkhorn solver against the exact LP oracle.")
    p.add_argument("--instances", type=int, default=50, help="random cost instances")
    p.add_argument("--max-n", type=int, default=4, help="largest token count (at most 6)")
    p.add_argument("--epsilon-ot", type=float, default=0.005, help="entropic regularization")
    p.add_argument("--sinkhorn-iters", type=int, default=2000, help="solver iterations")
    p.add_argument("--c-birth", type=float, default=0.35, help="birth penalty")
    p.add_argument("--c-death", type=float, default=0.35, help="death penalty")
    p.add_argument("--seed", type=int, default=42, help="instance stream seed")
    p.set_defaults(func=_cmd_oracle_check)

    return parser


def _sub(sub, name, help_text):
    return sub.add_parser(
        name, help=help_text, description=help_text,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )


def _add_io_flags(p):
    p.add_argument("--tokens", required=True, help="token tensor (3-D NPY)")
    p.add_argument(
        "--frames", default=None,
        help="source frames: a directory of PGM/NPY files or a comma-separated list",
    )
    p.add_argument("--projector-weight", default=None, help="projector weight (2-D NPY)")
    p.add_argument("--projector-bias", default=None, help="projector bias (1-D NPY)")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--figures", default=None, help="directory for rendered figures")


def _add_run_flags(p, require_ratio: bool, io: bool = True):
    defaults = RunConfig()
    if require_ratio:
        p.add_argument("--ratio", type=float, required=True, help="retained patch-token fraction, in (0,1]")
    p.add_argument("--epsilon-ot", type=float, default=defaults.epsilon_ot, help="entropic regularization")
    p.add_argument("--c-birth", type=float, default=defaults.c_birth, help="birth penalty")
    p.add_argument("--c-death", type=float, default=defaults.c_death, help="death penalty")
    p.add_argument("--sinkhorn-iters", type=int, default=defaults.sinkhorn_iters, help="solver iterations")
    p.add_argument("--lambda-birth", type=float, default=defaults.lambda_birth, help="birth evidence weight")
    p.add_argument("--eta-forensic", type=float, default=defaults.eta_forensic, help="frequency prior weight")
    p.add_argument("--epsilon-norm", type=float, default=defaults.epsilon_norm, help="normalization stabilizer")
    p.add_argument(
        "--transport-mode", choices=TRANSPORT_MODES, default=defaults.transport_mode,
        help="temporal scoring formulation",
    )
    p.add_argument(
        "--spatial-operator", choices=SPATIAL_OPERATORS, default=defaults.spatial_operator,
        help="frequency prior operator",
    )
    p.add_argument("--seed", type=int, default=defaults.seed, help="run seed recorded in reports")


def _run_config(args, ratio=None) -> RunConfig:
    cfg = RunConfig(
        epsilon_ot=args.epsilon_ot,
        c_birth=args.c_birth,
        c_death=args.c_death,
        sinkhorn_iters=args.sinkhorn_iters,
        lambda_birth=args.lambda_birth,
        eta_forensic=args.eta_forensic,
        ratio=ratio if ratio is not None else 1.0,
        epsilon_norm=args.epsilon_norm,
        transport_mode=args.transport_mode,
        spatial_operator=args.spatial_operator,
        seed=args.seed,
    )
    return cfg.validate()


def _load_frames(frames_arg: str | None):
    if frames_arg is None:
        return None
    path = Path(frames_arg)
    if path.is_dir():
        files = sorted(
            p for p in path.iterdir() if p.suffix.lower() in (".pgm", ".npy")
        )
        if not files:
            raise ConfigError(f"no .pgm or .npy frames found in {path}")
    else:
        files = [Path(s) for s in frames_arg.split(",") if s]
    return [load_frame(f) for f in files]


def _load_projector_args(args):
    if args.projector_bias is not None and args.projector_weight is None:
        raise ConfigError("--projector-bias requires --projector-weight")
    if args.projector_weight is None:
        return IDENTITY
    return load_projector(args.projector_weight, args.projector_bias)


def _cmd_compress(args) -> int:
    config = _run_config(args, ratio=args.ratio)
    tokens = load_token_tensor(args.tokens)
    frames = _load_frames(args.frames)
    projector = _load_projector_args(args)
    result, bundle = compress(tokens, frames, config, projector)
    save_report(args.out, result)
    if args.figures:
        from .figures import render_score_figures

        render_score_figures(bundle, args.figures, selection=result)
    return 0


def _cmd_score(args) -> int:
    config = _run_config(args)
    tokens = load_token_tensor(args.tokens)
    frames = _load_frames(args.frames)
    projector = _load_projector_args(args)
    bundle = score_tokens(tokens, frames, config, projector)
    save_report(args.out, bundle)
    if args.figures:
        from .figures import render_score_figures

        render_score_figures(bundle, args.figures)
    return 0


def _cmd_prior(args) -> int:
    from .frequency_prior import prior_variant

    frame = load_frame(args.frame)
    grid = prior_variant(args.spatial_operator, frame, args.grid_rows, args.grid_cols)
    save_report(
        args.out,
        {
            "operator": args.spatial_operator,
            "grid_rows": args.grid_rows,
            "grid_cols": args.grid_cols,
            "values": grid.ravel(),
        },
    )
    return 0


def _cmd_flops(args) -> int:
    dims = ModelDims(layers=args.layers, hidden=args.hidden, ffn=args.ffn).validate()
    if args.n is not None:
        print(transformer_flops(dims, args.n))
        return 0
    if args.frames is None or args.tokens_per_frame is None or args.kept_per_frame is None:
        raise ConfigError(
            "flops needs either --n, or --frames/--tokens-per-frame/--kept-per-frame"
        )
    budget = SequenceBudget(
        n_sys=args.n_sys,
        n_txt=args.n_txt,
        frames=args.frames,
        tokens_per_frame=args.tokens_per_frame,
        kept_per_frame=args.kept_per_frame,
    )
    report = reduction_report(dims, budget, args.sinkhorn_iters)
    if args.out:
        save_report(args.out, report)
    else:
        from .tensor_io import dumps_report

        sys.stdout.write(dumps_report(report))
    return 0


def _cmd_bench(args) -> int:
    if args.artifact_frames == "random":
        artifact_frames = "random"
    else:
        artifact_frames = tuple(int(s) for s in args.artifact_frames.split(",") if s)
    cfg = SynthConfig(
        frames=args.frames,
        tokens_per_frame=args.tokens_per_frame,
        dim=args.dim,
        drift_sigma=args.drift_sigma,
        artifact_count=args.artifacts,
        artifact_frames=artifact_frames,
        seed=args.seed,
    ).validate()
    run = _run_config(args)
    ratios = [float(s) for s in args.ratios.split(",") if s]
    report, samples = run_bench_with_samples(cfg, run, args.trials, ratios)
    save_report(args.out, report)
    if args.figures:
        from .figures import render_bench_figures

        render_bench_figures(report, samples, args.figures)
    return 0


def _cmd_oracle_check(args) -> int:
    if args.max_n > 6:
        raise ConfigError("--max-n is capped at 6 (exact oracle limit)")
    rng = stream(args.seed, 0)
    worst = 0.0
    for _ in range(args.instances):
        n = int(rng.integers(2, args.max_n + 1))
        cost = rng.uniform(0.0, 2.0, size=(n, n))
        aug = augment_cost(cost, args.c_birth, args.c_death)
        marginal = make_marginal(n)
        plan = sinkhorn(aug, marginal, args.epsilon_ot, args.sinkhorn_iters)
        exact = exact_ot_oracle(aug, marginal)
        obj = plan_objective(plan, aug)
        obj_exact = plan_objective(exact, aug)
        gap = abs(obj - obj_exact) / max(abs(obj_exact), 1e-300)
        worst = max(worst, gap)
    print(
        f"max relative objective gap: {worst:.6e} "
        f"({args.instances} instances, N in [2, {args.max_n}], "
        f"epsilon={args.epsilon_ot}, iters={args.sinkhorn_iters})"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except TokenSieveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
