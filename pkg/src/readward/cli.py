"""Command line front end: read, reason, train, run, compare.

Exit codes: 0 success, 2 configuration problems, 3 provider failures,
4 training divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from . import harness
from . import manual as manual_mod
from .agents.a2c import TrainingDivergenceError
from .envs import GAMES, make_env
from .harness import ConfigError, RunConfig
from .interact import NoiseModel
from .manual import ContextBundle, QAPair
from .providers import ProviderError, provider_from_spec
from .reason import RewardTable, build_table
from .trace import game_score
from .training import build_agent, train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROVIDER = 3
EXIT_DIVERGENCE = 4


def parse_noise(spec: str) -> dict:
    """Parse 'miss=0.1,flip=0.2,merge=2[,seed=7]' into NoiseModel kwargs."""
    names = {"miss": "miss_prob", "flip": "flip_prob", "merge": "merge_dist", "seed": "seed"}
    out = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        if key not in names or not value:
            raise ConfigError(f"bad noise component {part!r}")
        out[names[key]] = int(value) if key in ("merge", "seed") else float(value)
    return out


def add_provider_arg(parser):
    parser.add_argument(
        "--provider",
        default="lexical",
        help="'lexical', 'fixture:<path>' or 'http:<url>' (READWARD_QA_URL overrides the URL)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="readward", description=__doc__)
    parser.add_argument("--version", action="version", version=f"readward {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_read = sub.add_parser("read", help="rank keywords and build QA context bundles")
    p_read.add_argument("--game", required=True, choices=GAMES)
    p_read.add_argument("--manual", help="manual text file (default: packaged manual)")
    p_read.add_argument("--source-tag", default="custom", choices=manual_mod.SOURCE_TAGS)
    p_read.add_argument("--k", type=int, default=10)
    p_read.add_argument("--max-tokens", type=int, default=256)
    p_read.add_argument("--out", default="context.json")
    add_provider_arg(p_read)

    p_reason = sub.add_parser("reason", help="turn context bundles into a reward table")
    p_reason.add_argument("--context", required=True)
    p_reason.add_argument("--rp", type=float, default=5.0, help="positive reward magnitude")
    p_reason.add_argument("--rn", type=float, default=5.0, help="negative reward magnitude")
    p_reason.add_argument("--cache-dir", help="verdict cache directory")
    p_reason.add_argument("--out", default="rewards.json")
    add_provider_arg(p_reason)

    p_train = sub.add_parser("train", help="train a single agent on one seed")
    p_train.add_argument("--game", required=True, choices=GAMES)
    p_train.add_argument("--agent", default="q", choices=("q", "a2c"))
    p_train.add_argument("--seed", type=int, default=1)
    p_train.add_argument("--steps", type=int, default=100_000)
    p_train.add_argument("--delayed", action="store_true", default=True)
    p_train.add_argument("--native", dest="delayed", action="store_false",
                         help="use the native per-step reward schedule")
    p_train.add_argument("--no-clip", dest="clip", action="store_false", default=True)
    p_train.add_argument("--baseline", action="store_true", help="train without shaping")
    p_train.add_argument("--rewards", help="rewards.json from a reason step")
    p_train.add_argument("--manual", help="manual for the read step (default: packaged)")
    p_train.add_argument("--noise", help="detector noise, e.g. miss=0.1,flip=0.2,merge=2")
    p_train.add_argument("--episode-cap", type=int, default=1000)
    p_train.add_argument("--grid", help="grid size as WxH cells")
    p_train.add_argument("--log-events", help="write interaction events to this JSONL file")
    p_train.add_argument("--dump-frames", help="write each frame as a PGM into this directory")
    p_train.add_argument("--window", type=int, default=50)
    p_train.add_argument("--out", default="train_out")
    add_provider_arg(p_train)

    p_run = sub.add_parser("run", help="full baseline/assisted experiment from a config")
    p_run.add_argument("--config", help="TOML run config")
    p_run.add_argument("--game", choices=GAMES)
    p_run.add_argument("--agent", choices=("q", "a2c"))
    p_run.add_argument("--steps", type=int)
    p_run.add_argument("--seeds", help="comma-separated seed list")
    p_run.add_argument("--manual")
    p_run.add_argument("--noise")
    p_run.add_argument("--out")
    p_run.add_argument("--plot", action="store_true", default=None)
    p_run.add_argument("--jobs", type=int)
    add_provider_arg(p_run)
    p_run.set_defaults(provider=None)

    p_cmp = sub.add_parser("compare", help="compare two run reports (or arms of one)")
    p_cmp.add_argument("report_a")
    p_cmp.add_argument("report_b", nargs="?")
    p_cmp.add_argument("--arm-a", default="assisted")
    p_cmp.add_argument("--arm-b", default="baseline")
    p_cmp.add_argument("--json", action="store_true", help="print the summary as JSON")
    return parser


def load_doc(game: str, manual_path: str | None, source_tag: str) -> manual_mod.ManualDoc:
    path = manual_path or harness.packaged_manual_path(game)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read manual {path!r}: {exc}") from exc
    return manual_mod.normalize(raw, source_tag)


def cmd_read(args) -> int:
    provider = provider_from_spec(args.provider)
    doc = load_doc(args.game, args.manual, args.source_tag)
    ranking, contexts = manual_mod.read_contexts(provider, doc, args.k, args.max_tokens)
    payload = harness.context_payload(args.game, doc.source_tag, ranking, contexts)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print(f"read: {len(ranking.entries)} keywords, {len(contexts)} contexts -> {args.out}")
    if ranking.short:
        print("read: note, manual yielded fewer candidate keywords than requested")
    return EXIT_OK


def contexts_from_payload(payload: dict) -> list[ContextBundle]:
    contexts = []
    for item in payload["contexts"]:
        pairs = tuple(QAPair(p["q"], p["a"]) for p in item["pairs"])
        contexts.append(ContextBundle(item["object"], pairs, item["rendered"]))
    return contexts


def cmd_reason(args) -> int:
    provider = provider_from_spec(args.provider)
    try:
        with open(args.context, encoding="utf-8") as fh:
            payload = json.load(fh)
        contexts = contexts_from_payload(payload)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load context file {args.context!r}: {exc}") from exc
    table = build_table(provider, contexts, args.rp, args.rn, cache_dir=args.cache_dir)
    table.save(args.out)
    for rule in sorted(table.rules.values(), key=lambda r: r.object_class):
        print(f"reason: {rule.object_class}: {rule.verdict} -> {rule.reward:+g}")
    print(f"reason: wrote {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    grid = {}
    if args.grid:
        try:
            w, h = args.grid.lower().split("x")
            grid = {"grid_width": int(w), "grid_height": int(h)}
        except ValueError as exc:
            raise ConfigError(f"bad --grid {args.grid!r}, expected WxH") from exc
    table = None
    if args.rewards and args.baseline:
        raise ConfigError("--baseline and --rewards are mutually exclusive")
    if args.rewards:
        table = RewardTable.load(args.rewards)
    elif not args.baseline:
        provider = provider_from_spec(args.provider)
        doc = load_doc(args.game, args.manual, "custom")
        _, contexts = manual_mod.read_contexts(provider, doc)
        table = build_table(provider, contexts)
    noise = NoiseModel(**parse_noise(args.noise)) if args.noise else None
    from .envs import EnvConfig

    env = make_env(
        EnvConfig(
            game=args.game,
            seed=args.seed,
            episode_cap=args.episode_cap,
            delayed=args.delayed,
            **grid,
        )
    )
    agent = build_agent(env, args.agent, args.seed)
    os.makedirs(args.out, exist_ok=True)
    traces = train(
        env,
        agent,
        steps=args.steps,
        table=table,
        noise=noise,
        clip=args.clip,
        event_log=args.log_events,
        frame_dir=args.dump_frames,
    )
    rows = harness.curves_rows(traces)
    harness.write_curves(rows, os.path.join(args.out, "curves.csv"))
    checkpoint = {
        "version": 1,
        "game": args.game,
        "agent": agent.kind,
        "seed": args.seed,
        "state": agent.state_dict(),
    }
    with open(os.path.join(args.out, "checkpoint.json"), "w", encoding="utf-8") as fh:
        json.dump(checkpoint, fh)
    scores = [r[2] for r in rows]
    final = harness.final_score(scores, args.window)
    shaped = "baseline" if table is None else "assisted"
    print(
        f"train: {args.game} {agent.kind} seed {args.seed} ({shaped}): "
        f"{len(rows)} episodes, final score {final if final is None else round(final, 3)}"
    )
    return EXIT_OK


def cmd_run(args) -> int:
    if args.config:
        config = RunConfig.from_toml(args.config)
    else:
        if not args.game:
            raise ConfigError("either --config or --game is required")
        config = RunConfig(game=args.game)
    overrides = {
        "game": args.game,
        "agent": args.agent,
        "steps": args.steps,
        "manual": args.manual,
        "out": args.out,
        "plot": args.plot,
        "jobs": args.jobs,
        "provider": args.provider,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    if args.seeds is not None:
        config.seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
    if args.noise is not None:
        config.noise = parse_noise(args.noise)
    config.__post_init__()
    report = harness.run(config)
    comparison = report["comparison"]
    print(f"run: report -> {os.path.join(config.out, 'report.json')}")
    print(
        "run: baseline mean {b}, assisted mean {a}, improvement {i}, speedup {s}".format(
            b=_fmt(comparison["baseline_mean"]),
            a=_fmt(comparison["assisted_mean"]),
            i=_fmt(comparison["improvement_pct"], "%"),
            s=_fmt(comparison["speedup"], "x"),
        )
    )
    for arm, arm_report in report["arms"].items():
        for failure in arm_report["failures"]:
            print(f"run: {arm} seed {failure['seed']} failed: {failure['error']}")
    if any("divergence" in f["error"] for a in report["arms"].values() for f in a["failures"]):
        return EXIT_DIVERGENCE
    return EXIT_OK


def _fmt(value, suffix: str = "") -> str:
    if value is None:
        return "n/a"
    return f"{value:.3f}{suffix}"


def cmd_compare(args) -> int:
    def load(path):
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh), os.path.dirname(os.path.abspath(path))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load report {path!r}: {exc}") from exc

    report_a, base_a = load(args.report_a)
    if args.report_b:
        report_b, base_b = load(args.report_b)
    else:
        report_b, base_b = report_a, base_a
    summary = harness.compare_reports(
        report_a, base_a, report_b, base_b, arm_a=args.arm_a, arm_b=args.arm_b
    )
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(
            f"compare: {summary['game']} over {summary['steps']} steps: "
            f"{args.arm_a} {_fmt(summary['mean_a'])} vs {args.arm_b} {_fmt(summary['mean_b'])}"
        )
        print(
            f"compare: improvement {_fmt(summary['improvement_pct'], '%')}, "
            f"speedup {_fmt(summary['speedup'], 'x')}"
        )
    return EXIT_OK


COMMANDS = {
    "read": cmd_read,
    "reason": cmd_reason,
    "train": cmd_train,
    "run": cmd_run,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, manual_mod.EmptyManualError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except TrainingDivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
