"""Experiment harness: config, baseline/assisted runs, reports and curves.

A run reads the game manual, builds the reward table, then trains one agent
per seed twice: once without shaping (baseline) and once with it (assisted).
Per-seed learning curves go to CSV, the summary report to JSON. Identical
configs produce byte-identical curves.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import manual as manual_mod
from .agents.a2c import A2CConfig, TrainingDivergenceError
from .agents.qlearn import QConfig
from .envs import EnvConfig, make_env
from .interact import NoiseModel
from .providers import ProviderError, provider_from_spec
from .reason import RewardTable, build_table
from .trace import game_score
from .training import build_agent, train

CURVES_HEADER = "step,episode,score,aux_sum"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    game: str
    agent: str = "q"
    steps: int = 200_000
    seeds: tuple[int, ...] = (1, 2, 3)
    delayed: bool = True
    clip: bool = True
    provider: str = "lexical"
    manual: str | None = None
    source_tag: str = "custom"
    k: int = 10
    max_tokens: int = 256
    positive_reward: float = 5.0
    negative_reward: float = 5.0
    noise: dict | None = None
    episode_cap: int = 1000
    grid_width: int | None = None
    grid_height: int | None = None
    env_rewards: dict = field(default_factory=dict)
    env_params: dict = field(default_factory=dict)
    q: dict = field(default_factory=dict)
    a2c: dict = field(default_factory=dict)
    window: int = 50
    out: str = "runs/out"
    plot: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.agent not in ("q", "a2c"):
            raise ConfigError(f"agent must be 'q' or 'a2c', not {self.agent!r}")
        if self.steps < 1 or self.window < 1 or self.jobs < 1:
            raise ConfigError("steps, window and jobs must be positive")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        self.seeds = tuple(int(s) for s in self.seeds)

    @classmethod
    def from_toml(cls, path: str) -> "RunConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def env_config(self, seed: int) -> EnvConfig:
        kwargs = dict(
            game=self.game,
            seed=seed,
            episode_cap=self.episode_cap,
            delayed=self.delayed,
            rewards=dict(self.env_rewards),
            params=dict(self.env_params),
        )
        if self.grid_width is not None:
            kwargs["grid_width"] = int(self.grid_width)
        if self.grid_height is not None:
            kwargs["grid_height"] = int(self.grid_height)
        return EnvConfig(**kwargs)

    def noise_model(self, seed: int) -> NoiseModel | None:
        if not self.noise:
            return None
        base = dict(self.noise)
        base_seed = int(base.pop("seed", 0))
        # decorrelate the detector across run seeds
        return NoiseModel(seed=base_seed + 9973 * seed, **base)

    def agent_configs(self):
        q_config = QConfig(**self.q) if self.q else None
        a2c_config = A2CConfig(**self.a2c) if self.a2c else None
        return q_config, a2c_config


def packaged_manual_path(game: str) -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    path = os.path.join(here, "data", "manuals", f"{game}.txt")
    if not os.path.exists(path):
        raise ConfigError(f"no packaged manual for {game!r}")
    return path


def load_manual(config: RunConfig) -> manual_mod.ManualDoc:
    path = config.manual or packaged_manual_path(config.game)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read manual {path!r}: {exc}") from exc
    return manual_mod.normalize(raw, config.source_tag)


def context_payload(game: str, source_tag: str, ranking, contexts) -> dict:
    return {
        "game": game,
        "source_tag": source_tag,
        "keywords": [{"term": t, "score": s} for t, s in ranking.entries],
        "contexts": [
            {
                "object": c.object_class,
                "pairs": [{"q": p.question, "a": p.answer} for p in c.pairs],
                "rendered": c.rendered,
            }
            for c in contexts
        ],
    }


def final_score(scores: list[float], window: int) -> float | None:
    if not scores:
        return None
    tail = scores[-window:]
    return sum(tail) / len(tail)


def correlation(traces, window: int = 50) -> float | None:
    """Pearson correlation between windowed shaping mass and mean score.

    Terminal episodes are grouped into consecutive windows; each window
    contributes (sum of auxiliary reward, mean score). None when fewer than
    two windows exist or either side has no variance.
    """
    done = [t for t in traces if t.terminal]
    xs, ys = [], []
    for start in range(0, len(done) - window + 1, window):
        block = done[start : start + window]
        xs.append(sum(t.aux_sum for t in block))
        ys.append(sum(game_score(t) for t in block) / window)
    if len(xs) < 2:
        return None
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    if vx == 0.0 or vy == 0.0:
        return None
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return cov / math.sqrt(vx * vy)


def curves_rows(traces) -> list[tuple[int, int, float, float]]:
    rows = []
    episode = 0
    for trace in traces:
        if not trace.terminal:
            continue
        episode += 1
        rows.append((trace.end_step, episode, game_score(trace), trace.aux_sum))
    return rows


def write_curves(rows, path: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CURVES_HEADER + "\n")
        for step, episode, score, aux in rows:
            fh.write(f"{step},{episode},{score!r},{aux!r}\n")


def read_curves(path: str) -> list[tuple[int, int, float, float]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CURVES_HEADER:
            raise ValueError(f"unexpected curves header {header!r}")
        for line in fh:
            step, episode, score, aux = line.strip().split(",")
            rows.append((int(step), int(episode), float(score), float(aux)))
    return rows


def _train_one(args: tuple) -> dict:
    """One (arm, seed) training job; must stay picklable for process pools."""
    config, arm, seed, table_json = args
    table = RewardTable.from_json(table_json) if table_json is not None else None
    entry = {"seed": seed, "arm": arm}
    try:
        env = make_env(config.env_config(seed))
        q_config, a2c_config = config.agent_configs()
        agent = build_agent(env, config.agent, seed, q_config, a2c_config)
        traces = train(
            env,
            agent,
            steps=config.steps,
            table=table,
            noise=config.noise_model(seed) if table is not None else None,
            clip=config.clip,
        )
        rows = curves_rows(traces)
        scores = [r[2] for r in rows]
        entry["episodes"] = len(rows)
        entry["steps"] = config.steps
        entry["final_score"] = final_score(scores, config.window)
        entry["correlation"] = correlation(traces, config.window)
        entry["rows"] = rows
    except TrainingDivergenceError as exc:
        entry["error"] = f"divergence: {exc}"
    except Exception as exc:
        entry["error"] = f"{type(exc).__name__}: {exc}"
    return entry


def run(config: RunConfig) -> dict:
    """Full experiment; returns the report dict and writes all artifacts."""
    provider = provider_from_spec(config.provider)
    doc = load_manual(config)
    ranking, contexts = manual_mod.read_contexts(provider, doc, config.k, config.max_tokens)
    table = build_table(provider, contexts, config.positive_reward, config.negative_reward)

    os.makedirs(config.out, exist_ok=True)
    with open(os.path.join(config.out, "context.json"), "w", encoding="utf-8") as fh:
        json.dump(context_payload(config.game, doc.source_tag, ranking, contexts), fh, indent=2)
        fh.write("\n")
    table.save(os.path.join(config.out, "rewards.json"))

    jobs = []
    for arm, table_json in (("baseline", None), ("assisted", table.to_json())):
        for seed in config.seeds:
            jobs.append((config, arm, seed, table_json))
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            entries = list(pool.map(_train_one, jobs))
    else:
        entries = [_train_one(job) for job in jobs]

    arms: dict[str, dict] = {}
    for entry in entries:
        arm = entry.pop("arm")
        seed = entry["seed"]
        rows = entry.pop("rows", None)
        csv_path = os.path.join(config.out, arm, f"seed_{seed}", "curves.csv")
        if rows is not None:
            write_curves(rows, csv_path)
            entry["curves_csv"] = os.path.relpath(csv_path, config.out)
        arms.setdefault(arm, {"seeds": []})["seeds"].append(entry)

    for arm_report in arms.values():
        finals = [e["final_score"] for e in arm_report["seeds"] if e.get("final_score") is not None]
        arm_report["final_score_mean"] = sum(finals) / len(finals) if finals else None
        arm_report["final_score_std"] = statistics.pstdev(finals) if finals else None
        arm_report["failures"] = [
            {"seed": e["seed"], "error": e["error"]} for e in arm_report["seeds"] if "error" in e
        ]

    report = {
        "schema": 1,
        "config": config_snapshot(config),
        "keywords": [{"term": t, "score": s} for t, s in ranking.entries],
        "rewards": table.to_json(),
        "arms": arms,
        "comparison": compare_arms(arms, config),
    }
    if config.plot:
        plot_path = os.path.join(config.out, "plot.svg")
        try:
            write_plot(arms, plot_path, config)
            report["plot"] = os.path.basename(plot_path)
        except Exception as exc:  # plotting must never sink a finished run
            report["plot_error"] = f"{type(exc).__name__}: {exc}"
    with open(os.path.join(config.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return report


def config_snapshot(config: RunConfig) -> dict:
    snap = dataclasses.asdict(config)
    snap["seeds"] = list(config.seeds)
    return snap


def _reach_step(rows, target: float, window: int) -> int | None:
    """First end-of-episode step where the trailing-window mean score
    reaches the target."""
    scores = []
    for step, _, score, _ in rows:
        scores.append(score)
        tail = scores[-window:]
        if sum(tail) / len(tail) >= target - 1e-12:
            return step
    return None


def speedup_from_rows(assisted_rows_by_seed, target: float | None, baseline_steps: int, window: int):
    if target is None:
        return None
    reach = []
    for rows in assisted_rows_by_seed:
        step = _reach_step(rows, target, window)
        if step is None:
            return None
        reach.append(step)
    if not reach:
        return None
    return baseline_steps / (sum(reach) / len(reach))


def compare_arms(arms: dict, config: RunConfig) -> dict:
    base = arms.get("baseline", {})
    assisted = arms.get("assisted", {})
    mean_b = base.get("final_score_mean")
    mean_a = assisted.get("final_score_mean")
    out = {"baseline_mean": mean_b, "assisted_mean": mean_a}
    if mean_a is not None and mean_b is not None and mean_b != 0:
        out["improvement_pct"] = 100.0 * (mean_a - mean_b) / abs(mean_b)
    else:
        out["improvement_pct"] = None
    rows_by_seed = []
    for entry in assisted.get("seeds", []):
        rows = entry.get("rows")
        if rows is None and "curves_csv" in entry:
            rows = read_curves(os.path.join(config.out, entry["curves_csv"]))
        rows_by_seed.append(rows or [])
    out["speedup"] = speedup_from_rows(rows_by_seed, mean_b, config.steps, config.window)
    return out


def compare_reports(report_a: dict, base_a: str, report_b: dict, base_b: str,
                    arm_a: str = "assisted", arm_b: str = "baseline") -> dict:
    """Cross-report comparison; both must cover the same game and step budget."""
    cfg_a, cfg_b = report_a["config"], report_b["config"]
    if cfg_a["game"] != cfg_b["game"]:
        raise ConfigError("reports cover different games")
    if cfg_a["steps"] != cfg_b["steps"]:
        raise ConfigError("reports use different step budgets")
    side_a = report_a["arms"][arm_a]
    side_b = report_b["arms"][arm_b]
    mean_a = side_a.get("final_score_mean")
    mean_b = side_b.get("final_score_mean")
    rows_by_seed = [
        read_curves(os.path.join(base_a, entry["curves_csv"]))
        for entry in side_a["seeds"]
        if "curves_csv" in entry
    ]
    window = cfg_a.get("window", 50)
    summary = {
        "game": cfg_a["game"],
        "steps": cfg_a["steps"],
        "arm_a": arm_a,
        "arm_b": arm_b,
        "mean_a": mean_a,
        "mean_b": mean_b,
        "improvement_pct": (
            100.0 * (mean_a - mean_b) / abs(mean_b)
            if mean_a is not None and mean_b is not None and mean_b != 0
            else None
        ),
        "speedup": speedup_from_rows(rows_by_seed, mean_b, cfg_b["steps"], window),
    }
    return summary


def write_plot(arms: dict, path: str, config: RunConfig) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    colors = {"baseline": "tab:gray", "assisted": "tab:blue"}
    for arm, arm_report in sorted(arms.items()):
        for entry in arm_report["seeds"]:
            rows = entry.get("rows")
            if rows is None and "curves_csv" in entry:
                rows = read_curves(os.path.join(config.out, entry["curves_csv"]))
            if not rows:
                continue
            steps = [r[0] for r in rows]
            scores = _smooth([r[2] for r in rows], config.window)
            ax.plot(steps, scores, color=colors.get(arm, "tab:red"),
                    alpha=0.7, label=f"{arm} seed {entry['seed']}")
    ax.set_xlabel("environment steps")
    ax.set_ylabel(f"score (trailing {config.window}-episode mean)")
    ax.set_title(f"{config.game}: baseline vs assisted")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _smooth(values, window):
    out = []
    for i in range(len(values)):
        tail = values[max(0, i - window + 1) : i + 1]
        out.append(sum(tail) / len(tail))
    return out
