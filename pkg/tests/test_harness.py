"""Run configuration, learning-curve plumbing and the experiment harness."""

from __future__ import annotations

import json
import math
import statistics

import numpy as np
import pytest

from readward.envs import EnvConfig, make_env, read_pgm
from readward.harness import (
    ConfigError,
    RunConfig,
    compare_arms,
    compare_reports,
    correlation,
    curves_rows,
    final_score,
    packaged_manual_path,
    read_curves,
    run,
    speedup_from_rows,
    write_curves,
    _reach_step,
)
from readward.interact import NoiseModel
from readward.reason import RewardRule, RewardTable
from readward.trace import EpisodeTrace, IncompleteEpisodeError, game_score
from readward.training import build_agent, train


def make_trace(env_rewards, aux_rewards=None, terminal=True, start_step=0):
    t = EpisodeTrace(game="dot_maze", seed=0, start_step=start_step)
    t.actions = [0] * len(env_rewards)
    t.env_rewards = list(env_rewards)
    t.aux_rewards = list(aux_rewards if aux_rewards is not None else [0.0] * len(env_rewards))
    t.terminal = terminal
    return t


class TestRunConfig:
    def test_defaults_and_seed_coercion(self):
        cfg = RunConfig(game="dot_maze", seeds=[1, 2])
        assert cfg.seeds == (1, 2)
        assert cfg.agent == "q"
        assert cfg.delayed and cfg.clip

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(agent="dqn"),
            dict(steps=0),
            dict(window=0),
            dict(jobs=0),
            dict(seeds=()),
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigError):
            RunConfig(game="dot_maze", **kwargs)

    def test_from_toml(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(
            'game = "dot_maze"\n'
            "steps = 500\n"
            "seeds = [1, 2]\n"
            "window = 5\n"
            "[q]\n"
            "alpha = 0.3\n"
            "[noise]\n"
            "miss_prob = 0.1\n"
            "seed = 4\n"
        )
        cfg = RunConfig.from_toml(str(path))
        assert cfg.steps == 500 and cfg.seeds == (1, 2)
        assert cfg.q == {"alpha": 0.3}
        assert cfg.noise == {"miss_prob": 0.1, "seed": 4}
        q_config, a2c_config = cfg.agent_configs()
        assert q_config.alpha == 0.3 and a2c_config is None

    def test_from_toml_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('game = "dot_maze"\nlearning_rate = 0.1\n')
        with pytest.raises(ConfigError, match="learning_rate"):
            RunConfig.from_toml(str(path))

    def test_from_toml_requires_game(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("steps = 10\n")
        with pytest.raises(ConfigError):
            RunConfig.from_toml(str(path))

    def test_env_config_carries_overrides(self):
        cfg = RunConfig(
            game="dot_maze",
            episode_cap=77,
            grid_width=12,
            grid_height=14,
            env_params={"ghosts": 0},
            delayed=False,
        )
        env_cfg = cfg.env_config(9)
        assert env_cfg.seed == 9
        assert env_cfg.episode_cap == 77
        assert (env_cfg.grid_width, env_cfg.grid_height) == (12, 14)
        assert env_cfg.params == {"ghosts": 0}
        assert env_cfg.delayed is False

    def test_noise_model_absent_by_default(self):
        cfg = RunConfig(game="dot_maze")
        assert cfg.noise_model(1) is None

    def test_noise_model_decorrelates_seeds(self):
        cfg = RunConfig(game="dot_maze", noise={"miss_prob": 0.1, "seed": 5})
        m1, m2 = cfg.noise_model(1), cfg.noise_model(2)
        assert isinstance(m1, NoiseModel)
        assert m1.miss_prob == m2.miss_prob == 0.1
        assert m1.seed == 5 + 9973
        assert m2.seed == 5 + 2 * 9973


class TestCurvesIO:
    def test_round_trip_preserves_floats(self, tmp_path):
        rows = [(10, 1, 0.1 + 0.2, -5.0), (40, 2, 1 / 3, 0.0), (90, 3, -2.5, 12.0)]
        path = tmp_path / "deep" / "curves.csv"
        write_curves(rows, str(path))
        assert read_curves(str(path)) == rows

    def test_header_is_stable(self, tmp_path):
        path = tmp_path / "curves.csv"
        write_curves([], str(path))
        assert path.read_text().splitlines()[0] == "step,episode,score,aux_sum"

    def test_read_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_curves(str(path))

    def test_curves_rows_skip_unfinished_episode(self):
        traces = [
            make_trace([1.0, 0.0], [0.0, 5.0], start_step=0),
            make_trace([0.0, 1.0], [5.0, 0.0], start_step=2),
            make_trace([1.0], terminal=False, start_step=4),
        ]
        rows = curves_rows(traces)
        assert rows == [(2, 1, 1.0, 5.0), (4, 2, 1.0, 5.0)]


class TestScoresAndCorrelation:
    def test_game_score_requires_terminal(self):
        with pytest.raises(IncompleteEpisodeError):
            game_score(make_trace([1.0], terminal=False))
        assert game_score(make_trace([1.0, -0.5, 2.0])) == pytest.approx(2.5)

    def test_final_score(self):
        assert final_score([], 3) is None
        assert final_score([1.0, 2.0, 3.0, 4.0], 2) == pytest.approx(3.5)
        assert final_score([1.0, 2.0], 10) == pytest.approx(1.5)

    def test_correlation_hand_oracle(self):
        scores = [1.0, 3.0, 2.0, 6.0, 5.0, 10.0]
        auxes = [0.0, 1.0, 2.0, 2.0, 3.0, 4.0]
        traces = [make_trace([s], [a]) for s, a in zip(scores, auxes)]
        xs = [1.0, 4.0, 7.0]  # window aux sums
        ys = [2.0, 4.0, 7.5]  # window mean scores
        expected = statistics.correlation(xs, ys)
        assert correlation(traces, window=2) == pytest.approx(expected)

    def test_correlation_needs_two_windows(self):
        traces = [make_trace([1.0], [1.0]) for _ in range(3)]
        assert correlation(traces, window=2) is None

    def test_correlation_none_without_variance(self):
        scores = [1.0, 3.0, 2.0, 6.0]
        traces = [make_trace([s], [2.0]) for s in scores]
        assert correlation(traces, window=2) is None

    def test_correlation_ignores_unfinished_episodes(self):
        scores = [1.0, 3.0, 2.0, 6.0, 5.0, 10.0]
        auxes = [0.0, 1.0, 2.0, 2.0, 3.0, 4.0]
        traces = [make_trace([s], [a]) for s, a in zip(scores, auxes)]
        with_stub = traces + [make_trace([99.0], [99.0], terminal=False)]
        assert correlation(with_stub, window=2) == pytest.approx(correlation(traces, window=2))


RAMP_ROWS = [(100, 1, 0.0, 0.0), (200, 2, 0.0, 0.0), (300, 3, 10.0, 0.0), (400, 4, 10.0, 0.0)]


class TestSpeedup:
    def test_reach_step_uses_trailing_window(self):
        assert _reach_step(RAMP_ROWS, 5.0, window=2) == 300
        assert _reach_step(RAMP_ROWS, 10.0, window=2) == 400
        assert _reach_step(RAMP_ROWS, 10.5, window=2) is None
        assert _reach_step(RAMP_ROWS, 0.0, window=2) == 100

    def test_speedup_halved_steps_doubles(self):
        # both seeds reach the target by a mean of 400 steps against an
        # 800-step budget, so assistance runs twice as fast
        fast = [(300, 1, 10.0, 0.0)]
        slow = [(250, 1, 0.0, 0.0), (500, 2, 10.0, 0.0)]
        assert speedup_from_rows([fast, slow], 10.0, 800, window=1) == pytest.approx(2.0)

    def test_speedup_none_when_any_seed_misses(self):
        assert speedup_from_rows([RAMP_ROWS, [(50, 1, 0.0, 0.0)]], 5.0, 800, 2) is None
        assert speedup_from_rows([RAMP_ROWS], None, 800, 2) is None


class TestCompare:
    def test_compare_arms_improvement_and_speedup(self, tmp_path):
        cfg = RunConfig(game="dot_maze", steps=800, window=2, out=str(tmp_path))
        arms = {
            "baseline": {"final_score_mean": 5.0, "seeds": []},
            "assisted": {"final_score_mean": 10.0, "seeds": [{"seed": 1, "rows": RAMP_ROWS}]},
        }
        out = compare_arms(arms, cfg)
        assert out["baseline_mean"] == 5.0 and out["assisted_mean"] == 10.0
        assert out["improvement_pct"] == pytest.approx(100.0)
        assert out["speedup"] == pytest.approx(800 / 300)

    def test_compare_arms_handles_missing_means(self):
        cfg = RunConfig(game="dot_maze")
        out = compare_arms({"baseline": {"seeds": []}, "assisted": {"seeds": []}}, cfg)
        assert out["improvement_pct"] is None and out["speedup"] is None

    @staticmethod
    def fake_report(base, game="dot_maze", steps=800, mean=5.0):
        write_curves(RAMP_ROWS, str(base / "assisted" / "seed_1" / "curves.csv"))
        arm = {
            "final_score_mean": mean,
            "seeds": [{"seed": 1, "curves_csv": "assisted/seed_1/curves.csv"}],
        }
        return {
            "config": {"game": game, "steps": steps, "window": 2},
            "arms": {"assisted": arm, "baseline": dict(arm)},
        }

    def test_compare_reports(self, tmp_path):
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        ra = self.fake_report(dir_a, mean=10.0)
        rb = self.fake_report(dir_b, mean=5.0)
        summary = compare_reports(ra, str(dir_a), rb, str(dir_b))
        assert summary["mean_a"] == 10.0 and summary["mean_b"] == 5.0
        assert summary["improvement_pct"] == pytest.approx(100.0)
        assert summary["speedup"] == pytest.approx(800 / 300)

    def test_compare_reports_rejects_mismatches(self, tmp_path):
        ra = self.fake_report(tmp_path / "a")
        with pytest.raises(ConfigError):
            compare_reports(ra, ".", self.fake_report(tmp_path / "b", game="ski_run"), ".")
        with pytest.raises(ConfigError):
            compare_reports(ra, ".", self.fake_report(tmp_path / "c", steps=999), ".")


def tiny_env(seed=3, delayed=True, cap=40):
    return make_env(
        EnvConfig(
            game="dot_maze",
            seed=seed,
            episode_cap=cap,
            delayed=delayed,
            grid_width=12,
            grid_height=12,
            params={"ghosts": 0, "pellets": 10},
        )
    )


def shaping_table():
    return RewardTable(
        [RewardRule("pellet", "Yes", 5.0), RewardRule("ghost", "No", -5.0)]
    )


class SpyAgent:
    """Wraps a real agent and records every reward it is trained on."""

    def __init__(self, inner):
        self.inner = inner
        self.encoder = inner.encoder
        self.rewards: list[float] = []

    def act(self, features):
        return self.inner.act(features)

    def observe(self, features, action, reward, next_features, terminal):
        self.rewards.append(reward)
        self.inner.observe(features, action, reward, next_features, terminal)


class TestTrainLoop:
    def test_traces_cover_budget_contiguously(self):
        env = tiny_env()
        agent = build_agent(env, "q", seed=0)
        traces = train(env, agent, steps=200)
        assert sum(len(t) for t in traces) == 200
        assert all(t.terminal for t in traces[:-1])
        for prev, nxt in zip(traces, traces[1:]):
            assert nxt.start_step == prev.end_step
        assert all(len(t.env_rewards) == len(t.actions) == len(t.aux_rewards) for t in traces)

    def test_baseline_has_no_shaping(self):
        env = tiny_env()
        agent = build_agent(env, "q", seed=0)
        traces = train(env, agent, steps=200)
        assert all(a == 0.0 for t in traces for a in t.aux_rewards)
        assert all(not t.events for t in traces)

    def test_assisted_pays_table_rewards(self):
        env = tiny_env()
        agent = build_agent(env, "q", seed=0)
        traces = train(env, agent, steps=300, table=shaping_table())
        events = [e for t in traces for e in t.events]
        assert events, "expected at least one pellet contact in 300 steps"
        assert all(e.object_class == "pellet" for e in events)
        total_aux = sum(t.aux_sum for t in traces)
        assert total_aux == pytest.approx(5.0 * len(events))

    def test_clip_bounds_training_signal(self):
        env = tiny_env()
        spy = SpyAgent(build_agent(env, "q", seed=0))
        train(env, spy, steps=300, table=shaping_table(), clip=True)
        assert all(-1.0 <= r <= 1.0 for r in spy.rewards)
        assert any(r == 1.0 for r in spy.rewards)

    def test_unclipped_signal_exceeds_band(self):
        env = tiny_env()
        spy = SpyAgent(build_agent(env, "q", seed=0))
        train(env, spy, steps=300, table=shaping_table(), clip=False)
        assert any(r > 1.0 for r in spy.rewards)

    def test_delayed_scores_match_native_sum(self):
        traces = train(tiny_env(), build_agent(tiny_env(), "q", seed=1), steps=200)
        for t in traces:
            if t.terminal:
                # all reward arrives at the terminal step under the delay
                assert all(r == 0.0 for r in t.env_rewards[:-1])

    def test_determinism(self):
        def once():
            env = tiny_env()
            agent = build_agent(env, "q", seed=2)
            return curves_rows(train(env, agent, steps=400, table=shaping_table()))

        assert once() == once()

    def test_event_log_jsonl(self, tmp_path):
        env = tiny_env()
        agent = build_agent(env, "q", seed=0)
        path = tmp_path / "logs" / "events.jsonl"
        traces = train(env, agent, steps=300, table=shaping_table(), event_log=str(path))
        lines = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(lines) == sum(len(t.events) for t in traces)
        assert all(set(line) == {"step", "object_class", "track_id", "reward"} for line in lines)
        assert all(line["reward"] == 5.0 for line in lines if line["object_class"] == "pellet")

    def test_frame_dump(self, tmp_path):
        env = tiny_env()
        agent = build_agent(env, "q", seed=0)
        train(env, agent, steps=10, frame_dir=str(tmp_path))
        files = sorted(tmp_path.iterdir())
        assert [f.name for f in files] == [f"frame_{i:06d}.pgm" for i in range(10)]
        assert read_pgm(str(files[0])).shape == (12, 12)

    def test_divergence_propagates(self):
        env = tiny_env()
        agent = build_agent(env, "a2c", seed=0)
        agent.params["b2"][:] = np.nan
        from readward.agents import TrainingDivergenceError

        with pytest.raises(TrainingDivergenceError):
            train(env, agent, steps=20)

    def test_build_agent_kinds(self):
        env = tiny_env()
        assert build_agent(env, "q", seed=0).kind == "q"
        assert build_agent(env, "a2c", seed=0).kind == "a2c"
        with pytest.raises(ValueError):
            build_agent(env, "sarsa", seed=0)


class TestRunEndToEnd:
    @staticmethod
    def tiny_config(out, seeds=(1, 2)):
        return RunConfig(
            game="dot_maze",
            agent="q",
            steps=300,
            seeds=seeds,
            window=2,
            episode_cap=30,
            grid_width=12,
            grid_height=12,
            env_params={"ghosts": 0, "pellets": 8},
            k=6,
            max_tokens=64,
            out=str(out),
        )

    def test_report_and_artifacts(self, tmp_path):
        cfg = self.tiny_config(tmp_path / "out")
        report = run(cfg)
        assert report["schema"] == 1
        assert report["config"]["seeds"] == [1, 2]
        assert report["keywords"], "keyword ranking missing from report"
        assert report["rewards"]["rules"], "reward table missing from report"
        for arm in ("baseline", "assisted"):
            seeds = report["arms"][arm]["seeds"]
            assert [e["seed"] for e in seeds] == [1, 2]
            assert all("error" not in e for e in seeds)
            assert report["arms"][arm]["failures"] == []
            assert report["arms"][arm]["final_score_mean"] is not None
        assert set(report["comparison"]) >= {
            "baseline_mean",
            "assisted_mean",
            "improvement_pct",
            "speedup",
        }
        out = tmp_path / "out"
        for name in ("report.json", "context.json", "rewards.json"):
            assert (out / name).exists()
        for arm in ("baseline", "assisted"):
            for seed in (1, 2):
                rows = read_curves(str(out / arm / f"seed_{seed}" / "curves.csv"))
                assert rows, "no finished episodes recorded"
                if arm == "baseline":
                    assert all(r[3] == 0.0 for r in rows)
        assert json.loads((out / "report.json").read_text()) == json.loads(
            json.dumps(report)
        )

    def test_runs_are_byte_identical(self, tmp_path):
        run(self.tiny_config(tmp_path / "one", seeds=(1,)))
        run(self.tiny_config(tmp_path / "two", seeds=(1,)))
        for arm in ("baseline", "assisted"):
            a = (tmp_path / "one" / arm / "seed_1" / "curves.csv").read_bytes()
            b = (tmp_path / "two" / arm / "seed_1" / "curves.csv").read_bytes()
            assert a == b
        assert (tmp_path / "one" / "context.json").read_bytes() == (
            tmp_path / "two" / "context.json"
        ).read_bytes()

    def test_packaged_manuals_exist_for_all_games(self):
        for game in ("dot_maze", "ski_run", "brick_wall"):
            assert packaged_manual_path(game)
        with pytest.raises(ConfigError):
            packaged_manual_path("pong")
