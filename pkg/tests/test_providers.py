import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from readward.manual import normalize, read_contexts
from readward.providers import (
    AbstainError,
    ChoiceQuery,
    ChoiceScores,
    ExtractiveQuery,
    FixtureMissError,
    FixtureProvider,
    HTTPProvider,
    LexicalProvider,
    ProviderError,
    RecordingProvider,
    TransportError,
    content_words,
    provider_from_spec,
    sha256_text,
    split_sentences,
)


class TestTokenizing:
    def test_content_words_drop_stopwords(self):
        assert content_words("The ghost is in the maze") == {"ghost", "maze"}

    def test_split_sentences(self):
        text = "One here. Two there! Three?  Four"
        assert split_sentences(text) == ["One here.", "Two there!", "Three?", "Four"]


class TestLexicalAnswer:
    def test_best_overlap_sentence(self, lexical):
        q = ExtractiveQuery(
            "Dogs bark loudly. Cats purr at home. Fish swim.",
            "What do cats do at home?",
        )
        assert lexical.answer(q) == "Cats purr at home."

    def test_overlap_threshold_boundary(self, lexical):
        passage = "The zebra sleeps."
        at_threshold = ExtractiveQuery(passage, "zebra apple banana cactus dragon eagle")
        below = ExtractiveQuery(passage, "zebra apple banana cactus dragon eagle falcon")
        assert lexical.answer(at_threshold) == "The zebra sleeps."  # 1/6 >= 0.15
        assert lexical.answer(below) == ""  # 1/7 < 0.15

    def test_earlier_sentence_wins_tie(self, lexical):
        q = ExtractiveQuery(
            "The red ball rolls. A red ball bounces.", "where is the red ball"
        )
        assert lexical.answer(q) == "The red ball rolls."

    def test_answer_is_single_line(self, lexical):
        q = ExtractiveQuery("HEADING\n\nThe red ball rolls far.", "where is the red ball")
        answer = lexical.answer(q)
        assert "\n" not in answer
        assert "red ball rolls" in answer

    def test_no_content_words(self, lexical):
        assert lexical.answer(ExtractiveQuery("Anything here.", "is it the of a")) == ""


def prompt_of(*pairs, obj="ghost"):
    lines = [f"Question: {q} Answer: {a}" for q, a in pairs]
    lines.append(f"Question: Should you hit a {obj} if you want to win? Answer: ")
    return "\n".join(lines)


class TestLexicalScores:
    def test_cue_counting_with_object_weight(self, lexical):
        prompt = prompt_of(
            ("What is the objective of the game?", "score points and win."),
            ("What happens when the player hit a ghost?", "you lose a life and the player dies."),
        )
        scored = lexical.score_choices(ChoiceQuery(prompt, ("Yes", "No")))
        assert scored.scores == (3.0, 4.0)  # object-pair cues count double

    def test_tie_is_representable(self, lexical):
        prompt = prompt_of(
            ("How to succeed in the game?", "win win."),
            ("What happens when the player hit a wall?", "crash."),
            obj="wall",
        )
        scored = lexical.score_choices(ChoiceQuery(prompt, ("Yes", "No")))
        assert scored.scores == (2.0, 2.0)

    def test_question_text_never_scores(self, lexical):
        # "win" in the decision question itself must not leak into Yes
        prompt = prompt_of(("Who are your enemies?", "the quiet fog."))
        with pytest.raises(AbstainError):
            lexical.score_choices(ChoiceQuery(prompt, ("Yes", "No")))

    def test_only_yes_no_supported(self, lexical):
        with pytest.raises(ValueError):
            lexical.score_choices(ChoiceQuery("Question: q Answer: win", ("A", "B")))


class TestFixtureProvider:
    def test_answer_lookup_and_miss(self, tmp_path):
        entries = [
            {
                "kind": "answer",
                "passage_sha256": sha256_text("some passage"),
                "question_sha256": sha256_text("a question?"),
                "result": "recorded span",
            },
            {"kind": "score", "prompt_sha256": sha256_text("p"), "result": [0.9, 0.1]},
        ]
        path = tmp_path / "fx.json"
        path.write_text(json.dumps(entries))
        provider = FixtureProvider.from_path(str(path))
        assert provider.answer(ExtractiveQuery("some passage", "a question?")) == "recorded span"
        assert provider.score_choices(ChoiceQuery("p", ("Yes", "No"))).scores == (0.9, 0.1)
        with pytest.raises(FixtureMissError):
            provider.answer(ExtractiveQuery("other passage", "a question?"))
        with pytest.raises(FixtureMissError):
            provider.score_choices(ChoiceQuery("other prompt", ("Yes", "No")))

    def test_miss_is_a_provider_error(self):
        assert issubclass(FixtureMissError, ProviderError)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            FixtureProvider([{"kind": "embedding"}])


class TestRecordReplay:
    def test_replay_reproduces_context_payload(self, tmp_path, lexical, game_doc):
        from readward.harness import context_payload

        doc = game_doc("dot_maze")
        recorder = RecordingProvider(lexical)
        ranking, contexts = read_contexts(recorder, doc)
        recorder.save(str(tmp_path / "session.json"))
        live = json.dumps(context_payload("dot_maze", "custom", ranking, contexts), indent=2)

        replay = FixtureProvider.from_path(str(tmp_path / "session.json"))
        ranking2, contexts2 = read_contexts(replay, doc)
        replayed = json.dumps(context_payload("dot_maze", "custom", ranking2, contexts2), indent=2)
        assert live == replayed

    def test_duplicate_calls_keep_one_entry(self, lexical):
        recorder = RecordingProvider(lexical)
        q = ExtractiveQuery("The fox runs.", "where is the fox")
        recorder.answer(q)
        recorder.answer(q)
        assert len(recorder.entries) == 1


class _Handler(BaseHTTPRequestHandler):
    server_version = "qa/0"
    behaviors = {}

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        behavior = self.behaviors.get(self.path, "ok")
        state = self.server.state
        state["calls"] = state.get("calls", 0) + 1
        if behavior == "flaky" and state["calls"] == 1:
            self.send_error(500)
            return
        if behavior == "fail":
            self.send_error(500)
            return
        if behavior == "garbage":
            self.send_response(200)
            self.end_headers()
            self.wfile.write(b"not json")
            return
        if behavior == "slow":
            time.sleep(0.4)
        if self.path == "/answer":
            payload = {"answer": body["question"].upper()}
        else:
            payload = {"scores": [0.7, 0.3][: len(body["choices"])]}
        blob = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(blob)))
        self.end_headers()
        self.wfile.write(blob)

    def log_message(self, *args):
        pass


@pytest.fixture()
def qa_server():
    servers = []

    def start(behaviors):
        handler = type("H", (_Handler,), {"behaviors": behaviors})
        server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        server.state = {}
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append(server)
        return f"http://127.0.0.1:{server.server_address[1]}", server

    yield start
    for server in servers:
        server.shutdown()
        server.server_close()


class TestHTTPProvider:
    def test_answer_and_score_round_trip(self, qa_server):
        url, _ = qa_server({})
        provider = HTTPProvider(url, timeout=2.0)
        assert provider.answer(ExtractiveQuery("p", "who wins?")) == "WHO WINS?"
        scored = provider.score_choices(ChoiceQuery("prompt", ("Yes", "No")))
        assert scored == ChoiceScores(("Yes", "No"), (0.7, 0.3))

    def test_retry_then_success(self, qa_server):
        url, server = qa_server({"/answer": "flaky"})
        provider = HTTPProvider(url, timeout=2.0, retries=2)
        assert provider.answer(ExtractiveQuery("p", "q")) == "Q"
        assert server.state["calls"] == 2

    def test_persistent_failure_raises_transport_error(self, qa_server):
        url, server = qa_server({"/answer": "fail"})
        provider = HTTPProvider(url, timeout=2.0, retries=1)
        with pytest.raises(TransportError):
            provider.answer(ExtractiveQuery("p", "q"))
        assert server.state["calls"] == 2

    def test_malformed_json_raises(self, qa_server):
        url, _ = qa_server({"/score": "garbage"})
        provider = HTTPProvider(url, timeout=2.0, retries=0)
        with pytest.raises(TransportError):
            provider.score_choices(ChoiceQuery("p", ("Yes", "No")))

    def test_timeout_raises(self, qa_server):
        url, _ = qa_server({"/answer": "slow"})
        provider = HTTPProvider(url, timeout=0.05, retries=0)
        with pytest.raises(TransportError):
            provider.answer(ExtractiveQuery("p", "q"))

    def test_inflight_cap_is_respected(self, qa_server):
        url, server = qa_server({"/answer": "slow"})
        provider = HTTPProvider(url, timeout=5.0, max_inflight=2)
        peak = {"now": 0, "max": 0}
        lock = threading.Lock()

        real_post = provider._session.post

        def counting_post(*args, **kw):
            with lock:
                peak["now"] += 1
                peak["max"] = max(peak["max"], peak["now"])
            try:
                return real_post(*args, **kw)
            finally:
                with lock:
                    peak["now"] -= 1

        provider._session.post = counting_post
        threads = [
            threading.Thread(target=provider.answer, args=(ExtractiveQuery("p", f"q{i}"),))
            for i in range(5)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert peak["max"] <= 2


class TestProviderSpec:
    def test_lexical(self):
        assert isinstance(provider_from_spec("lexical", env={}), LexicalProvider)

    def test_fixture(self, fixtures_dir):
        provider = provider_from_spec(f"fixture:{fixtures_dir / 'pacman_official.json'}", env={})
        assert isinstance(provider, FixtureProvider)

    @pytest.mark.parametrize("spec", ["http://qa.local:9", "http:http://qa.local:9"])
    def test_http_urls(self, spec):
        provider = provider_from_spec(spec, env={})
        assert isinstance(provider, HTTPProvider)
        assert provider.base_url == "http://qa.local:9"

    def test_env_override(self):
        provider = provider_from_spec(
            "http://ignored:1", env={"READWARD_QA_URL": "http://real:2"}
        )
        assert provider.base_url == "http://real:2"

    def test_bare_http_needs_url(self):
        with pytest.raises(ValueError):
            provider_from_spec("http", env={})
        provider = provider_from_spec("http", env={"READWARD_QA_URL": "http://real:2/"})
        assert provider.base_url == "http://real:2"

    def test_unknown_spec(self):
        with pytest.raises(ValueError):
            provider_from_spec("oracle", env={})
