"""Sentiment scorers behind a uniform contract.

A scorer turns one poem into one 1-5 score: the poem's verses are joined
into a document, the document is chunked to the scorer's input limit, each
chunk is scored independently, and the chunk scores are averaged and
rounded. Backends:

* ``ChatCompletionScorer`` -- posts the scoring prompt to a chat-completion
  HTTP endpoint and parses the numeric reply (large context window).
* ``CategoricalScorer`` -- posts each chunk to the same endpoint shape but
  expects a negative/neutral/positive label, mapped to 1/3/5 (encoder-style
  512-token limit).
* ``ReplayScorer`` -- answers from a recorded transcript, bit-for-bit; the
  deterministic backend for reproducible pipelines and tests.
* ``ConstantScorer`` -- always the same score; a trivial test backend.

Every scoring event is persisted as a ``ScoreRecord`` in an append-only
JSON Lines cache, which doubles as the replay transcript format.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import requests

from .corpus import Poem
from .scale import check_score
from .textprep import Tokenizer, WhitespaceTokenizer, chunk_document, combine_chunk_scores, concat_verses

log = logging.getLogger(__name__)

# Bit-exact scoring instruction sent ahead of the poem text.
PROMPT_TEMPLATE = (
    "Analyze the sentiment of the following poem and return a number between 1 and 5, "
    "where 1 means sad, 5 means happy, 3 is neutral, 2 and 4 are intermediate cases. "
    "RETURN ONLY ONE NUMBER THAT SHOWS THE SENTIMENT, (NO LONG ANSWERS JUST A NUMBER)"
)

CATEGORY_TO_SCORE = {"negative": 1, "neutral": 3, "positive": 5}

CHAT_MAX_INPUT_TOKENS = 128_000
ENCODER_MAX_INPUT_TOKENS = 512

API_KEY_ENV = "DIVAN_API_KEY"

MAX_TRANSPORT_ATTEMPTS = 5
MAX_PARSE_RETRIES = 2
BACKOFF_INITIAL_SECONDS = 1.0

_STANDALONE_INT = re.compile(r"(?<!\d)(?<!\d\.)(\d+)(?!\.?\d)")


class ScoringError(Exception):
    """Base class for scoring failures."""


class TransportError(ScoringError):
    """Network or HTTP failure talking to a remote scorer."""


class UnparseableResponseError(ScoringError):
    """The backend reply contained no usable score."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class ReplayMissError(ScoringError):
    """The replay transcript has no record for the requested poem and run."""


def build_prompt(poem_text: str) -> str:
    """Scoring instruction followed by a newline and the poem text."""
    if not poem_text:
        raise ValueError("poem_text must be non-empty")
    return PROMPT_TEMPLATE + "\n" + poem_text


def parse_score_response(raw: str) -> int:
    """First standalone integer in 1..5 found in the reply.

    Digits embedded in decimals (``4.5``) or longer numbers (``42``) are
    not standalone and are skipped.
    """
    for match in _STANDALONE_INT.finditer(raw):
        value = int(match.group(1))
        if 1 <= value <= 5:
            return value
    raise UnparseableResponseError(f"no integer in 1..5 found in response {raw!r}", raw=raw)


def map_categorical_label(label: str) -> int:
    """negative -> 1, neutral -> 3, positive -> 5 (case-insensitive)."""
    score = CATEGORY_TO_SCORE.get(label.strip().lower())
    if score is None:
        raise UnparseableResponseError(f"unknown sentiment label {label!r}", raw=label)
    return score


@dataclass(frozen=True)
class ScoreRecord:
    """Provenance of one scoring event; one JSONL line in the score cache."""

    poem_id: str
    scorer_id: str
    run_index: int
    chunk_scores: tuple[int, ...]
    final_score: int
    raw_responses: tuple[str, ...]
    timestamp: str
    temperature: float | None = None

    def __post_init__(self) -> None:
        if self.run_index < 0:
            raise ValueError("run_index must be >= 0")
        for s in self.chunk_scores:
            check_score(s, context="chunk score")
        if self.final_score != combine_chunk_scores(self.chunk_scores):
            raise ValueError(
                f"record for poem {self.poem_id!r}: final_score {self.final_score} does not equal "
                f"the combined chunk scores"
            )

    def to_json(self) -> str:
        payload = {
            "poem_id": self.poem_id,
            "scorer_id": self.scorer_id,
            "run_index": self.run_index,
            "chunk_scores": list(self.chunk_scores),
            "final_score": self.final_score,
            "raw_responses": list(self.raw_responses),
            "timestamp": self.timestamp,
        }
        if self.temperature is not None:
            payload["temperature"] = self.temperature
        return json.dumps(payload, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "ScoreRecord":
        data = json.loads(line)
        return cls(
            poem_id=data["poem_id"],
            scorer_id=data["scorer_id"],
            run_index=data["run_index"],
            chunk_scores=tuple(data["chunk_scores"]),
            final_score=data["final_score"],
            raw_responses=tuple(data["raw_responses"]),
            timestamp=data["timestamp"],
            temperature=data.get("temperature"),
        )


class ScoreCache:
    """Append-only JSONL store of ScoreRecords, keyed (poem, scorer, run)."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._records: dict[tuple[str, str, int], ScoreRecord] = {}
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        record = ScoreRecord.from_json(line)
                    except (ValueError, KeyError) as exc:
                        raise ValueError(f"{self.path}:{lineno}: bad cache record: {exc}") from None
                    self._records[record.poem_id, record.scorer_id, record.run_index] = record

    def __len__(self) -> int:
        return len(self._records)

    def get(self, poem_id: str, scorer_id: str, run_index: int) -> ScoreRecord | None:
        return self._records.get((poem_id, scorer_id, run_index))

    def append(self, record: ScoreRecord) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(record.to_json() + "\n")
        self._records[record.poem_id, record.scorer_id, record.run_index] = record

    def records(self, scorer_id: str | None = None) -> list[ScoreRecord]:
        out = list(self._records.values())
        if scorer_id is not None:
            out = [r for r in out if r.scorer_id == scorer_id]
        return out

    def scorer_ids(self) -> list[str]:
        return sorted({r.scorer_id for r in self._records.values()})


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class Scorer:
    """Base scoring contract: chunked document in, ScoreRecord out."""

    kind = "abstract"

    def __init__(
        self,
        scorer_id: str,
        max_input_tokens: int,
        tokenizer: Tokenizer | None = None,
        separator: str = "\n",
    ):
        if max_input_tokens < 1:
            raise ValueError("max_input_tokens must be >= 1")
        self.scorer_id = scorer_id
        self.max_input_tokens = max_input_tokens
        self.tokenizer = tokenizer or WhitespaceTokenizer()
        self.separator = separator
        self.temperature: float | None = None

    def score_chunk(self, chunk: str) -> tuple[int, str]:
        """Return (score, raw backend response) for one chunk."""
        raise NotImplementedError

    def score_poem(self, poem: Poem, run_index: int = 0) -> ScoreRecord:
        doc = concat_verses(poem, self.separator)
        chunkset = chunk_document(
            doc, self.max_input_tokens, self.tokenizer, poem_id=poem.id, separator=self.separator
        )
        chunk_scores: list[int] = []
        raw_responses: list[str] = []
        for chunk in chunkset.chunks:
            score, raw = self.score_chunk(chunk)
            chunk_scores.append(score)
            raw_responses.append(raw)
        return ScoreRecord(
            poem_id=poem.id,
            scorer_id=self.scorer_id,
            run_index=run_index,
            chunk_scores=tuple(chunk_scores),
            final_score=combine_chunk_scores(chunk_scores),
            raw_responses=tuple(raw_responses),
            timestamp=_now_iso(),
            temperature=self.temperature,
        )


class ConstantScorer(Scorer):
    """Always answers the same score; deterministic test backend."""

    kind = "constant"

    def __init__(self, scorer_id: str = "constant", score: int = 3, **kwargs):
        kwargs.setdefault("max_input_tokens", CHAT_MAX_INPUT_TOKENS)
        super().__init__(scorer_id, **kwargs)
        self.score = check_score(score)
        self.calls = 0

    def score_chunk(self, chunk: str) -> tuple[int, str]:
        self.calls += 1
        return self.score, str(self.score)


class ReplayScorer(Scorer):
    """Replays ScoreRecords from a transcript file (the cache format).

    ``source_scorer_id`` names whose records to replay when the transcript
    holds several scorers; it defaults to this scorer's own id.
    """

    kind = "replay"

    def __init__(
        self,
        scorer_id: str,
        transcript_path: str | Path,
        source_scorer_id: str | None = None,
        **kwargs,
    ):
        kwargs.setdefault("max_input_tokens", CHAT_MAX_INPUT_TOKENS)
        super().__init__(scorer_id, **kwargs)
        path = Path(transcript_path)
        if not path.exists():
            raise FileNotFoundError(f"replay transcript {path} does not exist")
        self.transcript_path = path
        self.source_scorer_id = source_scorer_id or scorer_id
        self._transcript: dict[tuple[str, int], ScoreRecord] = {}
        for record in ScoreCache(path).records(self.source_scorer_id):
            self._transcript[record.poem_id, record.run_index] = record

    def score_poem(self, poem: Poem, run_index: int = 0) -> ScoreRecord:
        record = self._transcript.get((poem.id, run_index))
        if record is None:
            raise ReplayMissError(
                f"transcript {self.transcript_path} has no record for poem {poem.id!r} "
                f"run {run_index} (scorer {self.source_scorer_id!r})"
            )
        if record.scorer_id == self.scorer_id:
            return record
        return ScoreRecord(
            poem_id=record.poem_id,
            scorer_id=self.scorer_id,
            run_index=record.run_index,
            chunk_scores=record.chunk_scores,
            final_score=record.final_score,
            raw_responses=record.raw_responses,
            timestamp=record.timestamp,
            temperature=record.temperature,
        )

    def score_chunk(self, chunk: str) -> tuple[int, str]:  # pragma: no cover - replay is record-level
        raise ScoringError("replay scorer answers whole poems from its transcript")


Transport = Callable[[str, dict, dict], tuple[int, dict]]
"""(url, json payload, headers) -> (HTTP status, decoded JSON body)."""


def _requests_transport(url: str, payload: dict, headers: dict) -> tuple[int, dict]:
    try:
        response = requests.post(url, json=payload, headers=headers, timeout=60)
    except requests.RequestException as exc:
        raise TransportError(str(exc)) from exc
    try:
        body = response.json()
    except ValueError:
        body = {}
    return response.status_code, body


class _RemoteScorer(Scorer):
    """Shared HTTP plumbing: chat-completion wire format, retries, backoff."""

    def __init__(
        self,
        scorer_id: str,
        model: str,
        base_url: str,
        *,
        temperature: float = 0.0,
        api_key: str | None = None,
        transport: Transport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        **kwargs,
    ):
        super().__init__(scorer_id, **kwargs)
        self.model = model
        self.base_url = base_url.rstrip("/")
        self.temperature = temperature
        self.api_key = api_key
        self._transport = transport or _requests_transport
        self._sleep = sleep
        self.calls = 0

    def _interpret(self, content: str) -> int:
        raise NotImplementedError

    def _message_for(self, chunk: str) -> str:
        raise NotImplementedError

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = self.api_key or os.environ.get(API_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def score_chunk(self, chunk: str) -> tuple[int, str]:
        url = self.base_url + "/chat/completions"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": self._message_for(chunk)}],
            "temperature": self.temperature,
        }
        transport_failures = 0
        parse_failures = 0
        delay = BACKOFF_INITIAL_SECONDS
        while True:
            self.calls += 1
            try:
                status, body = self._transport(url, payload, self._headers())
            except TransportError as exc:
                transport_failures += 1
                if transport_failures >= MAX_TRANSPORT_ATTEMPTS:
                    raise TransportError(
                        f"{self.scorer_id}: giving up after {transport_failures} transport failures: {exc}"
                    ) from exc
                self._sleep(delay)
                delay *= 2
                continue
            if status == 429 or 500 <= status < 600:
                transport_failures += 1
                if transport_failures >= MAX_TRANSPORT_ATTEMPTS:
                    raise TransportError(
                        f"{self.scorer_id}: giving up after HTTP {status} (attempt {transport_failures})"
                    )
                self._sleep(delay)
                delay *= 2
                continue
            if status != 200:
                raise TransportError(f"{self.scorer_id}: HTTP {status} from {url}")
            try:
                content = body["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError):
                raise TransportError(
                    f"{self.scorer_id}: response body lacks choices[0].message.content"
                ) from None
            try:
                return self._interpret(content), content
            except UnparseableResponseError:
                parse_failures += 1
                if parse_failures > MAX_PARSE_RETRIES:
                    raise
                log.debug("%s: unparseable response, retrying (%d)", self.scorer_id, parse_failures)


class ChatCompletionScorer(_RemoteScorer):
    """GPT-style numeric scorer: sends the prompt template plus the poem."""

    kind = "chat"

    def __init__(self, scorer_id: str, model: str, base_url: str, **kwargs):
        kwargs.setdefault("max_input_tokens", CHAT_MAX_INPUT_TOKENS)
        super().__init__(scorer_id, model, base_url, **kwargs)

    def _message_for(self, chunk: str) -> str:
        return build_prompt(chunk)

    def _interpret(self, content: str) -> int:
        return parse_score_response(content)


class CategoricalScorer(_RemoteScorer):
    """Encoder-style scorer: labels each chunk negative/neutral/positive."""

    kind = "categorical"

    def __init__(self, scorer_id: str, model: str, base_url: str, **kwargs):
        kwargs.setdefault("max_input_tokens", ENCODER_MAX_INPUT_TOKENS)
        super().__init__(scorer_id, model, base_url, **kwargs)

    def _message_for(self, chunk: str) -> str:
        if not chunk:
            raise ValueError("cannot score an empty chunk")
        return chunk

    def _interpret(self, content: str) -> int:
        return map_categorical_label(content)


def score_poem(scorer: Scorer, poem: Poem, run_index: int = 0) -> ScoreRecord:
    """Score one poem once; see ``Scorer.score_poem``."""
    return scorer.score_poem(poem, run_index)


def score_corpus(
    scorer: Scorer,
    poems: Sequence[Poem],
    runs: int = 1,
    cache: ScoreCache | None = None,
    parallelism: int = 4,
) -> list[ScoreRecord]:
    """One ScoreRecord per (poem, run 0..runs-1), reusing cached records.

    Missing records are computed (concurrently up to ``parallelism``) and
    appended to the cache in deterministic poem-major order; completed work
    is preserved in the cache even when a later poem fails.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    tasks = [(poem, run) for poem in poems for run in range(runs)]
    results: dict[tuple[str, int], ScoreRecord] = {}
    pending: list[tuple[Poem, int]] = []
    for poem, run in tasks:
        cached = cache.get(poem.id, scorer.scorer_id, run) if cache is not None else None
        if cached is not None:
            results[poem.id, run] = cached
        else:
            pending.append((poem, run))

    if pending:
        if parallelism == 1:
            for poem, run in pending:
                record = scorer.score_poem(poem, run)
                if cache is not None:
                    cache.append(record)
                results[poem.id, run] = record
        else:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                futures = [pool.submit(scorer.score_poem, poem, run) for poem, run in pending]
                for (poem, run), future in zip(pending, futures):
                    record = future.result()
                    if cache is not None:
                        cache.append(record)
                    results[poem.id, run] = record
    return [results[poem.id, run] for poem, run in tasks]


def scorer_from_spec(spec: str, *, default_temperature: float = 0.0) -> Scorer:
    """Build a scorer from a ``kind:id[,key=value...]`` spec string.

    Kinds and their options:

    * ``constant:<id>[,score=3]``
    * ``replay:<id>,transcript=<path>[,source=<scorer_id>]``
    * ``chat:<id>,model=<name>,base_url=<url>[,max_tokens=...][,temperature=...]``
    * ``categorical:<id>,model=<name>,base_url=<url>[,max_tokens=...][,temperature=...]``
    """
    head, _, tail = spec.partition(",")
    kind, _, scorer_id = head.partition(":")
    if not kind or not scorer_id:
        raise ValueError(f"scorer spec {spec!r} must start with 'kind:id'")
    options: dict[str, str] = {}
    if tail:
        for item in tail.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"scorer spec option {item!r} is not key=value")
            options[key.strip()] = value.strip()

    def pop_int(name: str, default: int | None = None) -> int | None:
        if name not in options:
            return default
        return int(options.pop(name))

    if kind == "constant":
        score = pop_int("score", 3)
        max_tokens = pop_int("max_tokens", CHAT_MAX_INPUT_TOKENS)
        scorer: Scorer = ConstantScorer(scorer_id, score=score, max_input_tokens=max_tokens)
    elif kind == "replay":
        if "transcript" not in options:
            raise ValueError(f"replay scorer {scorer_id!r} needs transcript=<path>")
        scorer = ReplayScorer(
            scorer_id,
            transcript_path=options.pop("transcript"),
            source_scorer_id=options.pop("source", None),
        )
    elif kind in ("chat", "categorical"):
        if "model" not in options or "base_url" not in options:
            raise ValueError(f"{kind} scorer {scorer_id!r} needs model=<name>,base_url=<url>")
        cls = ChatCompletionScorer if kind == "chat" else CategoricalScorer
        default_max = CHAT_MAX_INPUT_TOKENS if kind == "chat" else ENCODER_MAX_INPUT_TOKENS
        scorer = cls(
            scorer_id,
            model=options.pop("model"),
            base_url=options.pop("base_url"),
            max_input_tokens=pop_int("max_tokens", default_max),
            temperature=float(options.pop("temperature", default_temperature)),
        )
    else:
        raise ValueError(f"unknown scorer kind {kind!r}")
    if options:
        raise ValueError(f"unknown scorer options for {scorer_id!r}: {sorted(options)}")
    return scorer
