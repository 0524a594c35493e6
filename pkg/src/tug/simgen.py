"""Synthetic gameplay: agent round simulation, round scoring, session assembly.

Two simulated players pick words by softmax over their cosine affinity to
the keyword; a per-agent temperature is the single alignment knob (two cold
agents converge on the same picks, hot or mismatched agents diverge). Rounds
are scored either by a remote judge or by the deterministic embedding
oracle, then stratified into score buckets and assembled into 10-round
sessions.
"""

from __future__ import annotations

import json
import logging
import math
import random
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .datastore import SCHEMA_VERSION, LabeledPair, PairRound
from .embeddings import EmbeddingTable, cosine
from .errors import InsufficientRoundsError, TransportError, UnparseableReplyError
from .lexicon import SAMPLE_SIZE, RoundSpec, build_round_spec
from .util import derive_seed

log = logging.getLogger(__name__)

MIN_TEMPERATURE, MAX_TEMPERATURE = 0.05, 5.0
ROUNDS_PER_SESSION = 10
NUM_BUCKETS = 5


@dataclass(frozen=True)
class AgentParams:
    temperature: float
    seed: int

    def __post_init__(self):
        if not MIN_TEMPERATURE <= self.temperature <= MAX_TEMPERATURE:
            raise ValueError(
                f"temperature {self.temperature} outside [{MIN_TEMPERATURE}, {MAX_TEMPERATURE}]"
            )


@dataclass(frozen=True)
class ScoredRound:
    spec: RoundSpec
    sel_a: frozenset[str]
    sel_b: frozenset[str]
    score: float
    scorer: str  # llm | oracle

    def __post_init__(self):
        for sel in (self.sel_a, self.sel_b):
            if len(sel) != self.spec.quota:
                raise ValueError("selection size must equal the round quota")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0,1]")


@dataclass(frozen=True)
class SyntheticSession:
    pair_id: str
    rounds: tuple[ScoredRound, ...]
    session_score: float


def keyword_affinities(spec: RoundSpec, table: EmbeddingTable) -> np.ndarray:
    return np.array([cosine(table[w], table[spec.keyword]) for w in spec.matrix])


def simulate_agent_selection(spec: RoundSpec, table: EmbeddingTable,
                             params: AgentParams) -> frozenset[str]:
    """Draw quota words sequentially without replacement, each draw a softmax
    over keyword-cosine / temperature restricted to the remaining words.

    Cosines are standardized over the matrix first; the mean shift cancels
    inside the softmax, so this equals a plain cosine softmax with the
    temperature measured in units of the round's cosine spread — which keeps
    T=0.05 near-greedy and T=5 near-uniform at any embedding geometry.
    """
    table.require((spec.keyword, *spec.matrix))
    sims = keyword_affinities(spec, table)
    logits = (sims - sims.mean()) / max(float(sims.std()), 1e-12)
    rng = np.random.default_rng(params.seed)
    remaining = list(range(len(spec.matrix)))
    chosen: list[str] = []
    for _ in range(spec.quota):
        scaled = logits[remaining] / params.temperature
        weights = np.exp(scaled - scaled.max())
        weights /= weights.sum()
        pick = int(rng.choice(len(remaining), p=weights))
        chosen.append(spec.matrix[remaining[pick]])
        remaining.pop(pick)
    return frozenset(chosen)


def score_round_oracle(sel_a, sel_b, table: EmbeddingTable) -> float:
    """Deterministic judge stand-in: cosine of the two selections' mean
    vectors, mapped from [-1,1] to [0,1]."""
    table.require(list(sel_a) + list(sel_b))
    mean_a = np.stack([table[w] for w in sorted(sel_a)]).mean(axis=0)
    mean_b = np.stack([table[w] for w in sorted(sel_b)]).mean(axis=0)
    return (cosine(mean_a, mean_b) + 1.0) / 2.0


# -- remote judge --------------------------------------------------------

def judge_prompt_template() -> str:
    return resources.files("tug.data").joinpath("judge_prompt_v1.txt").read_text("utf-8")


def render_judge_prompt(theme: str, keyword: str, sel_a, sel_b) -> str:
    """Template header plus the round under evaluation."""
    return (
        judge_prompt_template()
        + "\n"
        + f"Theme: {json.dumps(theme)}\n"
        + f"Keyword: {json.dumps(keyword)}\n"
        + f"Player 1 Choices: {json.dumps(sorted(sel_a))}\n"
        + f"Player 2 Choices: {json.dumps(sorted(sel_b))}\n"
        + "Score:"
    )


_DECIMAL = re.compile(r"-?\d+(?:\.\d+)?")


def parse_score_reply(text: str) -> float:
    """First decimal in the reply, clamped to [0,1]."""
    match = _DECIMAL.search(text)
    if match is None:
        raise UnparseableReplyError(f"no score found in reply {text!r}")
    return min(1.0, max(0.0, float(match.group())))


class LLMClient:
    """POST {"prompt": ...} to a judge endpoint and return its text reply."""

    def __init__(self, url: str, model: str | None = None, api_key: str | None = None,
                 timeout: float = 30.0, retries: int = 3, backoff: float = 0.5):
        self.url = url
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def complete(self, prompt: str) -> str:
        body: dict = {"prompt": prompt}
        if self.model:
            body["model"] = self.model
        payload = json.dumps(body).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last: Exception | None = None
        for attempt in range(self.retries):
            try:
                req = urllib.request.Request(self.url, data=payload, headers=headers)
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    raw = resp.read().decode("utf-8")
                try:
                    parsed = json.loads(raw)
                    if isinstance(parsed, dict) and isinstance(parsed.get("text"), str):
                        return parsed["text"]
                except json.JSONDecodeError:
                    pass
                return raw
            except (OSError, urllib.error.URLError) as exc:
                last = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * 2 ** attempt)
        raise TransportError(f"judge endpoint failed after {self.retries} attempts: {last}")


def score_round_llm(theme: str, keyword: str, sel_a, sel_b, client: LLMClient) -> float:
    reply = client.complete(render_judge_prompt(theme, keyword, sel_a, sel_b))
    return parse_score_reply(reply)


# -- round generation ----------------------------------------------------

def _draw_temperature(rng: np.random.Generator) -> float:
    # log-uniform over the allowed range: couples the full alignment spectrum
    return float(np.exp(rng.uniform(math.log(MIN_TEMPERATURE), math.log(MAX_TEMPERATURE))))


def generate_rounds(themes, table: EmbeddingTable, n_rounds: int, seed: int,
                    scorer: str = "oracle", client: LLMClient | None = None) -> list[ScoredRound]:
    """Simulate and score n_rounds independent rounds; rounds whose judge
    reply cannot be parsed are dropped."""
    if scorer not in ("oracle", "llm"):
        raise ValueError(f"unknown scorer {scorer!r}")
    if scorer == "llm" and client is None:
        raise ValueError("llm scorer needs a configured client")
    eligible = [t for t in themes if len(t.words) >= SAMPLE_SIZE]
    if not eligible:
        raise InsufficientRoundsError(f"no theme has the {SAMPLE_SIZE} words a round needs")
    out: list[ScoredRound] = []
    for i in range(n_rounds):
        rng = random.Random(derive_seed(seed, "round", i))
        spec = build_round_spec(eligible[rng.randrange(len(eligible))], table, rng)
        temp_rng = np.random.default_rng(derive_seed(seed, "temps", i))
        sel_a = simulate_agent_selection(
            spec, table, AgentParams(_draw_temperature(temp_rng), derive_seed(seed, "agent-a", i)))
        sel_b = simulate_agent_selection(
            spec, table, AgentParams(_draw_temperature(temp_rng), derive_seed(seed, "agent-b", i)))
        if scorer == "oracle":
            score = score_round_oracle(sel_a, sel_b, table)
        else:
            try:
                score = score_round_llm(spec.theme, spec.keyword, sel_a, sel_b, client)
            except UnparseableReplyError:
                log.warning("round %d: unparseable judge reply, dropped", i)
                continue
        out.append(ScoredRound(spec=spec, sel_a=sel_a, sel_b=sel_b, score=score, scorer=scorer))
    return out


# -- session assembly ----------------------------------------------------

def bucket_index(score: float) -> int:
    return min(NUM_BUCKETS - 1, int(score * NUM_BUCKETS))


def _bucket_span(b: int) -> str:
    lo, hi = b / NUM_BUCKETS, (b + 1) / NUM_BUCKETS
    return f"[{lo:.1f},{hi:.1f})" if b < NUM_BUCKETS - 1 else f"[{lo:.1f},{hi:.1f}]"


def _allocate(demands: list[int], capacities: list[int], n_pairs: int) -> list[int]:
    """Uniform bucket targets capped by availability; shortfall spills to
    buckets with spare rounds (ascending bucket order)."""
    counts = [min(d, c) for d, c in zip(demands, capacities)]
    shortfall = n_pairs - sum(counts)
    for b in range(NUM_BUCKETS):
        if shortfall == 0:
            break
        spare = capacities[b] - counts[b]
        take = min(spare, shortfall)
        counts[b] += take
        shortfall -= take
    if shortfall > 0:
        starved = max(range(NUM_BUCKETS), key=lambda b: demands[b] - capacities[b])
        raise InsufficientRoundsError(
            f"bucket {starved} {_bucket_span(starved)} is starved: "
            f"{capacities[starved]} sessions available against a demand of "
            f"{demands[starved]}; total capacity {sum(capacities)} < {n_pairs} requested"
        )
    return counts


def assemble_sessions(rounds, n_pairs: int, seed: int) -> list[SyntheticSession]:
    """Partition rounds into five equal-width score buckets and build
    n_pairs 10-round sessions, target buckets cycling over the buckets,
    rounds used without replacement.

    Within a bucket, rounds are dealt in score order (seeded shuffle breaks
    ties), so each session groups rounds of similar alignment; a real pair's
    rounds share the pair's temperament, and grouping this way keeps session
    labels spread across the bucket instead of averaging toward its mean.
    """
    buckets: list[list[ScoredRound]] = [[] for _ in range(NUM_BUCKETS)]
    for r in rounds:
        buckets[bucket_index(r.score)].append(r)
    rng = random.Random(derive_seed(seed, "assembly"))
    for b in buckets:
        rng.shuffle(b)
        b.sort(key=lambda r: r.score)  # stable: tied scores keep shuffled order
    demands = [len(range(b, n_pairs, NUM_BUCKETS)) for b in range(NUM_BUCKETS)]
    capacities = [len(b) // ROUNDS_PER_SESSION for b in buckets]
    counts = _allocate(demands, capacities, n_pairs)

    sessions: list[SyntheticSession] = []
    remaining = counts[:]
    for i in range(n_pairs):
        b = i % NUM_BUCKETS
        while remaining[b] == 0:
            b = (b + 1) % NUM_BUCKETS
        remaining[b] -= 1
        chosen = buckets[b][:ROUNDS_PER_SESSION]
        del buckets[b][:ROUNDS_PER_SESSION]
        score = sum(r.score for r in chosen) / ROUNDS_PER_SESSION
        sessions.append(SyntheticSession(
            pair_id=f"synth-{i:06d}", rounds=tuple(chosen), session_score=score))
    return sessions


def session_to_pair(session: SyntheticSession) -> LabeledPair:
    scorers = {r.scorer for r in session.rounds}
    if len(scorers) != 1:
        raise ValueError("a session must be scored by a single scorer")
    return LabeledPair(
        pair_id=session.pair_id,
        label=session.session_score,
        label_source=next(iter(scorers)),
        rounds=tuple(PairRound(
            theme=r.spec.theme, keyword=r.spec.keyword, quota=r.spec.quota,
            sel_a=tuple(sorted(r.sel_a)), sel_b=tuple(sorted(r.sel_b)),
        ) for r in session.rounds),
    )


def session_to_record(session: SyntheticSession) -> dict:
    """Synthetic-session log record for the datastore."""
    return {
        "v": SCHEMA_VERSION,
        "type": "synthetic_session",
        "pair_id": session.pair_id,
        "scorer": session.rounds[0].scorer,
        "session_score": session.session_score,
        "rounds": [{
            "theme": r.spec.theme, "keyword": r.spec.keyword, "quota": r.spec.quota,
            "sel_a": sorted(r.sel_a), "sel_b": sorted(r.sel_b), "score": r.score,
        } for r in session.rounds],
    }


# -- rounds file ---------------------------------------------------------

def write_rounds(rounds, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rounds:
            fh.write(json.dumps({
                "v": SCHEMA_VERSION,
                "theme": r.spec.theme, "keyword": r.spec.keyword,
                "quota": r.spec.quota, "matrix": list(r.spec.matrix),
                "sel_a": sorted(r.sel_a), "sel_b": sorted(r.sel_b),
                "score": r.score, "scorer": r.scorer,
            }, ensure_ascii=False, sort_keys=True) + "\n")


def read_rounds(path) -> list[ScoredRound]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            spec = RoundSpec(theme=obj["theme"], keyword=obj["keyword"],
                             matrix=tuple(obj["matrix"]), quota=obj["quota"])
            out.append(ScoredRound(spec=spec, sel_a=frozenset(obj["sel_a"]),
                                   sel_b=frozenset(obj["sel_b"]),
                                   score=obj["score"], scorer=obj["scorer"]))
    return out
