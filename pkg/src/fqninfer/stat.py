"""Statistical type prediction from token co-occurrence counts.

The model plays the role a masked language model would play in a richer
system: given the tokens around an API element, rank fully-qualified names
for it. Here the ranking comes from Laplace-smoothed co-occurrence counts
gathered from a training corpus of snippets with known element types.

score(f) = sum over window tokens t of
    log( (counts[(t, f)] + alpha) / (fqn_totals[f] + alpha * |vocabulary|) )

Only model-known FQNs whose simple name matches the target are ranked, and
a candidate needs at least one positive count against the window to appear
at all: the model does not propose types it has no contextual evidence for.
Predictions may still name FQNs that exist nowhere in a given KB (learned
from other corpora), which is exactly the hallucination the KB filter is
for.
"""

from __future__ import annotations

import json
import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .kb import KnowledgeBase
from .snippet import (
    ApiElement,
    AugmentedSnippet,
    Snippet,
    TokenKind,
    augment,
)


@dataclass
class CooccurrenceModel:
    """Token/FQN co-occurrence counts plus smoothing configuration."""

    counts: dict[tuple[str, str], int] = field(default_factory=dict)
    fqn_totals: dict[str, int] = field(default_factory=dict)
    vocabulary: set[str] = field(default_factory=set)
    smoothing_alpha: float = 1.0
    window_eta: int = 2

    def known_fqns_named(self, simple_name: str) -> list[str]:
        suffix = "." + simple_name
        return sorted(
            f for f in self.fqn_totals if f == simple_name or f.endswith(suffix)
        )


_WINDOW_KINDS = (TokenKind.IDENTIFIER, TokenKind.LITERAL)


def context_window(
    aug: AugmentedSnippet, element: ApiElement, eta: int
) -> list[str]:
    """Identifier and literal lexemes within +-eta lines of the element's
    line, excluding the element's own token. Substituted FQNs of other
    elements appear as single tokens. Order follows the token stream.
    """
    lo = element.line - eta
    hi = element.line + eta
    out: list[str] = []
    for i, t in enumerate(aug.tokens):
        if i == element.token_index:
            continue
        if t.kind not in _WINDOW_KINDS:
            continue
        if lo <= t.line <= hi:
            out.append(t.lexeme)
    return out


def train(
    corpus: Iterable[tuple[Snippet, Mapping[ApiElement, str]]],
    eta: int = 2,
    alpha: float = 1.0,
) -> CooccurrenceModel:
    """Count co-occurrences over a corpus of (snippet, truth) pairs.

    For each truth pair (e, fqn) the context is taken leave-one-out: all
    OTHER truth elements are substituted by their FQNs first, mirroring what
    prediction sees after augmentation, then every window token around e
    adds one count for (token, fqn).
    """
    model = CooccurrenceModel(smoothing_alpha=alpha, window_eta=eta)
    for snippet, truth in corpus:
        for e, fqn in truth.items():
            others = {o: f for o, f in truth.items() if o != e}
            aug = augment(snippet, others)
            for tok in context_window(aug, e, eta):
                model.counts[(tok, fqn)] = model.counts.get((tok, fqn), 0) + 1
                model.vocabulary.add(tok)
            model.fqn_totals[fqn] = model.fqn_totals.get(fqn, 0) + 0
        # totals are full sums over counts, accumulated once below
    totals: dict[str, int] = {}
    for (tok, fqn), n in model.counts.items():
        totals[fqn] = totals.get(fqn, 0) + n
    # keep FQNs that appeared in truth but gathered no window tokens
    for fqn in model.fqn_totals:
        totals.setdefault(fqn, 0)
    model.fqn_totals = totals
    return model


def score_candidate(
    model: CooccurrenceModel, window: Sequence[str], fqn: str
) -> float:
    alpha = model.smoothing_alpha
    denom = model.fqn_totals.get(fqn, 0) + alpha * len(model.vocabulary)
    if denom <= 0:
        return float("-inf")
    total = 0.0
    for tok in window:
        c = model.counts.get((tok, fqn), 0)
        total += math.log((c + alpha) / denom)
    return total


def predict_topk(
    model: CooccurrenceModel,
    aug: AugmentedSnippet,
    target: ApiElement,
    k: int,
) -> list[tuple[str, float]]:
    """Rank model-known FQNs whose simple name matches the target.

    Candidates with no positive count against any window token are dropped;
    the rest are ordered by score, ties broken by lexicographically smaller
    FQN. Returns at most k (fqn, score) pairs. An empty model, or a target
    name the model has never seen, yields an empty list.
    """
    if k <= 0:
        return []
    window = context_window(aug, target, model.window_eta)
    scored: list[tuple[str, float]] = []
    for fqn in model.known_fqns_named(target.simple_name):
        if not any(model.counts.get((tok, fqn), 0) > 0 for tok in window):
            continue
        scored.append((fqn, score_candidate(model, window, fqn)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


@dataclass(frozen=True)
class CandidateList:
    """Ordered, KB-filtered candidate FQNs for one element."""

    ranked: tuple[str, ...]
    k: int
    element: ApiElement | None = None

    def __len__(self) -> int:
        return len(self.ranked)

    def top(self) -> str | None:
        return self.ranked[0] if self.ranked else None


def filter_against_kb(
    ranked: Sequence[str | tuple[str, float]],
    kb: KnowledgeBase,
    k: int,
    element: ApiElement | None = None,
) -> CandidateList:
    """Drop candidates that do not exist in kb, keep order, truncate to k.

    No padding happens when fewer than k survive; the list may be empty.
    """
    if k <= 0:
        return CandidateList(ranked=(), k=k, element=element)
    kept: list[str] = []
    for item in ranked:
        fqn = item[0] if isinstance(item, tuple) else item
        if fqn in kb and fqn not in kept:
            kept.append(fqn)
        if len(kept) == k:
            break
    return CandidateList(ranked=tuple(kept), k=k, element=element)


class Predictor(Protocol):
    """Anything that can rank candidate FQNs for an element in context."""

    def predict(
        self, aug: AugmentedSnippet, target: ApiElement, k: int
    ) -> list[tuple[str, float]]: ...


class CooccurrencePredictor:
    def __init__(self, model: CooccurrenceModel):
        self.model = model

    def predict(self, aug, target, k):
        return predict_topk(self.model, aug, target, k)


class ExternalPredictor:
    """Adapter for an out-of-process predictor.

    Speaks a line protocol over the child's standard streams: one JSON
    request per line, {"context_lines": [...], "target_key": "Name[l,o]",
    "k": n}, answered by one JSON line holding an ordered array of candidate
    FQN strings. Scores are synthesized from rank so external candidates
    sort stably downstream.
    """

    def __init__(self, command: Sequence[str]):
        self.command = list(command)
        self._proc: subprocess.Popen | None = None

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        return self._proc

    def predict(self, aug, target, k):
        proc = self._ensure()
        lines = aug.text().splitlines()
        request = {"context_lines": lines, "target_key": target.key, "k": k}
        assert proc.stdin is not None and proc.stdout is not None
        proc.stdin.write(json.dumps(request) + "\n")
        proc.stdin.flush()
        answer = proc.stdout.readline()
        if not answer:
            raise RuntimeError("external predictor closed its output stream")
        candidates = json.loads(answer)
        if not isinstance(candidates, list):
            raise RuntimeError("external predictor must answer a JSON array")
        ranked = []
        for rank, fqn in enumerate(candidates[:k]):
            ranked.append((str(fqn), float(len(candidates) - rank)))
        return ranked

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            assert self._proc.stdin is not None
            self._proc.stdin.close()
            self._proc.wait(timeout=5)
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def as_predictor(source) -> Predictor:
    if isinstance(source, CooccurrenceModel):
        return CooccurrencePredictor(source)
    return source


def predict_all(
    source,
    aug: AugmentedSnippet,
    elements: Sequence[ApiElement],
    kb: KnowledgeBase,
    k: int,
) -> dict[ApiElement, CandidateList]:
    """Predict and KB-filter candidates for every element, in token order.

    k limits the number of surviving candidates, not the raw ranking: the
    predictor is asked for a longer list so that dropping hallucinated
    (non knowledge-base) names still leaves up to k usable ones. For the
    co-occurrence model the over-fetch is harmless because its candidate
    universe per simple name is finite and small.
    """
    predictor = as_predictor(source)
    fetch = k + len(kb.entries) if k > 0 else 0
    out: dict[ApiElement, CandidateList] = {}
    for e in sorted(elements, key=lambda e: e.token_index):
        ranked = predictor.predict(aug, e, fetch)
        out[e] = filter_against_kb(ranked, kb, k, element=e)
    return out


# ---------------------------------------------------------------------------
# serialization

_HEADER_PREFIX = "cooccurrence"


def dump_model(model: CooccurrenceModel) -> str:
    """Serialize as a header line plus sorted, tab-delimited count records.

    Tokens are JSON-escaped because lexemes (string literals) may contain
    spaces, tabs or newlines. Deterministic: equal models dump identically.
    """
    lines = [
        f"{_HEADER_PREFIX}\talpha={model.smoothing_alpha!r}\teta={model.window_eta}"
    ]
    for (tok, fqn) in sorted(model.counts):
        n = model.counts[(tok, fqn)]
        if n <= 0:
            continue
        lines.append(f"count\t{json.dumps(tok)}\t{fqn}\t{n}")
    for fqn in sorted(model.fqn_totals):
        # FQNs with no counts at all still need to exist after a round-trip
        if not any(f == fqn for (_, f) in model.counts):
            lines.append(f"fqn\t{fqn}")
    return "\n".join(lines) + "\n"


def save_model(model: CooccurrenceModel, path: str | Path) -> None:
    Path(path).write_text(dump_model(model), encoding="utf-8")


class ModelFormatError(ValueError):
    pass


def load_model(path: str | Path) -> CooccurrenceModel:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        raise ModelFormatError("missing model header line")
    header = lines[0].split("\t")
    alpha = 1.0
    eta = 2
    for part in header[1:]:
        key, _, value = part.partition("=")
        if key == "alpha":
            alpha = float(value)
        elif key == "eta":
            eta = int(value)
        else:
            raise ModelFormatError(f"unknown header field {key!r}")
    model = CooccurrenceModel(smoothing_alpha=alpha, window_eta=eta)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if parts[0] == "count" and len(parts) == 4:
            tok = json.loads(parts[1])
            fqn = parts[2]
            n = int(parts[3])
            if n <= 0:
                raise ModelFormatError(f"line {lineno}: nonpositive count")
            model.counts[(tok, fqn)] = model.counts.get((tok, fqn), 0) + n
            model.vocabulary.add(tok)
        elif parts[0] == "fqn" and len(parts) == 2:
            model.fqn_totals.setdefault(parts[1], 0)
        else:
            raise ModelFormatError(f"line {lineno}: bad record {line!r}")
    totals: dict[str, int] = dict.fromkeys(model.fqn_totals, 0)
    for (tok, fqn), n in model.counts.items():
        totals[fqn] = totals.get(fqn, 0) + n
    model.fqn_totals = totals
    return model
