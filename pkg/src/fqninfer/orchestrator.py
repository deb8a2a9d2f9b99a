"""Iterative combination of the constraint solver and the statistical ranker.

Each round runs both engines, feeding constraint-typed elements into the
statistical context (augmentation) and feeding both engines' candidate types
into a reduction of the knowledge base for the next constraint pass. The
loop stops when a round reproduces the previous one exactly, or after a
fixed number of rounds. Final answers prefer the constraint engine where it
ever committed, falling back to the statistical ranking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .constraint import (
    ConstraintResult,
    ExtractOptions,
    extract_constraints,
    infer_snippet,
    solve,
)
from .kb import KnowledgeBase, collect_candidate_types, reduce_kb
from .snippet import ApiElement, Snippet, augment, identify_api_elements, plain
from .stat import CandidateList, predict_all

ORDER_CONSTRAINT_FIRST = "constraint_first"
ORDER_STAT_FIRST = "stat_first"


def _default_extract_options() -> ExtractOptions:
    return ExtractOptions(cascaded_calls=False)


@dataclass(frozen=True)
class RunConfig:
    """Loop parameters.

    k: statistical candidates kept per element.
    delta: hard round limit when no fixed point is reached.
    order: which engine leads a round; the follower sees the leader's output.
    """

    k: int = 3
    delta: int = 10
    order: str = ORDER_CONSTRAINT_FIRST
    extract_options: ExtractOptions = field(default_factory=_default_extract_options)
    exclude_string: bool = True


@dataclass(frozen=True)
class RoundRecord:
    round_number: int
    constraint_result: ConstraintResult
    stat_result: Mapping[ApiElement, CandidateList]
    kb_size: int  # size of the KB the constraint pass ran against


@dataclass(frozen=True)
class CombinedElement:
    element: ApiElement
    final_fqn: str | None
    source: str  # "constraint", "statistical" or "none"
    comb_type_c: str | None
    comb_types_s: tuple[str, ...]


@dataclass(frozen=True)
class CombinedResult:
    per_element: Mapping[ApiElement, CombinedElement]

    def answers(self) -> dict[str, str]:
        """Element key -> final FQN for every element that got one."""
        return {
            e.key: ce.final_fqn
            for e, ce in self.per_element.items()
            if ce.final_fqn is not None
        }


def check_stable(prev: RoundRecord, cur: RoundRecord) -> bool:
    """A fixed point: same constraint decisions and same ranked candidates."""
    if dict(prev.constraint_result.typed) != dict(cur.constraint_result.typed):
        return False
    prev_ranks = {e: cl.ranked for e, cl in prev.stat_result.items()}
    cur_ranks = {e: cl.ranked for e, cl in cur.stat_result.items()}
    return prev_ranks == cur_ranks


def combine(
    trace: Sequence[RoundRecord], elements: Sequence[ApiElement]
) -> CombinedResult:
    """Fold a round trace into one answer per element.

    The constraint answer is the one from the last round that committed to
    the element; the statistical answer is the last nonempty candidate list.
    Constraint answers win; otherwise the top statistical candidate is used.
    """
    per: dict[ApiElement, CombinedElement] = {}
    for e in sorted(elements, key=lambda e: e.token_index):
        comb_type_c: str | None = None
        comb_types_s: tuple[str, ...] = ()
        for rec in trace:
            if e in rec.constraint_result.typed:
                comb_type_c = rec.constraint_result.typed[e]
            ranked = rec.stat_result.get(e)
            if ranked is not None and ranked.ranked:
                comb_types_s = ranked.ranked
        if comb_type_c is not None:
            final, source = comb_type_c, "constraint"
        elif comb_types_s:
            final, source = comb_types_s[0], "statistical"
        else:
            final, source = None, "none"
        per[e] = CombinedElement(e, final, source, comb_type_c, comb_types_s)
    return CombinedResult(per)


def run(
    snippet: Snippet,
    kb: KnowledgeBase,
    model,
    config: RunConfig = RunConfig(),
    elements: Sequence[ApiElement] | None = None,
) -> tuple[CombinedResult, list[RoundRecord]]:
    """Run the full loop on one snippet.

    `model` is a trained co-occurrence model or any predictor object.
    Statistical candidates are always filtered against the ORIGINAL kb;
    reduction narrows only what the constraint solver sees.
    """
    if config.order not in (ORDER_CONSTRAINT_FIRST, ORDER_STAT_FIRST):
        raise ValueError(f"unknown round order: {config.order!r}")
    if elements is None:
        elements = identify_api_elements(
            snippet, kb, exclude_string=config.exclude_string
        )
    constraints, coverage = extract_constraints(
        snippet, elements, config.extract_options
    )
    strict = config.extract_options.strict_uniqueness

    current = kb
    prev_typed: dict[ApiElement, str] = {}
    trace: list[RoundRecord] = []

    for round_number in range(1, config.delta + 1):
        if config.order == ORDER_CONSTRAINT_FIRST:
            cres = solve(
                current, elements, constraints, coverage, strict_uniqueness=strict
            )
            aug = augment(snippet, dict(cres.typed))
            sres = predict_all(model, aug, elements, kb, config.k)
        else:
            aug = augment(snippet, prev_typed)
            sres = predict_all(model, aug, elements, kb, config.k)
            cantypes = collect_candidate_types(sres, prev_typed, elements)
            current = reduce_kb(kb, cantypes)
            cres = solve(
                current, elements, constraints, coverage, strict_uniqueness=strict
            )
            prev_typed = dict(cres.typed)

        record = RoundRecord(round_number, cres, sres, len(current))
        trace.append(record)
        if len(trace) > 1 and check_stable(trace[-2], record):
            break

        if config.order == ORDER_CONSTRAINT_FIRST:
            cantypes = collect_candidate_types(sres, dict(cres.typed), elements)
            current = reduce_kb(kb, cantypes)

    return combine(trace, elements), trace


def single_pass_stat(
    snippet: Snippet,
    kb: KnowledgeBase,
    model,
    k: int = 1,
    elements: Sequence[ApiElement] | None = None,
) -> dict[ApiElement, CandidateList]:
    """One statistical pass over the unaugmented snippet."""
    if elements is None:
        elements = identify_api_elements(snippet, kb)
    return predict_all(model, plain(snippet), elements, kb, k)


def infer_with_engine(
    snippet: Snippet,
    kb: KnowledgeBase,
    model,
    engine: str,
    config: RunConfig = RunConfig(),
) -> dict[str, str]:
    """Element key -> FQN under one of the three engines.

    "constraint" is a single full-KB solve, "stat" a single raw-context
    ranking (top 1), "combined" the iterative loop.
    """
    elements = identify_api_elements(snippet, kb, exclude_string=config.exclude_string)
    if engine == "constraint":
        res = infer_snippet(kb, snippet, config.extract_options, elements=elements)
        return {e.key: fqn for e, fqn in res.typed.items()}
    if engine == "stat":
        preds = single_pass_stat(snippet, kb, model, k=max(1, config.k), elements=elements)
        return {
            e.key: cl.ranked[0] for e, cl in preds.items() if cl.ranked
        }
    if engine == "combined":
        combined, _ = run(snippet, kb, model, config, elements=elements)
        return combined.answers()
    raise ValueError(f"unknown engine: {engine!r}")


def serialize_trace(
    trace: Sequence[RoundRecord], elements: Sequence[ApiElement]
) -> str:
    """Readable round-by-round log, stable across runs."""
    ordered = sorted(elements, key=lambda e: e.token_index)
    lines: list[str] = []
    for rec in trace:
        lines.append(f"round {rec.round_number} kb_size={rec.kb_size}")
        for e in ordered:
            fqn = rec.constraint_result.typed.get(e)
            lines.append(f"constraint {e.key} {fqn if fqn else '-'}")
        for e in ordered:
            cl = rec.stat_result.get(e)
            shown = ",".join(cl.ranked) if cl and cl.ranked else "-"
            lines.append(f"stat {e.key} {shown}")
    return "\n".join(lines) + "\n"
