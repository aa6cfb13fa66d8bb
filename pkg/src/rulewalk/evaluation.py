"""Query sets, ranking metrics, splits, and end-to-end scoring helpers.

Classification queries label whole graphs (one-vs-rest per target label);
event queries partition a single graph's events by predicate.  Ranking
uses mean-rank tie handling, so an undiscriminating scorer lands in the
middle of its pool instead of being rewarded or punished by sort order.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass

from . import learner
from .hypergraph import TemporalHypergraph
from .rules import Query, evaluate
from .walk import derive_seed

CLASSIFICATION = "classification"
LINK_PREDICTION = "link_prediction"


@dataclass
class QuerySet:
    positives: list[Query]
    negatives: list[Query]
    mode: str = CLASSIFICATION

    def __post_init__(self) -> None:
        overlap = set(self.positives) & set(self.negatives)
        if overlap:
            raise ValueError(f"queries cannot be both positive and negative: {overlap}")


def build_classification_queries(labels: list[str], target_label: str) -> QuerySet:
    """One query per graph, positive when the graph carries the target label."""
    positives = []
    negatives = []
    for i, label in enumerate(labels):
        query = Query(target_label, graph_index=i)
        if label == target_label:
            positives.append(query)
        else:
            negatives.append(query)
    if not positives:
        raise ValueError(f"no graph is labeled {target_label!r}")
    if not negatives:
        raise ValueError(f"every graph is labeled {target_label!r}; nothing to rank")
    return QuerySet(positives, negatives, CLASSIFICATION)


def build_event_queries(
    graph: TemporalHypergraph, positive_predicates, graph_index: int = 0
) -> QuerySet:
    """Partition a graph's events into positive and negative queries."""
    positive_predicates = set(positive_predicates)
    for name in positive_predicates:
        if name not in graph.predicates:
            raise ValueError(f"predicate {name!r} not present in the graph")
    positives = []
    negatives = []
    for event in graph.events:
        pred, heads, tails = graph.event_names(event.event_id)
        query = Query(pred, heads, tails, graph_index, event_id=event.event_id)
        if pred in positive_predicates:
            positives.append(query)
        else:
            negatives.append(query)
    return QuerySet(positives, negatives, LINK_PREDICTION)


# -- metrics -----------------------------------------------------------------


def mrr(ranks) -> float:
    """Mean reciprocal rank; ranks are 1-based (fractional ties allowed)."""
    ranks = list(ranks)
    if not ranks:
        raise ValueError("mrr of an empty rank list")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be >= 1")
    return sum(1.0 / r for r in ranks) / len(ranks)


def hits_at_k(ranks, k: int) -> float:
    """Percentage of queries ranked within the top k."""
    ranks = list(ranks)
    if not ranks:
        raise ValueError("hits@k of an empty rank list")
    return 100.0 * sum(1 for r in ranks if r <= k) / len(ranks)


def rank_with_ties(scores, true_index: int) -> float:
    """1-based rank under descending score; ties take their block's mean rank."""
    true_score = scores[true_index]
    higher = sum(1 for s in scores if s > true_score)
    tied = sum(1 for s in scores if s == true_score)
    return higher + (tied + 1) / 2.0


def rank_positive(query: Query, scorer, candidate_pool) -> float:
    """Rank of `query` in its pool under the given scoring callable."""
    try:
        true_index = candidate_pool.index(query)
    except ValueError:
        raise ValueError("the true query must be part of its candidate pool") from None
    scores = [scorer(candidate) for candidate in candidate_pool]
    return rank_with_ties(scores, true_index)


# -- splits ------------------------------------------------------------------


def split_queries(
    query_set: QuerySet, train_frac: float = 0.8, seed: int = 0
) -> tuple[QuerySet, QuerySet]:
    """Seeded shuffle split; negatives split proportionally to positives."""
    if not 0 < train_frac < 1:
        raise ValueError("train_frac must lie in (0, 1)")

    def cut(queries, tag):
        items = list(queries)
        random.Random(derive_seed(seed, "split", tag)).shuffle(items)
        n_train = max(1, min(len(items) - 1, round(train_frac * len(items))))
        return items[:n_train], items[n_train:]

    pos_train, pos_test = cut(query_set.positives, "pos")
    neg_train, neg_test = cut(query_set.negatives, "neg")
    return (
        QuerySet(pos_train, neg_train, query_set.mode),
        QuerySet(pos_test, neg_test, query_set.mode),
    )


# -- scoring -----------------------------------------------------------------


def count_scorer(rules, graphs, top_k: int = 1, eval_budget: int = 1_000_000):
    """Untrained scoring: occurrence count of the best matching top rule."""
    top = rules[:top_k]

    def scorer(query: Query) -> float:
        graph = graphs[query.graph_index]
        best = 0.0
        for rule in top:
            if evaluate(rule, graph, query, budget=eval_budget):
                best = max(best, float(rule.support))
        return best

    return scorer


def model_scorer(rules, graphs, params, scorer_kind: str = "binary",
                 eval_budget: int = 1_000_000):
    """Trained scoring: logistic model over the rule feature row of a query."""

    def scorer(query: Query) -> float:
        matrix = learner.build_features(
            rules, graphs, [query], [0.0], scorer=scorer_kind, eval_budget=eval_budget
        )
        return learner.score(matrix.features[0], params)

    return scorer


def candidate_pool(query: Query, test_set: QuerySet) -> list[Query]:
    """The true query plus the negatives it is ranked against.

    Classification pools take every negative graph; event pools keep the
    filtered setting of negatives with the query's head/tail arity.
    """
    if test_set.mode == CLASSIFICATION:
        negatives = list(test_set.negatives)
    else:
        negatives = [
            n
            for n in test_set.negatives
            if len(n.heads) == len(query.heads) and len(n.tails) == len(query.tails)
        ]
    return [query] + negatives


def ranked_evaluation(scorer, test_set: QuerySet) -> list[float]:
    """Rank every positive test query within its candidate pool."""
    ranks = []
    for query in test_set.positives:
        pool = candidate_pool(query, test_set)
        ranks.append(rank_positive(query, scorer, pool))
    return ranks


# -- reporting ---------------------------------------------------------------


def metrics_record(ranks, mode: str, seed: int) -> dict:
    return {
        "mrr": mrr(ranks),
        "hits@3": hits_at_k(ranks, 3),
        "hits@10": hits_at_k(ranks, 10),
        "n_queries": len(ranks),
        "mode": mode,
        "seed": seed,
    }


def macro_average(records: list[dict]) -> dict:
    """Unweighted mean over one-vs-rest records (one per target label)."""
    if not records:
        raise ValueError("macro average of zero records")
    out = {
        key: sum(r[key] for r in records) / len(records)
        for key in ("mrr", "hits@3", "hits@10")
    }
    out["n_queries"] = sum(r["n_queries"] for r in records)
    out["mode"] = records[0]["mode"]
    out["seed"] = records[0]["seed"]
    return out


def format_metrics(record: dict) -> str:
    """Machine-readable JSON line followed by a small human table."""
    line = json.dumps(record, sort_keys=True)
    table = (
        f"{'metric':<12}{'value':>12}\n"
        f"{'mrr':<12}{record['mrr']:>12.4f}\n"
        f"{'hits@3':<12}{record['hits@3']:>12.2f}\n"
        f"{'hits@10':<12}{record['hits@10']:>12.2f}\n"
        f"{'n_queries':<12}{record['n_queries']:>12d}"
    )
    return line + "\n" + table
