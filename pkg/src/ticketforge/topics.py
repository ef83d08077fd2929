"""Latent-topic clustering of ticket text.

EM-fitted pLSA over a term-document matrix, hierarchical frequent-n-gram
clustering, cluster labeling with coverage reporting, and a
cosine-k-means baseline behind the same report interface.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cleansing import TermDocumentMatrix, TokenStream

__all__ = [
    "TopicModel",
    "NGramClusterNode",
    "ClusteringReport",
    "fit_plsa",
    "cluster_ngrams",
    "assign_and_label",
    "assign_ngram_clusters",
    "fit_vsm_kmeans",
    "save_topic_model",
    "load_topic_model",
]

LOGLIK_TOLERANCE = 1e-6
DEFAULT_ASSIGNMENT_THRESHOLD = 0.25


@dataclass
class TopicModel:
    n_topics: int
    topic_priors: np.ndarray          # (K,)
    word_given_topic: np.ndarray      # (W, K)
    doc_given_topic: np.ndarray       # (D, K)
    terms: tuple[str, ...]
    doc_ids: tuple[str, ...]
    loglik_trace: list[float] = field(default_factory=list)

    def doc_posteriors(self) -> np.ndarray:
        """P(T_k | D_i), shape (D, K)."""
        joint = self.doc_given_topic * self.topic_priors[None, :]
        return joint / joint.sum(axis=1, keepdims=True)

    def topic_label(self, k: int, top_terms: int = 2) -> str:
        order = np.argsort(-self.word_given_topic[:, k], kind="stable")
        return " ".join(self.terms[i] for i in order[:top_terms])


def fit_plsa(
    tdm: TermDocumentMatrix,
    n_topics: int,
    max_iterations: int = 100,
    seed: int = 0,
) -> TopicModel:
    """Fit symmetric pLSA by EM: P(D,w) = sum_k P(T_k) P(w|T_k) P(D|T_k).

    Stops at ``max_iterations`` or when the log-likelihood gain drops
    below 1e-6.  Initialization is seeded and deterministic; the trace of
    per-iteration log-likelihoods is kept on the model.
    """
    if n_topics < 1:
        raise ValueError("n_topics must be >= 1")
    if not tdm.terms:
        raise ValueError("empty term-document matrix")
    if n_topics > len(tdm.doc_ids):
        raise ValueError(f"n_topics {n_topics} exceeds document count {len(tdm.doc_ids)}")

    counts = tdm.to_dense()  # (W, D)
    n_words, n_docs = counts.shape
    rng = np.random.default_rng(seed)

    p_t = rng.random(n_topics) + 0.5
    p_t /= p_t.sum()
    p_w_t = rng.random((n_words, n_topics)) + 0.5
    p_w_t /= p_w_t.sum(axis=0, keepdims=True)
    p_d_t = rng.random((n_docs, n_topics)) + 0.5
    p_d_t /= p_d_t.sum(axis=0, keepdims=True)

    trace: list[float] = []
    for _ in range(max_iterations):
        # E-step: the (K, W, D) responsibility tensor is never stored;
        # per-topic joints are recomputed as outer products on the fly.
        denom = np.zeros((n_words, n_docs))
        for k in range(n_topics):
            denom += p_t[k] * np.outer(p_w_t[:, k], p_d_t[:, k])
        loglik = float(np.sum(counts[denom > 0] * np.log(denom[denom > 0])))
        trace.append(loglik)

        new_t = np.zeros(n_topics)
        new_w_t = np.zeros((n_words, n_topics))
        new_d_t = np.zeros((n_docs, n_topics))
        safe_denom = np.where(denom > 0, denom, 1.0)
        ratio = counts / safe_denom
        for k in range(n_topics):
            weighted = ratio * (p_t[k] * np.outer(p_w_t[:, k], p_d_t[:, k]))
            new_t[k] = weighted.sum()
            new_w_t[:, k] = weighted.sum(axis=1)
            new_d_t[:, k] = weighted.sum(axis=0)
        total = new_t.sum()
        p_t = new_t / total
        p_w_t = new_w_t / np.where(new_t > 0, new_t, 1.0)[None, :]
        p_d_t = new_d_t / np.where(new_t > 0, new_t, 1.0)[None, :]

        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) < LOGLIK_TOLERANCE:
            break

    return TopicModel(n_topics, p_t, p_w_t, p_d_t, tdm.terms, tdm.doc_ids, trace)


@dataclass
class NGramClusterNode:
    label: str
    members: tuple[str, ...]
    depth: int
    children: list["NGramClusterNode"] = field(default_factory=list)


def _doc_ngrams(tokens: list[str], max_n: int = 3) -> set[tuple[str, ...]]:
    grams = set()
    for n in range(1, max_n + 1):
        for i in range(len(tokens) - n + 1):
            grams.add(tuple(tokens[i : i + n]))
    return grams


def cluster_ngrams(
    streams: list[TokenStream],
    doc_ids: list[str],
    min_support: int = 2,
    max_depth: int = 2,
) -> list[NGramClusterNode]:
    """Hierarchical clustering by frequent 1-3 grams.

    Each qualifying n-gram claims every document containing it; among
    n-grams claiming identical document sets only the longest phrase is
    kept.  Recursion inside each cluster uses the remaining n-grams; a
    child's members are a strict subset of its parent's.  Documents may
    appear in several clusters.
    """
    if min_support < 2:
        raise ValueError("min_support must be >= 2")
    doc_grams = {
        doc: _doc_ngrams(stream.normalized()) for stream, doc in zip(streams, doc_ids)
    }

    def build(scope: tuple[str, ...], used: frozenset[tuple[str, ...]], depth: int) -> list[NGramClusterNode]:
        members_of: dict[tuple[str, ...], tuple[str, ...]] = {}
        for gram in {g for d in scope for g in doc_grams[d]} - used:
            members = tuple(d for d in scope if gram in doc_grams[d])
            if len(members) >= min_support:
                members_of[gram] = members
        # Longest phrase (then lexicographically smallest) per member set.
        by_members: dict[tuple[str, ...], tuple[str, ...]] = {}
        for gram, members in sorted(members_of.items(), key=lambda kv: (-len(kv[0]), kv[0])):
            by_members.setdefault(members, gram)
        nodes = []
        for members, gram in by_members.items():
            if depth > 1 and set(members) == set(scope):
                continue  # child must narrow the parent
            label = " ".join(gram)
            node = NGramClusterNode(label, members, depth)
            if depth < max_depth:
                node.children = build(members, used | {gram}, depth + 1)
            nodes.append(node)
        nodes.sort(key=lambda n: (-len(n.members), n.label))
        return nodes

    return build(tuple(doc_ids), frozenset(), 1)


@dataclass
class ClusteringReport:
    assignments: dict[str, str | None]     # doc id -> cluster label or None
    coverage: float
    weighted_coverage: float
    top_clusters: list[tuple[str, int]]


def assign_and_label(
    model: TopicModel,
    tdm: TermDocumentMatrix,
    threshold: float = DEFAULT_ASSIGNMENT_THRESHOLD,
) -> ClusteringReport:
    """Assign each document to its argmax topic when the posterior clears
    the threshold; coverage weights are document token counts."""
    if model.doc_ids != tdm.doc_ids:
        raise ValueError("model and matrix cover different documents")
    posteriors = model.doc_posteriors()
    doc_tokens = {
        d: sum(tdm.counts.get(t, {}).get(d, 0) for t in tdm.terms) for d in tdm.doc_ids
    }
    assignments: dict[str, str | None] = {}
    for i, doc in enumerate(tdm.doc_ids):
        k = int(np.argmax(posteriors[i]))
        if posteriors[i, k] >= threshold:
            assignments[doc] = model.topic_label(k)
        else:
            assignments[doc] = None
    return _report(assignments, doc_tokens)


def assign_ngram_clusters(
    clusters: list[NGramClusterNode], tdm: TermDocumentMatrix
) -> ClusteringReport:
    """Assign each document to the largest root cluster containing it."""
    doc_tokens = {
        d: sum(tdm.counts.get(t, {}).get(d, 0) for t in tdm.terms) for d in tdm.doc_ids
    }
    assignments: dict[str, str | None] = {d: None for d in tdm.doc_ids}
    for node in clusters:  # already ordered by member count descending
        for doc in node.members:
            if assignments.get(doc) is None:
                assignments[doc] = node.label
    return _report(assignments, doc_tokens)


def _report(assignments: dict[str, str | None], doc_tokens: dict[str, int]) -> ClusteringReport:
    assigned = [d for d, c in assignments.items() if c is not None]
    n = len(assignments)
    coverage = len(assigned) / n if n else 0.0
    total_tokens = sum(doc_tokens.values())
    weighted = (
        sum(doc_tokens[d] for d in assigned) / total_tokens if total_tokens else 0.0
    )
    counts = Counter(c for c in assignments.values() if c is not None)
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ClusteringReport(assignments, coverage, weighted, top)


def fit_vsm_kmeans(
    tdm: TermDocumentMatrix,
    n_clusters: int,
    seed: int = 0,
    max_iterations: int = 50,
    use_lsi: bool = False,
    lsi_rank: int = 50,
) -> ClusteringReport:
    """Cosine k-means over tf-idf document vectors (optionally LSI-reduced).

    Non-default baseline kept behind the same report interface as the
    latent-topic model.
    """
    counts = tdm.to_dense()  # (W, D)
    n_docs = counts.shape[1]
    if n_clusters > n_docs:
        raise ValueError("more clusters than documents")
    df = np.count_nonzero(counts, axis=1)
    idf = np.log((1 + n_docs) / (1 + df)) + 1.0
    vectors = (counts * idf[:, None]).T  # (D, W)
    if use_lsi:
        rank = min(lsi_rank, min(vectors.shape) - 1)
        u, s, vt = np.linalg.svd(vectors, full_matrices=False)
        vectors = u[:, :rank] * s[:rank]
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    vectors = vectors / np.where(norms > 0, norms, 1.0)

    rng = np.random.default_rng(seed)
    centers = vectors[rng.choice(n_docs, size=n_clusters, replace=False)]
    labels = np.zeros(n_docs, dtype=int)
    for iteration in range(max_iterations):
        sims = vectors @ centers.T
        new_labels = np.argmax(sims, axis=1)
        if iteration > 0 and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(n_clusters):
            mask = labels == k
            if mask.any():
                c = vectors[mask].mean(axis=0)
                norm = np.linalg.norm(c)
                centers[k] = c / norm if norm > 0 else c

    # Label each cluster by its two highest mean-tf-idf terms.
    assignments: dict[str, str | None] = {}
    cluster_labels = {}
    tfidf = counts * idf[:, None]
    for k in range(n_clusters):
        mask = labels == k
        if not mask.any():
            cluster_labels[k] = f"cluster-{k}"
            continue
        mean_w = tfidf[:, mask].mean(axis=1)
        order = np.argsort(-mean_w, kind="stable")
        cluster_labels[k] = " ".join(tdm.terms[i] for i in order[:2])
    for i, doc in enumerate(tdm.doc_ids):
        assignments[doc] = cluster_labels[int(labels[i])]
    doc_tokens = {
        d: sum(tdm.counts.get(t, {}).get(d, 0) for t in tdm.terms) for d in tdm.doc_ids
    }
    return _report(assignments, doc_tokens)


def save_topic_model(model: TopicModel, path: str | Path) -> None:
    payload = {
        "schema_version": 1,
        "n_topics": model.n_topics,
        "topic_priors": model.topic_priors.tolist(),
        "word_given_topic": model.word_given_topic.tolist(),
        "doc_given_topic": model.doc_given_topic.tolist(),
        "terms": list(model.terms),
        "doc_ids": list(model.doc_ids),
        "loglik_trace": model.loglik_trace,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_topic_model(path: str | Path) -> TopicModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return TopicModel(
        payload["n_topics"],
        np.array(payload["topic_priors"]),
        np.array(payload["word_given_topic"]),
        np.array(payload["doc_given_topic"]),
        tuple(payload["terms"]),
        tuple(payload["doc_ids"]),
        payload["loglik_trace"],
    )
