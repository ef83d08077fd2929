"""Predictive insights over structured fields plus text-analytics features.

Feature assembly, a from-scratch logistic-regression SLA-violation model,
agent recommendation by shrunken per-topic resolution times, MTBF /
availability reports, propagation association rules, and device CPU
statistics.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .corpus import Ticket, TextInsights

__all__ = [
    "FeatureVector",
    "SlaModel",
    "AgentProfile",
    "AssociationRule",
    "MtbfReport",
    "assemble_features",
    "train_sla",
    "predict_sla",
    "sla_loss_and_gradient",
    "build_agent_profiles",
    "recommend_agent",
    "compute_mtbf",
    "mine_propagation_rules",
    "device_utilization_stats",
    "save_sla_model",
    "load_sla_model",
]

SHRINKAGE_STRENGTH = 10.0
DEFAULT_PROPAGATION_WINDOW_MINUTES = 240.0
DEFAULT_MIN_SUPPORT = 0.01
DEFAULT_MIN_CONFIDENCE = 0.3

UNKNOWN = "<unknown>"
ONE_HOT_GROUPS = ("category", "assignment_group", "language", "description_topic", "sentiment")
NUMERIC_FEATURES = ("priority", "hour_of_day", "weekday", "description_length")


@dataclass
class FeatureVector:
    ticket_id: str
    values: np.ndarray
    label: bool | None = None


@dataclass
class FeatureDictionary:
    names: tuple[str, ...]
    group_values: dict[str, tuple[str, ...]]

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.names).encode()).hexdigest()


def assemble_features(
    tickets: list[Ticket],
    insights: dict[str, TextInsights],
    dictionary: FeatureDictionary | None = None,
) -> tuple[list[FeatureVector], FeatureDictionary]:
    """Deterministic encoding of numeric and one-hot features.

    When ``dictionary`` is given (predict time), unseen category values
    map to the explicit unknown slot of their group.  The SLA label is
    turnaround > sla_target_minutes where both are known.
    """
    for t in tickets:
        if t.ticket_id not in insights:
            raise KeyError(f"no insights for ticket {t.ticket_id!r}")

    def raw_group_value(t: Ticket, group: str) -> str:
        ins = insights[t.ticket_id]
        if group == "category":
            return t.category
        if group == "assignment_group":
            return t.assignment_group
        if group == "language":
            return ins.language
        if group == "description_topic":
            return ins.description_topic or UNKNOWN
        return ins.sentiment.label if ins.sentiment else UNKNOWN

    if dictionary is None:
        group_values = {}
        for group in ONE_HOT_GROUPS:
            seen = sorted({raw_group_value(t, group) for t in tickets} - {UNKNOWN})
            group_values[group] = tuple(seen) + (UNKNOWN,)
        names = list(NUMERIC_FEATURES)
        for group in ONE_HOT_GROUPS:
            names.extend(f"{group}={v}" for v in group_values[group])
        dictionary = FeatureDictionary(tuple(names), group_values)

    vectors = []
    for t in tickets:
        numeric = [
            float(t.priority),
            float(t.created_at.hour),
            float(t.created_at.weekday()),
            float(len(t.description)),
        ]
        onehots: list[float] = []
        for group in ONE_HOT_GROUPS:
            values = dictionary.group_values[group]
            value = raw_group_value(t, group)
            slot = value if value in values else UNKNOWN
            onehots.extend(1.0 if v == slot else 0.0 for v in values)
        label = None
        turnaround = t.turnaround_minutes()
        if turnaround is not None and t.sla_target_minutes is not None:
            label = turnaround > t.sla_target_minutes
        vectors.append(FeatureVector(t.ticket_id, np.array(numeric + onehots), label))
    return vectors, dictionary


@dataclass
class SlaModel:
    weights: np.ndarray
    bias: float
    dictionary_hash: str
    epochs: int
    learning_rate: float
    final_loss: float
    loss_trace: list[float] = field(default_factory=list)


def sla_loss_and_gradient(
    x: np.ndarray, y: np.ndarray, weights: np.ndarray, bias: float
) -> tuple[float, np.ndarray, float]:
    """Mean logistic loss and its analytic gradient."""
    margin = x @ weights + bias
    # log(1+exp(m)) - y*m, computed stably
    loss = float(np.mean(np.logaddexp(0.0, margin) - y * margin))
    prob = 1.0 / (1.0 + np.exp(-margin))
    grad_w = x.T @ (prob - y) / len(y)
    grad_b = float(np.mean(prob - y))
    return loss, grad_w, grad_b


def train_sla(
    vectors: list[FeatureVector],
    dictionary: FeatureDictionary,
    epochs: int = 200,
    learning_rate: float = 0.1,
    seed: int = 0,
    batch_size: int = 64,
) -> SlaModel:
    """Gradient descent on logistic loss over labeled vectors.

    Mini-batches are seeded and deterministic; after each epoch the
    full-data loss is checked and the learning rate is halved if it
    increased, so the recorded loss trace is non-increasing within 1e-6.
    Features are scaled to unit max before training.
    """
    labeled = [v for v in vectors if v.label is not None]
    if not labeled:
        raise ValueError("no labeled vectors")
    y = np.array([1.0 if v.label else 0.0 for v in labeled])
    if len(set(y.tolist())) < 2:
        raise ValueError("training data contains a single class")
    x = np.stack([v.values for v in labeled])
    scale = np.abs(x).max(axis=0)
    scale[scale == 0] = 1.0
    x = x / scale

    rng = np.random.default_rng(seed)
    w = np.zeros(x.shape[1])
    b = 0.0
    lr = learning_rate
    trace = [sla_loss_and_gradient(x, y, w, b)[0]]
    for _ in range(epochs):
        order = rng.permutation(len(y))
        w_prev, b_prev = w.copy(), b
        for start in range(0, len(y), batch_size):
            idx = order[start : start + batch_size]
            _, grad_w, grad_b = sla_loss_and_gradient(x[idx], y[idx], w, b)
            w = w - lr * grad_w
            b = b - lr * grad_b
        loss = sla_loss_and_gradient(x, y, w, b)[0]
        if loss > trace[-1]:
            w, b = w_prev, b_prev  # reject the epoch, anneal
            lr *= 0.5
            loss = trace[-1]
        trace.append(loss)

    # Fold the scaling back into the weights so predict works on raw vectors.
    return SlaModel(w / scale, b, dictionary.hash(), epochs, learning_rate, trace[-1], trace)


def predict_sla(
    model: SlaModel, vector: FeatureVector, dictionary: FeatureDictionary
) -> tuple[float, bool]:
    """Violation probability via the logistic link and the 0.5 decision."""
    if model.dictionary_hash != dictionary.hash():
        raise ValueError("feature dictionary hash mismatch")
    margin = float(vector.values @ model.weights + model.bias)
    prob = 1.0 / (1.0 + math.exp(-margin))
    return prob, prob > 0.5


@dataclass
class AgentProfile:
    agent_id: str
    per_topic: dict[str, tuple[int, float, float]]  # topic -> (count, mean, variance)
    shrunken_means: dict[str, float] = field(default_factory=dict)


def build_agent_profiles(
    tickets: list[Ticket],
    insights: dict[str, TextInsights],
    shrinkage: float = SHRINKAGE_STRENGTH,
) -> dict[str, AgentProfile]:
    """Per-agent, per-topic resolution statistics with empirical-Bayes
    shrinkage toward the all-agent topic mean."""
    samples: dict[tuple[str, str], list[float]] = defaultdict(list)
    topic_all: dict[str, list[float]] = defaultdict(list)
    for t in tickets:
        turnaround = t.turnaround_minutes()
        if turnaround is None or t.agent_id is None:
            continue
        ins = insights.get(t.ticket_id)
        topic = ins.description_topic if ins and ins.description_topic else UNKNOWN
        samples[(t.agent_id, topic)].append(turnaround)
        topic_all[topic].append(turnaround)

    group_mean = {topic: sum(v) / len(v) for topic, v in topic_all.items()}
    profiles: dict[str, AgentProfile] = {}
    for (agent, topic), values in sorted(samples.items()):
        profile = profiles.setdefault(agent, AgentProfile(agent, {}))
        n = len(values)
        mean = sum(values) / n
        var = sum((v - mean) ** 2 for v in values) / n
        profile.per_topic[topic] = (n, mean, var)
        profile.shrunken_means[topic] = (n * mean + shrinkage * group_mean[topic]) / (
            n + shrinkage
        )
    # Stash group means for agents with no history on a topic.
    for profile in profiles.values():
        profile.per_topic.setdefault("__group__", (0, 0.0, 0.0))
    for profile in profiles.values():
        for topic, gm in group_mean.items():
            profile.shrunken_means.setdefault(topic, gm)
    return profiles


def recommend_agent(
    profiles: dict[str, AgentProfile],
    topic: str,
    eligible_agents: list[str],
) -> list[tuple[str, float]]:
    """Rank eligible agents by expected resolution minutes, ascending.

    Agents without history on the topic fall back to the pooled topic
    mean; ties break by agent id.
    """
    if not eligible_agents:
        raise ValueError("empty eligible agent set")
    group_means = [
        p.shrunken_means[topic] for p in profiles.values() if topic in p.shrunken_means
    ]
    fallback = sum(group_means) / len(group_means) if group_means else float("inf")
    ranked = []
    for agent in eligible_agents:
        profile = profiles.get(agent)
        expected = profile.shrunken_means.get(topic, fallback) if profile else fallback
        ranked.append((agent, expected))
    ranked.sort(key=lambda pair: (pair[1], pair[0]))
    return ranked


@dataclass
class MtbfReport:
    group_key: tuple
    failure_count: int
    mtbf_minutes: float | None
    mttr_minutes: float | None
    availability: float | None


def compute_mtbf(
    tickets: list[Ticket],
    grouping=lambda t: (t.category, t.device_id),
) -> list[MtbfReport]:
    """MTBF = mean gap between consecutive creations within a group;
    MTTR = mean turnaround; availability = MTBF / (MTBF + MTTR).

    Groups with fewer than two failures report an undefined MTBF rather
    than a silent zero.
    """
    groups: dict[tuple, list[Ticket]] = defaultdict(list)
    for t in tickets:
        groups[grouping(t)].append(t)
    reports = []
    for key in sorted(groups, key=repr):
        members = sorted(groups[key], key=lambda t: (t.created_at, t.ticket_id))
        times = [t.created_at for t in members]
        mtbf = None
        if len(times) >= 2:
            gaps = [
                (b - a).total_seconds() / 60.0 for a, b in zip(times, times[1:])
            ]
            mtbf = sum(gaps) / len(gaps)
        turnarounds = [ta for t in members if (ta := t.turnaround_minutes()) is not None]
        mttr = sum(turnarounds) / len(turnarounds) if turnarounds else None
        availability = None
        if mtbf is not None and mttr is not None and mtbf + mttr > 0:
            availability = mtbf / (mtbf + mttr)
        reports.append(MtbfReport(key, len(members), mtbf, mttr, availability))
    return reports


@dataclass(frozen=True)
class AssociationRule:
    antecedent: str
    consequent: str
    support: float
    confidence: float
    lift: float
    recommended_group: str


def mine_propagation_rules(
    tickets: list[Ticket],
    insights: dict[str, TextInsights],
    window_minutes: float = DEFAULT_PROPAGATION_WINDOW_MINUTES,
    min_support: float = DEFAULT_MIN_SUPPORT,
    min_confidence: float = DEFAULT_MIN_CONFIDENCE,
) -> list[AssociationRule]:
    """Topic-to-topic association rules over time-windowed transactions.

    A transaction is a topic-assigned ticket together with the set of
    topics of tickets created within ``window_minutes`` after it.  Lift
    is confidence over the consequent's base rate across transactions.
    The recommended group is the modal assignment group of the matching
    consequent tickets.
    """
    if window_minutes <= 0:
        raise ValueError("window_minutes must be positive")
    window = timedelta(minutes=window_minutes)
    topical = [
        t
        for t in tickets
        if (ins := insights.get(t.ticket_id)) and ins.description_topic
    ]
    topical.sort(key=lambda t: (t.created_at, t.ticket_id))
    topic_of = {t.ticket_id: insights[t.ticket_id].description_topic for t in topical}

    transactions: list[tuple[str, set[str], list[Ticket]]] = []
    for i, t in enumerate(topical):
        followers = []
        for u in topical[i + 1 :]:
            if u.created_at - t.created_at > window:
                break
            if u.created_at > t.created_at:
                followers.append(u)
        transactions.append((topic_of[t.ticket_id], {topic_of[u.ticket_id] for u in followers}, followers))

    n = len(transactions)
    if n == 0:
        return []
    pair_count: Counter = Counter()
    antecedent_count: Counter = Counter()
    consequent_base: Counter = Counter()
    group_votes: dict[tuple[str, str], Counter] = defaultdict(Counter)
    for antecedent, consequents, followers in transactions:
        antecedent_count[antecedent] += 1
        for c in consequents:
            pair_count[(antecedent, c)] += 1
            consequent_base[c] += 1
            for u in followers:
                if topic_of[u.ticket_id] == c:
                    group_votes[(antecedent, c)][u.assignment_group] += 1

    rules = []
    for (a, c), count in sorted(pair_count.items()):
        support = count / n
        confidence = count / antecedent_count[a]
        base = consequent_base[c] / n
        lift = confidence / base
        if support >= min_support and confidence >= min_confidence:
            votes = group_votes[(a, c)]
            group = min(votes, key=lambda g: (-votes[g], g))
            rules.append(AssociationRule(a, c, support, confidence, lift, group))
    rules.sort(key=lambda r: (-r.confidence, -r.support, r.antecedent, r.consequent))
    return rules


def flag_ticket(rules: list[AssociationRule], topic: str | None) -> list[AssociationRule]:
    """Rules whose antecedent matches the new ticket's topic, by confidence."""
    if topic is None:
        return []
    return [r for r in rules if r.antecedent == topic]


@dataclass
class DeviceHourStats:
    device: str
    hour: int
    mean: float
    stddev: float
    peak: float


def device_utilization_stats(
    samples: list[tuple[str, datetime, float]]
) -> list[DeviceHourStats]:
    """Per-device, per-hour-of-day CPU mean, population stddev and peak."""
    buckets: dict[tuple[str, int], list[float]] = defaultdict(list)
    for device, ts, cpu in samples:
        if not 0.0 <= cpu <= 1.0:
            raise ValueError(f"cpu fraction out of range: {cpu}")
        buckets[(device, ts.hour)].append(cpu)
    out = []
    for (device, hour), values in sorted(buckets.items()):
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        out.append(DeviceHourStats(device, hour, mean, math.sqrt(var), max(values)))
    return out


def save_sla_model(model: SlaModel, path: str | Path) -> None:
    payload = {
        "schema_version": 1,
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "dictionary_hash": model.dictionary_hash,
        "epochs": model.epochs,
        "learning_rate": model.learning_rate,
        "final_loss": model.final_loss,
        "loss_trace": model.loss_trace,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_sla_model(path: str | Path) -> SlaModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return SlaModel(
        np.array(payload["weights"]),
        payload["bias"],
        payload["dictionary_hash"],
        payload["epochs"],
        payload["learning_rate"],
        payload["final_loss"],
        payload["loss_trace"],
    )
