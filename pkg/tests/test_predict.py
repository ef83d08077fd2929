import math
import random
from collections import Counter, defaultdict
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from ticketforge.corpus import Ticket, TextInsights
from ticketforge.predict import (
    FeatureDictionary,
    FeatureVector,
    assemble_features,
    build_agent_profiles,
    compute_mtbf,
    device_utilization_stats,
    flag_ticket,
    load_sla_model,
    mine_propagation_rules,
    predict_sla,
    recommend_agent,
    save_sla_model,
    sla_loss_and_gradient,
    train_sla,
)

T0 = datetime(2025, 1, 1, tzinfo=timezone.utc)


def make_ticket(i, created, topic=None, group="g1", agent=None, resolved_after=None,
                device=None, category="network", priority=2, sla=None):
    return Ticket(
        ticket_id=f"T{i:04d}",
        ticket_type="incident",
        created_at=created,
        priority=priority,
        category=category,
        assignment_group=group,
        description=f"ticket {i}",
        source_system="test",
        agent_id=agent,
        resolved_at=created + timedelta(minutes=resolved_after) if resolved_after else None,
        sla_target_minutes=sla,
        device_id=device,
    )


def make_insights(ticket, topic):
    return TextInsights(ticket_id=ticket.ticket_id, language="english",
                        description_topic=topic)


class TestGradient:
    def test_analytic_matches_central_differences(self):
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(100):
            n, d = rng.integers(3, 20), rng.integers(1, 8)
            x = rng.normal(size=(n, d))
            y = rng.integers(0, 2, size=n).astype(float)
            w = rng.normal(size=d)
            b = float(rng.normal())
            _, grad_w, grad_b = sla_loss_and_gradient(x, y, w, b)
            eps = 1e-6
            for j in range(d):
                step = np.zeros(d)
                step[j] = eps
                hi = sla_loss_and_gradient(x, y, w + step, b)[0]
                lo = sla_loss_and_gradient(x, y, w - step, b)[0]
                numeric = (hi - lo) / (2 * eps)
                denom = max(abs(numeric), abs(grad_w[j]), 1e-8)
                worst = max(worst, abs(numeric - grad_w[j]) / denom)
            hi = sla_loss_and_gradient(x, y, w, b + eps)[0]
            lo = sla_loss_and_gradient(x, y, w, b - eps)[0]
            numeric = (hi - lo) / (2 * eps)
            denom = max(abs(numeric), abs(grad_b), 1e-8)
            worst = max(worst, abs(numeric - grad_b) / denom)
        assert worst < 1e-5


class TestTrainSla:
    def separable_vectors(self, n=400, seed=1):
        rng = np.random.default_rng(seed)
        vectors = []
        for i in range(n):
            label = bool(i % 2)
            base = 2.0 if label else -2.0
            values = np.array([base + rng.normal(0, 0.3), rng.normal()])
            vectors.append(FeatureVector(f"T{i}", values, label))
        return vectors

    def test_separable_accuracy(self):
        vectors = self.separable_vectors()
        dictionary = FeatureDictionary(("x0", "x1"), {})
        model = train_sla(vectors, dictionary, epochs=300)
        correct = 0
        for v in vectors:
            _, predicted = predict_sla(model, v, dictionary)
            correct += predicted == v.label
        assert correct / len(vectors) >= 0.99

    def test_loss_trace_monotone(self):
        vectors = self.separable_vectors(seed=3)
        dictionary = FeatureDictionary(("x0", "x1"), {})
        model = train_sla(vectors, dictionary, epochs=100)
        for a, b in zip(model.loss_trace, model.loss_trace[1:]):
            assert b <= a + 1e-6

    def test_single_class_rejected(self):
        vectors = [FeatureVector("a", np.array([1.0]), True)] * 3
        with pytest.raises(ValueError):
            train_sla(vectors, FeatureDictionary(("x",), {}))

    def test_dictionary_hash_guard(self):
        vectors = self.separable_vectors(n=50, seed=5)
        dictionary = FeatureDictionary(("x0", "x1"), {})
        model = train_sla(vectors, dictionary, epochs=10)
        other = FeatureDictionary(("x0", "renamed"), {})
        with pytest.raises(ValueError):
            predict_sla(model, vectors[0], other)

    def test_model_roundtrip(self, tmp_path):
        vectors = self.separable_vectors(n=50, seed=9)
        dictionary = FeatureDictionary(("x0", "x1"), {})
        model = train_sla(vectors, dictionary, epochs=10)
        save_sla_model(model, tmp_path / "m.json")
        loaded = load_sla_model(tmp_path / "m.json")
        assert np.allclose(loaded.weights, model.weights)
        assert loaded.dictionary_hash == model.dictionary_hash


class TestFeatures:
    def test_label_definition_and_unknown_slot(self):
        t1 = make_ticket(1, T0, resolved_after=100, sla=60)
        t2 = make_ticket(2, T0, resolved_after=30, sla=60)
        t3 = make_ticket(3, T0)  # unresolved: no label
        insights = {t.ticket_id: make_insights(t, "net") for t in (t1, t2, t3)}
        vectors, dictionary = assemble_features([t1, t2, t3], insights)
        assert [v.label for v in vectors] == [True, False, None]

        unseen = make_ticket(4, T0, category="brand-new")
        insights[unseen.ticket_id] = make_insights(unseen, "net")
        encoded, _ = assemble_features([unseen], insights, dictionary)
        names = dictionary.names
        idx = names.index("category=<unknown>")
        assert encoded[0].values[idx] == 1.0

    def test_missing_insights_rejected(self):
        t = make_ticket(1, T0)
        with pytest.raises(KeyError):
            assemble_features([t], {})


class TestAgents:
    def test_shrinkage_formula(self):
        # agent a: two 100-minute resolutions; pooled topic mean is 200
        tickets = [
            make_ticket(1, T0, agent="a", resolved_after=100),
            make_ticket(2, T0, agent="a", resolved_after=100),
            make_ticket(3, T0, agent="b", resolved_after=300),
            make_ticket(4, T0, agent="b", resolved_after=300),
        ]
        insights = {t.ticket_id: make_insights(t, "net") for t in tickets}
        profiles = build_agent_profiles(tickets, insights, shrinkage=10.0)
        pooled = 200.0
        expected = (2 * 100.0 + 10.0 * pooled) / 12.0
        assert profiles["a"].shrunken_means["net"] == pytest.approx(expected)

    def test_recommendation_orders_by_expected_time(self):
        tickets = [
            make_ticket(1, T0, agent="fast", resolved_after=10),
            make_ticket(2, T0, agent="slow", resolved_after=1000),
        ]
        insights = {t.ticket_id: make_insights(t, "net") for t in tickets}
        profiles = build_agent_profiles(tickets, insights)
        ranked = recommend_agent(profiles, "net", ["slow", "fast"])
        assert [a for a, _ in ranked] == ["fast", "slow"]
        assert ranked[0][1] < ranked[1][1]

    def test_empty_eligible_set(self):
        with pytest.raises(ValueError):
            recommend_agent({}, "net", [])


class TestMtbf:
    def test_evenly_spaced_failures_exact(self):
        tickets = [
            make_ticket(i, T0 + timedelta(minutes=60 * i), device="D1",
                        resolved_after=30)
            for i in range(5)
        ]
        reports = compute_mtbf(tickets)
        assert len(reports) == 1
        r = reports[0]
        assert r.failure_count == 5
        assert r.mtbf_minutes == pytest.approx(60.0)
        assert r.mttr_minutes == pytest.approx(30.0)
        assert r.availability == pytest.approx(60.0 / 90.0)

    def test_single_failure_undefined_mtbf(self):
        reports = compute_mtbf([make_ticket(1, T0, device="D1")])
        assert reports[0].mtbf_minutes is None
        assert reports[0].availability is None

    def test_grouping_key(self):
        tickets = [
            make_ticket(1, T0, device="D1", category="a"),
            make_ticket(2, T0, device="D1", category="b"),
        ]
        assert len(compute_mtbf(tickets)) == 2


def brute_force_rules(tickets, insights, window_minutes, min_support, min_confidence):
    """Definition transcribed directly: per-ticket forward windows."""
    window = timedelta(minutes=window_minutes)
    topical = sorted(
        (t for t in tickets if insights[t.ticket_id].description_topic),
        key=lambda t: (t.created_at, t.ticket_id),
    )
    topic = {t.ticket_id: insights[t.ticket_id].description_topic for t in topical}
    rows = []
    for t in topical:
        followers = [
            u for u in topical
            if timedelta(0) < u.created_at - t.created_at <= window
        ]
        rows.append((topic[t.ticket_id], {topic[u.ticket_id] for u in followers}, followers))
    n = len(rows)
    pair, ante, base = Counter(), Counter(), Counter()
    votes = defaultdict(Counter)
    for a, cs, followers in rows:
        ante[a] += 1
        for c in cs:
            pair[(a, c)] += 1
            base[c] += 1
            for u in followers:
                if topic[u.ticket_id] == c:
                    votes[(a, c)][u.assignment_group] += 1
    out = {}
    for (a, c), k in pair.items():
        support = k / n
        confidence = k / ante[a]
        lift = confidence / (base[c] / n)
        if support >= min_support and confidence >= min_confidence:
            v = votes[(a, c)]
            group = min(v, key=lambda g: (-v[g], g))
            out[(a, c)] = (support, confidence, lift, group)
    return out


class TestRules:
    def random_scenario(self, rng):
        topics = [f"top{i}" for i in range(rng.randint(2, 12))]
        groups = ["g1", "g2", "g3"]
        tickets, insights = [], {}
        clock = T0
        for i in range(rng.randint(10, 60)):
            clock += timedelta(minutes=rng.randint(1, 120))
            t = make_ticket(i, clock, group=rng.choice(groups))
            tickets.append(t)
            insights[t.ticket_id] = make_insights(
                t, rng.choice(topics) if rng.random() < 0.9 else None
            )
        return tickets, insights

    def test_matches_brute_force(self):
        rng = random.Random(29)
        for _ in range(30):
            tickets, insights = self.random_scenario(rng)
            rules = mine_propagation_rules(
                tickets, insights, window_minutes=120,
                min_support=0.05, min_confidence=0.2,
            )
            expected = brute_force_rules(tickets, insights, 120, 0.05, 0.2)
            assert {(r.antecedent, r.consequent) for r in rules} == set(expected)
            for r in rules:
                s, c, l, g = expected[(r.antecedent, r.consequent)]
                assert r.support == pytest.approx(s, abs=1e-12)
                assert r.confidence == pytest.approx(c, abs=1e-12)
                assert r.lift == pytest.approx(l, abs=1e-12)
                assert r.recommended_group == g

    def test_sorted_by_confidence(self):
        rng = random.Random(31)
        tickets, insights = self.random_scenario(rng)
        rules = mine_propagation_rules(tickets, insights, 120, 0.01, 0.0)
        confs = [r.confidence for r in rules]
        assert confs == sorted(confs, reverse=True)

    def test_flag_ticket(self):
        rng = random.Random(37)
        tickets, insights = self.random_scenario(rng)
        rules = mine_propagation_rules(tickets, insights, 120, 0.01, 0.0)
        if rules:
            topic = rules[0].antecedent
            hits = flag_ticket(rules, topic)
            assert hits and all(r.antecedent == topic for r in hits)
        assert flag_ticket(rules, None) == []

    def test_window_validation(self):
        with pytest.raises(ValueError):
            mine_propagation_rules([], {}, window_minutes=0)


class TestDeviceStats:
    def test_per_hour_stats(self):
        samples = [
            ("D1", T0.replace(hour=9), 0.2),
            ("D1", T0.replace(hour=9, minute=30), 0.4),
            ("D1", T0.replace(hour=10), 0.8),
        ]
        stats = device_utilization_stats(samples)
        nine = next(s for s in stats if s.hour == 9)
        assert nine.mean == pytest.approx(0.3)
        assert nine.stddev == pytest.approx(0.1)
        assert nine.peak == 0.4

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            device_utilization_stats([("D1", T0, 1.5)])
