from __future__ import annotations

import dataclasses
import json

import numpy as np
import pytest

from ricciflow.errors import ParameterError, ParseError, TargetError
from ricciflow.flow import ControlConfig, initial_state, simulate
from ricciflow.graph import WeightedGraph, generate_scale_free
from ricciflow.schedule import (
    InputEvent,
    InputSchedule,
    apply_event,
    incident_edges,
    load_schedule,
    parse_inline_schedule,
    preset_schedule,
    resolve_targets,
)


def star_graph():
    return WeightedGraph.from_edges([("c", x) for x in "abd"])


class TestInputEvent:
    def test_requires_one_directive(self):
        with pytest.raises(ParameterError):
            InputEvent(iteration=0, magnitude=1.0)
        with pytest.raises(ParameterError):
            InputEvent(iteration=0, magnitude=1.0, targets=("a",), top_k=1)

    def test_rejects_bad_fields(self):
        with pytest.raises(ParameterError):
            InputEvent(iteration=-1, magnitude=1.0, top_k=1)
        with pytest.raises(ParameterError):
            InputEvent(iteration=0, magnitude=float("nan"), top_k=1)
        with pytest.raises(ParameterError):
            InputEvent(iteration=0, magnitude=1.0, top_k=0)


class TestSchedule:
    def test_sorted_by_iteration(self):
        s = InputSchedule(
            (
                InputEvent(iteration=5, magnitude=1.0, top_k=1),
                InputEvent(iteration=2, magnitude=2.0, top_k=1),
            )
        )
        assert [e.iteration for e in s.events] == [2, 5]
        assert s.max_iteration == 5

    def test_duplicate_rejected(self):
        with pytest.raises(ParameterError):
            InputSchedule(
                (
                    InputEvent(iteration=2, magnitude=1.0, top_k=1),
                    InputEvent(iteration=2, magnitude=2.0, top_k=1),
                )
            )

    def test_events_at(self):
        s = InputSchedule((InputEvent(iteration=3, magnitude=1.0, top_k=1),))
        assert s.events_at(3) == [s.events[0]]
        assert s.events_at(2) == []

    def test_json_round_trip(self):
        s = InputSchedule(
            (
                InputEvent(iteration=3, magnitude=-2.0, top_k=2),
                InputEvent(iteration=7, magnitude=1.5, targets=("a", "b")),
            )
        )
        doc = s.to_json_obj()
        assert InputSchedule.from_json_obj(doc) == s

    def test_load_schedule_file(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps([{"iteration": 4, "p": 2.0, "top_k": 1}]))
        s = load_schedule(str(p))
        assert s.events[0].iteration == 4
        bad = tmp_path / "bad.json"
        bad.write_text('{"not": "a list"}')
        with pytest.raises(ParseError):
            load_schedule(str(bad))


class TestTargets:
    def test_top_k_star(self):
        ev = InputEvent(iteration=0, magnitude=1.0, top_k=1)
        assert resolve_targets(ev, star_graph()) == ["c"]

    def test_explicit_pass_through(self):
        ev = InputEvent(iteration=0, magnitude=1.0, targets=("a", "d"))
        assert resolve_targets(ev, star_graph()) == ["a", "d"]

    def test_unknown_node(self):
        ev = InputEvent(iteration=0, magnitude=1.0, targets=("zz",))
        with pytest.raises(TargetError):
            resolve_targets(ev, star_graph())

    def test_top_k_too_large(self):
        ev = InputEvent(iteration=0, magnitude=1.0, top_k=5)
        with pytest.raises(TargetError):
            resolve_targets(ev, star_graph())


class TestApplyEvent:
    def _state(self, g):
        return initial_state(g, ControlConfig())

    def test_zero_magnitude_no_change(self):
        g = star_graph()
        state = self._state(g)
        out = apply_event(state, InputEvent(iteration=0, magnitude=0.0, top_k=1), g)
        assert np.array_equal(out.lam, state.lam)

    def test_star_center_hits_all_edges(self):
        g = star_graph()
        state = self._state(g)
        out = apply_event(state, InputEvent(iteration=0, magnitude=1.0, top_k=1), g)
        assert np.all(out.lam == 1.0)

    def test_additive_cancellation(self):
        g = star_graph()
        state = self._state(g)
        plus = InputEvent(iteration=0, magnitude=2.0, targets=("c",))
        minus = InputEvent(iteration=1, magnitude=-2.0, targets=("c",))
        out = apply_event(apply_event(state, plus, g), minus, g)
        assert np.array_equal(out.lam, state.lam)

    def test_edge_with_both_endpoints_targeted_hit_once(self):
        g = WeightedGraph.from_edges([(0, 1), (1, 2)])
        state = self._state(g)
        ev = InputEvent(iteration=0, magnitude=3.0, targets=(0, 1))
        out = apply_event(state, ev, g)
        assert out.lam[g.topology.edge_index[(0, 1)]] == 3.0

    def test_order_independent_within_iteration(self):
        g = generate_scale_free(20, 2, seed=1)
        state = self._state(g)
        e1 = InputEvent(iteration=0, magnitude=1.5, top_k=2)
        e2 = InputEvent(iteration=0, magnitude=-0.5, targets=(g.nodes[3],))
        a = apply_event(apply_event(state, e1, g), e2, g)
        b = apply_event(apply_event(state, e2, g), e1, g)
        assert np.array_equal(a.lam, b.lam)

    def test_incident_edges_sorted_unique(self):
        g = WeightedGraph.from_edges([(0, 1), (1, 2), (0, 2)])
        ids = incident_edges(g, [0, 1])
        assert list(ids) == sorted(set(ids))
        assert len(ids) == 3


class TestPresets:
    def test_ramp(self):
        s = preset_schedule("ramp")
        assert [(e.iteration, e.magnitude) for e in s.events] == [
            (30, -2.0),
            (75, 2.0),
            (120, 4.0),
            (175, -4.0),
        ]
        assert all(e.top_k == 1 for e in s.events)

    def test_ramp_cutoff(self):
        s = preset_schedule("ramp_cutoff")
        assert [(e.iteration, e.magnitude) for e in s.events] == [
            (30, -2.0),
            (75, 2.0),
            (120, 0.0),
            (175, 0.0),
        ]

    def test_magnitude_event_times(self):
        s = preset_schedule("magnitude", theta=5)
        assert [(e.iteration, e.magnitude) for e in s.events] == [
            (30, -2.0),
            (75, 2.0),
            (100, 5.0),
            (200, -5.0),
        ]

    def test_magnitude_requires_theta(self):
        with pytest.raises(ParameterError):
            preset_schedule("magnitude")
        with pytest.raises(ParameterError):
            preset_schedule("magnitude", theta=6)

    def test_multi_hub(self):
        s = preset_schedule("multi_hub", top_k=4)
        assert [(e.iteration, e.magnitude) for e in s.events] == [
            (30, -2.0),
            (75, 2.0),
            (100, 4.0),
            (200, -4.0),
        ]
        assert all(e.top_k == 4 for e in s.events)

    def test_unknown_variant(self):
        with pytest.raises(ParameterError):
            preset_schedule("warp")


class TestInlineShorthand:
    def test_documented_example(self):
        s = parse_inline_schedule("30:-2,75:2,120:4,175:-4@top1")
        assert [(e.iteration, e.magnitude) for e in s.events] == [
            (30, -2.0),
            (75, 2.0),
            (120, 4.0),
            (175, -4.0),
        ]
        assert all(e.top_k == 1 for e in s.events)

    def test_default_targets_top1(self):
        s = parse_inline_schedule("10:1.5")
        assert s.events[0].top_k == 1

    def test_bad_chunks(self):
        with pytest.raises(ParseError):
            parse_inline_schedule("10:")
        with pytest.raises(ParseError):
            parse_inline_schedule("10:1@hub")


class TestScheduleFlowInteraction:
    def test_zero_schedule_matches_no_schedule(self):
        cfg = ControlConfig(dt=0.05)
        g1 = generate_scale_free(30, 2, seed=2)
        g2 = generate_scale_free(30, 2, seed=2)
        sched = InputSchedule((InputEvent(iteration=3, magnitude=0.0, top_k=1),))
        a = simulate(g1, sched, cfg, 20)
        b = simulate(g2, InputSchedule(()), cfg, 20)
        av = [r.as_values()[:9] for r in a.rows]  # drop marker column
        bv = [r.as_values()[:9] for r in b.rows]
        assert av == bv

    def test_frozen_lambda_after_schedule(self):
        g = generate_scale_free(30, 2, seed=2)
        sched = InputSchedule(
            (
                InputEvent(iteration=2, magnitude=2.0, top_k=1),
                InputEvent(iteration=5, magnitude=-2.0, top_k=1),
            )
        )
        tel = simulate(g, sched, ControlConfig(), 10)
        # cumulative input returned to zero, so error totals collapse to
        # the tracking term alone
        last = tel.rows[-1]
        assert last.gamma_total == 0.0
        assert last.v_total == last.sigma_hat
