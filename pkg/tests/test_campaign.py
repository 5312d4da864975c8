import json
import math

import numpy as np
import pytest

from fourieropt.campaign import (
    CampaignConfig,
    CampaignRecord,
    TrialRecord,
    decision_bounds,
    evaluate_cost,
    extend_vector,
    relative_change,
    run_campaign,
    run_iterative,
    run_noniterative,
    simulate,
    simulate_trajectory,
    summarize,
    vector_to_control,
)
from fourieropt.evolution import DeConfig
from fourieropt.fourier_control import FourierControl

CFG = CampaignConfig()
V2 = np.array([2.05, 2.70, 2.09, 1.75, 1.0, 1.0])


def tiny(**kw):
    base = dict(k_min=1, k_max=2, trials=1, tf=20.0,
                de=DeConfig(population_size=6, max_generations=3))
    base.update(kw)
    return CampaignConfig(**base)


def rec(k, trial, d):
    return TrialRecord(k, trial, np.zeros(2 * k + 2), -d, d, 0.0, 0, 0, 0)


class TestBounds:
    def test_layout(self):
        b = decision_bounds(2)
        assert b.dim == 6
        assert np.allclose(b.lower, [0, 0, 0, 2 * math.pi / 100, 1e-6, 1e-6])
        assert np.allclose(b.upper, [math.pi, math.pi, 2 * math.pi, 10, 1, 1])

    def test_k1(self):
        b = decision_bounds(1)
        assert b.dim == 4 and b.upper[0] == 2 * math.pi


class TestCost:
    def test_zero_control_does_not_move(self):
        ctrl = FourierControl(0.0, np.zeros(2), np.zeros(2), 1.0)
        assert simulate(ctrl, CFG).final_state[2] == 0.0
        # zero-mean span with a vanishing amplitude: u is about 0 for all t
        v = np.array([0.0, 0.0, 0.0, 1.0, 0.5, 1e-6])
        ctrl = vector_to_control(v, 2)
        assert np.max(np.abs(ctrl(np.linspace(0, 100, 1001)))) < 1e-5
        assert evaluate_cost(v, 2) == pytest.approx(0.0, abs=1e-4)

    def test_p_floor_finite(self):
        v = np.array([0.3, 1.0, 4.0, 2.0, 1e-6, 0.5])
        j = evaluate_cost(v, 2)
        assert math.isfinite(j) and j <= 0

    def test_control_within_bounds(self):
        rng = np.random.default_rng(0)
        b = decision_bounds(3)
        for _ in range(20):
            v = rng.uniform(b.lower, b.upper)
            u = vector_to_control(v, 3)(np.linspace(0, 100, 10001))
            assert u.min() >= -4 - 1e-9 and u.max() <= 4 + 1e-9

    def test_extension_seed_cost_identity(self):
        rng = np.random.default_rng(1)
        for k in (1, 2, 3):
            b = decision_bounds(k)
            v = rng.uniform(b.lower, b.upper)
            assert evaluate_cost(extend_vector(v, k), k + 1) == pytest.approx(
                evaluate_cost(v, k), abs=1e-9)

    def test_sign_symmetry(self):
        ctrl = vector_to_control(V2, 2)
        z1 = simulate(ctrl).final_state[2]
        z2 = simulate(ctrl.negated()).final_state[2]
        assert z1 * z2 < 0 and abs(abs(z1) - abs(z2)) < 1e-6

    def test_kernel_matches_trajectory(self):
        cfg = CampaignConfig(tf=20.0)
        ctrl = vector_to_control(V2, 2, cfg)
        a = simulate(ctrl, cfg)
        t = simulate_trajectory(ctrl, cfg)
        assert np.max(np.abs(a.final_state - t.final_state)) < 1e-9

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            evaluate_cost(np.zeros(5), 2)


class TestRelativeChange:
    def test_examples(self):
        assert relative_change(5.0, 5.5) == pytest.approx(10.0)
        assert relative_change(4.946, 5.663) == pytest.approx(14.50, abs=0.005)
        assert relative_change(3.0, 3.0) == 0.0

    def test_undefined(self):
        assert math.isnan(relative_change(0.0, 1.0))


class TestSummarize:
    def test_single_trial(self):
        s = summarize([rec(2, 0, 4.9)])
        row = s["rows"][0]
        assert row["sd"] == 0.0 and row["single_trial"] and math.isnan(row["delta"])

    def test_two_trials(self):
        s = summarize([rec(2, 0, 4.9), rec(2, 1, 5.0)])
        assert s["rows"][0]["mean"] == pytest.approx(4.95)
        assert s["rows"][0]["sd"] == pytest.approx(0.0707107, abs=1e-6)

    def test_delta_and_best(self):
        s = summarize([rec(2, 0, 5.0), rec(3, 0, 5.5), rec(2, 1, 4.0), rec(3, 1, 4.0)])
        assert s["rows"][1]["delta"] == pytest.approx(relative_change(4.5, 4.75))
        assert s["delta_matrix"] == [[pytest.approx(10.0), 0.0]]
        assert s["best"] == {"K": 3, "trial": 0, "distance": 5.5}


class TestCampaigns:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            CampaignConfig(k_min=3, k_max=2)
        with pytest.raises(ValueError):
            CampaignConfig(trials=0)
        with pytest.raises(ValueError):
            CampaignConfig(mode="sideways")

    def test_iterative_monotone_and_seeded(self):
        r = run_iterative(tiny(k_max=3, improvement_threshold=None))
        d = [r.distance(k, 0) for k in (1, 2, 3)]
        assert all(b >= a - 1e-9 for a, b in zip(d, d[1:]))
        for x in r.for_k(2) + r.for_k(3):
            assert x.seed_cost is not None and x.cost <= x.seed_cost

    def test_iterative_stops_when_stalled(self):
        r = run_iterative(tiny(k_max=4, improvement_threshold=1e9))
        assert r.harmonics == [1, 2] and r.chain_stops[0] == "stalled at K=2"

    def test_noniterative_single(self):
        r = run_noniterative(tiny(k_min=2, k_max=2))
        assert len(r.records) == 1 and r.records[0].seed_cost is None
        s = r.summary()
        assert len(s["rows"]) == 1 and s["delta_matrix"] == []

    def test_deterministic(self):
        cfg = tiny(trials=2, mode="noniterative")
        a, b = run_campaign(cfg), run_campaign(cfg)
        assert [x.cost for x in a.records] == [x.cost for x in b.records]
        assert a.records[0].de_seed != a.records[2].de_seed

    def test_record_json_round_trip(self):
        r = run_campaign(tiny())
        text = json.dumps(r.to_dict())
        back = CampaignRecord.from_dict(json.loads(text))
        assert [x.to_dict() for x in back.records] == [x.to_dict() for x in r.records]
        assert back.chain_stops == r.chain_stops
