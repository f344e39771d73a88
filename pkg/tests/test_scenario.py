import numpy as np
import pytest

from loglinear import scenario
from loglinear.errors import ScenarioError
from loglinear.signals import DisturbanceBank, DisturbanceSignal, random_bank

MIN = {"name": "m", "waypoints": [{"x": 0, "y": 0, "t": 0}, {"x": 38, "y": 0, "t": 2}],
       "disturbance": {"amplitude": [1, 1, 0.1]}}


def test_defaults_fill_in():
    sc = scenario.from_dict(MIN)
    assert sc.seed == scenario.DEFAULT_SEED
    assert sc.data["invariant"]["n_samp"] == 2000
    assert sc.data["lqr"]["R"] == [1.0, 1.0, 1.0]
    np.testing.assert_allclose(sc.nominal_input(), [19.0, 0.0, 0.0])
    assert sc.obstacles() == []


@pytest.mark.parametrize("bad", [
    {"waypoints": []},
    {"disturbance": {"amplitude": [1, 1]}},
    {"disturbance": {"amplitude": [1, 1, 0.1], "kind": "gust"}},
    {"simulation": {"dt": 0}},
    {"obstacles": [{"name": "x", "xmin": 0}]},
])
def test_schema_errors(bad):
    with pytest.raises(ScenarioError):
        scenario.from_dict({**MIN, **bad})


def test_bundled_scenarios(small, large):
    assert small.name == "small-disturbance" and large.name == "large-disturbance"
    np.testing.assert_allclose(small.w_bounds, [1, 1, 0.1])
    np.testing.assert_allclose(large.w_bounds, [5, 5, 0.1])
    assert [o.name for o in small.obstacles()] == [o.name for o in large.obstacles()]
    with pytest.raises(ScenarioError):
        scenario.load("no-such-scenario")


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ScenarioError):
        scenario.load(str(p))


def test_disturbance_mapping(small, rng):
    d = small.disturbance()
    assert d.kind == "sinusoid" and d.amplitude == (1.0, 1.0, 0.1)
    bank = small.disturbance_bank(6, rng)
    assert {s.kind for s in bank.signals} == {"sinusoid", "square"}


def test_signal_values():
    s = DisturbanceSignal("sinusoid", (1.0, 2.0, 0.1), 0.5)
    np.testing.assert_allclose(s(0.5), [1.0, 2.0, 0.1])
    q = DisturbanceSignal("square", (1.0, 2.0, 0.1), 0.5)
    np.testing.assert_allclose(q(1.5), [-1.0, -2.0, -0.1])
    with pytest.raises(ValueError):
        DisturbanceSignal("gust")
    with pytest.raises(ValueError):
        DisturbanceSignal("sinusoid", (-1, 0, 0))


def test_bank_matches_signals_and_bounds(rng):
    bank = random_bank(7, (1.0, 1.0, 0.1), rng)
    t = np.linspace(0, 5, 51)
    vals = bank(t)
    assert vals.shape == (51, 7, 3)
    for k, s in enumerate(bank.signals):
        np.testing.assert_allclose(vals[:, k], s(t), atol=1e-15)
    assert np.all(np.abs(vals) <= np.array([1.0, 1.0, 0.1]) + 1e-15)
    assert len(DisturbanceBank([])) == 0
