from dataclasses import replace

import numpy as np
import pytest

from onionqrc import harness
from onionqrc.data import (CorrosionDataset, CorrosionSample, default_zone_params,
                           synth_generate)
from onionqrc.harness import (ExperimentConfig, HarnessError, TrainedModel, benchmark,
                              benchmark_config, evaluate, feature_driver, hybrid_ocqrc,
                              make_config, n_features, parse_model_name, simple_baseline,
                              train_model)
from onionqrc.readout import RidgeModel


def crafted(test_offset=0.0, days=14):
    """One zone: 10 identical training curves, 2 test curves shifted by ``test_offset``."""
    d = np.arange(days)
    base = 0.01 + 0.004 * d
    samples = []
    for k in range(12):
        p = base + (test_offset if k >= 10 else 0.0)
        samples.append(CorrosionSample(1, k, p, 50 + 10 * np.sin(d + k), 20 + 3 * np.cos(d)))
    return CorrosionDataset(samples, {1: [10, 11]})


@pytest.fixture(scope="module")
def small_synth():
    return synth_generate(0)


class TestSimpleBaseline:
    def test_identical_samples(self):
        res = simple_baseline(crafted(0.0))
        assert res.pooled_r2 == 1.0 and res.per_zone[0]["r2"] == 1.0

    def test_offset(self):
        delta = 0.003
        res = simple_baseline(crafted(delta))
        for s in res.per_zone[0]["samples"]:
            ss_res = np.sum((np.array(s["true"]) - np.array(s["predicted"])) ** 2)
            assert ss_res == pytest.approx(10 * delta**2, rel=1e-9)
            assert len(s["predicted"]) == 10 and s["first_day"] == 4

    def test_noiseless_synth_is_perfect(self):
        zones = [replace(z, noise_scale=0.0) for z in default_zone_params()]
        res = simple_baseline(synth_generate(0, zones))
        assert abs(res.pooled_r2 - 1.0) < 1e-9


class TestProtocol:
    def test_shapes(self, small_synth):
        cfg = make_config("oqrc", 3, 1)
        res = harness.run_experiment(cfg, small_synth)
        assert len(res.per_zone) == 4
        for z in res.per_zone:
            assert len(z["samples"]) == 2
            assert all(len(s["predicted"]) == 10 == len(s["true"]) for s in z["samples"])
        true, pred = res.pooled_points()
        assert true.size == 80

    def test_teacher_forced_rows(self, small_synth):
        X, y = harness.teacher_forced(make_config("crc", 3), small_synth.samples[0])
        assert X.shape[0] == 13 == y.size

    def test_constant_mean_predictor(self, small_synth):
        cfg = make_config("oqrc", 2, 1)
        model = train_model(cfg, small_synth)
        true = np.concatenate([s.pitting[4:] for z in small_synth.zones
                               for s in small_synth.test(z)])
        w = np.zeros(cfg.qrc_config().n_features)
        w[-1] = true.mean()
        model.readouts = {z: RidgeModel(w) for z in model.readouts}
        res = evaluate(model, small_synth)
        assert abs(res.pooled_r2) < 1e-12

    def test_pooled_r2_zone_order(self, small_synth):
        res = harness.run_experiment(make_config("crc", 4), small_synth)
        flipped = harness._score([dict(z) for z in reversed(res.per_zone)], {}, 0.0)
        assert flipped.pooled_r2 == res.pooled_r2

    def test_horizon_too_short(self, small_synth):
        cfg = make_config("crc", 3, warmup_days=13)
        model = train_model(cfg, small_synth)
        with pytest.raises(HarnessError, match="no forecast horizon"):
            evaluate(model, small_synth)


class TestTraining:
    def test_oqrc_feature_count(self, small_synth):
        cfg = make_config("oqrc", 6, 1)
        assert cfg.qrc_config().layers[0].a == -0.31 and cfg.qrc_config().layers[0].b == 0.1
        model = train_model(cfg, small_synth)
        assert set(model.readouts) == {1, 2, 3, 4}
        assert all(m.weights.shape == (1, 22) for m in model.readouts.values())

    def test_crc_feature_count(self, small_synth):
        model = train_model(make_config("crc", 6, esn_size=9), small_synth)
        assert all(m.weights.shape == (1, 13) for m in model.readouts.values())

    def test_readouts_differ_per_zone(self, small_synth):
        model = train_model(make_config("crc", 4), small_synth)
        assert not np.allclose(model.readouts[1].weights, model.readouts[2].weights)

    def test_retrain_bit_identical(self, small_synth):
        cfg = make_config("ocqrc", 3, 3)
        a = train_model(cfg, small_synth).to_dict()
        b = train_model(cfg, small_synth).to_dict()
        assert a == b

    def test_roundtrip(self, tmp_path, small_synth):
        model = train_model(make_config("oqrc", 3, 3), small_synth)
        model.save(tmp_path / "m.json")
        back = TrainedModel.load(tmp_path / "m.json")
        assert back.to_dict() == model.to_dict()
        assert evaluate(back, small_synth).to_dict()["pooled_r2"] == \
            evaluate(model, small_synth).to_dict()["pooled_r2"]

    def test_schema_version(self, small_synth):
        d = train_model(make_config("simple"), small_synth).to_dict()
        d["schema_version"] = 99
        with pytest.raises(HarnessError, match="schema version"):
            TrainedModel.from_dict(d)

    def test_config_validation(self):
        with pytest.raises(HarnessError, match="unknown model kind"):
            ExperimentConfig("lstm")
        with pytest.raises(HarnessError, match="needs a qrc"):
            ExperimentConfig("oqrc")
        with pytest.raises(HarnessError, match="needs an esn"):
            ExperimentConfig("crc")


class TestHybrid:
    def test_feature_length(self):
        cfg = make_config("ocqrc", 4, 3, esn_size=7)
        f = feature_driver(cfg)(0.02, 0.5, 0.5)
        assert f.size == n_features(cfg) == 3 * (4 + 6) + 7 + 1

    def test_no_esn_equals_oqrc(self, small_synth):
        hyb = hybrid_ocqrc(make_config("ocqrc", 3, 3, esn_size=0), small_synth)
        ref = harness.run_experiment(make_config("oqrc", 3, 3), small_synth)
        assert hyb.pooled_points()[1].tolist() == ref.pooled_points()[1].tolist()

    def test_no_quantum_layers(self, small_synth):
        cfg = make_config("ocqrc", 3, b_values=[], esn_size=5)
        crc = make_config("crc", 3, esn_size=5)
        s = small_synth.samples[0]
        fh = feature_driver(cfg)
        fc = feature_driver(crc)
        for d in range(5):
            a = fh(s.pitting[d], 0.5, 0.5)
            b = fc(s.pitting[d], 0.5, 0.5)
            np.testing.assert_array_equal(a, np.append(b[4:], 1.0))

    def test_wrong_kind(self, small_synth):
        with pytest.raises(HarnessError, match="ocqrc"):
            hybrid_ocqrc(make_config("oqrc", 2, 1), small_synth)


class TestBenchmark:
    def test_names(self):
        assert parse_model_name("oqrc3") == ("oqrc", 3)
        assert parse_model_name("ocqrc") == ("ocqrc", 3)
        assert parse_model_name("crc") == ("crc", 0)
        with pytest.raises(HarnessError):
            parse_model_name("gru")

    def test_crc_size_convention(self):
        assert benchmark_config("crc", 4).esn["size"] == 4
        assert benchmark_config("crc", 4, crc_size="exponential").esn["size"] == 16

    def test_table_shape(self):
        rows = benchmark(["simple", "crc", "oqrc1"], [2, 3], [0], synth_generate)
        assert [(r["model"], r["qubits"]) for r in rows] == [
            ("simple", 2), ("simple", 3), ("crc", 2), ("crc", 3), ("oqrc1", 2), ("oqrc1", 3)]
        assert all(np.isfinite(r["mean_pooled_r2"]) for r in rows)


def test_result_json_schema(small_synth):
    d = harness.run_experiment(make_config("crc", 3), small_synth).to_dict()
    assert {"config", "per_zone", "pooled_r2", "runtime_seconds"} <= set(d)
    z = d["per_zone"][0]
    assert {"zone", "r2", "samples"} <= set(z)
    assert {"sample", "predicted", "true"} <= set(z["samples"][0])
    assert d["config"]["kind"] == "crc" and "normalization" in d["config"]
