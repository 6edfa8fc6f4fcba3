import json

import numpy as np
import pytest

import rdcomp as rd
from conftest import random_spec


def card_dict():
    return rd.spec_to_dict(rd.card_game_spec())


class TestCardGameSpec:
    def test_pmf_values(self, card_spec):
        assert card_spec.pmf[0, 0] == 0.0
        assert card_spec.pmf[0, 1] == pytest.approx(1.0 / 6.0, abs=0)
        assert float(card_spec.pmf.sum()) == pytest.approx(1.0, abs=1e-15)

    def test_function_table(self, card_spec):
        # f(3, 1) = 1 since 3 > 1
        assert card_spec.func[2, 0] == 1
        assert card_spec.func[0, 2] == 0
        assert np.array_equal(np.diag(card_spec.func), [0, 0, 0])

    def test_hamming_distortion(self, card_spec):
        assert np.array_equal(card_spec.dist, [[0.0, 1.0], [1.0, 0.0]])


class TestValidation:
    def test_idempotent(self, card_spec):
        again = rd.validate_spec(card_spec)
        assert again == card_spec

    def test_zero_marginal_row(self):
        raw = card_dict()
        raw["p_xy"][1] = [0.0, 0.0, 0.0]
        with pytest.raises(rd.ZeroMarginalRow):
            rd.validate_spec(raw)

    def test_not_normalized(self):
        raw = card_dict()
        raw["p_xy"] = (np.array(raw["p_xy"]) * 0.5).tolist()
        with pytest.raises(rd.PMFNotNormalized):
            rd.validate_spec(raw)

    def test_negative_probability(self):
        raw = card_dict()
        raw["p_xy"][0][0] = -0.1
        raw["p_xy"][0][1] = float(raw["p_xy"][0][1]) + 0.1
        with pytest.raises(rd.NegativeProbability):
            rd.validate_spec(raw)

    def test_function_index_out_of_range(self):
        raw = card_dict()
        raw["f"][0][0] = 5
        with pytest.raises(rd.IndexOutOfRange):
            rd.validate_spec(raw)

    def test_dimension_mismatch(self):
        raw = card_dict()
        raw["p_xy"] = [[0.5, 0.5]]
        with pytest.raises(rd.DimensionMismatch):
            rd.validate_spec(raw)

    def test_negative_distortion(self):
        raw = card_dict()
        raw["d"][0][1] = -1.0
        with pytest.raises(rd.InvalidDistortionEntry):
            rd.validate_spec(raw)

    def test_non_finite_distortion(self):
        raw = card_dict()
        raw["d"][0][1] = float("inf")
        with pytest.raises(rd.InvalidDistortionEntry):
            rd.validate_spec(raw)

    def test_duplicate_labels(self):
        raw = card_dict()
        raw["x_alphabet"] = ["1", "1", "3"]
        with pytest.raises(rd.SpecFormatError):
            rd.validate_spec(raw)

    def test_missing_keys(self):
        with pytest.raises(rd.SpecFormatError):
            rd.validate_spec({"p_xy": [[1.0]]})


class TestFileRoundTrip:
    def test_save_load_equal(self, tmp_path, card_spec):
        path = tmp_path / "card.json"
        rd.save_spec(card_spec, path)
        again = rd.load_spec(path)
        assert again == card_spec

    def test_random_specs_round_trip(self, tmp_path):
        rng = np.random.default_rng(11)
        for i in range(10):
            spec = random_spec(rng, hamming=False, num_z=3, num_zhat=2)
            path = tmp_path / f"s{i}.json"
            rd.save_spec(spec, path)
            assert rd.load_spec(path) == spec

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(rd.SpecFormatError):
            rd.load_spec(path)

    def test_file_format_keys(self, tmp_path, card_spec):
        path = tmp_path / "card.json"
        rd.save_spec(card_spec, path)
        raw = json.loads(path.read_text())
        assert set(raw) == {
            "x_alphabet", "y_alphabet", "z_alphabet", "zhat_alphabet",
            "p_xy", "f", "d",
        }


class TestZeroRateDistortion:
    def test_card_game_value(self, card_spec):
        assert rd.zero_rate_distortion(card_spec) == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_zero_measure(self, card_spec):
        spec = rd.replace_distortion(card_spec, np.zeros((2, 2)))
        assert rd.zero_rate_distortion(spec) == 0.0

    def test_binary_uniform_constant_y(self, shannon_spec):
        # by hand: both constant reconstructions err on one of two
        # equiprobable symbols, so the best zero-rate distortion is 1/2
        assert rd.zero_rate_distortion(shannon_spec) == pytest.approx(0.5, abs=0)

    def test_bounded_by_max_entry(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            spec = random_spec(rng, hamming=False, num_z=3, num_zhat=3)
            assert rd.zero_rate_distortion(spec) <= float(spec.dist.max()) + 1e-15

    def test_zero_when_common_recovery_exists(self):
        # f depends only on y, so a per-y exact reconstruction always exists
        spec = rd.validate_spec(
            {
                "x_alphabet": ["a", "b"],
                "y_alphabet": ["0", "1"],
                "z_alphabet": ["0", "1"],
                "zhat_alphabet": ["0", "1"],
                "p_xy": [[0.25, 0.25], [0.25, 0.25]],
                "f": [[0, 1], [0, 1]],
                "d": [[0.0, 1.0], [1.0, 0.0]],
            }
        )
        assert rd.zero_rate_distortion(spec) == 0.0

    def test_zero_rate_recovery_matches(self, card_spec):
        rec = rd.zero_rate_recovery(card_spec)
        # y=1 forces zhat=1, y=3 forces zhat=0; y=2 ties, lowest index wins
        assert rec.tolist() == [1, 0, 0]


class TestBuiltins:
    def test_registry(self):
        for name in ("card-game", "shannon-binary", "wyner-ziv-identity"):
            spec = rd.builtin_spec(name)
            assert isinstance(spec, rd.ProblemSpec)

    def test_unknown_builtin(self):
        with pytest.raises(rd.SpecFormatError):
            rd.builtin_spec("nope")

    def test_wyner_ziv_marginals(self):
        spec = rd.wyner_ziv_identity_spec()
        assert spec.x_marginal.tolist() == [0.5, 0.5]
        assert spec.pmf[0, 1] == pytest.approx(0.125, abs=0)
