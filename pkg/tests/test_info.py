import numpy as np
import pytest

import rdcomp as rd
from conftest import card_game_rate, card_paper_channel, random_recovery_channel, random_spec

# direct evaluation of the entropy formula at p = 1/4
H_QUARTER = 0.8112781244591328


class TestBinaryEntropy:
    def test_degenerate(self):
        assert rd.binary_entropy(0.0) == 0.0
        assert rd.binary_entropy(1.0) == 0.0

    def test_symmetry_peak(self):
        assert rd.binary_entropy(0.5) == 1.0

    def test_quarter(self):
        assert rd.binary_entropy(0.25) == pytest.approx(0.811278, abs=1e-6)
        assert rd.binary_entropy(0.25) == pytest.approx(H_QUARTER, abs=1e-15)

    def test_domain_errors(self):
        for bad in (-0.1, 1.1):
            with pytest.raises(rd.DomainError):
                rd.binary_entropy(bad)


class TestConditionalMutualInformation:
    def test_identical_columns_vanish(self, card_spec):
        cond = np.tile(np.array([[0.3], [0.2], [0.5]]), (1, 3))
        assert rd.conditional_mutual_information(card_spec, rd.AuxChannel(cond)) == 0.0

    def test_card_optimum_at_one_twelfth(self, card_spec):
        ch = card_paper_channel(1.0 / 12.0)
        got = rd.conditional_mutual_information(card_spec, ch)
        assert got == pytest.approx(0.095437, abs=1e-5)
        assert got == pytest.approx(card_game_rate(1.0 / 12.0), abs=1e-12)

    def test_card_optimum_at_zero(self, card_spec):
        ch = card_paper_channel(0.0)
        got = rd.conditional_mutual_information(card_spec, ch)
        assert got == pytest.approx(0.540852, abs=1e-5)
        assert got == pytest.approx(card_game_rate(0.0), abs=1e-12)

    def test_nonnegative_random(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            spec = random_spec(rng)
            ch = random_recovery_channel(rng, spec, interior=0.0)
            assert rd.conditional_mutual_information(spec, ch) >= 0.0

    def test_zero_iff_columns_equal(self, card_spec):
        rng = np.random.default_rng(22)
        ch = random_recovery_channel(rng, card_spec)
        if rd.conditional_mutual_information(card_spec, ch) == 0.0:
            spread = np.abs(ch.cond - ch.cond[:, :1]).max()
            assert spread < 1e-12

    def test_convex_in_channel(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            spec = random_spec(rng)
            a = random_recovery_channel(rng, spec)
            b = random_recovery_channel(rng, spec)
            t = float(rng.uniform())
            mix = rd.AuxChannel(t * a.cond + (1 - t) * b.cond, atom_meta=a.atom_meta)
            lhs = rd.conditional_mutual_information(spec, mix)
            rhs = t * rd.conditional_mutual_information(spec, a) + (
                1 - t
            ) * rd.conditional_mutual_information(spec, b)
            assert lhs <= rhs + 1e-12

    def test_dimension_mismatch(self, card_spec):
        with pytest.raises(rd.DimensionMismatch):
            rd.conditional_mutual_information(
                card_spec, rd.AuxChannel(np.ones((2, 2)) / 2.0)
            )


class TestExpectedDistortion:
    def test_card_family_tightness(self, card_spec):
        # the optimizing family meets the distortion budget with equality
        for d in (0.0, 1.0 / 24.0, 1.0 / 12.0, 1.0 / 8.0):
            ch = card_paper_channel(d)
            dec = rd.decoder_from_atoms(ch)
            got = rd.expected_distortion(card_spec, ch, dec)
            p1, p3 = 1.0 - 3.0 * d, 3.0 * d
            assert got == pytest.approx((1.0 - p1 + p3) / 6.0, abs=1e-15)
            assert got == pytest.approx(d, abs=1e-15)

    def test_perfect_decoder_is_zero(self, card_spec):
        # one atom per source symbol, each decoding f(x, .) exactly
        cond = np.eye(3)
        meta = tuple(
            rd.CandidateRecovery(tuple(int(card_spec.func[x, y]) for y in range(3)))
            for x in range(3)
        )
        ch = rd.AuxChannel(cond, atom_meta=meta)
        dec = rd.decoder_from_atoms(ch)
        assert rd.expected_distortion(card_spec, ch, dec) == 0.0

    def test_constant_atom_hand_sum(self, card_spec):
        # recovery (1,1,0) errs only on the (x=1, y=2) cell: total 1/6
        ch = rd.AuxChannel(
            np.ones((1, 3)), atom_meta=(rd.CandidateRecovery((1, 1, 0)),)
        )
        dec = rd.decoder_from_atoms(ch)
        assert rd.expected_distortion(card_spec, ch, dec) == pytest.approx(
            1.0 / 6.0, abs=1e-15
        )

    def test_bad_decoder_shape(self, card_spec):
        ch = card_paper_channel(0.1)
        with pytest.raises(rd.DimensionMismatch):
            rd.expected_distortion(card_spec, ch, rd.DecoderMap(np.zeros((2, 2), int)))


class TestAtomPermutationInvariance:
    def test_both_measures(self):
        rng = np.random.default_rng(24)
        for _ in range(15):
            spec = random_spec(rng)
            ch = random_recovery_channel(rng, spec)
            dec = rd.decoder_from_atoms(ch)
            perm = rng.permutation(ch.num_atoms)
            ch_p = rd.AuxChannel(
                ch.cond[perm], atom_meta=tuple(ch.atom_meta[i] for i in perm)
            )
            dec_p = rd.DecoderMap(dec.table[perm])
            assert rd.conditional_mutual_information(
                spec, ch_p
            ) == pytest.approx(rd.conditional_mutual_information(spec, ch), abs=1e-12)
            assert rd.expected_distortion(spec, ch_p, dec_p) == pytest.approx(
                rd.expected_distortion(spec, ch, dec), abs=1e-12
            )


class TestAuxChannelValidation:
    def test_non_stochastic_rejected(self):
        with pytest.raises(rd.InvalidChannel):
            rd.AuxChannel(np.array([[0.5, 0.5], [0.1, 0.5]]))

    def test_meta_length_checked(self):
        with pytest.raises(rd.DimensionMismatch):
            rd.AuxChannel(np.ones((1, 2)), atom_meta=(None, None))
