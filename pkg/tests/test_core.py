"""Unit tests for the probability objects and channel algebra."""
import numpy as np
import pytest

from tetensor.core import (
    Alphabet,
    DimensionMismatch,
    DistributionError,
    JointPmf,
    MissingSupport,
    Pmf,
    TransitionTensor,
    UndefinedCondition,
    apply_channel,
    binary_alphabet,
    compose_chain,
    conditional_mutual_information,
    dagger,
    entropy,
    mixed_radix_index,
    mutual_information,
)


class TestAlphabet:
    def test_cardinality_and_index(self):
        a = Alphabet(("a", "b", "c"))
        assert a.cardinality == 3
        assert len(a) == 3
        assert a.index("b") == 1
        with pytest.raises(KeyError):
            a.index("z")

    def test_rejects_duplicates_and_empty(self):
        with pytest.raises(ValueError):
            Alphabet((0, 0))
        with pytest.raises(ValueError):
            Alphabet(())

    def test_power_enumeration_lexicographic(self):
        sq = binary_alphabet().power(2)
        assert sq.symbols == ((0, 0), (0, 1), (1, 0), (1, 1))
        with pytest.raises(ValueError):
            binary_alphabet().power(0)

    def test_power_matches_mixed_radix_order(self):
        # The tuple at flat position mixed_radix_index(t) must be t itself.
        base = Alphabet((0, 1, 2))
        cubed = base.power(3)
        for tup in ((0, 0, 0), (1, 2, 0), (2, 2, 2), (0, 1, 2)):
            flat = mixed_radix_index(tup, (3, 3, 3))
            assert cubed.symbols[flat] == tup


class TestMixedRadixIndex:
    def test_first_axis_most_significant(self):
        assert mixed_radix_index((1, 0), (2, 3)) == 3
        assert mixed_radix_index((1, 2), (2, 3)) == 5
        assert mixed_radix_index((0, 0, 0), (2, 2, 2)) == 0

    def test_bounds(self):
        with pytest.raises(IndexError):
            mixed_radix_index((2, 0), (2, 3))
        with pytest.raises(DimensionMismatch):
            mixed_radix_index((0,), (2, 3))


class TestPmf:
    def test_lookup_and_uniform(self):
        p = Pmf(binary_alphabet(), np.array([0.25, 0.75]))
        assert p[1] == 0.75
        u = Pmf.uniform(Alphabet((0, 1, 2, 3)))
        assert np.allclose(u.probs, 0.25)

    def test_rejects_bad_mass(self):
        with pytest.raises(DistributionError):
            Pmf(binary_alphabet(), np.array([0.6, 0.6]))
        with pytest.raises(DistributionError):
            Pmf(binary_alphabet(), np.array([1.2, -0.2]))
        with pytest.raises(DistributionError):
            Pmf(binary_alphabet(), np.array([np.nan, 1.0]))

    def test_renormalizes_float_drift_only(self):
        # Deviation below 1e-9 is treated as float noise and renormalized.
        drift = 3e-10
        p = Pmf(binary_alphabet(), np.array([0.5, 0.5 + drift]))
        assert abs(p.probs.sum() - 1.0) <= 1e-15
        # Anything larger is rejected as genuinely bad data.
        with pytest.raises(DistributionError):
            Pmf(binary_alphabet(), np.array([0.5, 0.5 + 1e-8]))

    def test_immutable(self):
        p = Pmf(binary_alphabet(), np.array([0.25, 0.75]))
        with pytest.raises(ValueError):
            p.probs[0] = 0.5


class TestJointPmf:
    def test_marginals(self):
        joint = JointPmf(
            (binary_alphabet(), binary_alphabet()),
            np.array([[0.4, 0.1], [0.1, 0.4]]),
        )
        assert np.allclose(joint.marginal(0).probs, [0.5, 0.5])
        assert np.allclose(joint.marginal(1).probs, [0.5, 0.5])

    def test_shape_validation(self):
        with pytest.raises(DimensionMismatch):
            JointPmf((binary_alphabet(),), np.array([[0.5, 0.5]]))


class TestEntropyAndInformation:
    def test_entropy_known_values(self):
        assert entropy(Pmf(binary_alphabet(), np.array([0.5, 0.5]))) == 1.0
        h = entropy(Pmf(binary_alphabet(), np.array([0.9, 0.1])))
        assert abs(h - 0.4689955935892812) < 1e-12
        assert entropy(Pmf(binary_alphabet(), np.array([1.0, 0.0]))) == 0.0

    def test_mutual_information_known_value(self):
        joint = JointPmf(
            (binary_alphabet(), binary_alphabet()),
            np.array([[0.4, 0.1], [0.1, 0.4]]),
        )
        # I = 1 - H2(0.2) for this symmetric joint.
        expected = 1.0 - (-0.2 * np.log2(0.2) - 0.8 * np.log2(0.8))
        assert abs(mutual_information(joint) - expected) < 1e-12
        assert abs(mutual_information(joint) - 0.2780719051126377) < 1e-12

    def test_mutual_information_independent_is_zero(self):
        joint = JointPmf(
            (binary_alphabet(), binary_alphabet()),
            np.outer([0.3, 0.7], [0.6, 0.4]),
        )
        assert abs(mutual_information(joint)) < 1e-15

    def test_conditional_mutual_information(self):
        rng = np.random.default_rng(0)
        block0 = rng.dirichlet(np.ones(4)).reshape(2, 2) * 0.5
        block1 = rng.dirichlet(np.ones(4)).reshape(2, 2) * 0.5
        joint = JointPmf(
            (binary_alphabet(), binary_alphabet(), binary_alphabet()),
            np.stack([block0, block1], axis=2),
        )
        for g, block in ((0, block0), (1, block1)):
            direct = mutual_information(
                JointPmf((binary_alphabet(), binary_alphabet()),
                         block / block.sum())
            )
            assert abs(
                conditional_mutual_information(joint, g) - direct
            ) < 1e-12

    def test_conditional_on_zero_mass_symbol_raises(self):
        probs = np.zeros((2, 2, 2))
        probs[:, :, 0] = 0.25
        joint = JointPmf(
            (binary_alphabet(), binary_alphabet(), binary_alphabet()), probs
        )
        with pytest.raises(UndefinedCondition):
            conditional_mutual_information(joint, 1)


class TestTransitionTensor:
    def test_row_access_and_support(self):
        t = TransitionTensor.from_matrix(
            [[0.9, 0.1], [0.0, 0.0]], support=np.array([True, False])
        )
        assert np.allclose(t.row(0).probs, [0.9, 0.1])
        with pytest.raises(MissingSupport):
            t.row(1)
        assert t.missing_conditions() == [(1,)]

    def test_unsupported_rows_stored_as_zero(self):
        t = TransitionTensor.from_matrix(
            [[0.9, 0.1], [0.7, 0.3]], support=np.array([True, False])
        )
        assert np.all(t.probs[1] == 0.0)

    def test_supported_rows_validated(self):
        with pytest.raises(DistributionError):
            TransitionTensor.from_matrix([[0.9, 0.2], [0.5, 0.5]])

    def test_multi_axis_shape(self):
        probs = np.full((2, 3, 2), 0.5)
        t = TransitionTensor(
            (binary_alphabet(), Alphabet((0, 1, 2))), binary_alphabet(), probs
        )
        assert t.condition_shape == (2, 3)
        assert t.n_condition_axes == 2
        with pytest.raises(DimensionMismatch):
            t.row(0)


class TestApplyChannel:
    def test_pushforward(self):
        channel = TransitionTensor.from_matrix([[0.9, 0.1], [0.2, 0.8]])
        out = apply_channel(Pmf(binary_alphabet(), np.array([0.5, 0.5])),
                            channel)
        assert np.allclose(out.probs, [0.55, 0.45])

    def test_missing_support_raises(self):
        channel = TransitionTensor.from_matrix(
            [[0.9, 0.1], [0.0, 0.0]], support=np.array([True, False])
        )
        with pytest.raises(MissingSupport):
            apply_channel(Pmf(binary_alphabet(), np.array([0.5, 0.5])),
                          channel)
        # Zero mass on the unsupported row is fine.
        out = apply_channel(Pmf(binary_alphabet(), np.array([1.0, 0.0])),
                            channel)
        assert np.allclose(out.probs, [0.9, 0.1])


class TestComposeChain:
    def test_plain_composition_value(self):
        a = TransitionTensor.from_matrix([[0.9, 0.1], [0.2, 0.8]])
        b = TransitionTensor.from_matrix([[0.7, 0.3], [0.4, 0.6]])
        ab = compose_chain(a, b)
        assert np.allclose(ab.probs, [[0.67, 0.33], [0.46, 0.54]])

    def test_matches_matrix_product_randomized(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n, k, m = rng.integers(2, 5, 3)
            a = TransitionTensor.from_matrix(rng.dirichlet(np.ones(k), n))
            b = TransitionTensor.from_matrix(
                rng.dirichlet(np.ones(m), k),
                input_alphabet=a.output_alphabet,
            )
            ab = compose_chain(a, b)
            assert np.allclose(ab.probs, a.probs @ b.probs, atol=1e-12)

    def test_support_propagates_through_reach(self):
        a = TransitionTensor.from_matrix([[1.0, 0.0], [0.5, 0.5]])
        b = TransitionTensor.from_matrix(
            [[0.7, 0.3], [0.0, 0.0]], support=np.array([True, False])
        )
        ab = compose_chain(a, b)
        # Row 0 of a only reaches the supported row of b; row 1 reaches both.
        assert ab.support.tolist() == [True, False]

    def test_shared_condition_layout(self):
        rng = np.random.default_rng(2)
        a = TransitionTensor(
            (binary_alphabet(), binary_alphabet()), binary_alphabet(),
            rng.dirichlet(np.ones(2), (2, 2)),
        )
        b = TransitionTensor(
            (binary_alphabet(), binary_alphabet()), binary_alphabet(),
            rng.dirichlet(np.ones(2), (2, 2)),
        )
        ab = compose_chain(a, b)
        for h in range(2):
            assert np.allclose(ab.probs[h], a.probs[h] @ b.probs[h])

    def test_alphabet_mismatch_raises(self):
        a = TransitionTensor.from_matrix([[0.9, 0.1], [0.2, 0.8]])
        b = TransitionTensor.from_matrix(
            [[0.7, 0.3]], input_alphabet=Alphabet(("q",))
        )
        with pytest.raises(DimensionMismatch):
            compose_chain(a, b)


class TestDagger:
    def test_bayes_consistency_randomized(self):
        # p(j|i) p(i) must equal p(i|j) p(j) cell by cell.
        rng = np.random.default_rng(3)
        for _ in range(50):
            n, m = rng.integers(2, 5, 2)
            rows = rng.dirichlet(np.ones(m), n) + 1e-6
            channel = TransitionTensor.from_matrix(
                rows / rows.sum(axis=1, keepdims=True)
            )
            inp = Pmf(channel.condition_alphabets[0],
                      rng.dirichlet(np.ones(n)))
            rev = dagger(channel, inp)
            p_out = inp.probs @ channel.probs
            joint_fwd = inp.probs[:, None] * channel.probs
            joint_rev = p_out[:, None] * rev.probs
            assert np.allclose(joint_fwd, joint_rev.T, atol=1e-12)

    def test_involution(self):
        rng = np.random.default_rng(4)
        rows = rng.dirichlet(np.ones(3), 3) + 1e-6
        channel = TransitionTensor.from_matrix(
            rows / rows.sum(axis=1, keepdims=True)
        )
        inp = Pmf(channel.condition_alphabets[0], rng.dirichlet(np.ones(3)))
        rev = dagger(channel, inp)
        p_out = Pmf(channel.output_alphabet, inp.probs @ channel.probs)
        back = dagger(rev, p_out)
        assert np.allclose(back.probs, channel.probs, atol=1e-12)

    def test_unreached_output_marked_unsupported(self):
        channel = TransitionTensor.from_matrix([[1.0, 0.0], [1.0, 0.0]])
        rev = dagger(channel, Pmf(binary_alphabet(), np.array([0.5, 0.5])))
        assert rev.support.tolist() == [True, False]

    def test_zero_mass_input_row_dropped_from_reversal(self):
        channel = TransitionTensor.from_matrix([[0.9, 0.1], [0.2, 0.8]])
        rev = dagger(channel, Pmf(binary_alphabet(), np.array([1.0, 0.0])))
        assert np.allclose(rev.probs[:, 0], [1.0, 1.0])
